#include <algorithm>

#include "homechain/flows/actors.hpp"
#include "homechain/sim/world.hpp"

namespace homechain {

namespace {

// One in-flight announce round. `outstanding` counts undelivered messages;
// the trace closes when it drains.
struct MiningRound {
    FlowTrace* flow = nullptr;
    Block block;
    Transaction attest;  // slot 0 signed by the miner at announce time
    DataHash content;
    std::size_t outstanding = 0;
    bool sealed = false;
};

}  // namespace

ChActor::ChActor(World& w, std::size_t cluster)
    : w_(w), cluster_(cluster), rng_(w.fork_rng("cluster" + std::to_string(cluster) + ".head")) {
    DetRng scores = w_.fork_rng("cluster" + std::to_string(cluster) + ".scores");
    const std::size_t n = std::max<std::size_t>(std::size_t{1}, w_.params().nodes_per_cluster);
    for (std::size_t i = 0; i < n; ++i) {
        NodeInfo info;
        info.id = "n" + std::to_string(cluster) + "." + std::to_string(i);
        info.score = 1.0 + static_cast<double>(scores.bounded(9000)) / 1000.0;
        nodes_.push_back(std::move(info));
    }
    elect();
}

bool ChActor::elect() {
    std::vector<MemberInfo> members;
    members.reserve(nodes_.size());
    for (const NodeInfo& n : nodes_)
        members.push_back(MemberInfo{n.id, n.score, n.accused || accused_.contains(n.id)});
    auto won = reelect_ch(members);
    if (!won.ok()) {
        alive_ = false;
        return false;
    }
    node_ = won.take();
    OverlayConfig cfg = w_.params().overlay;
    cfg.block_threshold = w_.params().txs_per_block;
    ch_ = std::make_unique<ClusterHead>(w_.provider(), w_.fork_rng(node_ + ".ch"), node_, cfg);
    w_.topology().set_ch(cluster_, node_);
    alive_ = true;
    mining_ = false;
    elected_tick_ = w_.loop().now();
    pending_bodies_.clear();
    cosigned_.clear();
    return true;
}

void ChActor::ingest_multisig(std::shared_ptr<RequestCtx> ctx, std::vector<std::size_t> path) {
    if (!alive_) return;  // the requester's watchdog recovers the flow
    const auto route = ch_->route_multisig(ctx->env);
    using K = ClusterHead::Route::Kind;
    switch (route.kind) {
        case K::dropped_blocked:
            w_.bump("multisig_dropped_blocked");
            w_.finish_flow(*ctx->flow, "rejected(blocked)");
            return;
        case K::dropped_duplicate:
            w_.bump("multisig_dropped_duplicate");
            return;
        case K::delivered:
            if (ch_->has_member(ctx->env.target_home)) {
                HomeActor* home = w_.home_by_name(ctx->env.target_home);
                if (home == nullptr) {
                    w_.finish_flow(*ctx->flow, "rejected(unknown-home)");
                    return;
                }
                path.push_back(cluster_);
                ctx->path = std::move(path);
                const std::string msg =
                    ctx->env.tx.kind == TxKind::monitor ? "monitor_request" : "access_request";
                const std::size_t bytes = encode_envelope(ctx->env).size();
                w_.net().send(*ctx->flow, node_, home->name(), msg, bytes,
                              [home, ctx] { home->handle_request(ctx); });
                return;
            }
            // Known requester but foreign home: pass it on like any transit.
            [[fallthrough]];
        case K::forwarded:
            path.push_back(cluster_);
            w_.bump("multisig_forwarded");
            w_.flood_multisig(ctx, cluster_, std::move(path));
            return;
    }
}

void ChActor::ingest_attestation(FlowTrace& flow, Envelope env) {
    if (!alive_) return;
    const auto route = ch_->route_attestation(env);
    using K = ClusterHead::Route::Kind;
    if (route.kind == K::dropped_duplicate) return;
    if (route.kind == K::delivered) {
        flow.comp_ops += 1;
        if (ch_->enqueue_tx(env.tx).ok()) {
            w_.bump("overlay_txs");
            maybe_mine();
        } else {
            w_.bump("attestations_rejected");
        }
        return;
    }
    // Not a member here; hand it to the head of the home's current cluster.
    HomeActor* home = w_.home_by_name(env.target_home);
    if (home == nullptr) {
        w_.bump("attestations_dropped");
        return;
    }
    ChActor& target = w_.cluster_head(home->cluster());
    if (!target.alive() || target.cluster() == cluster_) {
        w_.bump("attestations_dropped");
        return;
    }
    const std::size_t bytes = encode_envelope(env).size();
    w_.net().send(flow, node_, target.node(), "signed_hash", bytes,
                  [&target, &flow, env = std::move(env)] {
                      target.ingest_attestation(flow, env);
                  });
}

void ChActor::ingest_proof(FlowTrace& flow, Transaction tx) {
    if (!alive_) return;
    flow.comp_ops += 1;
    if (ch_->enqueue_tx(tx).ok()) {
        w_.bump("proofs_stored");
        maybe_mine();
    } else {
        w_.bump("proofs_rejected");
    }
}

void ChActor::ingest_breach_report(FlowTrace& flow, Transaction report,
                                   std::string storage_name) {
    if (!alive_) return;
    flow.comp_ops += 1;
    if (report.payload_refs.size() != 2 || !report.data_hash ||
        !validate_tx_signatures(w_.provider(), report).ok()) {
        w_.bump("breach_reports_rejected");
        return;
    }
    const Transaction* attest = ch_->find_proof(report.payload_refs.front());
    if (attest == nullptr) {
        // Never saw the store-time attestation: nothing to compare against.
        w_.bump("breach_unverifiable");
        return;
    }
    if (attest->data_hash && *attest->data_hash == *report.data_hash) {
        // Storage still serves what it once attested; the report accuses nobody.
        w_.bump("breach_reports_rejected");
        return;
    }
    if (flagged_storages.insert(storage_name).second) w_.bump("breach_flagged_chs");
    w_.bump("breach_reports_accepted");
}

void ChActor::maybe_mine() {
    if (!alive_ || mining_ || !ch_->block_ready()) return;
    std::size_t cosigner = SIZE_MAX;
    for (std::size_t step = 1; step < w_.cluster_count(); ++step) {
        const std::size_t c = (cluster_ + step) % w_.cluster_count();
        if (w_.cluster_head(c).alive()) {
            cosigner = c;
            break;
        }
    }
    if (cosigner == SIZE_MAX) return;  // no second head: blocks wait
    auto built = ch_->build_block();
    if (!built.ok()) return;
    mining_ = true;
    FlowTrace& flow = w_.new_flow("mining");
    announce(flow, built.take(), cosigner);
}

void ChActor::mine_forged(FlowTrace& flow, std::size_t forged, std::size_t honest,
                          std::size_t cosigner_cluster) {
    if (!alive_) {
        w_.finish_flow(flow, "rejected(no-head)");
        return;
    }
    DetRng forge = w_.fork_rng(node_ + ".forge." + std::to_string(w_.loop().now()));
    KeyPair scratch = w_.provider().generate_keypair(forge, "");
    for (std::size_t i = 0; i < honest + forged; ++i) {
        Transaction tx;
        tx.kind = TxKind::store;
        tx.device = "ghost";
        tx.block_number = forge.bytes(16);
        Bytes payload = forge.bytes(32);
        tx.data_hash = w_.provider().hash_bytes(ByteView(payload.data(), payload.size()));
        tx.timestamp = w_.loop().now();
        append_signature(w_.provider(), tx, scratch.priv);
        if (i < forged) {
            // Flip the hash after signing: shape intact, signature dead.
            Bytes other = forge.bytes(32);
            tx.data_hash = w_.provider().hash_bytes(ByteView(other.data(), other.size()));
        }
        ch_->enqueue_unchecked(tx);
    }
    auto built = ch_->build_block();
    if (!built.ok()) {
        w_.finish_flow(flow, "rejected(" + std::string(to_string(built.why())) + ")");
        return;
    }
    mining_ = true;
    w_.bump("forged_blocks_announced");
    announce(flow, built.take(), cosigner_cluster % w_.cluster_count());
}

void ChActor::announce(FlowTrace& flow, Block block, std::size_t cosigner) {
    auto round = std::make_shared<MiningRound>();
    round->flow = &flow;
    round->content = block_content_hash(w_.provider(), block);
    round->block = std::move(block);
    round->attest = ch_->make_block_attest(round->block);

    auto close_round = [this, round] {
        w_.finish_flow(*round->flow, round->sealed ? "ok" : "rejected(cosign_refused)");
        mining_ = false;
        maybe_mine();
    };
    // Every leg of the round runs through this wrapper, so the trace closes
    // exactly when the last delivery lands; a refused or silent cosigner
    // still drains the counter.
    auto track = [this, round, close_round](const std::string& to, const std::string& msg,
                                            std::size_t bytes, std::function<void()> work) {
        ++round->outstanding;
        w_.net().send(*round->flow, node_, to, msg, bytes,
                      [round, close_round, work = std::move(work)] {
                          work();
                          if (--round->outstanding == 0) close_round();
                      });
    };

    const std::size_t body_bytes = block_bytes(round->block).size();
    const std::size_t attest_bytes = full_bytes(round->attest).size();

    // Round one: the body reaches every head; the cosigner is asked once its
    // copy has fully landed, and its reply is a tracked leg of its own.
    for (std::size_t c = 0; c < w_.cluster_count(); ++c) {
        if (c == cluster_ || c == cosigner) continue;
        ChActor* peer = &w_.cluster_head(c);
        if (!peer->alive()) continue;
        track(peer->node(), "block_announce", body_bytes,
              [peer, round] { peer->ingest_block_body(round->content, round->block); });
    }

    ChActor* co = &w_.cluster_head(cosigner);
    track(co->node(), "block_announce", body_bytes,
          [this, co, round, track, close_round, attest_bytes] {
        co->ingest_block_body(round->content, round->block);
        track(co->node(), "cosign_request", attest_bytes,
              [this, co, round, track, close_round] {
            ++round->outstanding;  // the reply leg, decremented in on_reply
            co->ingest_cosign_request(
                *round->flow, round->content, round->attest, cluster_,
                [this, round, track, close_round](bool ok, Transaction sealed) {
                    if (ok) {
                        round->sealed = true;
                        Block own = round->block;
                        own.trust_multisig = sealed;
                        ch_->adopt_own_block(std::move(own));
                        ++blocks_mined_;
                        w_.bump("overlay_blocks_mined");
                        const std::size_t seal_bytes = full_bytes(sealed).size();
                        for (std::size_t c = 0; c < w_.cluster_count(); ++c) {
                            if (c == cluster_) continue;
                            ChActor* peer = &w_.cluster_head(c);
                            if (!peer->alive()) continue;
                            track(peer->node(), "block_seal", seal_bytes,
                                  [peer, round, sealed] {
                                      peer->ingest_block_seal(*round->flow, round->content,
                                                              sealed);
                                  });
                        }
                    } else {
                        w_.bump("blocks_refused");
                    }
                    if (--round->outstanding == 0) close_round();
                });
        });
    });
}

void ChActor::ingest_block_body(const DataHash& content, Block body) {
    if (!alive_) return;
    pending_bodies_[content.hex()] = std::move(body);
}

void ChActor::ingest_cosign_request(FlowTrace& flow, const DataHash& content, Transaction attest,
                                    std::size_t from_cluster,
                                    std::function<void(bool, Transaction)> on_reply) {
    if (!alive_) {
        // The miner's timeout, collapsed to the arrival tick.
        on_reply(false, Transaction{});
        return;
    }
    ChActor& miner = w_.cluster_head(from_cluster);
    const auto it = pending_bodies_.find(content.hex());
    bool ok = false;
    if (it != pending_bodies_.end()) {
        if (skip_verify) {
            ok = true;
            w_.bump("blind_cosigns");
        } else {
            const Block& body = it->second;
            const double f = ch_->trust().verification_fraction(body.miner.id, {});
            const VerifyOutcome out = verify_block_sampled(w_.provider(), body, f, rng_);
            flow.comp_ops += out.sampled;
            ok = out.pass;
            ch_->trust().update_evidence(body.miner.id, ok ? Outcome::pos : Outcome::neg,
                                         Channel::direct);
        }
    }
    if (!ok) {
        pending_bodies_.erase(content.hex());
        w_.bump("cosign_refusals");
        w_.net().send(flow, node_, miner.node(), "cosign_refusal", 64,
                      [on_reply = std::move(on_reply)] { on_reply(false, Transaction{}); });
        return;
    }
    cosigned_.insert(content.hex());
    ch_->cosign_attest(attest);
    const std::size_t bytes = full_bytes(attest).size();
    w_.net().send(flow, node_, miner.node(), "cosign_ack", bytes,
                  [attest = std::move(attest), on_reply = std::move(on_reply)] {
                      on_reply(true, attest);
                  });
}

void ChActor::ingest_block_seal(FlowTrace& flow, const DataHash& content,
                                const Transaction& attest) {
    if (!alive_) return;
    const auto it = pending_bodies_.find(content.hex());
    if (it == pending_bodies_.end()) {
        w_.bump("seals_unmatched");
        return;
    }
    Block full = std::move(it->second);
    pending_bodies_.erase(it);
    full.trust_multisig = attest;

    if (cosigned_.erase(content.hex()) > 0) {
        // This head vouched for the block already; keep it as signed.
        ch_->adopt_own_block(std::move(full));
        w_.bump("blocks_kept");
        return;
    }
    const auto got = ch_->receive_block(full);
    flow.comp_ops += got.verify.sampled;
    using K = ClusterHead::Receive::Kind;
    switch (got.kind) {
        case K::kept:
            w_.bump("blocks_kept");
            return;
        case K::discarded_uninvolved:
            w_.bump("blocks_uninvolved");
            return;
        case K::discarded_invalid:
            w_.bump("blocks_invalid");
            alarm_peers(flow, full);
            return;
    }
}

void ChActor::alarm_peers(FlowTrace& flow, const Block& block) {
    w_.bump("alarms_raised");
    const std::size_t bytes = block_bytes(block).size() + 64;
    for (std::size_t c = 0; c < w_.cluster_count(); ++c) {
        if (c == cluster_) continue;
        ChActor* peer = &w_.cluster_head(c);
        if (!peer->alive()) continue;
        w_.net().send(flow, node_, peer->node(), "alarm", bytes,
                      [peer, &flow, block, me = node_] {
                          peer->ingest_alarm(flow, me, block);
                      });
    }
}

void ChActor::ingest_alarm(FlowTrace& flow, const std::string& accuser, const Block& block) {
    if (!alive_) return;
    flow.comp_ops += block.txs.size();
    const auto out = ch_->handle_alarm(accuser, block);
    if (!out.processed) return;
    w_.bump(out.confirmed ? "alarms_confirmed" : "alarms_false");
}

}  // namespace homechain
