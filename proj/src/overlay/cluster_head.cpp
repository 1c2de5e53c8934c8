#include "homechain/overlay/cluster_head.hpp"

#include <algorithm>

namespace homechain {

Bytes encode_envelope(const Envelope& env) {
    Bytes out;
    put_u8(out, static_cast<std::uint8_t>(env.tag));
    put_str(out, env.target_home);
    put_blob(out, full_bytes(env.tx));
    return out;
}

std::optional<Envelope> decode_envelope(ByteView data) {
    ByteReader r(data);
    const auto tag = r.u8();
    if (!tag || *tag < 1 || *tag > 5) return std::nullopt;
    auto target = r.str();
    auto blob = r.blob();
    if (!target || !blob || !r.done()) return std::nullopt;
    auto tx = transaction_from_full_bytes(ByteView(blob->data(), blob->size()));
    if (!tx) return std::nullopt;
    Envelope env;
    env.tag = static_cast<OverlayMsgTag>(*tag);
    env.target_home = std::move(*target);
    env.tx = std::move(*tx);
    return env;
}

DataHash block_content_hash(const CryptoProvider& p, const Block& block) {
    Block stripped = block;
    stripped.trust_multisig.reset();
    const Bytes raw = block_bytes(stripped);
    return p.hash_bytes(ByteView(raw.data(), raw.size()));
}

namespace {

// Multisig shape and signatures, without touching the block's transactions.
bool attest_valid(const CryptoProvider& p, const Block& block) {
    if (!block.trust_multisig) return false;
    const Transaction& att = *block.trust_multisig;
    if (att.kind != TxKind::signed_hash) return false;
    if (att.signatures.size() < 2) return false;
    if (att.signatures.front().signer.id != block.miner.id) return false;
    if (!att.data_hash || *att.data_hash != block_content_hash(p, block)) return false;
    return validate_tx_signatures(p, att).ok();
}

std::vector<std::string> attest_cosigners(const Block& block) {
    std::vector<std::string> out;
    if (!block.trust_multisig) return out;
    const auto& sigs = block.trust_multisig->signatures;
    for (std::size_t i = 1; i < sigs.size(); ++i) out.push_back(sigs[i].signer.id);
    return out;
}

}  // namespace

bool overlay_block_valid(const CryptoProvider& p, const Block& block,
                         std::vector<std::string>* failed) {
    if (!attest_valid(p, block)) return false;
    bool ok = true;
    for (const Transaction& tx : block.txs) {
        if (!validate_tx_signatures(p, tx).ok()) {
            ok = false;
            if (failed != nullptr) failed->push_back(tx_id(p, tx).value);
        }
    }
    if (failed != nullptr) std::sort(failed->begin(), failed->end());
    return ok;
}

ClusterHead::ClusterHead(CryptoProvider& provider, DetRng rng, std::string_view id,
                         OverlayConfig cfg)
    : provider_(provider),
      rng_(rng),
      id_(id),
      cfg_(cfg),
      keys_(provider.generate_keypair(rng_, std::string(id) + "-ch")) {}

void ClusterHead::add_member(const std::string& home, const PublicKey& miner_pk,
                             bool accessible) {
    const auto it = members_.find(home);
    if (it != members_.end()) requestee_pks_.erase(it->second.id);
    members_[home] = miner_pk;
    if (accessible) {
        requestee_pks_.insert(miner_pk.id);
    } else {
        requestee_pks_.erase(miner_pk.id);
    }
}

void ClusterHead::remove_member(const std::string& home) {
    const auto it = members_.find(home);
    if (it == members_.end()) return;
    requestee_pks_.erase(it->second.id);
    members_.erase(it);
}

ClusterHead::Route ClusterHead::route_multisig(const Envelope& env) {
    const std::string requester =
        env.tx.signatures.empty() ? std::string{} : env.tx.signatures.front().signer.id;
    if (blocked_pks_.contains(requester)) {
        ++dropped_blocked_;
        return {Route::Kind::dropped_blocked};
    }
    const std::string txid = tx_id(provider_, env.tx).value;
    if (!seen_tx_ids_.insert(txid).second) return {Route::Kind::dropped_duplicate};

    const auto member = members_.find(env.target_home);
    const bool accessible_here =
        member != members_.end() && requestee_pks_.contains(member->second.id);
    if (requester_pks_.contains(requester) || accessible_here) {
        return {Route::Kind::delivered};
    }
    forward_list_.emplace_back(txid, requester);
    if (forward_list_.size() > cfg_.forward_cap) forward_list_.erase(forward_list_.begin());
    ++forwarded_;
    return {Route::Kind::forwarded};
}

ClusterHead::Route ClusterHead::route_attestation(const Envelope& env) {
    const std::string txid = tx_id(provider_, env.tx).value;
    if (!seen_tx_ids_.insert(txid).second) return {Route::Kind::dropped_duplicate};
    if (members_.contains(env.target_home)) return {Route::Kind::delivered};
    ++forwarded_;
    return {Route::Kind::forwarded};
}

bool ClusterHead::register_access_failure(const PublicKey& pk, std::uint64_t now_tick) {
    const std::uint64_t epoch = now_tick / cfg_.epoch_ticks;
    if (epoch != fail_epoch_) {
        fail_counts_.clear();
        fail_epoch_ = epoch;
    }
    if (blocked_pks_.contains(pk.id)) return false;
    const std::size_t count = ++fail_counts_[pk.id];
    if (count >= cfg_.fail_threshold) {
        blocked_pks_.insert(pk.id);
        return true;
    }
    return false;
}

Status ClusterHead::enqueue_tx(const Transaction& tx) {
    if (const Status s = validate_tx_signatures(provider_, tx); !s.ok()) return s;
    enqueue_unchecked(tx);
    return Status::success();
}

void ClusterHead::enqueue_unchecked(const Transaction& tx) {
    proofs_[tx_id(provider_, tx).value] = tx;
    pending_.push_back(tx);
}

Result<Block> ClusterHead::build_block() {
    using R = Result<Block>;
    if (pending_.empty()) return R::err(Reject::nothing_pending, id_);
    Block block;
    block.prev_block = chain_order_.empty() ? DataHash{} : chain_order_.back();
    block.txs = std::move(pending_);
    pending_.clear();
    block.miner = keys_.pub;
    return R::ok(std::move(block));
}

Transaction ClusterHead::make_block_attest(const Block& block) const {
    Transaction att;
    att.kind = TxKind::signed_hash;
    att.data_hash = block_content_hash(provider_, block);
    append_signature(provider_, att, keys_.priv);
    return att;
}

void ClusterHead::cosign_attest(Transaction& attest) const {
    append_signature(provider_, attest, keys_.priv);
}

void ClusterHead::adopt_own_block(Block block) { keep(std::move(block)); }

void ClusterHead::keep(Block block) {
    const DataHash content = block_content_hash(provider_, block);
    for (const Transaction& tx : block.txs) proofs_[tx_id(provider_, tx).value] = tx;
    if (chain_.emplace(content.hex(), std::move(block)).second) {
        chain_order_.push_back(content);
    }
}

bool ClusterHead::involved(const Block& block) const {
    for (const Transaction& tx : block.txs) {
        const std::string txid = tx_id(provider_, tx).value;
        for (const auto& [fwd_id, _] : forward_list_) {
            if (fwd_id == txid) return true;
        }
        for (std::size_t slot = 0; slot < tx.signatures.size(); ++slot) {
            const std::string& signer = tx.signatures[slot].signer.id;
            if (slot == 0 && requester_pks_.contains(signer)) return true;
            if (slot > 0 && requestee_pks_.contains(signer)) return true;
            for (const auto& [_, pk] : members_) {
                if (pk.id == signer) return true;
            }
        }
    }
    return false;
}

ClusterHead::Receive ClusterHead::receive_block(const Block& block) {
    const DataHash content = block_content_hash(provider_, block);
    if (chain_.contains(content.hex())) return {Receive::Kind::kept, {}};

    const std::string miner = block.miner.id;
    const std::vector<std::string> cosigners = attest_cosigners(block);

    if (!attest_valid(provider_, block)) {
        trust_.update_evidence(miner, Outcome::neg, Channel::direct);
        alarms_seen_.insert(content.hex());
        VerifyOutcome bad;
        bad.pass = false;
        return {Receive::Kind::discarded_invalid, std::move(bad)};
    }

    const double f = trust_.verification_fraction(miner, cosigners);
    VerifyOutcome out = verify_block_sampled(provider_, block, f, rng_);
    if (!out.pass) {
        trust_.update_evidence(miner, Outcome::neg, Channel::direct);
        for (const std::string& c : cosigners) {
            trust_.update_evidence(c, Outcome::neg, Channel::direct);
        }
        alarms_seen_.insert(content.hex());
        return {Receive::Kind::discarded_invalid, std::move(out)};
    }

    trust_.update_evidence(miner, Outcome::pos, Channel::direct);
    if (!involved(block)) return {Receive::Kind::discarded_uninvolved, std::move(out)};
    keep(block);
    return {Receive::Kind::kept, std::move(out)};
}

ClusterHead::AlarmOutcome ClusterHead::handle_alarm(const std::string& accuser_ch,
                                                    const Block& accused) {
    const DataHash content = block_content_hash(provider_, accused);
    if (!alarms_seen_.insert(content.hex()).second) return {false, false};

    std::vector<std::string> failed;
    if (overlay_block_valid(provider_, accused, &failed)) {
        // False alarm: the accuser loses standing, the block stays.
        trust_.update_evidence(accuser_ch, Outcome::neg, Channel::direct);
        return {true, false};
    }
    trust_.update_evidence(accused.miner.id, Outcome::neg, Channel::direct);
    for (const std::string& c : attest_cosigners(accused)) {
        trust_.update_evidence(c, Outcome::neg, Channel::direct);
    }
    if (chain_.erase(content.hex()) > 0) {
        std::erase(chain_order_, content);
    }
    return {true, true};
}

const Block* ClusterHead::find_block(const DataHash& h) const {
    const auto it = chain_.find(h.hex());
    return it == chain_.end() ? nullptr : &it->second;
}

const Transaction* ClusterHead::find_proof(const RandomId& txid) const {
    const auto it = proofs_.find(txid.value);
    return it == proofs_.end() ? nullptr : &it->second;
}

Result<std::string> reelect_ch(const std::vector<MemberInfo>& members) {
    using R = Result<std::string>;
    std::vector<const MemberInfo*> candidates;
    for (const MemberInfo& m : members) {
        if (!m.accused) candidates.push_back(&m);
    }
    if (candidates.empty()) return R::err(Reject::unrecoverable, "no electable member");

    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const MemberInfo* m : candidates) scores.push_back(m->resource_score);
    std::sort(scores.begin(), scores.end());
    const double median = scores[(scores.size() - 1) / 2];

    const MemberInfo* winner = nullptr;
    for (const MemberInfo* m : candidates) {
        if (m->resource_score < median) continue;
        if (winner == nullptr || m->node_id < winner->node_id) winner = m;
    }
    return R::ok(winner->node_id);
}

}  // namespace homechain
