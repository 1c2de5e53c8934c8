#include "homechain/flows/actors.hpp"

#include "homechain/core/tx.hpp"
#include "homechain/sim/world.hpp"

namespace homechain {

namespace {

// Framing overhead per retrieved storage block: length prefix plus hash.
constexpr std::size_t kEntryOverhead = 36;
// Fixed header bytes of a storage request: account, block number, hash.
constexpr std::size_t kPointerBytes = 100;

}  // namespace

StorageActor::StorageActor(World& w, std::string name, StorageKind kind, std::size_t hops,
                           std::size_t capacity)
    : w_(w),
      name_(std::move(name)),
      node_(w.provider(), w.fork_rng(name_), name_, kind, capacity) {
    w_.topology().add_storage(name_, hops);
}

SpActor::SpActor(World& w, std::size_t index, std::string name, std::size_t cluster)
    : w_(w),
      index_(index),
      name_(std::move(name)),
      cluster_(cluster),
      rng_(w.fork_rng(name_)),
      keys_(w.provider().generate_keypair(rng_, name_)) {
    w_.topology().add_endpoint(name_, cluster_);
}

void SpActor::start_access(FlowTrace& flow, HomeActor& target, const std::string& device,
                           const std::string& scope) {
    Transaction tx;
    tx.kind = TxKind::access;
    tx.device = device;
    tx.scope = scope == "window" ? AccessScope::window : AccessScope::full_chain;
    tx.timestamp = w_.loop().now();
    tx.payload_refs.push_back(RandomId{rng_.token(128)});
    append_signature(w_.provider(), tx, keys_.priv);
    send_request(flow, target, std::move(tx), scope, 1);
}

void SpActor::start_monitor(FlowTrace& flow, HomeActor& target, const std::string& device,
                            std::uint64_t ticks) {
    Transaction tx;
    tx.kind = TxKind::monitor;
    tx.device = device;
    tx.timestamp = w_.loop().now();
    tx.payload_refs.push_back(RandomId{rng_.token(128)});
    append_signature(w_.provider(), tx, keys_.priv);
    send_request(flow, target, std::move(tx), "monitor", ticks);
}

void SpActor::send_request(FlowTrace& flow, HomeActor& target, Transaction tx,
                           const std::string& scope, std::uint64_t monitor_ticks) {
    auto ctx = std::make_shared<RequestCtx>();
    ctx->flow = &flow;
    ctx->env = Envelope{OverlayMsgTag::multisig, target.name(), std::move(tx)};
    ctx->requester = keys_.pub;
    ctx->requester_key = keys_.priv;
    ctx->sp = index_;
    ctx->origin = name_;
    ctx->scope = scope;
    ctx->monitor_ticks = monitor_ticks;

    ChActor& ingress = w_.cluster_head(cluster_);
    const std::string msg =
        ctx->env.tx.kind == TxKind::monitor ? "monitor_request" : "access_request";
    const std::size_t bytes = encode_envelope(ctx->env).size();
    const std::uint64_t arrival = w_.loop().now() + w_.net().arrival_delay(name_, ingress.node(), bytes);

    const std::size_t home_index = target.index();
    const std::string dev = *ctx->env.tx.device;
    w_.arm_starvation_watchdog(ctx, cluster_, arrival,
                               [this, &flow, home_index, dev, scope, monitor_ticks] {
                                   // Fresh request (new nonce) through the freshly
                                   // elected head; the old one may be anywhere.
                                   if (scope == "monitor")
                                       start_monitor(flow, w_.home(home_index), dev, monitor_ticks);
                                   else
                                       start_access(flow, w_.home(home_index), dev, scope);
                               });
    w_.net().send(flow, name_, ingress.node(), msg, bytes,
                  [ing = &ingress, ctx] { ing->ingest_multisig(ctx, {}); });
}

void SpActor::on_denied(std::shared_ptr<RequestCtx> ctx) {
    w_.finish_flow(*ctx->flow, "denied");
}

void SpActor::on_grant(std::shared_ptr<RequestCtx> ctx, GrantInfo grant) {
    last_grant_ = grant;
    // Fetch the whole chain straight from storage, head pair first.
    StorageActor* store = w_.shared_storage() && grant.storage == w_.shared_storage()->name()
                              ? w_.shared_storage()
                              : w_.cloud();
    if (store == nullptr) {
        w_.finish_flow(*ctx->flow, "rejected(unknown-storage)");
        return;
    }
    FlowTrace& flow = *ctx->flow;
    w_.net().send(flow, name_, store->name(), "chain_fetch", kPointerBytes,
                  [this, ctx, store, grant] {
                      auto got = store->node().retrieve_chain(grant.account,
                                                              grant.first_block_number,
                                                              grant.first_hash);
                      if (!got.ok()) {
                          w_.finish_flow(*ctx->flow, "rejected(storage_auth)");
                          return;
                      }
                      std::size_t bytes = 0;
                      for (const auto& r : got.value()) bytes += r.data.size() + kEntryOverhead;
                      w_.bump("chain_fetch_blocks", got.value().size());
                      w_.net().send(*ctx->flow, store->name(), name_, "chain_data", bytes,
                                    [this, ctx] { w_.finish_flow(*ctx->flow, "ok"); });
                  });
}

void SpActor::on_data(std::shared_ptr<RequestCtx> ctx, std::size_t bytes, bool final_part) {
    (void)bytes;
    ++data_parts_;
    if (final_part) w_.finish_flow(*ctx->flow, "ok");
}

void SpActor::replay_grant_store(FlowTrace& flow, std::size_t data_bytes) {
    if (!last_grant_) {
        w_.finish_flow(flow, "rejected(no-grant)");
        return;
    }
    const GrantInfo g = *last_grant_;
    StorageActor* store = w_.shared_storage() && g.storage == w_.shared_storage()->name()
                              ? w_.shared_storage()
                              : w_.cloud();
    if (store == nullptr) {
        w_.finish_flow(flow, "rejected(unknown-storage)");
        return;
    }
    Bytes data = rng_.bytes(data_bytes);
    w_.net().send(flow, name_, store->name(), "store_upload", data_bytes + kPointerBytes,
                  [this, &flow, store, g, data = std::move(data)] {
                      auto receipt = store->node().store(RandomId{rng_.token(128)}, g.account,
                                                         g.last_block_number, g.last_hash, data,
                                                         std::nullopt, w_.loop().now());
                      if (receipt.ok()) {
                          w_.bump("fake_chain_accepted");
                          w_.finish_flow(flow, "ok");
                          return;
                      }
                      w_.bump("fake_chain_rejected");
                      w_.net().send(flow, store->name(), name_, "store_refusal", 64,
                                    [this, &flow, why = receipt.why()] {
                                        w_.finish_flow(flow, "rejected(" +
                                                                 std::string(to_string(why)) + ")");
                                    });
                  });
}

}  // namespace homechain
