#include "homechain/core/tx.hpp"
#include "homechain/flows/actors.hpp"
#include "homechain/sim/world.hpp"

namespace homechain {

namespace {

constexpr std::size_t kEntryOverhead = 36;
constexpr std::size_t kPointerBytes = 100;
constexpr std::size_t kStoreHeader = 80;
constexpr std::size_t kPullBytes = 24;
constexpr std::size_t kGrantExtra = 180;  // storage name + account + two pairs

constexpr std::uint8_t kRequesterActions =
    action_bit(Action::access_latest) | action_bit(Action::access_window) |
    action_bit(Action::access_full_chain) | action_bit(Action::monitor);

}  // namespace

HomeActor::HomeActor(World& w, std::size_t index, std::string name, std::size_t cluster)
    : w_(w),
      index_(index),
      name_(std::move(name)),
      cluster_(cluster),
      miner_(w.provider(), w.ids(), w.fork_rng(name_ + ".miner"), name_,
             w.params().txs_per_block),
      local_store_(w.provider(), w.fork_rng(name_ + ".store"), name_ + ".store",
                   StorageKind::local, w.params().storage_capacity),
      rng_(w.fork_rng(name_ + ".rng")) {
    w_.topology().add_endpoint(name_, cluster_);
}

void HomeActor::setup_device(const std::string& dev) {
    auto added = miner_.add_device(miner_.owner_key(), dev, {}, w_.loop().now());
    if (!added.ok()) return;
    DeviceState st;
    st.name = dev;
    devices_[dev] = std::move(st);
    device_order_.push_back(dev);
    w_.topology().add_device(device_node(dev), name_);

    // In-home storage account; co-located, so stores move no packets.
    auto bs = local_store_.bootstrap_account(miner_.owner_pub(), dev);
    DeviceState& d = devices_[dev];
    d.local_account = bs.account_id;
    d.local_key = bs.key;
    d.local_last_bn = bs.first_block_number;
    d.local_last_hash = bs.first_hash;
}

HomeActor::DeviceState& HomeActor::device(const std::string& dev) { return devices_.at(dev); }

void HomeActor::bootstrap_cloud(StorageActor& s) {
    for (const auto& dev : device_order_) {
        DeviceState& d = devices_[dev];
        auto bs = s.node().bootstrap_account(miner_.owner_pub(), dev);
        d.account = bs.account_id;
        d.cloud_key = bs.key;
        d.first_bn = bs.first_block_number;
        d.first_hash = bs.first_hash;
        d.last_bn = bs.first_block_number;
        d.last_hash = bs.first_hash;
        miner_.set_storage_handle(dev, StorageHandle{d.account, d.last_bn, d.last_hash});
    }
}

void HomeActor::bootstrap_shared(StorageActor& s) {
    for (const auto& dev : device_order_) {
        DeviceState& d = devices_[dev];
        auto bs = s.node().bootstrap_account(miner_.owner_pub(), name_ + "/" + dev);
        d.shared_account = bs.account_id;
        d.shared_key = bs.key;
        d.shared_last_bn = bs.first_block_number;
        d.shared_last_hash = bs.first_hash;
    }
}

void HomeActor::grant_requester(const PublicKey& pk, const std::string& device) {
    PolicyRule rule;
    rule.subject = pk.id;
    rule.device = device;
    rule.actions = kRequesterActions;
    rule.privacy = PrivacyLevel::full_chain;
    miner_.update_policy(miner_.owner_key(), {rule}, {}, w_.loop().now());
    for (const auto& known : declared_requesters_)
        if (known.id == pk.id) return;
    declared_requesters_.push_back(pk);
}

void HomeActor::redeclare(ClusterHead& ch) {
    ch.add_member(name_, miner_pub(), true);
    for (const auto& pk : declared_requesters_) ch.allow_requester(pk);
}

void HomeActor::prefill(std::size_t blocks, std::size_t txs, StorageActor* cloud) {
    if (blocks == 0 || device_order_.empty() || cloud == nullptr) return;
    const std::string& dev = device_order_.front();
    DeviceState& d = devices_[dev];
    for (std::size_t i = 0; i < blocks * txs; ++i) {
        Bytes data = rng_.bytes(w_.params().data_bytes);
        const DataHash claimed =
            w_.provider().hash_bytes(ByteView(data.data(), data.size()));
        auto stored = cloud->node().store(RandomId{rng_.token(128)}, d.account, d.last_bn,
                                          d.last_hash, data, claimed, w_.loop().now());
        if (!stored.ok()) break;
        auto bn = decrypt_block_number(w_.provider(), d.cloud_key,
                                       ByteView(stored.value().encrypted_block_number.data(),
                                                stored.value().encrypted_block_number.size()));
        if (!bn) break;

        Transaction tx;
        tx.kind = TxKind::store;
        tx.device = dev;
        tx.prev_tx = miner_.latest_tx(dev);
        tx.block_number = stored.value().encrypted_block_number;
        tx.data_hash = claimed;
        tx.timestamp = w_.loop().now();
        append_signature(w_.provider(), tx, miner_.miner_key());
        if (!miner_.append_tx(tx, Action::store_cloud).ok()) break;

        d.last_bn = *bn;
        d.last_hash = claimed;
        d.stored = true;
        d.last_store_tx = tx_id(w_.provider(), tx);
        miner_.set_storage_handle(dev, StorageHandle{d.account, d.last_bn, d.last_hash});
        maybe_mine_local();
    }
    // Bootstrap state only: prefilled attestations are not replayed into the
    // overlay, so the run starts with quiet cluster heads.
    while (miner_.pending_count() >= miner_.mine_threshold()) maybe_mine_local();
}

void HomeActor::maybe_mine_local() {
    while (miner_.pending_count() >= miner_.mine_threshold()) {
        if (!miner_.mine_block().ok()) break;
        w_.bump("local_blocks_mined");
    }
}

void HomeActor::finish_flow_measured(FlowTrace& flow, const std::string& outcome) {
    last_delay_per_hop_ = w_.topology().cluster_delay(cluster_);
    w_.finish_flow(flow, outcome);
    w_.maybe_auto_move(*this);
}

void HomeActor::start_store(FlowTrace& flow, const std::string& dev, const std::string& target) {
    if (!devices_.count(dev)) {
        w_.finish_flow(flow, "rejected(unknown_device)");
        return;
    }
    Bytes data = rng_.bytes(w_.params().data_bytes);
    w_.net().send(flow, device_node(dev), name_, "store_request",
                  data.size() + kStoreHeader,
                  [this, &flow, dev, target, data = std::move(data)]() mutable {
                      if (target == "cloud")
                          store_to_cloud(flow, dev, std::move(data));
                      else if (target == "shared")
                          store_to_shared(flow, dev, std::move(data));
                      else
                          store_to_local(flow, dev, std::move(data));
                  });
}

void HomeActor::store_to_cloud(FlowTrace& flow, const std::string& dev, Bytes data) {
    if (!miner_.check_policy(dev, dev, Action::store_cloud).allow) {
        w_.bump("stores_denied");
        finish_flow_measured(flow, "denied");
        return;
    }
    StorageActor* cloud = w_.cloud();
    if (cloud == nullptr) {
        finish_flow_measured(flow, "rejected(unknown-storage)");
        return;
    }
    const DataHash claimed = w_.provider().hash_bytes(ByteView(data.data(), data.size()));
    flow.comp_ops += 1;
    const std::size_t upload_bytes = data.size() + kPointerBytes;
    w_.net().send(flow, name_, cloud->name(), "store_upload", upload_bytes,
                  [this, &flow, dev, cloud, claimed, data = std::move(data)] {
        DeviceState& d = devices_[dev];
        auto stored = cloud->node().store(RandomId{rng_.token(128)}, d.account, d.last_bn,
                                          d.last_hash, data, claimed, w_.loop().now());
        if (!stored.ok()) {
            w_.net().send(flow, cloud->name(), name_, "store_refusal", 64,
                          [this, &flow, why = stored.why()] {
                              finish_flow_measured(flow,
                                                   "rejected(" + std::string(to_string(why)) + ")");
                          });
            return;
        }
        StorageNode::StoreReceipt receipt = stored.take();
        std::size_t receipt_bytes = receipt.encrypted_block_number.size();
        if (receipt.attestation) receipt_bytes += full_bytes(*receipt.attestation).size();
        w_.net().send(flow, cloud->name(), name_, "store_receipt", receipt_bytes,
                      [this, &flow, dev, claimed, receipt = std::move(receipt)] {
            DeviceState& d = devices_[dev];
            auto bn = decrypt_block_number(
                w_.provider(), d.cloud_key,
                ByteView(receipt.encrypted_block_number.data(),
                         receipt.encrypted_block_number.size()));
            if (!bn) {
                finish_flow_measured(flow, "rejected(auth_failed)");
                return;
            }
            Transaction tx;
            tx.kind = TxKind::store;
            tx.device = dev;
            tx.prev_tx = miner_.latest_tx(dev);
            tx.block_number = receipt.encrypted_block_number;
            tx.data_hash = claimed;
            tx.timestamp = w_.loop().now();
            append_signature(w_.provider(), tx, miner_.miner_key());
            const Status appended = miner_.append_tx(tx, Action::store_cloud);
            flow.comp_ops += 2;
            if (!appended.ok()) {
                finish_flow_measured(flow,
                                     "rejected(" + std::string(to_string(appended.why)) + ")");
                return;
            }
            d.last_bn = *bn;
            d.last_hash = claimed;
            d.stored = true;
            d.last_store_tx = tx_id(w_.provider(), tx);
            miner_.set_storage_handle(dev, StorageHandle{d.account, d.last_bn, d.last_hash});
            w_.bump("cloud_stores");

            if (!receipt.attestation) {
                maybe_mine_local();
                finish_flow_measured(flow, "ok");
                return;
            }
            auto accepted = miner_.accept_attestation(*receipt.attestation);
            flow.comp_ops += 2;
            maybe_mine_local();
            if (!accepted.ok()) {
                finish_flow_measured(flow, "rejected(" +
                                               std::string(to_string(accepted.why())) + ")");
                return;
            }
            d.last_attest_tx = tx_id(w_.provider(), accepted.value());
            w_.bump("attestations_accepted");
            send_attestation(flow, accepted.take(),
                             [this, &flow] { finish_flow_measured(flow, "ok"); });
        });
    });
}

void HomeActor::send_attestation(FlowTrace& flow, Transaction att, std::function<void()> done) {
    Envelope env{OverlayMsgTag::signed_hash, name_, std::move(att)};
    ChActor& ch = w_.cluster_head(cluster_);
    const std::size_t bytes = encode_envelope(env).size();
    w_.net().send(flow, name_, ch.node(), "signed_hash", bytes,
                  [this, &flow, env = std::move(env), done = std::move(done)] {
                      w_.cluster_head(cluster_).ingest_attestation(flow, env);
                      done();
                  });
}

void HomeActor::store_to_shared(FlowTrace& flow, const std::string& dev, Bytes data) {
    if (!w_.in_shared_group(index_) || w_.shared_storage() == nullptr) {
        finish_flow_measured(flow, "rejected(unknown-storage)");
        return;
    }
    if (!miner_.check_policy(dev, dev, Action::store_shared).allow) {
        w_.bump("stores_denied");
        finish_flow_measured(flow, "denied");
        return;
    }
    StorageActor* shared = w_.shared_storage();
    const DataHash computed = w_.provider().hash_bytes(ByteView(data.data(), data.size()));
    flow.comp_ops += 1;
    // Trusted tier: no claimed hash rides along and no attestation comes back.
    w_.net().send(flow, name_, shared->name(), "store_upload", data.size() + kPointerBytes,
                  [this, &flow, dev, shared, computed, data = std::move(data)] {
        DeviceState& d = devices_[dev];
        auto stored = shared->node().store(RandomId{rng_.token(128)}, d.shared_account,
                                           d.shared_last_bn, d.shared_last_hash, data,
                                           std::nullopt, w_.loop().now());
        if (!stored.ok()) {
            w_.net().send(flow, shared->name(), name_, "store_refusal", 64,
                          [this, &flow, why = stored.why()] {
                              finish_flow_measured(flow,
                                                   "rejected(" + std::string(to_string(why)) + ")");
                          });
            return;
        }
        StorageNode::StoreReceipt receipt = stored.take();
        w_.net().send(flow, shared->name(), name_, "store_receipt",
                      receipt.encrypted_block_number.size(),
                      [this, &flow, dev, computed, receipt = std::move(receipt)] {
            DeviceState& d = devices_[dev];
            auto bn = decrypt_block_number(
                w_.provider(), d.shared_key,
                ByteView(receipt.encrypted_block_number.data(),
                         receipt.encrypted_block_number.size()));
            if (!bn) {
                finish_flow_measured(flow, "rejected(auth_failed)");
                return;
            }
            Transaction tx;
            tx.kind = TxKind::store;
            tx.device = dev;
            tx.prev_tx = miner_.latest_tx(dev);
            tx.block_number = receipt.encrypted_block_number;
            tx.data_hash = computed;
            tx.timestamp = w_.loop().now();
            append_signature(w_.provider(), tx, miner_.miner_key());
            const Status appended = miner_.append_tx(tx, Action::store_shared);
            flow.comp_ops += 2;
            if (!appended.ok()) {
                finish_flow_measured(flow,
                                     "rejected(" + std::string(to_string(appended.why)) + ")");
                return;
            }
            d.shared_last_bn = *bn;
            d.shared_last_hash = computed;
            w_.shared_table().update(name_, d.shared_last_bn, d.shared_last_hash);
            w_.bump("shared_stores");
            maybe_mine_local();
            finish_flow_measured(flow, "ok");
        });
    });
}

void HomeActor::store_to_local(FlowTrace& flow, const std::string& dev, Bytes data) {
    if (!miner_.check_policy(dev, dev, Action::store_local).allow) {
        w_.bump("stores_denied");
        finish_flow_measured(flow, "denied");
        return;
    }
    DeviceState& d = devices_[dev];
    const DataHash computed = w_.provider().hash_bytes(ByteView(data.data(), data.size()));
    flow.comp_ops += 1;
    auto stored = local_store_.store(RandomId{rng_.token(128)}, d.local_account, d.local_last_bn,
                                     d.local_last_hash, std::move(data), computed,
                                     w_.loop().now());
    if (!stored.ok()) {
        finish_flow_measured(flow, "rejected(" + std::string(to_string(stored.why())) + ")");
        return;
    }
    auto bn = decrypt_block_number(w_.provider(), d.local_key,
                                   ByteView(stored.value().encrypted_block_number.data(),
                                            stored.value().encrypted_block_number.size()));
    if (!bn) {
        finish_flow_measured(flow, "rejected(auth_failed)");
        return;
    }
    Transaction tx;
    tx.kind = TxKind::store;
    tx.device = dev;
    tx.prev_tx = miner_.latest_tx(dev);
    tx.block_number = stored.value().encrypted_block_number;
    tx.data_hash = computed;
    tx.timestamp = w_.loop().now();
    append_signature(w_.provider(), tx, miner_.miner_key());
    const Status appended = miner_.append_tx(tx, Action::store_local);
    flow.comp_ops += 2;
    if (!appended.ok()) {
        finish_flow_measured(flow, "rejected(" + std::string(to_string(appended.why)) + ")");
        return;
    }
    d.local_last_bn = *bn;
    d.local_last_hash = computed;
    w_.bump("local_stores");
    maybe_mine_local();
    finish_flow_measured(flow, "ok");
}

void HomeActor::handle_request(std::shared_ptr<RequestCtx> ctx) {
    FlowTrace& flow = *ctx->flow;
    const std::string dev = ctx->env.tx.device.value_or("");
    if (devices_.count(dev) != 0 && !devices_[dev].online) {
        relay_response(ctx, ctx->env.tx, "request_refusal", 64, [this, ctx] {
            w_.finish_flow(*ctx->flow, "rejected(device_offline)");
        });
        return;
    }
    auto resolved = miner_.resolve_request(ctx->env.tx);
    flow.comp_ops += 2;
    if (!resolved.ok()) {
        w_.bump("requests_refused");
        relay_response(ctx, ctx->env.tx, "request_refusal", 64,
                       [this, ctx, why = resolved.why()] {
                           w_.finish_flow(*ctx->flow,
                                          "rejected(" + std::string(to_string(why)) + ")");
                       });
        return;
    }
    Transaction tx = resolved.take();
    maybe_mine_local();
    if (tx.output_bit.value_or(0) == 0) {
        w_.bump("requests_denied");
        respond_denied(ctx, std::move(tx));
        return;
    }
    w_.bump("requests_granted");
    record_proofs(flow, tx);
    if (tx.kind == TxKind::monitor)
        respond_monitor(ctx, std::move(tx));
    else
        respond_access(ctx, std::move(tx));
}

void HomeActor::respond_denied(std::shared_ptr<RequestCtx> ctx, Transaction resolved) {
    const std::size_t bytes = full_bytes(resolved).size();
    const std::string msg =
        resolved.kind == TxKind::monitor ? "monitor_response" : "access_response";
    auto sp_index = ctx->sp;
    relay_response(ctx, std::move(resolved), msg, bytes, [this, ctx, sp_index] {
        if (ctx->adversary || sp_index == SIZE_MAX)
            w_.finish_flow(*ctx->flow, "denied");
        else
            w_.sp(sp_index).on_denied(ctx);
    });
}

void HomeActor::respond_access(std::shared_ptr<RequestCtx> ctx, Transaction resolved) {
    FlowTrace& flow = *ctx->flow;
    const std::string dev = *resolved.device;
    DeviceState& d = devices_[dev];

    if (ctx->scope == "full_chain") {
        StorageActor* cloud = w_.cloud();
        if (cloud == nullptr) {
            relay_response(ctx, std::move(resolved), "request_refusal", 64, [this, ctx] {
                w_.finish_flow(*ctx->flow, "rejected(unknown-storage)");
            });
            return;
        }
        // Seal the tail before disclosing the pointer pair: a replayed pair
        // can then never extend the chain.
        w_.net().send(flow, name_, cloud->name(), "chain_guard", kPointerBytes,
                      [this, ctx, cloud, dev, resolved = std::move(resolved)]() mutable {
            DeviceState& d = devices_[dev];
            auto guard = cloud->node().pre_chain_guard(d.account, d.last_bn, d.last_hash);
            if (!guard.ok()) {
                relay_response(ctx, std::move(resolved), "request_refusal", 64,
                               [this, ctx, why = guard.why()] {
                                   w_.finish_flow(*ctx->flow, "rejected(" +
                                                                  std::string(to_string(why)) + ")");
                               });
                return;
            }
            GrantInfo grant;
            grant.storage = cloud->name();
            grant.account = d.account;
            grant.first_block_number = d.first_bn;
            grant.first_hash = d.first_hash;
            grant.last_block_number = d.last_bn;
            grant.last_hash = d.last_hash;
            w_.net().send(*ctx->flow, cloud->name(), name_, "guard_ack", kPointerBytes,
                          [this, ctx, dev, grant, g = guard.take(),
                           resolved = std::move(resolved)]() mutable {
                DeviceState& d = devices_[dev];
                d.last_bn = g.block_number;
                d.last_hash = g.hash;
                miner_.set_storage_handle(dev, StorageHandle{d.account, d.last_bn, d.last_hash});
                w_.bump("chain_guards");
                const std::size_t bytes = full_bytes(resolved).size() + kGrantExtra;
                auto sp_index = ctx->sp;
                relay_response(ctx, std::move(resolved), "access_response", bytes,
                               [this, ctx, grant, sp_index] {
                                   if (ctx->adversary || sp_index == SIZE_MAX) {
                                       w_.finish_flow(*ctx->flow, "ok");
                                       return;
                                   }
                                   w_.sp(sp_index).on_grant(ctx, grant);
                               });
            });
        });
        return;
    }

    // Window scope: the freshest readings come off the device itself; the
    // ledger's storage pointers are never disclosed.
    const std::size_t window_bytes = w_.params().window_blocks * w_.params().data_bytes;
    w_.net().send(flow, name_, device_node(dev), "window_pull", kPullBytes,
                  [this, ctx, dev, window_bytes, resolved = std::move(resolved)]() mutable {
        w_.net().send(*ctx->flow, device_node(dev), name_, "window_data",
                      window_bytes + 16,
                      [this, ctx, window_bytes, resolved = std::move(resolved)]() mutable {
            // Minimisation hook then requester-key encryption.
            ctx->flow->comp_ops += 1;
            const std::size_t bytes = window_bytes + 48;
            auto sp_index = ctx->sp;
            relay_response(ctx, std::move(resolved), "access_response", bytes,
                           [this, ctx, bytes, sp_index] {
                               if (ctx->adversary || sp_index == SIZE_MAX) {
                                   w_.finish_flow(*ctx->flow, "ok");
                                   return;
                               }
                               w_.sp(sp_index).on_data(ctx, bytes, true);
                           });
        });
    });
}

void HomeActor::respond_monitor(std::shared_ptr<RequestCtx> ctx, Transaction resolved) {
    const std::string dev = *resolved.device;
    const std::uint64_t ticks = ctx->monitor_ticks;
    auto shared_resolved = std::make_shared<Transaction>(std::move(resolved));
    for (std::uint64_t i = 0; i < ticks; ++i) {
        w_.loop().after(i, [this, ctx, dev, i, ticks, shared_resolved] {
            w_.net().send(*ctx->flow, name_, device_node(dev), "monitor_pull", kPullBytes,
                          [this, ctx, dev, i, ticks, shared_resolved] {
                w_.net().send(*ctx->flow, device_node(dev), name_, "reading",
                              w_.params().data_bytes + 16,
                              [this, ctx, i, ticks, shared_resolved] {
                    ctx->flow->comp_ops += 1;
                    const bool last = i + 1 == ticks;
                    const std::size_t bytes = w_.params().data_bytes + 48;
                    auto sp_index = ctx->sp;
                    w_.bump("monitor_readings");
                    relay_response(ctx, *shared_resolved, "monitor_data", bytes,
                                   [this, ctx, bytes, last, sp_index] {
                                       if (ctx->adversary || sp_index == SIZE_MAX) {
                                           if (last) w_.finish_flow(*ctx->flow, "ok");
                                           return;
                                       }
                                       w_.sp(sp_index).on_data(ctx, bytes, last);
                                   });
                });
            });
        });
    }
}

void HomeActor::record_proofs(FlowTrace& flow, const Transaction& resolved) {
    if (!w_.params().record_proofs) return;
    const auto targets = w_.pick_clusters(w_.params().overlay.proof_fanout);
    for (const std::size_t c : targets) {
        ChActor& ch = w_.cluster_head(c);
        if (!ch.alive()) continue;
        Envelope env{OverlayMsgTag::proof_store, name_, resolved};
        const std::size_t bytes = encode_envelope(env).size();
        w_.net().send(flow, name_, ch.node(), "proof_store", bytes,
                      [this, &flow, c, env = std::move(env)] {
                          w_.cluster_head(c).ingest_proof(flow, env.tx);
                      });
    }
}

void HomeActor::relay_response(std::shared_ptr<RequestCtx> ctx, Transaction resolved,
                               std::string msg, std::size_t bytes,
                               std::function<void()> at_origin) {
    if (ctx->path.empty()) {
        at_origin();
        return;
    }
    const bool denied = resolved.output_bit.value_or(1) == 0;
    auto step = std::make_shared<std::function<void(std::size_t)>>();
    *step = [this, ctx, denied, msg, bytes, at_origin, step](std::size_t i) {
        ChActor& cur = w_.cluster_head(ctx->path[i]);
        if (denied) {
            w_.bump("access_failures_registered");
            if (cur.ch().register_access_failure(ctx->requester, w_.loop().now()))
                w_.bump("blocked_pks");
        }
        if (i == 0) {
            w_.net().send(*ctx->flow, cur.node(), ctx->origin, msg, bytes, at_origin);
            return;
        }
        ChActor& next = w_.cluster_head(ctx->path[i - 1]);
        w_.net().send(*ctx->flow, cur.node(), next.node(), msg, bytes,
                      [step, i] { (*step)(i - 1); });
    };
    ChActor& first = w_.cluster_head(ctx->path.back());
    w_.net().send(*ctx->flow, name_, first.node(), msg, bytes,
                  [step, last = ctx->path.size() - 1] { (*step)(last); });
}

void HomeActor::start_breach_check(FlowTrace& flow, const std::string& dev) {
    StorageActor* cloud = w_.cloud();
    if (cloud == nullptr || !devices_.count(dev) || !devices_[dev].stored) {
        w_.finish_flow(flow, "rejected(not_found)");
        return;
    }
    w_.net().send(flow, name_, cloud->name(), "breach_fetch", kPointerBytes,
                  [this, &flow, dev, cloud] {
        DeviceState& d = devices_[dev];
        auto got = cloud->node().retrieve(d.account, d.last_bn, d.last_hash);
        if (!got.ok()) {
            w_.net().send(flow, cloud->name(), name_, "breach_refusal", 64,
                          [this, &flow, why = got.why()] {
                              w_.finish_flow(flow,
                                             "rejected(" + std::string(to_string(why)) + ")");
                          });
            return;
        }
        const std::size_t bytes = got.value().data.size() + kEntryOverhead;
        w_.net().send(flow, cloud->name(), name_, "breach_data", bytes,
                      [this, &flow, dev, cloud, data = got.take().data] {
            DeviceState& d = devices_[dev];
            const DataHash computed =
                w_.provider().hash_bytes(ByteView(data.data(), data.size()));
            flow.comp_ops += 1;
            if (computed == d.last_hash) {
                w_.bump("breach_checks_clean");
                w_.finish_flow(flow, "ok");
                return;
            }
            // The stored bytes no longer match the ledger. Record the bad
            // read under the owner's own access grant, then flood a report
            // pointing at the store-time attestation and the bad read.
            Transaction evidence;
            evidence.kind = TxKind::access;
            evidence.device = dev;
            evidence.scope = AccessScope::latest;
            evidence.data_hash = computed;
            evidence.timestamp = w_.loop().now();
            evidence.payload_refs.push_back(RandomId{rng_.token(128)});
            append_signature(w_.provider(), evidence, miner_.owner_key());
            auto recorded = miner_.resolve_request(std::move(evidence));
            flow.comp_ops += 2;
            if (!recorded.ok()) {
                w_.finish_flow(flow, "rejected(" + std::string(to_string(recorded.why())) + ")");
                return;
            }
            Transaction report;
            report.kind = TxKind::breach_report;
            report.device = dev;
            report.prev_tx = miner_.latest_tx(dev);
            report.data_hash = computed;
            report.timestamp = w_.loop().now();
            report.payload_refs = {d.last_attest_tx, tx_id(w_.provider(), recorded.value())};
            append_signature(w_.provider(), report, miner_.miner_key());
            miner_.append_tx(report);
            maybe_mine_local();
            w_.bump("breach_reports");

            const std::size_t report_bytes = full_bytes(report).size() + 64;
            auto remaining = std::make_shared<std::size_t>(0);
            for (std::size_t c = 0; c < w_.cluster_count(); ++c)
                if (w_.cluster_head(c).alive()) ++*remaining;
            if (*remaining == 0) {
                w_.finish_flow(flow, "rejected(data-unrecoverable)");
                return;
            }
            for (std::size_t c = 0; c < w_.cluster_count(); ++c) {
                ChActor& ch = w_.cluster_head(c);
                if (!ch.alive()) continue;
                w_.net().send(flow, name_, ch.node(), "breach_report", report_bytes,
                              [this, &flow, c, report, storage = cloud->name(), remaining] {
                                  w_.cluster_head(c).ingest_breach_report(flow, report, storage);
                                  if (--*remaining == 0)
                                      w_.finish_flow(flow, "rejected(data-unrecoverable)");
                              });
            }
        });
    });
}

void HomeActor::start_rogue_store(FlowTrace& flow, std::size_t data_bytes) {
    const std::string ghost = name_ + ".ghost";
    if (!w_.topology().has(ghost)) w_.topology().add_device(ghost, name_);
    Bytes data = rng_.bytes(data_bytes);
    w_.net().send(flow, ghost, name_, "store_request", data.size() + kStoreHeader,
                  [this, &flow, data = std::move(data)] {
                      Transaction tx;
                      tx.kind = TxKind::store;
                      tx.device = "ghost";
                      tx.block_number = Bytes{0, 0, 0};
                      tx.data_hash = w_.provider().hash_bytes(ByteView(data.data(), data.size()));
                      tx.timestamp = w_.loop().now();
                      DetRng ghost_rng = rng_.fork("ghost-key");
                      KeyPair ghost_keys = w_.provider().generate_keypair(ghost_rng, "");
                      append_signature(w_.provider(), tx, ghost_keys.priv);
                      const Status st = miner_.append_tx(tx, Action::store_local);
                      flow.comp_ops += 1;
                      if (st.ok()) {
                          w_.bump("rogue_accepted");
                          w_.finish_flow(flow, "ok");
                      } else {
                          w_.bump("rogue_rejected");
                          w_.finish_flow(flow, "rejected(" + std::string(to_string(st.why)) + ")");
                      }
                  });
}

void HomeActor::serve_join(FlowTrace& flow, const std::string& joiner) {
    const std::string dump = miner_.export_dump();
    const std::uint64_t blocks = miner_.chain().blocks.size();
    w_.net().send(flow, joiner, name_, "join_request", 64, [this, &flow, joiner, dump, blocks] {
        w_.net().send(flow, name_, joiner, "chain_download", dump.size(),
                      [this, &flow, dump, blocks] {
                          // The joiner replays the dump through a fresh miner,
                          // so a corrupt download cannot take root.
                          Miner replica(w_.provider(), w_.ids(),
                                        w_.fork_rng("join-" + std::to_string(flow.start) + "-" +
                                                    std::to_string(w_.loop().now())),
                                        "join-" + flow.id);
                          const Status st = replica.import_dump(dump);
                          flow.comp_ops += 1;
                          if (!st.ok()) {
                              w_.finish_flow(flow, "rejected(" +
                                                       std::string(to_string(st.why)) + ")");
                              return;
                          }
                          w_.bump("join_blocks", blocks);
                          w_.bump("joins_completed");
                          w_.finish_flow(flow, "ok");
                      });
    });
}

}  // namespace homechain
