#include "homechain/localchain/miner.hpp"

#include <algorithm>

namespace homechain {
namespace {

std::pair<DeviceId, DeviceId> ordered(const DeviceId& a, const DeviceId& b) {
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

constexpr std::uint8_t kAllActions = 0xff;

}  // namespace

Miner::Miner(CryptoProvider& provider, IdRegistry& ids, DetRng rng, std::string_view label,
             std::size_t mine_threshold)
    : provider_(provider),
      ids_(ids),
      rng_(rng),
      label_(label),
      mine_threshold_(mine_threshold),
      owner_(provider.generate_keypair(rng_, std::string(label) + "-owner")),
      miner_(provider.generate_keypair(rng_, std::string(label) + "-miner")) {}

Status Miner::require_owner(const PrivateKey& key) const {
    if (key.id != owner_.pub.id || key.secret != owner_.priv.secret) {
        return Status::fail(Reject::owner_auth, label_);
    }
    return Status::success();
}

Transaction Miner::base_tx(TxKind kind, std::uint64_t now) {
    Transaction tx;
    tx.kind = kind;
    tx.timestamp = now;
    tx.payload_refs.push_back(ids_.allocate());  // freshness nonce
    return tx;
}

void Miner::do_append(const Transaction& tx, const RandomId& id) {
    tx_index_.emplace(id.value, tx);
    chain_.pending.push_back(tx);
    if (!tx.device) return;
    const DeviceId& dev = *tx.device;
    switch (tx.kind) {
        case TxKind::genesis:
            chain_.ledgers[dev] = {id};
            removed_.erase(dev);
            break;
        case TxKind::remove_device: {
            chain_.ledgers.erase(dev);
            removed_.insert(dev);
            storage_handles_.erase(dev);
            for (auto it = device_keys_.begin(); it != device_keys_.end();) {
                if (it->first.first == dev || it->first.second == dev) {
                    it = device_keys_.erase(it);
                } else {
                    ++it;
                }
            }
            break;
        }
        default:
            chain_.ledgers[dev].push_back(id);
            break;
    }
}

Transaction Miner::make_policy_update(PolicyHeader next, std::uint64_t now) {
    next.version = chain_.policy.version + 1;
    Transaction tx = base_tx(TxKind::policy_update, now);
    tx.prev_tx = last_policy_tx_;
    tx.data_hash = [&] {
        const Bytes raw = canonical_bytes(next);
        return provider_.hash_bytes(ByteView(raw.data(), raw.size()));
    }();
    append_signature(provider_, tx, owner_.priv);
    const RandomId id = tx_id(provider_, tx);
    do_append(tx, id);
    pending_policies_[id.value] = next;
    last_policy_tx_ = id;
    chain_.policy = std::move(next);
    return tx;
}

Result<Transaction> Miner::add_device(const PrivateKey& owner_auth, const DeviceId& device,
                                      const std::vector<PolicyRule>& rules, std::uint64_t now) {
    using R = Result<Transaction>;
    if (const Status s = require_owner(owner_auth); !s.ok()) return R::err(s.why, s.detail);
    if (chain_.ledgers.contains(device)) return R::err(Reject::duplicate_device, device);
    for (const auto& rule : rules) {
        if (!rule_valid(rule)) return R::err(Reject::invalid_params, rule.subject);
    }

    Transaction genesis = base_tx(TxKind::genesis, now);
    genesis.device = device;
    append_signature(provider_, genesis, owner_.priv);
    do_append(genesis, tx_id(provider_, genesis));

    // The owner always holds every right over a new device, and the device
    // may store its own data until the owner says otherwise. Requested rules
    // ride the same policy update and may override the self rule.
    PolicyHeader next = chain_.policy;
    PolicyRule owner_rule;
    owner_rule.subject = owner_.pub.id;
    owner_rule.device = device;
    owner_rule.actions = kAllActions;
    owner_rule.privacy = PrivacyLevel::full_chain;
    upsert_rule(next, owner_rule);
    PolicyRule self_rule;
    self_rule.subject = device;
    self_rule.device = device;
    self_rule.actions = action_bit(Action::store_local) | action_bit(Action::store_shared) |
                        action_bit(Action::store_cloud);
    self_rule.privacy = PrivacyLevel::minimal;
    upsert_rule(next, self_rule);
    for (const auto& rule : rules) upsert_rule(next, rule);
    make_policy_update(std::move(next), now);
    return R::ok(std::move(genesis));
}

Result<Transaction> Miner::remove_device(const PrivateKey& owner_auth, const DeviceId& device,
                                         std::uint64_t now) {
    using R = Result<Transaction>;
    if (const Status s = require_owner(owner_auth); !s.ok()) return R::err(s.why, s.detail);
    const auto it = chain_.ledgers.find(device);
    if (it == chain_.ledgers.end()) return R::err(Reject::unknown_device, device);

    Transaction closing = base_tx(TxKind::remove_device, now);
    closing.device = device;
    closing.prev_tx = it->second.back();
    append_signature(provider_, closing, owner_.priv);
    do_append(closing, tx_id(provider_, closing));

    PolicyHeader next = chain_.policy;
    if (drop_device_rules(next, device) > 0) {
        make_policy_update(std::move(next), now);
    }
    return R::ok(std::move(closing));
}

Result<Transaction> Miner::update_policy(const PrivateKey& owner_auth,
                                         const std::vector<PolicyRule>& upserts,
                                         const std::vector<std::pair<std::string, DeviceId>>& revokes,
                                         std::uint64_t now) {
    using R = Result<Transaction>;
    if (const Status s = require_owner(owner_auth); !s.ok()) return R::err(s.why, s.detail);
    PolicyHeader next = chain_.policy;
    for (const auto& [subject, device] : revokes) {
        std::erase_if(next.rules, [&](const PolicyRule& r) {
            return r.subject == subject && r.device == device;
        });
    }
    for (const auto& rule : upserts) {
        if (!upsert_rule(next, rule)) return R::err(Reject::invalid_params, rule.subject);
    }
    return R::ok(make_policy_update(std::move(next), now));
}

Status Miner::authorize_pk(const PrivateKey& owner_auth, const PublicKey& pk) {
    if (const Status s = require_owner(owner_auth); !s.ok()) return s;
    if (!pk_authorized(pk)) authorized_pks_.push_back(pk);
    return Status::success();
}

Status Miner::revoke_pk(const PrivateKey& owner_auth, const PublicKey& pk) {
    if (const Status s = require_owner(owner_auth); !s.ok()) return s;
    std::erase(authorized_pks_, pk);
    return Status::success();
}

bool Miner::pk_authorized(const PublicKey& pk) const {
    return std::find(authorized_pks_.begin(), authorized_pks_.end(), pk) !=
           authorized_pks_.end();
}

Result<SharedKey> Miner::grant_device_key(const PrivateKey& owner_auth, const DeviceId& a,
                                          const DeviceId& b) {
    using R = Result<SharedKey>;
    if (const Status s = require_owner(owner_auth); !s.ok()) return R::err(s.why, s.detail);
    if (!chain_.ledgers.contains(a)) return R::err(Reject::unknown_device, a);
    if (!chain_.ledgers.contains(b)) return R::err(Reject::unknown_device, b);
    const KeyPair ka = provider_.generate_keypair(rng_, "");
    const KeyPair kb = provider_.generate_keypair(rng_, "");
    SharedKey key = provider_.derive_shared_key(ka.priv, kb.pub);
    device_keys_[ordered(a, b)] = key;
    return R::ok(std::move(key));
}

std::optional<SharedKey> Miner::device_key(const DeviceId& a, const DeviceId& b) const {
    const auto it = device_keys_.find(ordered(a, b));
    if (it == device_keys_.end()) return std::nullopt;
    return it->second;
}

bool Miner::can_message(const DeviceId& a, const DeviceId& b) const {
    return chain_.ledgers.contains(a) && chain_.ledgers.contains(b) &&
           device_keys_.contains(ordered(a, b));
}

Status Miner::append_tx(const Transaction& tx, std::optional<Action> intent) {
    if (const Status s = check_tx_shape(tx); !s.ok()) return s;

    // Everything except policy updates and breach reports lives in a device
    // ledger and must name the device.
    const bool needs_device =
        tx.kind != TxKind::policy_update && tx.kind != TxKind::breach_report;
    if (needs_device && !tx.device) return Status::fail(Reject::malformed, "no device named");

    if (const Status s = validate_tx_signatures(provider_, tx); !s.ok()) return s;
    const bool administrative = tx.kind == TxKind::genesis ||
                                tx.kind == TxKind::policy_update ||
                                tx.kind == TxKind::remove_device;
    if (administrative &&
        (tx.signatures.empty() || tx.signatures.front().signer.id != owner_.pub.id)) {
        return Status::fail(Reject::owner_auth, label_);
    }

    if (tx.device) {
        const DeviceId& dev = *tx.device;
        const auto it = chain_.ledgers.find(dev);
        if (tx.kind == TxKind::genesis) {
            if (it != chain_.ledgers.end()) return Status::fail(Reject::duplicate_device, dev);
        } else {
            if (it == chain_.ledgers.end()) {
                return Status::fail(removed_.contains(dev) ? Reject::no_ledger
                                                           : Reject::no_starting_transaction,
                                    dev);
            }
            if (!tx.prev_tx || tx.prev_tx->value != it->second.back().value) {
                return Status::fail(Reject::broken_chain, dev);
            }
        }
    }

    if (tx.kind == TxKind::store) {
        const Action want = intent.value_or(Action::store_local);
        const PolicyDecision d = evaluate_policy(chain_.policy, *tx.device, *tx.device, want);
        if (!d.allow) {
            return Status::fail(Reject::policy_denied,
                                *tx.device + "/" + std::string(to_string(want)));
        }
    }
    if ((tx.kind == TxKind::access || tx.kind == TxKind::monitor) && !tx.output_bit) {
        return Status::fail(Reject::malformed, "unresolved request");
    }

    do_append(tx, tx_id(provider_, tx));
    return Status::success();
}

Result<Transaction> Miner::resolve_request(Transaction request) {
    using R = Result<Transaction>;
    if (request.kind != TxKind::access && request.kind != TxKind::monitor) {
        return R::err(Reject::malformed, "not a request kind");
    }
    if (const Status s = check_tx_shape(request); !s.ok()) return R::err(s.why, s.detail);
    if (request.signatures.empty() || !request.signatures.front().present()) {
        return R::err(Reject::missing_signature, "requester slot");
    }
    if (!request.device) return R::err(Reject::malformed, "no target device");
    const DeviceId& dev = *request.device;
    const auto ledger = chain_.ledgers.find(dev);
    if (ledger == chain_.ledgers.end()) {
        return R::err(removed_.contains(dev) ? Reject::no_ledger : Reject::unknown_device, dev);
    }

    // Requester's signature covers the request form.
    {
        const Bytes msg = signing_bytes(request, 0);
        if (!provider_.verify(request.signatures.front().signer, ByteView(msg.data(), msg.size()),
                              request.signatures.front())) {
            return R::err(Reject::bad_signature, request.signatures.front().signer.id);
        }
    }

    const std::string& subject = request.signatures.front().signer.id;
    const Action asked = request.kind == TxKind::monitor
                             ? Action::monitor
                             : action_for_scope(request.scope.value_or(AccessScope::latest));
    const PolicyDecision d = evaluate_policy(chain_.policy, subject, dev, asked);

    // The requester's signature covers the timestamp; only the masked fields
    // may change here.
    request.prev_tx = ledger->second.back();
    request.output_bit = d.allow ? 1 : 0;
    request.signatures.resize(1);
    append_signature(provider_, request, miner_.priv);
    do_append(request, tx_id(provider_, request));
    return R::ok(std::move(request));
}

Result<Transaction> Miner::accept_attestation(Transaction att) {
    using R = Result<Transaction>;
    if (att.kind != TxKind::signed_hash) return R::err(Reject::malformed, "not an attestation");
    if (!att.device) return R::err(Reject::malformed, "no device named");
    const DeviceId& dev = *att.device;
    const auto ledger = chain_.ledgers.find(dev);
    if (ledger == chain_.ledgers.end()) {
        return R::err(removed_.contains(dev) ? Reject::no_ledger : Reject::unknown_device, dev);
    }
    if (att.signatures.empty() || !att.signatures.front().present()) {
        return R::err(Reject::missing_signature, "attester slot");
    }
    {
        const Bytes msg = signing_bytes(att, 0);
        if (!provider_.verify(att.signatures.front().signer, ByteView(msg.data(), msg.size()),
                              att.signatures.front())) {
            return R::err(Reject::bad_signature, att.signatures.front().signer.id);
        }
    }
    att.prev_tx = ledger->second.back();
    att.signatures.resize(1);
    append_signature(provider_, att, miner_.priv);
    do_append(att, tx_id(provider_, att));
    return R::ok(std::move(att));
}

Result<Block> Miner::mine_block() {
    using R = Result<Block>;
    if (chain_.pending.empty()) return R::err(Reject::nothing_pending, label_);

    Block block;
    block.prev_block =
        chain_.blocks.empty() ? DataHash{} : block_hash(provider_, chain_.blocks.back());
    block.txs = std::move(chain_.pending);
    chain_.pending.clear();
    block.miner = miner_.pub;

    // Stamp the header snapshot of the last policy change this block carries.
    const PolicyHeader* stamp = &mined_policy_;
    for (const Transaction& tx : block.txs) {
        if (tx.kind != TxKind::policy_update) continue;
        const auto it = pending_policies_.find(tx_id(provider_, tx).value);
        if (it != pending_policies_.end()) stamp = &it->second;
    }
    block.policy_copy = *stamp;
    mined_policy_ = *stamp;
    for (const Transaction& tx : block.txs) {
        if (tx.kind == TxKind::policy_update) {
            pending_policies_.erase(tx_id(provider_, tx).value);
        }
    }

    chain_.blocks.push_back(block);
    return R::ok(std::move(block));
}

PolicyDecision Miner::check_policy(std::string_view subject, std::string_view device,
                                   Action requested) const {
    return evaluate_policy(chain_.policy, subject, device, requested);
}

std::optional<RandomId> Miner::latest_tx(const DeviceId& device) const {
    const auto it = chain_.ledgers.find(device);
    if (it == chain_.ledgers.end() || it->second.empty()) return std::nullopt;
    return it->second.back();
}

const Transaction* Miner::find_tx(const RandomId& id) const {
    const auto it = tx_index_.find(id.value);
    return it == tx_index_.end() ? nullptr : &it->second;
}

void Miner::set_storage_handle(const DeviceId& device, StorageHandle handle) {
    storage_handles_[device] = std::move(handle);
}

const StorageHandle* Miner::storage_handle(const DeviceId& device) const {
    const auto it = storage_handles_.find(device);
    return it == storage_handles_.end() ? nullptr : &it->second;
}

Status Miner::import_dump(std::string_view dump) {
    auto imported = import_chain(provider_, dump);
    if (!imported) return imported.status();
    chain_ = std::move(imported.value().chain);
    pending_policies_ = std::move(imported.value().pending_policies);

    tx_index_.clear();
    removed_.clear();
    mined_policy_ = PolicyHeader{};
    last_policy_tx_.reset();
    for (const Block& b : chain_.blocks) {
        if (b.policy_copy) mined_policy_ = *b.policy_copy;
        for (const Transaction& tx : b.txs) {
            const RandomId id = tx_id(provider_, tx);
            tx_index_.emplace(id.value, tx);
            if (tx.kind == TxKind::remove_device && tx.device) removed_.insert(*tx.device);
            if (tx.kind == TxKind::genesis && tx.device) removed_.erase(*tx.device);
            if (tx.kind == TxKind::policy_update) last_policy_tx_ = id;
        }
    }
    for (const Transaction& tx : chain_.pending) {
        const RandomId id = tx_id(provider_, tx);
        tx_index_.emplace(id.value, tx);
        if (tx.kind == TxKind::remove_device && tx.device) removed_.insert(*tx.device);
        if (tx.kind == TxKind::genesis && tx.device) removed_.erase(*tx.device);
        if (tx.kind == TxKind::policy_update) last_policy_tx_ = id;
    }
    return Status::success();
}

}  // namespace homechain
