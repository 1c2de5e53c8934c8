#include "homechain/storage/storage_node.hpp"

#include <algorithm>
#include <sstream>

namespace homechain {

std::string_view to_string(StorageKind k) {
    switch (k) {
        case StorageKind::cloud: return "cloud";
        case StorageKind::shared: return "shared";
        case StorageKind::local: return "local";
    }
    return "unknown";
}

std::optional<StorageKind> storage_kind_from_string(std::string_view s) {
    if (s == "cloud") return StorageKind::cloud;
    if (s == "shared") return StorageKind::shared;
    if (s == "local") return StorageKind::local;
    return std::nullopt;
}

StorageNode::StorageNode(CryptoProvider& provider, DetRng rng, std::string_view label,
                         StorageKind kind, std::size_t capacity)
    : provider_(provider),
      rng_(rng),
      label_(label),
      kind_(kind),
      capacity_(capacity),
      keys_(provider.generate_keypair(rng_, std::string(label) + "-storage")) {}

RandomId StorageNode::fresh_token() {
    for (;;) {
        RandomId token{rng_.token(128)};
        bool taken = accounts_.contains(token.value);
        for (auto it = accounts_.begin(); !taken && it != accounts_.end(); ++it) {
            taken = it->second.blocks.contains(token.value);
        }
        if (!taken) return token;
    }
}

DataHash StorageNode::empty_hash(const CryptoProvider& p) { return p.hash_bytes(ByteView{}); }

StorageNode::Bootstrap StorageNode::bootstrap_account(const PublicKey& owner_pk,
                                                      std::string_view ledger_label) {
    StorageAccount acc;
    acc.account_id = fresh_token();
    acc.kind = kind_;
    acc.ledger_label = std::string(ledger_label);
    acc.owner = owner_pk;
    acc.key = provider_.derive_shared_key(keys_.priv, owner_pk);
    acc.capacity = capacity_;

    StorageBlock head;
    head.block_number = fresh_token();
    head.data_hash = empty_hash(provider_);
    const Bootstrap out{acc.account_id, head.block_number, head.data_hash, acc.key};
    acc.order.push_back(head.block_number);
    acc.blocks.emplace(head.block_number.value, std::move(head));
    account_order_.push_back(acc.account_id);
    accounts_.emplace(acc.account_id.value, std::move(acc));
    return out;
}

Result<StorageNode::StoreReceipt> StorageNode::store(const RandomId& requester,
                                                     const RandomId& account,
                                                     const RandomId& prev_block_number,
                                                     const DataHash& prev_hash, Bytes data,
                                                     const std::optional<DataHash>& claimed_hash,
                                                     std::uint64_t now) {
    (void)requester;  // a per-request pseudonym; authentication is the pair below
    using R = Result<StoreReceipt>;
    const auto acc_it = accounts_.find(account.value);
    if (acc_it == accounts_.end()) return R::err(Reject::unknown_account);
    StorageAccount& acc = acc_it->second;

    const auto prev_it = acc.blocks.find(prev_block_number.value);
    if (prev_it == acc.blocks.end() || prev_it->second.data_hash != prev_hash) {
        return R::err(Reject::storage_auth, acc.ledger_label);
    }

    const DataHash computed = provider_.hash_bytes(ByteView(data.data(), data.size()));
    if (claimed_hash && *claimed_hash != computed) {
        return R::err(Reject::hash_mismatch, acc.ledger_label);
    }
    if (prev_it->second.next) return R::err(Reject::already_chained, acc.ledger_label);
    if (acc.order.size() >= acc.capacity) return R::err(Reject::no_capacity, acc.ledger_label);

    StorageBlock block;
    block.block_number = fresh_token();
    block.data = std::move(data);
    block.data_hash = computed;
    prev_it->second.next = block.block_number;
    acc.order.push_back(block.block_number);

    StoreReceipt receipt;
    receipt.encrypted_block_number =
        encrypt_block_number(provider_, rng_, acc.key, block.block_number);
    if (kind_ == StorageKind::cloud) {
        Transaction att;
        att.kind = TxKind::signed_hash;
        att.device = acc.ledger_label;
        att.block_number = receipt.encrypted_block_number;
        att.data_hash = computed;
        att.timestamp = now;
        append_signature(provider_, att, keys_.priv);
        receipt.attestation = std::move(att);
        ++attestations_emitted_;
    }
    acc.blocks.emplace(block.block_number.value, std::move(block));
    return R::ok(std::move(receipt));
}

Result<StorageNode::Retrieved> StorageNode::retrieve(const RandomId& account,
                                                     const RandomId& block_number,
                                                     const DataHash& hash) const {
    using R = Result<Retrieved>;
    const auto acc_it = accounts_.find(account.value);
    if (acc_it == accounts_.end()) return R::err(Reject::unknown_account);
    const auto it = acc_it->second.blocks.find(block_number.value);
    if (it == acc_it->second.blocks.end() || it->second.data_hash != hash) {
        return R::err(Reject::storage_auth);
    }
    const StorageBlock& b = it->second;
    const DataHash recomputed = provider_.hash_bytes(ByteView(b.data.data(), b.data.size()));
    return R::ok(Retrieved{b.data, recomputed == b.data_hash});
}

Result<std::vector<StorageNode::Retrieved>> StorageNode::retrieve_chain(
    const RandomId& account, const RandomId& block_number, const DataHash& hash) const {
    using R = Result<std::vector<Retrieved>>;
    const auto acc_it = accounts_.find(account.value);
    if (acc_it == accounts_.end()) return R::err(Reject::unknown_account);
    const StorageAccount& acc = acc_it->second;
    const auto entry = acc.blocks.find(block_number.value);
    if (entry == acc.blocks.end() || entry->second.data_hash != hash) {
        return R::err(Reject::storage_auth);
    }

    std::vector<Retrieved> out;
    const StorageBlock* cur = &entry->second;
    for (;;) {
        const DataHash recomputed =
            provider_.hash_bytes(ByteView(cur->data.data(), cur->data.size()));
        out.push_back(Retrieved{cur->data, recomputed == cur->data_hash});
        if (!cur->next) break;
        cur = &acc.blocks.at(cur->next->value);
    }
    return R::ok(std::move(out));
}

Result<StorageNode::GuardHandle> StorageNode::pre_chain_guard(const RandomId& account,
                                                              const RandomId& current,
                                                              const DataHash& current_hash) {
    using R = Result<GuardHandle>;
    const auto acc_it = accounts_.find(account.value);
    if (acc_it == accounts_.end()) return R::err(Reject::unknown_account);
    StorageAccount& acc = acc_it->second;
    const auto it = acc.blocks.find(current.value);
    if (it == acc.blocks.end() || it->second.data_hash != current_hash) {
        return R::err(Reject::storage_auth, acc.ledger_label);
    }
    if (it->second.next) {
        const StorageBlock& next = acc.blocks.at(it->second.next->value);
        return R::ok(GuardHandle{next.block_number, next.data_hash, true});
    }
    if (acc.order.size() >= acc.capacity) return R::err(Reject::no_capacity, acc.ledger_label);

    StorageBlock guard;
    guard.block_number = fresh_token();
    guard.data_hash = empty_hash(provider_);
    it->second.next = guard.block_number;
    acc.order.push_back(guard.block_number);
    const GuardHandle handle{guard.block_number, guard.data_hash, false};
    acc.blocks.emplace(guard.block_number.value, std::move(guard));
    return R::ok(handle);
}

Status StorageNode::mutate_for_attack(const RandomId& account, const RandomId& block_number,
                                      Bytes new_data) {
    const auto acc_it = accounts_.find(account.value);
    if (acc_it == accounts_.end()) return Status::fail(Reject::unknown_account);
    const auto it = acc_it->second.blocks.find(block_number.value);
    if (it == acc_it->second.blocks.end()) return Status::fail(Reject::unknown_block);
    it->second.data = std::move(new_data);
    return Status::success();
}

const StorageAccount* StorageNode::account(const RandomId& id) const {
    const auto it = accounts_.find(id.value);
    return it == accounts_.end() ? nullptr : &it->second;
}

std::string StorageNode::export_dump() const {
    std::ostringstream out;
    out << "homechain-storage v1\n";
    out << "node " << to_string(kind_) << " " << capacity_ << "\n";
    for (const RandomId& id : account_order_) {
        const StorageAccount& acc = accounts_.at(id.value);
        out << "account " << acc.account_id.value << " " << acc.ledger_label << " "
            << acc.owner.id << " " << acc.key.provider << " " << hex_encode(acc.key.material)
            << " " << acc.capacity << "\n";
        for (const RandomId& bn : acc.order) {
            const StorageBlock& b = acc.blocks.at(bn.value);
            out << "block " << acc.account_id.value << " " << b.block_number.value << " "
                << (b.next ? b.next->value : std::string("-")) << " " << b.data_hash.hex() << " "
                << (b.data.empty() ? std::string("-") : hex_encode(b.data)) << "\n";
        }
    }
    out << "end\n";
    return out.str();
}

Status StorageNode::import_dump(std::string_view dump) {
    std::istringstream in{std::string(dump)};
    std::string line;
    if (!std::getline(in, line) || line != "homechain-storage v1") {
        return Status::fail(Reject::malformed, "bad dump preamble");
    }

    std::vector<RandomId> order;
    std::map<std::string, StorageAccount> accounts;
    bool saw_node = false, saw_end = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "end") {
            saw_end = true;
            break;
        }
        if (tag == "node") {
            std::string kind;
            std::size_t capacity = 0;
            if (!(ls >> kind >> capacity) || storage_kind_from_string(kind) != kind_) {
                return Status::fail(Reject::malformed, "node record");
            }
            saw_node = true;
        } else if (tag == "account") {
            StorageAccount acc;
            std::string key_hex;
            if (!(ls >> acc.account_id.value >> acc.ledger_label >> acc.owner.id >>
                  acc.key.provider >> key_hex >> acc.capacity)) {
                return Status::fail(Reject::malformed, "account record");
            }
            const auto material = hex_decode(key_hex);
            if (!material) return Status::fail(Reject::malformed, "account key");
            acc.key.material = *material;
            acc.kind = kind_;
            order.push_back(acc.account_id);
            accounts.emplace(acc.account_id.value, std::move(acc));
        } else if (tag == "block") {
            std::string acc_id, next, hash_hex, data_hex;
            StorageBlock b;
            if (!(ls >> acc_id >> b.block_number.value >> next >> hash_hex >> data_hex)) {
                return Status::fail(Reject::malformed, "block record");
            }
            const auto acc_it = accounts.find(acc_id);
            if (acc_it == accounts.end()) return Status::fail(Reject::malformed, "orphan block");
            const auto hash_raw = hex_decode(hash_hex);
            if (!hash_raw || hash_raw->size() != 32) {
                return Status::fail(Reject::malformed, "block hash");
            }
            std::copy(hash_raw->begin(), hash_raw->end(), b.data_hash.bytes.begin());
            if (next != "-") b.next = RandomId{next};
            if (data_hex != "-") {
                const auto data = hex_decode(data_hex);
                if (!data) return Status::fail(Reject::malformed, "block data");
                b.data = *data;
            }
            acc_it->second.order.push_back(b.block_number);
            acc_it->second.blocks.emplace(b.block_number.value, std::move(b));
        } else {
            return Status::fail(Reject::malformed, "unknown record: " + tag);
        }
    }
    if (!saw_node || !saw_end) return Status::fail(Reject::malformed, "truncated dump");

    account_order_ = std::move(order);
    accounts_ = std::move(accounts);
    return Status::success();
}

}  // namespace homechain
