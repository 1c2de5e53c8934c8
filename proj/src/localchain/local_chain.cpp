#include "homechain/localchain/local_chain.hpp"

#include <set>
#include <sstream>
#include <unordered_map>

namespace homechain {

Action action_for_scope(AccessScope s) {
    switch (s) {
        case AccessScope::latest: return Action::access_latest;
        case AccessScope::window: return Action::access_window;
        case AccessScope::full_chain: return Action::access_full_chain;
    }
    return Action::access_latest;
}

bool is_access_action(Action a) {
    return a == Action::access_latest || a == Action::access_window ||
           a == Action::access_full_chain;
}

namespace {

int access_level(Action a) {
    if (a == Action::access_latest) return 0;
    if (a == Action::access_window) return 1;
    return 2;
}

AccessScope scope_for_level(int level) {
    if (level <= 0) return AccessScope::latest;
    if (level == 1) return AccessScope::window;
    return AccessScope::full_chain;
}

}  // namespace

PolicyDecision evaluate_policy(const PolicyHeader& header, std::string_view subject,
                               std::string_view device, Action requested) {
    const PolicyRule* rule = find_rule(header, subject, device);
    if (rule == nullptr) return {};

    if (!is_access_action(requested)) {
        if (!rule->grants(requested)) return {};
        return {true, rule->privacy, std::nullopt};
    }

    int widest = -1;
    for (const Action a :
         {Action::access_latest, Action::access_window, Action::access_full_chain}) {
        if (rule->grants(a)) widest = access_level(a);
    }
    if (widest < 0) return {};

    const int wanted = access_level(requested);
    if (widest >= wanted) return {true, rule->privacy, scope_for_level(wanted)};
    // Less than asked for: hand over the minimum possible data instead of
    // denying outright.
    return {true, PrivacyLevel::minimal, scope_for_level(widest)};
}

namespace {

struct Replay {
    std::map<DeviceId, std::vector<RandomId>> ledgers;
    std::set<DeviceId> removed;
    std::unordered_map<std::string, Transaction> index;
};

Status replay_tx(const CryptoProvider& p, Replay& r, const Transaction& tx) {
    const RandomId id = tx_id(p, tx);
    if (!tx.device) {
        r.index.emplace(id.value, tx);
        return Status::success();
    }
    const DeviceId& dev = *tx.device;
    auto it = r.ledgers.find(dev);
    switch (tx.kind) {
        case TxKind::genesis:
            if (it != r.ledgers.end()) {
                return Status::fail(Reject::duplicate_device, dev);
            }
            r.ledgers[dev] = {id};
            r.removed.erase(dev);
            break;
        case TxKind::remove_device: {
            if (it == r.ledgers.end()) return Status::fail(Reject::unknown_device, dev);
            if (!tx.prev_tx || tx.prev_tx->value != it->second.back().value) {
                return Status::fail(Reject::broken_chain, dev);
            }
            r.ledgers.erase(it);
            r.removed.insert(dev);
            break;
        }
        default: {
            if (it == r.ledgers.end()) {
                return Status::fail(r.removed.contains(dev) ? Reject::no_ledger
                                                            : Reject::no_starting_transaction,
                                    dev);
            }
            if (!tx.prev_tx || tx.prev_tx->value != it->second.back().value) {
                return Status::fail(Reject::broken_chain, dev);
            }
            it->second.push_back(id);
            break;
        }
    }
    r.index.emplace(id.value, tx);
    return Status::success();
}

Result<Replay> replay_all(const CryptoProvider& p, const std::vector<Block>& blocks,
                          const std::vector<Transaction>& pending) {
    Replay r;
    for (const Block& b : blocks) {
        for (const Transaction& tx : b.txs) {
            if (const Status s = replay_tx(p, r, tx); !s.ok()) {
                return Result<Replay>::err(s.why, s.detail);
            }
        }
    }
    for (const Transaction& tx : pending) {
        if (const Status s = replay_tx(p, r, tx); !s.ok()) {
            return Result<Replay>::err(s.why, s.detail);
        }
    }
    return Result<Replay>::ok(std::move(r));
}

std::size_t policy_tx_count(const Block& b) {
    std::size_t n = 0;
    for (const auto& tx : b.txs) {
        if (tx.kind == TxKind::policy_update) ++n;
    }
    return n;
}

}  // namespace

Status validate_chain(const CryptoProvider& p, const LocalChain& chain) {
    // Hash links.
    for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
        const DataHash want =
            i == 0 ? DataHash{} : block_hash(p, chain.blocks[i - 1]);
        if (chain.blocks[i].prev_block != want) {
            return Status::fail(Reject::broken_chain, "block " + std::to_string(i));
        }
    }

    // Policy accounting: every local block carries a copy; version moves by
    // exactly the number of PolicyUpdate transactions inside.
    std::uint32_t version = 0;
    for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
        const Block& b = chain.blocks[i];
        if (!b.policy_copy) {
            return Status::fail(Reject::malformed, "block without policy copy");
        }
        const std::uint32_t want = version + static_cast<std::uint32_t>(policy_tx_count(b));
        if (b.policy_copy->version != want) {
            return Status::fail(Reject::malformed,
                                "policy version skip at block " + std::to_string(i));
        }
        version = b.policy_copy->version;
    }
    std::size_t pending_policy = 0;
    for (const auto& tx : chain.pending) {
        if (tx.kind == TxKind::policy_update) ++pending_policy;
    }
    if (chain.policy.version != version + pending_policy) {
        return Status::fail(Reject::malformed, "live policy version out of step");
    }

    // Ledger replay must land exactly on the recorded ledgers.
    auto replayed = replay_all(p, chain.blocks, chain.pending);
    if (!replayed) return replayed.status();
    if (replayed.value().ledgers != chain.ledgers) {
        return Status::fail(Reject::broken_chain, "ledger index out of step");
    }

    // Explicit chain walk: newest to genesis in exactly length-1 hops.
    for (const auto& [dev, ids] : chain.ledgers) {
        const auto& index = replayed.value().index;
        std::size_t hops = 0;
        const Transaction* cur = &index.at(ids.back().value);
        while (cur->prev_tx) {
            const auto it = index.find(cur->prev_tx->value);
            if (it == index.end()) return Status::fail(Reject::broken_chain, dev);
            cur = &it->second;
            ++hops;
            if (hops > ids.size()) return Status::fail(Reject::broken_chain, dev);
        }
        if (cur->kind != TxKind::genesis || hops != ids.size() - 1) {
            return Status::fail(Reject::broken_chain, dev);
        }
    }
    return Status::success();
}

std::string export_chain(const LocalChain& chain,
                         const std::map<std::string, PolicyHeader>& pending_policies) {
    std::ostringstream out;
    out << "homechain-chain v1\n";
    out << "policy " << hex_encode(canonical_bytes(chain.policy)) << "\n";
    for (const Block& b : chain.blocks) {
        out << "block " << hex_encode(block_bytes(b)) << "\n";
    }
    for (const Transaction& tx : chain.pending) {
        out << "pending " << hex_encode(full_bytes(tx)) << "\n";
    }
    for (const auto& [id, header] : pending_policies) {
        out << "pending_policy " << id << " " << hex_encode(canonical_bytes(header)) << "\n";
    }
    out << "end\n";
    return out.str();
}

Result<ChainImport> import_chain(const CryptoProvider& p, std::string_view dump) {
    using R = Result<ChainImport>;
    std::istringstream in{std::string(dump)};
    std::string line;
    if (!std::getline(in, line) || line != "homechain-chain v1") {
        return R::err(Reject::malformed, "bad dump preamble");
    }

    ChainImport out;
    bool saw_policy = false, saw_end = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "end") {
            saw_end = true;
            break;
        }
        std::string hex1, hex2;
        ls >> hex1;
        if (tag == "pending_policy") ls >> hex2;

        if (tag == "policy") {
            const auto raw = hex_decode(hex1);
            auto header = raw ? policy_header_from_bytes(ByteView(raw->data(), raw->size()))
                              : std::nullopt;
            if (!header) return R::err(Reject::malformed, "policy record");
            out.chain.policy = std::move(*header);
            saw_policy = true;
        } else if (tag == "block") {
            const auto raw = hex_decode(hex1);
            auto block = raw ? block_from_bytes(ByteView(raw->data(), raw->size()))
                             : std::nullopt;
            if (!block) return R::err(Reject::malformed, "block record");
            out.chain.blocks.push_back(std::move(*block));
        } else if (tag == "pending") {
            const auto raw = hex_decode(hex1);
            auto tx = raw ? transaction_from_full_bytes(ByteView(raw->data(), raw->size()))
                          : std::nullopt;
            if (!tx) return R::err(Reject::malformed, "pending record");
            out.chain.pending.push_back(std::move(*tx));
        } else if (tag == "pending_policy") {
            const auto raw = hex_decode(hex2);
            auto header = raw ? policy_header_from_bytes(ByteView(raw->data(), raw->size()))
                              : std::nullopt;
            if (!header || hex1.empty()) return R::err(Reject::malformed, "pending_policy record");
            out.pending_policies[hex1] = std::move(*header);
        } else {
            return R::err(Reject::malformed, "unknown record: " + tag);
        }
    }
    if (!saw_policy || !saw_end) return R::err(Reject::malformed, "truncated dump");

    auto replayed = replay_all(p, out.chain.blocks, out.chain.pending);
    if (!replayed) return R::err(replayed.why(), replayed.detail());
    out.chain.ledgers = std::move(replayed.value().ledgers);
    return R::ok(std::move(out));
}

}  // namespace homechain
