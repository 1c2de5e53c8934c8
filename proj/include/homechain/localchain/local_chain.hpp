#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homechain/core/block.hpp"
#include "homechain/core/policy.hpp"
#include "homechain/core/result.hpp"
#include "homechain/core/tx.hpp"

namespace homechain {

// The home's chain: mined blocks plus the not-yet-mined tail. A transaction
// is effective the moment it enters pending ("immediate truth"); mining only
// packages. Per-device ledgers index every transaction of a device in order.
struct LocalChain {
    std::vector<Block> blocks;
    std::map<DeviceId, std::vector<RandomId>> ledgers;
    PolicyHeader policy;
    std::vector<Transaction> pending;
};

// Outcome of a policy lookup. For access requests `scope` is what actually
// got granted, which may be narrower than what was asked for.
struct PolicyDecision {
    bool allow = false;
    PrivacyLevel level = PrivacyLevel::minimal;
    std::optional<AccessScope> scope;
};

Action action_for_scope(AccessScope s);
bool is_access_action(Action a);

// Pure function of the header. Requests for more access than the rule grants
// degrade to the widest granted scope at minimal privacy rather than deny.
PolicyDecision evaluate_policy(const PolicyHeader& header, std::string_view subject,
                               std::string_view device, Action requested);

// Walks the whole structure: block hash links, policy version accounting
// (version moves by exactly the number of PolicyUpdate transactions a block
// carries), and per-device ledger chaining from genesis to tip.
Status validate_chain(const CryptoProvider& p, const LocalChain& chain);

// Structured-text dump, one record per line, hex payloads. Pending
// PolicyUpdate transactions carry their full header snapshot so an import
// can restore the live policy.
std::string export_chain(const LocalChain& chain,
                         const std::map<std::string, PolicyHeader>& pending_policies);
struct ChainImport {
    LocalChain chain;
    std::map<std::string, PolicyHeader> pending_policies;  // tx id -> header
};
Result<ChainImport> import_chain(const CryptoProvider& p, std::string_view dump);

}  // namespace homechain
