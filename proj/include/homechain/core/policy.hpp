#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homechain/core/bytes.hpp"
#include "homechain/core/types.hpp"

namespace homechain {

// Operations a policy rule can grant. Values are wire tags; do not reorder.
enum class Action : std::uint8_t {
    store_local = 0,
    store_shared = 1,
    store_cloud = 2,
    access_latest = 3,
    access_window = 4,
    access_full_chain = 5,
    monitor = 6,
    device_to_device = 7,
};

inline constexpr std::uint8_t action_bit(Action a) {
    return static_cast<std::uint8_t>(1u << static_cast<std::uint8_t>(a));
}

std::string_view to_string(Action a);
std::optional<Action> action_from_string(std::string_view s);

// What the responder may hand back to this subject: everything, or the
// ledger data run through the minimisation transform first.
enum class PrivacyLevel : std::uint8_t {
    minimal = 0,
    full_chain = 1,
};

std::string_view to_string(PrivacyLevel p);
std::optional<PrivacyLevel> privacy_from_string(std::string_view s);

// One access-control row. `subject` is a public key id (off-home requesters)
// or a device id (in-home peers). At most one rule exists per (subject,
// device) pair in a header.
struct PolicyRule {
    std::string subject;
    DeviceId device;
    std::uint8_t actions = 0;  // bitmask of action_bit()
    PrivacyLevel privacy = PrivacyLevel::minimal;

    bool grants(Action a) const { return (actions & action_bit(a)) != 0; }
    bool operator==(const PolicyRule&) const = default;
};

// actions must be non-empty; full-chain access implies full-chain privacy.
bool rule_valid(const PolicyRule& rule);

// Owner's access-control list. A copy rides in every mined block so the
// latest block always carries the policy in force.
struct PolicyHeader {
    std::uint32_t version = 0;
    std::vector<PolicyRule> rules;

    bool operator==(const PolicyHeader&) const = default;
};

const PolicyRule* find_rule(const PolicyHeader& header, std::string_view subject,
                            std::string_view device);

bool policy_allows(const PolicyHeader& header, std::string_view subject,
                   std::string_view device, Action action);

// Insert or replace the (subject, device) row. Returns false (and leaves the
// header untouched) when the rule is invalid. Does not bump the version;
// callers owning the header do that once per change batch.
bool upsert_rule(PolicyHeader& header, const PolicyRule& rule);

// Drop every rule touching the device (as device or as subject). Returns the
// number of rules removed.
std::size_t drop_device_rules(PolicyHeader& header, std::string_view device);

Bytes canonical_bytes(const PolicyRule& rule);
Bytes canonical_bytes(const PolicyHeader& header);
std::optional<PolicyHeader> policy_header_from_bytes(ByteView data);

}  // namespace homechain
