#include "homechain/core/policy.hpp"

#include <algorithm>

namespace homechain {

std::string_view to_string(Action a) {
    switch (a) {
        case Action::store_local: return "store_local";
        case Action::store_shared: return "store_shared";
        case Action::store_cloud: return "store_cloud";
        case Action::access_latest: return "access_latest";
        case Action::access_window: return "access_window";
        case Action::access_full_chain: return "access_full_chain";
        case Action::monitor: return "monitor";
        case Action::device_to_device: return "device_to_device";
    }
    return "unknown";
}

std::optional<Action> action_from_string(std::string_view s) {
    for (std::uint8_t i = 0; i < 8; ++i) {
        const auto a = static_cast<Action>(i);
        if (s == to_string(a)) return a;
    }
    return std::nullopt;
}

std::string_view to_string(PrivacyLevel p) {
    return p == PrivacyLevel::full_chain ? "full_chain" : "minimal";
}

std::optional<PrivacyLevel> privacy_from_string(std::string_view s) {
    if (s == "minimal") return PrivacyLevel::minimal;
    if (s == "full_chain") return PrivacyLevel::full_chain;
    return std::nullopt;
}

bool rule_valid(const PolicyRule& rule) {
    if (rule.actions == 0) return false;
    if (rule.grants(Action::access_full_chain) && rule.privacy != PrivacyLevel::full_chain) {
        return false;
    }
    return true;
}

const PolicyRule* find_rule(const PolicyHeader& header, std::string_view subject,
                            std::string_view device) {
    for (const auto& rule : header.rules) {
        if (rule.subject == subject && rule.device == device) return &rule;
    }
    return nullptr;
}

bool policy_allows(const PolicyHeader& header, std::string_view subject,
                   std::string_view device, Action action) {
    const PolicyRule* rule = find_rule(header, subject, device);
    return rule != nullptr && rule->grants(action);
}

bool upsert_rule(PolicyHeader& header, const PolicyRule& rule) {
    if (!rule_valid(rule)) return false;
    for (auto& existing : header.rules) {
        if (existing.subject == rule.subject && existing.device == rule.device) {
            existing = rule;
            return true;
        }
    }
    header.rules.push_back(rule);
    return true;
}

std::size_t drop_device_rules(PolicyHeader& header, std::string_view device) {
    const auto first = std::remove_if(
        header.rules.begin(), header.rules.end(),
        [&](const PolicyRule& r) { return r.device == device || r.subject == device; });
    const auto removed = static_cast<std::size_t>(header.rules.end() - first);
    header.rules.erase(first, header.rules.end());
    return removed;
}

Bytes canonical_bytes(const PolicyRule& rule) {
    Bytes out;
    put_str(out, rule.subject);
    put_str(out, rule.device);
    put_u8(out, rule.actions);
    put_u8(out, static_cast<std::uint8_t>(rule.privacy));
    return out;
}

Bytes canonical_bytes(const PolicyHeader& header) {
    Bytes out;
    put_u32(out, header.version);
    put_u32(out, static_cast<std::uint32_t>(header.rules.size()));
    for (const auto& rule : header.rules) {
        const Bytes r = canonical_bytes(rule);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

std::optional<PolicyHeader> policy_header_from_bytes(ByteView data) {
    ByteReader r(data);
    PolicyHeader header;
    const auto version = r.u32();
    const auto count = r.u32();
    if (!version || !count || *count > 4096) return std::nullopt;
    header.version = *version;
    header.rules.reserve(*count);
    for (std::uint32_t i = 0; i < *count; ++i) {
        PolicyRule rule;
        auto subject = r.str();
        auto device = r.str();
        const auto actions = r.u8();
        const auto privacy = r.u8();
        if (!subject || !device || !actions || !privacy || *privacy > 1) return std::nullopt;
        rule.subject = std::move(*subject);
        rule.device = std::move(*device);
        rule.actions = *actions;
        rule.privacy = static_cast<PrivacyLevel>(*privacy);
        header.rules.push_back(std::move(rule));
    }
    if (!r.done()) return std::nullopt;
    return header;
}

}  // namespace homechain
