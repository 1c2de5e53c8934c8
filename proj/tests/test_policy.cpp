#include "doctest.h"

#include "homechain/core/policy.hpp"

using namespace homechain;

namespace {

PolicyRule rule(std::string subject, std::string device, std::initializer_list<Action> actions,
                PrivacyLevel privacy = PrivacyLevel::minimal) {
    PolicyRule r;
    r.subject = std::move(subject);
    r.device = std::move(device);
    for (const Action a : actions) r.actions |= action_bit(a);
    r.privacy = privacy;
    return r;
}

}  // namespace

TEST_CASE("rule validity") {
    CHECK(rule_valid(rule("owner", "thermostat", {Action::store_local})));
    CHECK(!rule_valid(rule("owner", "thermostat", {})));
    CHECK(!rule_valid(rule("sp", "cam", {Action::access_full_chain}, PrivacyLevel::minimal)));
    CHECK(rule_valid(rule("sp", "cam", {Action::access_full_chain}, PrivacyLevel::full_chain)));
}

TEST_CASE("lookup is exact on subject and device") {
    PolicyHeader h;
    REQUIRE(upsert_rule(h, rule("sp-1", "cam", {Action::access_latest})));
    REQUIRE(upsert_rule(h, rule("sp-1", "lock", {Action::monitor})));

    CHECK(policy_allows(h, "sp-1", "cam", Action::access_latest));
    CHECK(!policy_allows(h, "sp-1", "cam", Action::monitor));
    CHECK(!policy_allows(h, "sp-1", "door", Action::access_latest));
    CHECK(!policy_allows(h, "sp-2", "cam", Action::access_latest));
    CHECK(policy_allows(h, "sp-1", "lock", Action::monitor));
}

TEST_CASE("no permission without a rule") {
    const PolicyHeader empty;
    for (std::uint8_t i = 0; i < 8; ++i) {
        CHECK(!policy_allows(empty, "anyone", "anything", static_cast<Action>(i)));
    }
}

TEST_CASE("upsert replaces the existing pair row") {
    PolicyHeader h;
    REQUIRE(upsert_rule(h, rule("sp-1", "cam", {Action::access_latest})));
    REQUIRE(upsert_rule(h, rule("sp-1", "cam", {Action::monitor})));
    CHECK(h.rules.size() == 1);
    CHECK(!policy_allows(h, "sp-1", "cam", Action::access_latest));
    CHECK(policy_allows(h, "sp-1", "cam", Action::monitor));

    CHECK(!upsert_rule(h, rule("sp-1", "cam", {})));
    CHECK(h.rules.size() == 1);
}

TEST_CASE("dropping a device clears rows where it appears on either side") {
    PolicyHeader h;
    REQUIRE(upsert_rule(h, rule("sp-1", "cam", {Action::access_latest})));
    REQUIRE(upsert_rule(h, rule("cam", "lock", {Action::device_to_device})));
    REQUIRE(upsert_rule(h, rule("sp-1", "lock", {Action::monitor})));

    CHECK(drop_device_rules(h, "cam") == 2);
    CHECK(h.rules.size() == 1);
    CHECK(policy_allows(h, "sp-1", "lock", Action::monitor));
}

TEST_CASE("policy header canonical bytes round trip") {
    PolicyHeader h;
    h.version = 7;
    REQUIRE(upsert_rule(h, rule("owner-pk", "cam", {Action::store_local, Action::store_cloud})));
    REQUIRE(upsert_rule(
        h, rule("sp-9", "cam", {Action::access_full_chain}, PrivacyLevel::full_chain)));

    const Bytes raw = canonical_bytes(h);
    const auto back = policy_header_from_bytes(ByteView(raw.data(), raw.size()));
    REQUIRE(back.has_value());
    CHECK(*back == h);
}

TEST_CASE("action names round trip") {
    for (std::uint8_t i = 0; i < 8; ++i) {
        const auto a = static_cast<Action>(i);
        CHECK(action_from_string(to_string(a)) == a);
    }
    CHECK(!action_from_string("fly").has_value());
    CHECK(privacy_from_string("minimal") == PrivacyLevel::minimal);
    CHECK(privacy_from_string("full_chain") == PrivacyLevel::full_chain);
    CHECK(!privacy_from_string("zero").has_value());
}
