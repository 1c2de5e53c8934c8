#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace homechain {

// Reason codes for every rejection/denial surfaced by the protocol layers.
// Denies are values, not exceptions.
enum class Reject {
    none = 0,
    duplicate_device,
    unknown_device,
    no_ledger,
    no_starting_transaction,
    broken_chain,
    policy_denied,
    owner_auth,
    missing_signature,
    bad_signature,
    malformed,
    provider_mismatch,
    auth_failed,        // AEAD / MAC integrity failure
    storage_auth,       // (block_number, hash) pair did not authenticate
    hash_mismatch,
    no_capacity,
    already_chained,
    unknown_block,
    unknown_account,
    device_offline,
    no_shared_key,
    blocked_pk,
    unverifiable,
    not_found,
    invalid_params,
    nothing_pending,
    duplicate_id,
    unrecoverable,
};

std::string_view to_string(Reject r);

struct Status {
    Reject why = Reject::none;
    std::string detail;

    bool ok() const { return why == Reject::none; }
    static Status success() { return {}; }
    static Status fail(Reject r, std::string d = {}) { return {r, std::move(d)}; }
};

template <typename T>
class Result {
public:
    static Result ok(T v) {
        Result r;
        r.value_ = std::move(v);
        return r;
    }
    static Result err(Reject why, std::string detail = {}) {
        Result r;
        r.why_ = why;
        r.detail_ = std::move(detail);
        return r;
    }

    bool ok() const { return value_.has_value(); }
    explicit operator bool() const { return ok(); }
    const T& value() const { return *value_; }
    T& value() { return *value_; }
    T take() { return std::move(*value_); }
    Reject why() const { return why_; }
    const std::string& detail() const { return detail_; }
    Status status() const { return ok() ? Status::success() : Status{why_, detail_}; }

private:
    std::optional<T> value_;
    Reject why_ = Reject::none;
    std::string detail_;
};

}  // namespace homechain
