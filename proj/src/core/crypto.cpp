#include "homechain/core/crypto.hpp"

#include "homechain/core/result.hpp"

namespace homechain {

std::unique_ptr<CryptoProvider> make_provider(std::string_view name) {
    if (name == "fast") return make_fast_provider();
    if (name == "real" || name == "r1") return make_real_provider();
    throw CryptoError("unknown crypto provider: " + std::string(name));
}

Bytes encrypt_block_number(CryptoProvider& p, DetRng& rng, const SharedKey& key,
                           const RandomId& block_number) {
    static constexpr std::string_view kAad = "block-number";
    return p.encrypt(rng, key, to_bytes(block_number.value), to_bytes(kAad));
}

std::optional<RandomId> decrypt_block_number(CryptoProvider& p, const SharedKey& key,
                                             ByteView boxed) {
    static constexpr std::string_view kAad = "block-number";
    auto plain = p.decrypt(key, boxed, to_bytes(kAad));
    if (!plain) return std::nullopt;
    return RandomId{to_string(ByteView(plain->data(), plain->size()))};
}

std::string_view to_string(Reject r) {
    switch (r) {
        case Reject::none: return "none";
        case Reject::duplicate_device: return "duplicate_device";
        case Reject::unknown_device: return "unknown_device";
        case Reject::no_ledger: return "no_ledger";
        case Reject::no_starting_transaction: return "no_starting_transaction";
        case Reject::broken_chain: return "broken_chain";
        case Reject::policy_denied: return "policy_denied";
        case Reject::owner_auth: return "owner_auth";
        case Reject::missing_signature: return "missing_signature";
        case Reject::bad_signature: return "bad_signature";
        case Reject::malformed: return "malformed";
        case Reject::provider_mismatch: return "provider_mismatch";
        case Reject::auth_failed: return "auth_failed";
        case Reject::storage_auth: return "storage_auth";
        case Reject::hash_mismatch: return "hash_mismatch";
        case Reject::no_capacity: return "no_capacity";
        case Reject::already_chained: return "already_chained";
        case Reject::unknown_block: return "unknown_block";
        case Reject::unknown_account: return "unknown_account";
        case Reject::device_offline: return "device_offline";
        case Reject::no_shared_key: return "no_shared_key";
        case Reject::blocked_pk: return "blocked_pk";
        case Reject::unverifiable: return "unverifiable";
        case Reject::not_found: return "not_found";
        case Reject::invalid_params: return "invalid_params";
        case Reject::nothing_pending: return "nothing_pending";
        case Reject::duplicate_id: return "duplicate_id";
        case Reject::unrecoverable: return "unrecoverable";
    }
    return "unknown";
}

}  // namespace homechain
