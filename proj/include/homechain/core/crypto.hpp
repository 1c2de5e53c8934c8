#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "homechain/core/bytes.hpp"
#include "homechain/core/rng.hpp"
#include "homechain/core/types.hpp"

namespace homechain {

// Misuse of the crypto layer (wrong provider for a key, malformed key ids,
// backend failure). Adversarial inputs never throw; they fail verification.
class CryptoError : public std::runtime_error {
public:
    explicit CryptoError(const std::string& what) : std::runtime_error(what) {}
};

struct CryptoCounterSnapshot {
    std::uint64_t hashes = 0;
    std::uint64_t signs = 0;
    std::uint64_t verifies = 0;
    std::uint64_t key_agreements = 0;
    std::uint64_t encrypts = 0;
    std::uint64_t decrypts = 0;

    std::uint64_t total() const {
        return hashes + signs + verifies + key_agreements + encrypts + decrypts;
    }
    CryptoCounterSnapshot operator-(const CryptoCounterSnapshot& o) const {
        return {hashes - o.hashes,         signs - o.signs,       verifies - o.verifies,
                key_agreements - o.key_agreements, encrypts - o.encrypts, decrypts - o.decrypts};
    }
};

class CryptoCounters {
public:
    void on_hash() { ++hashes_; }
    void on_sign() { ++signs_; }
    void on_verify() { ++verifies_; }
    void on_key_agreement() { ++key_agreements_; }
    void on_encrypt() { ++encrypts_; }
    void on_decrypt() { ++decrypts_; }

    CryptoCounterSnapshot snapshot() const {
        return {hashes_.load(),         signs_.load(),    verifies_.load(),
                key_agreements_.load(), encrypts_.load(), decrypts_.load()};
    }

private:
    std::atomic<std::uint64_t> hashes_{0};
    std::atomic<std::uint64_t> signs_{0};
    std::atomic<std::uint64_t> verifies_{0};
    std::atomic<std::uint64_t> key_agreements_{0};
    std::atomic<std::uint64_t> encrypts_{0};
    std::atomic<std::uint64_t> decrypts_{0};
};

// Pluggable cryptography. Two backends ship:
//   "fast"  deterministic toy primitives for simulation runs, cheap and seeded
//   "r1"    SHA-256 / Ed25519 / X25519 / AES-256-GCM via OpenSSL
// Key ids carry the provider tag as a prefix; handing a key to the wrong
// provider raises CryptoError rather than silently failing verification.
class CryptoProvider {
public:
    virtual ~CryptoProvider() = default;

    virtual std::string_view name() const = 0;

    virtual DataHash hash_bytes(ByteView data) const = 0;

    // `label` becomes part of the public key id when given; pass empty for an
    // anonymous key. Duplicate labels raise CryptoError.
    virtual KeyPair generate_keypair(DetRng& rng, std::string_view label) = 0;

    virtual Signature sign(const PrivateKey& key, ByteView message) const = 0;

    // false on bad signature or unknown/forged key id of the right provider.
    virtual bool verify(const PublicKey& key, ByteView message,
                        const Signature& sig) const = 0;

    // Two-party key agreement; commutative in the pair.
    virtual SharedKey derive_shared_key(const PrivateKey& mine,
                                        const PublicKey& theirs) const = 0;

    // Public value of a shared key reinterpreted as a private scalar. Together
    // with chain_shared_key this extends agreement to any number of parties:
    //   chain_shared_key(k, pub_c) == derive_shared_key(priv_c, shared_public(k))
    virtual PublicKey shared_public(const SharedKey& key) = 0;
    virtual SharedKey chain_shared_key(const SharedKey& key,
                                       const PublicKey& theirs) const = 0;

    // Authenticated encryption. Box layout: nonce(12) || ciphertext || tag(16).
    virtual Bytes encrypt(DetRng& rng, const SharedKey& key, ByteView plain,
                          ByteView aad) const = 0;
    // nullopt when the tag or aad does not check out.
    virtual std::optional<Bytes> decrypt(const SharedKey& key, ByteView boxed,
                                         ByteView aad) const = 0;

    const CryptoCounters& counters() const { return counters_; }
    CryptoCounterSnapshot counter_snapshot() const { return counters_.snapshot(); }

protected:
    mutable CryptoCounters counters_;
};

std::unique_ptr<CryptoProvider> make_fast_provider();
std::unique_ptr<CryptoProvider> make_real_provider();

// name: "fast" or "real". Unknown names raise CryptoError.
std::unique_ptr<CryptoProvider> make_provider(std::string_view name);

// Block-number tokens travel encrypted under the key shared between a storage
// account holder and the store.
Bytes encrypt_block_number(CryptoProvider& p, DetRng& rng, const SharedKey& key,
                           const RandomId& block_number);
std::optional<RandomId> decrypt_block_number(CryptoProvider& p, const SharedKey& key,
                                             ByteView boxed);

}  // namespace homechain
