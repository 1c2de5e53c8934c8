#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>

#include "homechain/core/bytes.hpp"

namespace homechain {

// Keys are referred to by printable identifiers everywhere above the crypto
// provider; the provider resolves an id to actual key material. This keeps
// ledger structures and wire dumps readable and provider-independent.
struct PublicKey {
    std::string id;

    bool empty() const { return id.empty(); }
    auto operator<=>(const PublicKey&) const = default;
};

struct PrivateKey {
    std::string provider;  // provider tag the key belongs to
    std::string id;        // matches the paired PublicKey id
    Bytes secret;

    bool empty() const { return secret.empty(); }
};

struct KeyPair {
    PublicKey pub;
    PrivateKey priv;
};

// 256-bit digest.
struct DataHash {
    std::array<std::uint8_t, 32> bytes{};

    std::string hex() const { return hex_encode(ByteView(bytes.data(), bytes.size())); }
    bool is_zero() const {
        for (const auto b : bytes) {
            if (b != 0) return false;
        }
        return true;
    }
    auto operator<=>(const DataHash&) const = default;
};

struct DataHashHasher {
    std::size_t operator()(const DataHash& h) const {
        std::size_t v = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
            v = (v << 8) | h.bytes[i];
        }
        return v;
    }
};

// Opaque random identifier (transaction ids in ledgers, request ids, account
// tokens). Stored as lowercase hex.
struct RandomId {
    std::string value;

    bool empty() const { return value.empty(); }
    auto operator<=>(const RandomId&) const = default;
};

struct RandomIdHasher {
    std::size_t operator()(const RandomId& id) const {
        return std::hash<std::string>{}(id.value);
    }
};

struct Signature {
    PublicKey signer;
    Bytes value;

    bool present() const { return !value.empty(); }
    bool operator==(const Signature&) const = default;
};

// Symmetric key agreed between two (or, by chaining, more) parties.
struct SharedKey {
    std::string provider;
    Bytes material;

    bool empty() const { return material.empty(); }
    bool operator==(const SharedKey& o) const {
        return provider == o.provider && material == o.material;
    }
};

using DeviceId = std::string;

}  // namespace homechain
