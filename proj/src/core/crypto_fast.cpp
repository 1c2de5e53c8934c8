#include <cstring>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "homechain/core/crypto.hpp"

namespace homechain {
namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Toy multiplicative group for key agreement: Z_p^* with the Mersenne prime
// p = 2^61 - 1 and generator 3. Small enough for exhaustive tests, large
// enough that colliding shared secrets never happen by accident.
constexpr u64 kPrime = (1ULL << 61) - 1;
constexpr u64 kGen = 3;

u64 mulmod(u64 a, u64 b) { return static_cast<u64>((static_cast<u128>(a) * b) % kPrime); }

u64 powmod(u64 base, u64 exp) {
    u64 acc = 1;
    base %= kPrime;
    while (exp != 0) {
        if (exp & 1ULL) acc = mulmod(acc, base);
        base = mulmod(base, base);
        exp >>= 1;
    }
    return acc;
}

u64 mix64(u64 x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

u64 load_le(const std::uint8_t* p, std::size_t n) {
    u64 w = 0;
    for (std::size_t i = 0; i < n; ++i) w |= static_cast<u64>(p[i]) << (8 * i);
    return w;
}

void store_le(std::uint8_t* p, u64 w) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(w >> (8 * i));
}

// Four-lane absorb/finalize digest over arbitrary bytes. Not cryptographic;
// stands in for SHA-256 in simulation runs where only collision-freeness
// across the run matters.
struct Lanes {
    u64 lane[4] = {0x6a09e667f3bcc908ULL, 0xbb67ae8584caa73bULL, 0x3c6ef372fe94f82bULL,
                   0xa54ff53a5f1d36f1ULL};
    u64 absorbed = 0;

    void absorb_word(u64 w) {
        const std::size_t i = absorbed & 3;
        lane[i] = mix64(lane[i] ^ w ^ (absorbed * 0x9e3779b97f4a7c15ULL));
        ++absorbed;
    }

    void absorb(ByteView data) {
        std::size_t off = 0;
        while (off + 8 <= data.size()) {
            absorb_word(load_le(data.data() + off, 8));
            off += 8;
        }
        if (off < data.size()) {
            absorb_word(load_le(data.data() + off, data.size() - off) |
                        (static_cast<u64>(data.size() - off) << 56));
        }
        absorb_word(0x1000000000000000ULL ^ data.size());
    }

    DataHash finalize() const {
        DataHash out;
        u64 l0 = lane[0], l1 = lane[1], l2 = lane[2], l3 = lane[3];
        // Two passes so every output lane depends on every input lane; the
        // first 16 bytes get truncated into signatures and tags.
        l0 = mix64(l0 + l3);
        l1 = mix64(l1 + l0);
        l2 = mix64(l2 + l1);
        l3 = mix64(l3 + l2);
        l0 = mix64(l0 + l3);
        l1 = mix64(l1 + l0);
        store_le(out.bytes.data() + 0, l0);
        store_le(out.bytes.data() + 8, l1);
        store_le(out.bytes.data() + 16, l2);
        store_le(out.bytes.data() + 24, l3);
        return out;
    }
};

DataHash mix_digest(std::initializer_list<ByteView> parts) {
    Lanes st;
    for (const auto part : parts) st.absorb(part);
    return st.finalize();
}

u64 fold_to_scalar(ByteView material) {
    Lanes st;
    st.absorb(material);
    const DataHash h = st.finalize();
    const u64 w = load_le(h.bytes.data(), 8);
    return 1 + (w % (kPrime - 2));  // scalar in [1, p-2]
}

std::string eph_id(u64 group_element) {
    std::uint8_t raw[8];
    store_le(raw, group_element);
    return "fast:eph:" + hex_encode(ByteView(raw, 8));
}

constexpr std::size_t kSigLen = 16;
constexpr std::size_t kNonceLen = 12;
constexpr std::size_t kTagLen = 16;

class FastProvider final : public CryptoProvider {
public:
    std::string_view name() const override { return "fast"; }

    DataHash hash_bytes(ByteView data) const override {
        counters_.on_hash();
        Lanes st;
        st.absorb(data);
        return st.finalize();
    }

    KeyPair generate_keypair(DetRng& rng, std::string_view label) override {
        std::string id = "fast:";
        if (label.empty()) {
            id += "k" + rng.token(48);
        } else {
            id += std::string(label);
        }
        const Bytes sign_secret = rng.bytes(16);
        const u64 scalar = 1 + rng.bounded(kPrime - 2);
        const u64 pub_val = powmod(kGen, scalar);

        {
            std::unique_lock lk(mu_);
            if (table_.contains(id)) throw CryptoError("duplicate key label: " + id);
            table_[id] = Entry{sign_secret, scalar, pub_val};
        }

        Bytes secret = sign_secret;
        secret.resize(16 + 8);
        store_le(secret.data() + 16, scalar);
        return KeyPair{PublicKey{id}, PrivateKey{"fast", id, std::move(secret)}};
    }

    Signature sign(const PrivateKey& key, ByteView message) const override {
        counters_.on_sign();
        require_tag(key.provider, key.id);
        if (key.secret.size() < 16) throw CryptoError("malformed private key: " + key.id);
        const Bytes sig = sig_bytes(ByteView(key.secret.data(), 16), message);
        return Signature{PublicKey{key.id}, sig};
    }

    bool verify(const PublicKey& key, ByteView message, const Signature& sig) const override {
        counters_.on_verify();
        require_fast_id(key.id);
        if (sig.value.size() != kSigLen) return false;
        Bytes secret;
        {
            std::shared_lock lk(mu_);
            const auto it = table_.find(key.id);
            if (it == table_.end() || it->second.sign_secret.empty()) return false;
            secret = it->second.sign_secret;
        }
        return sig_bytes(ByteView(secret.data(), secret.size()), message) == sig.value;
    }

    SharedKey derive_shared_key(const PrivateKey& mine, const PublicKey& theirs) const override {
        counters_.on_key_agreement();
        require_tag(mine.provider, mine.id);
        if (mine.secret.size() != 24) throw CryptoError("malformed private key: " + mine.id);
        const u64 my_scalar = load_le(mine.secret.data() + 16, 8);
        return expand_shared(powmod(public_value_of(theirs), my_scalar));
    }

    PublicKey shared_public(const SharedKey& key) override {
        counters_.on_key_agreement();
        require_tag(key.provider, "shared key");
        const u64 scalar = fold_to_scalar(ByteView(key.material.data(), key.material.size()));
        const u64 pub_val = powmod(kGen, scalar);
        PublicKey pub{eph_id(pub_val)};
        std::unique_lock lk(mu_);
        table_.emplace(pub.id, Entry{{}, scalar, pub_val});
        return pub;
    }

    SharedKey chain_shared_key(const SharedKey& key, const PublicKey& theirs) const override {
        counters_.on_key_agreement();
        require_tag(key.provider, "shared key");
        const u64 scalar = fold_to_scalar(ByteView(key.material.data(), key.material.size()));
        return expand_shared(powmod(public_value_of(theirs), scalar));
    }

    Bytes encrypt(DetRng& rng, const SharedKey& key, ByteView plain, ByteView aad) const override {
        counters_.on_encrypt();
        require_tag(key.provider, "shared key");
        const Bytes nonce = rng.bytes(kNonceLen);
        const u64 k0 = fold_to_scalar(ByteView(key.material.data(), key.material.size()));
        const u64 n0 =
            load_le(nonce.data(), 8) ^ (static_cast<u64>(load_le(nonce.data() + 8, 4)) << 32);

        Bytes out = nonce;
        out.resize(kNonceLen + plain.size());
        for (std::size_t i = 0; i < plain.size(); ++i) {
            const u64 word = mix64(k0 ^ mix64(n0 + (i / 8)));
            out[kNonceLen + i] =
                plain[i] ^ static_cast<std::uint8_t>(word >> (8 * (i & 7)));
        }
        const Bytes tag = auth_tag(key, ByteView(nonce.data(), nonce.size()), aad,
                                   ByteView(out.data() + kNonceLen, plain.size()));
        out.insert(out.end(), tag.begin(), tag.end());
        return out;
    }

    std::optional<Bytes> decrypt(const SharedKey& key, ByteView boxed, ByteView aad) const override {
        counters_.on_decrypt();
        require_tag(key.provider, "shared key");
        if (boxed.size() < kNonceLen + kTagLen) return std::nullopt;
        const ByteView nonce(boxed.data(), kNonceLen);
        const ByteView cipher(boxed.data() + kNonceLen, boxed.size() - kNonceLen - kTagLen);
        const ByteView tag(boxed.data() + boxed.size() - kTagLen, kTagLen);
        const Bytes expect = auth_tag(key, nonce, aad, cipher);
        if (!std::equal(expect.begin(), expect.end(), tag.begin())) return std::nullopt;

        const u64 k0 = fold_to_scalar(ByteView(key.material.data(), key.material.size()));
        const u64 n0 =
            load_le(boxed.data(), 8) ^ (static_cast<u64>(load_le(boxed.data() + 8, 4)) << 32);
        Bytes plain(cipher.size());
        for (std::size_t i = 0; i < cipher.size(); ++i) {
            const u64 word = mix64(k0 ^ mix64(n0 + (i / 8)));
            plain[i] = cipher[i] ^ static_cast<std::uint8_t>(word >> (8 * (i & 7)));
        }
        return plain;
    }

private:
    struct Entry {
        Bytes sign_secret;  // empty for ephemeral agreement-only entries
        u64 dh_scalar = 0;
        u64 dh_public = 0;
    };

    static void require_tag(std::string_view tag, const std::string& what) {
        if (tag != "fast") throw CryptoError("fast provider given foreign key: " + what);
    }

    static void require_fast_id(const std::string& id) {
        if (!id.starts_with("fast:")) throw CryptoError("fast provider given foreign key: " + id);
    }

    u64 public_value_of(const PublicKey& theirs) const {
        if (!theirs.id.starts_with("fast:")) {
            throw CryptoError("fast provider given foreign key: " + theirs.id);
        }
        {
            std::shared_lock lk(mu_);
            const auto it = table_.find(theirs.id);
            if (it != table_.end()) return it->second.dh_public;
        }
        // Ephemeral ids embed the group element; usable without registration.
        static constexpr std::string_view kEph = "fast:eph:";
        if (theirs.id.starts_with(kEph)) {
            const auto raw = hex_decode(std::string_view(theirs.id).substr(kEph.size()));
            if (raw && raw->size() == 8) return load_le(raw->data(), 8);
        }
        throw CryptoError("unknown agreement key: " + theirs.id);
    }

    static Bytes sig_bytes(ByteView secret, ByteView message) {
        const DataHash h = mix_digest({secret, message});
        return Bytes(h.bytes.begin(), h.bytes.begin() + kSigLen);
    }

    static Bytes auth_tag(const SharedKey& key, ByteView nonce, ByteView aad, ByteView cipher) {
        const DataHash h = mix_digest(
            {ByteView(key.material.data(), key.material.size()), nonce, aad, cipher});
        return Bytes(h.bytes.begin(), h.bytes.begin() + kTagLen);
    }

    static SharedKey expand_shared(u64 element) {
        std::uint8_t raw[8];
        store_le(raw, element);
        const DataHash h = mix_digest({to_bytes(std::string_view("fast shared")), ByteView(raw, 8)});
        return SharedKey{"fast", Bytes(h.bytes.begin(), h.bytes.end())};
    }

    mutable std::shared_mutex mu_;
    std::unordered_map<std::string, Entry> table_;
};

}  // namespace

std::unique_ptr<CryptoProvider> make_fast_provider() {
    return std::make_unique<FastProvider>();
}

}  // namespace homechain
