#include <mutex>
#include <unordered_set>
#include <vector>

#include <openssl/evp.h>

#include "homechain/core/crypto.hpp"

namespace homechain {
namespace {

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

[[noreturn]] void backend_fail(const char* what) {
    throw CryptoError(std::string("openssl failure in ") + what);
}

const std::uint8_t* ptr_or_dummy(ByteView v) {
    static const std::uint8_t dummy = 0;
    return v.empty() ? &dummy : v.data();
}

DataHash sha256(ByteView data) {
    DataHash out;
    unsigned int len = 0;
    if (EVP_Digest(ptr_or_dummy(data), data.size(), out.bytes.data(), &len, EVP_sha256(),
                   nullptr) != 1 ||
        len != 32) {
        backend_fail("sha256");
    }
    return out;
}

Bytes raw_public(EVP_PKEY* key) {
    std::size_t len = 0;
    if (EVP_PKEY_get_raw_public_key(key, nullptr, &len) != 1) backend_fail("raw public");
    Bytes out(len);
    if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1) backend_fail("raw public");
    out.resize(len);
    return out;
}

PkeyPtr raw_private(int type, ByteView seed) {
    PkeyPtr key(EVP_PKEY_new_raw_private_key(type, nullptr, seed.data(), seed.size()));
    if (!key) backend_fail("raw private key");
    return key;
}

// Key ids: "r1:<label>:<ed25519 pub hex>:<x25519 pub hex>". Agreement-only
// ephemeral ids leave the signing field empty.
struct IdParts {
    std::string label;
    Bytes ed_pub;
    Bytes x_pub;
};

std::optional<IdParts> parse_id(const std::string& id) {
    std::vector<std::string_view> parts;
    std::string_view rest = id;
    while (true) {
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos) {
            parts.push_back(rest);
            break;
        }
        parts.push_back(rest.substr(0, colon));
        rest = rest.substr(colon + 1);
    }
    if (parts.size() != 4 || parts[0] != "r1") return std::nullopt;
    IdParts out;
    out.label = std::string(parts[1]);
    if (!parts[2].empty()) {
        auto raw = hex_decode(parts[2]);
        if (!raw || raw->size() != 32) return std::nullopt;
        out.ed_pub = std::move(*raw);
    }
    if (!parts[3].empty()) {
        auto raw = hex_decode(parts[3]);
        if (!raw || raw->size() != 32) return std::nullopt;
        out.x_pub = std::move(*raw);
    }
    return out;
}

Bytes x25519_seed(ByteView ed_seed) {
    Bytes tagged = to_bytes(std::string_view("r1 agreement key"));
    tagged.insert(tagged.end(), ed_seed.begin(), ed_seed.end());
    const DataHash h = sha256(ByteView(tagged.data(), tagged.size()));
    return Bytes(h.bytes.begin(), h.bytes.end());
}

constexpr std::size_t kNonceLen = 12;
constexpr std::size_t kTagLen = 16;

class RealProvider final : public CryptoProvider {
public:
    std::string_view name() const override { return "r1"; }

    DataHash hash_bytes(ByteView data) const override {
        counters_.on_hash();
        return sha256(data);
    }

    KeyPair generate_keypair(DetRng& rng, std::string_view label) override {
        if (!label.empty()) {
            std::lock_guard lk(mu_);
            if (!labels_.insert(std::string(label)).second) {
                throw CryptoError("duplicate key label: " + std::string(label));
            }
        }
        const Bytes seed = rng.bytes(32);
        const PkeyPtr ed = raw_private(EVP_PKEY_ED25519, ByteView(seed.data(), seed.size()));
        const Bytes xs = x25519_seed(ByteView(seed.data(), seed.size()));
        const PkeyPtr x = raw_private(EVP_PKEY_X25519, ByteView(xs.data(), xs.size()));

        std::string id = "r1:";
        id += label;
        id += ':';
        id += hex_encode(to_view(raw_public(ed.get())));
        id += ':';
        id += hex_encode(to_view(raw_public(x.get())));
        return KeyPair{PublicKey{id}, PrivateKey{"r1", id, seed}};
    }

    Signature sign(const PrivateKey& key, ByteView message) const override {
        counters_.on_sign();
        require_tag(key.provider, key.id);
        if (key.secret.size() != 32) throw CryptoError("malformed private key: " + key.id);
        const PkeyPtr ed =
            raw_private(EVP_PKEY_ED25519, ByteView(key.secret.data(), key.secret.size()));
        MdCtxPtr ctx(EVP_MD_CTX_new());
        if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, ed.get()) != 1) {
            backend_fail("sign init");
        }
        Bytes sig(64);
        std::size_t len = sig.size();
        if (EVP_DigestSign(ctx.get(), sig.data(), &len, ptr_or_dummy(message), message.size()) !=
            1) {
            backend_fail("sign");
        }
        sig.resize(len);
        return Signature{PublicKey{key.id}, std::move(sig)};
    }

    bool verify(const PublicKey& key, ByteView message, const Signature& sig) const override {
        counters_.on_verify();
        require_r1_id(key.id);
        const auto parts = parse_id(key.id);
        if (!parts || parts->ed_pub.empty()) return false;
        PkeyPtr ed(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, parts->ed_pub.data(),
                                               parts->ed_pub.size()));
        if (!ed) return false;
        MdCtxPtr ctx(EVP_MD_CTX_new());
        if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, ed.get()) != 1) {
            backend_fail("verify init");
        }
        return EVP_DigestVerify(ctx.get(), sig.value.data(), sig.value.size(),
                                ptr_or_dummy(message), message.size()) == 1;
    }

    SharedKey derive_shared_key(const PrivateKey& mine, const PublicKey& theirs) const override {
        counters_.on_key_agreement();
        require_tag(mine.provider, mine.id);
        if (mine.secret.size() != 32) throw CryptoError("malformed private key: " + mine.id);
        const Bytes xs = x25519_seed(ByteView(mine.secret.data(), mine.secret.size()));
        return agree(ByteView(xs.data(), xs.size()), theirs);
    }

    PublicKey shared_public(const SharedKey& key) override {
        counters_.on_key_agreement();
        require_tag(key.provider, "shared key");
        const PkeyPtr x =
            raw_private(EVP_PKEY_X25519, ByteView(key.material.data(), key.material.size()));
        return PublicKey{"r1:eph::" + hex_encode(to_view(raw_public(x.get())))};
    }

    SharedKey chain_shared_key(const SharedKey& key, const PublicKey& theirs) const override {
        counters_.on_key_agreement();
        require_tag(key.provider, "shared key");
        return agree(ByteView(key.material.data(), key.material.size()), theirs);
    }

    Bytes encrypt(DetRng& rng, const SharedKey& key, ByteView plain, ByteView aad) const override {
        counters_.on_encrypt();
        require_tag(key.provider, "shared key");
        if (key.material.size() != 32) throw CryptoError("shared key must hold 32 bytes");
        Bytes out = rng.bytes(kNonceLen);
        out.resize(kNonceLen + plain.size() + kTagLen);

        CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
        if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceLen, nullptr) != 1 ||
            EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.material.data(), out.data()) != 1) {
            backend_fail("encrypt init");
        }
        int outl = 0;
        if (!aad.empty() &&
            EVP_EncryptUpdate(ctx.get(), nullptr, &outl, aad.data(), static_cast<int>(aad.size())) != 1) {
            backend_fail("encrypt aad");
        }
        if (EVP_EncryptUpdate(ctx.get(), out.data() + kNonceLen, &outl, ptr_or_dummy(plain),
                              static_cast<int>(plain.size())) != 1) {
            backend_fail("encrypt");
        }
        int finl = 0;
        if (EVP_EncryptFinal_ex(ctx.get(), out.data() + kNonceLen + outl, &finl) != 1) {
            backend_fail("encrypt final");
        }
        if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagLen,
                                out.data() + kNonceLen + plain.size()) != 1) {
            backend_fail("encrypt tag");
        }
        return out;
    }

    std::optional<Bytes> decrypt(const SharedKey& key, ByteView boxed, ByteView aad) const override {
        counters_.on_decrypt();
        require_tag(key.provider, "shared key");
        if (key.material.size() != 32) throw CryptoError("shared key must hold 32 bytes");
        if (boxed.size() < kNonceLen + kTagLen) return std::nullopt;
        const std::size_t clen = boxed.size() - kNonceLen - kTagLen;

        CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
        if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceLen, nullptr) != 1 ||
            EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.material.data(), boxed.data()) != 1) {
            backend_fail("decrypt init");
        }
        int outl = 0;
        if (!aad.empty() &&
            EVP_DecryptUpdate(ctx.get(), nullptr, &outl, aad.data(), static_cast<int>(aad.size())) != 1) {
            backend_fail("decrypt aad");
        }
        Bytes plain(clen);
        if (EVP_DecryptUpdate(ctx.get(), plain.data(), &outl, boxed.data() + kNonceLen,
                              static_cast<int>(clen)) != 1) {
            return std::nullopt;
        }
        Bytes tag(boxed.end() - kTagLen, boxed.end());
        if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagLen, tag.data()) != 1) {
            backend_fail("decrypt tag");
        }
        int finl = 0;
        if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + outl, &finl) != 1) {
            return std::nullopt;  // tag mismatch
        }
        return plain;
    }

private:
    static void require_tag(std::string_view tag, const std::string& what) {
        if (tag != "r1") throw CryptoError("r1 provider given foreign key: " + what);
    }

    static void require_r1_id(const std::string& id) {
        if (!id.starts_with("r1:")) throw CryptoError("r1 provider given foreign key: " + id);
    }

    static ByteView to_view(const Bytes& b) { return ByteView(b.data(), b.size()); }

    SharedKey agree(ByteView x_seed, const PublicKey& theirs) const {
        require_r1_id(theirs.id);
        const auto parts = parse_id(theirs.id);
        if (!parts || parts->x_pub.empty()) {
            throw CryptoError("unknown agreement key: " + theirs.id);
        }
        const PkeyPtr mine = raw_private(EVP_PKEY_X25519, x_seed);
        PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, parts->x_pub.data(),
                                                 parts->x_pub.size()));
        if (!peer) backend_fail("peer key");

        struct CtxDeleter {
            void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
        };
        std::unique_ptr<EVP_PKEY_CTX, CtxDeleter> ctx(EVP_PKEY_CTX_new(mine.get(), nullptr));
        if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
            EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1) {
            backend_fail("derive init");
        }
        std::size_t len = 0;
        if (EVP_PKEY_derive(ctx.get(), nullptr, &len) != 1) backend_fail("derive");
        Bytes raw(len);
        if (EVP_PKEY_derive(ctx.get(), raw.data(), &len) != 1) backend_fail("derive");
        raw.resize(len);

        Bytes tagged = to_bytes(std::string_view("r1 shared"));
        tagged.insert(tagged.end(), raw.begin(), raw.end());
        const DataHash h = sha256(ByteView(tagged.data(), tagged.size()));
        return SharedKey{"r1", Bytes(h.bytes.begin(), h.bytes.end())};
    }

    std::mutex mu_;
    std::unordered_set<std::string> labels_;
};

}  // namespace

std::unique_ptr<CryptoProvider> make_real_provider() {
    return std::make_unique<RealProvider>();
}

}  // namespace homechain
