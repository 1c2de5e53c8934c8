#include "homechain/core/tx.hpp"

#include <algorithm>

namespace homechain {
namespace {

void put_opt_str(Bytes& out, const std::optional<std::string>& v) {
    put_u8(out, v ? 1 : 0);
    if (v) put_str(out, *v);
}

void put_opt_id(Bytes& out, const std::optional<RandomId>& v) {
    put_u8(out, v ? 1 : 0);
    if (v) put_str(out, v->value);
}

}  // namespace

std::string_view to_string(TxKind k) {
    switch (k) {
        case TxKind::genesis: return "genesis";
        case TxKind::store: return "store";
        case TxKind::access: return "access";
        case TxKind::monitor: return "monitor";
        case TxKind::policy_update: return "policy_update";
        case TxKind::remove_device: return "remove_device";
        case TxKind::breach_report: return "breach_report";
        case TxKind::signed_hash: return "signed_hash";
    }
    return "unknown";
}

std::optional<TxKind> tx_kind_from_string(std::string_view s) {
    for (std::uint8_t i = 0; i < 8; ++i) {
        const auto k = static_cast<TxKind>(i);
        if (s == to_string(k)) return k;
    }
    return std::nullopt;
}

std::string_view to_string(AccessScope s) {
    switch (s) {
        case AccessScope::latest: return "latest";
        case AccessScope::window: return "window";
        case AccessScope::full_chain: return "full_chain";
    }
    return "unknown";
}

Bytes canonical_bytes(const Transaction& tx) {
    Bytes out;
    put_u8(out, static_cast<std::uint8_t>(tx.kind));
    put_opt_str(out, tx.device);
    put_opt_id(out, tx.prev_tx);
    put_u8(out, tx.block_number ? 1 : 0);
    if (tx.block_number) put_blob(out, *tx.block_number);
    put_u8(out, tx.data_hash ? 1 : 0);
    if (tx.data_hash) {
        out.insert(out.end(), tx.data_hash->bytes.begin(), tx.data_hash->bytes.end());
    }
    put_u64(out, tx.timestamp);
    put_u8(out, tx.output_bit ? 1 : 0);
    if (tx.output_bit) put_u8(out, *tx.output_bit);
    put_u32(out, static_cast<std::uint32_t>(tx.payload_refs.size()));
    for (const auto& ref : tx.payload_refs) put_str(out, ref.value);
    put_u8(out, tx.scope ? 1 : 0);
    if (tx.scope) put_u8(out, static_cast<std::uint8_t>(*tx.scope));
    return out;
}

Bytes full_bytes(const Transaction& tx) {
    Bytes out = canonical_bytes(tx);
    put_u32(out, static_cast<std::uint32_t>(tx.signatures.size()));
    for (const auto& sig : tx.signatures) {
        put_str(out, sig.signer.id);
        put_blob(out, sig.value);
    }
    return out;
}

std::optional<Transaction> transaction_from_full_bytes(ByteView data) {
    ByteReader r(data);
    Transaction tx;

    const auto kind = r.u8();
    if (!kind || *kind > 7) return std::nullopt;
    tx.kind = static_cast<TxKind>(*kind);

    const auto has_device = r.u8();
    if (!has_device) return std::nullopt;
    if (*has_device) {
        auto s = r.str();
        if (!s) return std::nullopt;
        tx.device = std::move(*s);
    }
    const auto has_prev = r.u8();
    if (!has_prev) return std::nullopt;
    if (*has_prev) {
        auto s = r.str();
        if (!s) return std::nullopt;
        tx.prev_tx = RandomId{std::move(*s)};
    }
    const auto has_bn = r.u8();
    if (!has_bn) return std::nullopt;
    if (*has_bn) {
        auto b = r.blob();
        if (!b) return std::nullopt;
        tx.block_number = std::move(*b);
    }
    const auto has_hash = r.u8();
    if (!has_hash) return std::nullopt;
    if (*has_hash) {
        auto raw = r.raw(32);
        if (!raw) return std::nullopt;
        DataHash h;
        std::copy(raw->begin(), raw->end(), h.bytes.begin());
        tx.data_hash = h;
    }
    const auto ts = r.u64();
    if (!ts) return std::nullopt;
    tx.timestamp = *ts;
    const auto has_out = r.u8();
    if (!has_out) return std::nullopt;
    if (*has_out) {
        const auto bit = r.u8();
        if (!bit || *bit > 1) return std::nullopt;
        tx.output_bit = *bit;
    }
    const auto nrefs = r.u32();
    if (!nrefs || *nrefs > 1024) return std::nullopt;
    for (std::uint32_t i = 0; i < *nrefs; ++i) {
        auto s = r.str();
        if (!s) return std::nullopt;
        tx.payload_refs.push_back(RandomId{std::move(*s)});
    }
    const auto has_scope = r.u8();
    if (!has_scope) return std::nullopt;
    if (*has_scope) {
        const auto sc = r.u8();
        if (!sc || *sc > 2) return std::nullopt;
        tx.scope = static_cast<AccessScope>(*sc);
    }

    const auto nsigs = r.u32();
    if (!nsigs || *nsigs > 16) return std::nullopt;
    for (std::uint32_t i = 0; i < *nsigs; ++i) {
        auto signer = r.str();
        auto value = r.blob();
        if (!signer || !value) return std::nullopt;
        tx.signatures.push_back(Signature{PublicKey{std::move(*signer)}, std::move(*value)});
    }
    if (!r.done()) return std::nullopt;
    return tx;
}

bool originator_external(TxKind kind) {
    return kind == TxKind::access || kind == TxKind::monitor || kind == TxKind::signed_hash;
}

Bytes signing_bytes(const Transaction& tx, std::size_t slot) {
    if (slot > 0) return canonical_bytes(tx);
    Transaction form = tx;
    form.signatures.clear();
    form.output_bit.reset();
    if (originator_external(tx.kind)) form.prev_tx.reset();
    return canonical_bytes(form);
}

DataHash tx_id_hash(const CryptoProvider& p, const Transaction& tx) {
    const Bytes c = canonical_bytes(tx);
    return p.hash_bytes(ByteView(c.data(), c.size()));
}

RandomId tx_id(const CryptoProvider& p, const Transaction& tx) {
    return RandomId{tx_id_hash(p, tx).hex()};
}

std::size_t required_signatures(TxKind kind) {
    switch (kind) {
        case TxKind::access:
        case TxKind::signed_hash:
            return 2;
        default:
            return 1;
    }
}

Status check_tx_shape(const Transaction& tx) {
    switch (tx.kind) {
        case TxKind::breach_report:
            if (tx.payload_refs.size() != 2) {
                return Status::fail(Reject::malformed, "breach report needs two refs");
            }
            break;
        case TxKind::store:
            if (!tx.block_number || !tx.data_hash) {
                return Status::fail(Reject::malformed, "store needs block_number and data_hash");
            }
            break;
        case TxKind::access:
            if (!tx.scope) return Status::fail(Reject::malformed, "access needs a scope");
            break;
        case TxKind::genesis:
            if (tx.prev_tx) return Status::fail(Reject::malformed, "genesis cannot chain");
            break;
        default:
            break;
    }
    return Status::success();
}

Status validate_tx_signatures(const CryptoProvider& p, const Transaction& tx) {
    std::size_t present = 0;
    for (const auto& sig : tx.signatures) {
        if (sig.present()) ++present;
    }
    if (present < required_signatures(tx.kind)) {
        return Status::fail(Reject::missing_signature, std::string(to_string(tx.kind)));
    }
    for (std::size_t slot = 0; slot < tx.signatures.size(); ++slot) {
        const Signature& sig = tx.signatures[slot];
        if (!sig.present()) continue;
        const Bytes message = signing_bytes(tx, slot);
        if (!p.verify(sig.signer, ByteView(message.data(), message.size()), sig)) {
            return Status::fail(Reject::bad_signature, sig.signer.id);
        }
    }
    return Status::success();
}

void append_signature(const CryptoProvider& p, Transaction& tx, const PrivateKey& key) {
    const Bytes message = signing_bytes(tx, tx.signatures.size());
    tx.signatures.push_back(p.sign(key, ByteView(message.data(), message.size())));
}

}  // namespace homechain
