#include "homechain/core/block.hpp"

#include <algorithm>

namespace homechain {

Bytes block_bytes(const Block& block) {
    Bytes out;
    out.insert(out.end(), block.prev_block.bytes.begin(), block.prev_block.bytes.end());
    put_u8(out, block.policy_copy ? 1 : 0);
    if (block.policy_copy) put_blob(out, canonical_bytes(*block.policy_copy));
    put_u8(out, block.trust_multisig ? 1 : 0);
    if (block.trust_multisig) put_blob(out, full_bytes(*block.trust_multisig));
    put_u32(out, static_cast<std::uint32_t>(block.txs.size()));
    for (const auto& tx : block.txs) put_blob(out, full_bytes(tx));
    put_str(out, block.miner.id);
    return out;
}

std::optional<Block> block_from_bytes(ByteView data) {
    ByteReader r(data);
    Block block;

    const auto prev = r.raw(32);
    if (!prev) return std::nullopt;
    std::copy(prev->begin(), prev->end(), block.prev_block.bytes.begin());

    const auto has_policy = r.u8();
    if (!has_policy) return std::nullopt;
    if (*has_policy) {
        const auto raw = r.blob();
        if (!raw) return std::nullopt;
        auto policy = policy_header_from_bytes(ByteView(raw->data(), raw->size()));
        if (!policy) return std::nullopt;
        block.policy_copy = std::move(*policy);
    }
    const auto has_multisig = r.u8();
    if (!has_multisig) return std::nullopt;
    if (*has_multisig) {
        const auto raw = r.blob();
        if (!raw) return std::nullopt;
        auto tx = transaction_from_full_bytes(ByteView(raw->data(), raw->size()));
        if (!tx) return std::nullopt;
        block.trust_multisig = std::move(*tx);
    }
    const auto ntxs = r.u32();
    if (!ntxs || *ntxs > 65536) return std::nullopt;
    block.txs.reserve(*ntxs);
    for (std::uint32_t i = 0; i < *ntxs; ++i) {
        const auto raw = r.blob();
        if (!raw) return std::nullopt;
        auto tx = transaction_from_full_bytes(ByteView(raw->data(), raw->size()));
        if (!tx) return std::nullopt;
        block.txs.push_back(std::move(*tx));
    }
    auto miner = r.str();
    if (!miner || !r.done()) return std::nullopt;
    block.miner.id = std::move(*miner);
    return block;
}

DataHash block_hash(const CryptoProvider& p, const Block& block) {
    const Bytes raw = block_bytes(block);
    return p.hash_bytes(ByteView(raw.data(), raw.size()));
}

std::size_t block_mem_units(const Block& block) { return block_bytes(block).size(); }

}  // namespace homechain
