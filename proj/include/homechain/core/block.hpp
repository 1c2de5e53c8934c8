#pragma once

#include <optional>
#include <vector>

#include "homechain/core/crypto.hpp"
#include "homechain/core/policy.hpp"
#include "homechain/core/tx.hpp"
#include "homechain/core/types.hpp"

namespace homechain {

// One block of a local, shared, or overlay ledger. Local and shared blocks
// copy the policy in force into the header; overlay blocks carry the trust
// multisig that admitted the block instead.
struct Block {
    DataHash prev_block;  // hash of the predecessor; all-zero for the first
    std::optional<PolicyHeader> policy_copy;
    std::optional<Transaction> trust_multisig;
    std::vector<Transaction> txs;
    PublicKey miner;

    bool operator==(const Block&) const = default;
};

// Full encoding, signatures included: the hash preimage and the dump format.
Bytes block_bytes(const Block& block);
std::optional<Block> block_from_bytes(ByteView data);

DataHash block_hash(const CryptoProvider& p, const Block& block);

// Memory footprint metric: serialized size in bytes.
std::size_t block_mem_units(const Block& block);

}  // namespace homechain
