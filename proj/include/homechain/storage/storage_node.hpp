#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homechain/core/crypto.hpp"
#include "homechain/core/tx.hpp"

namespace homechain {

enum class StorageKind : std::uint8_t {
    cloud = 0,   // untrusted: accounting plus signed-hash publication
    shared = 1,  // trusted multi-home: no hash publication
    local = 2,   // trusted in-home: no ids, no publication
};

std::string_view to_string(StorageKind k);
std::optional<StorageKind> storage_kind_from_string(std::string_view s);

// One stored unit. The block number is the secret retrieval token; the next
// slot chains to at most one successor, ever.
struct StorageBlock {
    RandomId block_number;
    Bytes data;
    DataHash data_hash;
    std::optional<RandomId> next;
};

// One user's FIFO block sequence. `order` is store-call order; `head` is the
// empty bootstrap block whose (number, hash) pair seeds authentication.
struct StorageAccount {
    RandomId account_id;
    StorageKind kind = StorageKind::cloud;
    std::string ledger_label;  // name attestations are issued under
    PublicKey owner;
    SharedKey key;  // storage <-> owner, wraps returned block numbers
    std::size_t capacity = 0;
    std::vector<RandomId> order;
    std::map<std::string, StorageBlock> blocks;  // block_number -> block

    const RandomId& head() const { return order.front(); }
};

// A storage-tier node hosting any number of accounts of one kind.
class StorageNode {
public:
    StorageNode(CryptoProvider& provider, DetRng rng, std::string_view label, StorageKind kind,
                std::size_t capacity = 1024);

    const std::string& label() const { return label_; }
    StorageKind kind() const { return kind_; }
    const PublicKey& pub() const { return keys_.pub; }

    struct Bootstrap {
        RandomId account_id;
        RandomId first_block_number;
        DataHash first_hash;  // hash of the empty head block
        SharedKey key;
    };
    // Opens an empty account whose head block authenticates the owner from
    // then on. The shared key wraps every block number sent back.
    Bootstrap bootstrap_account(const PublicKey& owner_pk, std::string_view ledger_label);

    struct StoreReceipt {
        Bytes encrypted_block_number;  // nonce || ciphertext || tag under the account key
        std::optional<Transaction> attestation;  // cloud kind only
    };
    // Authenticates by (prev_block_number, prev_hash), verifies the claimed
    // hash when one is sent, appends FIFO, and consumes the previous block's
    // next slot.
    Result<StoreReceipt> store(const RandomId& requester, const RandomId& account,
                               const RandomId& prev_block_number, const DataHash& prev_hash,
                               Bytes data, const std::optional<DataHash>& claimed_hash,
                               std::uint64_t now);

    struct Retrieved {
        Bytes data;
        bool hash_ok = true;  // false when stored bytes no longer match the books
    };
    Result<Retrieved> retrieve(const RandomId& account, const RandomId& block_number,
                               const DataHash& hash) const;
    // Follows next links from the authenticated block to the tail.
    Result<std::vector<Retrieved>> retrieve_chain(const RandomId& account,
                                                  const RandomId& block_number,
                                                  const DataHash& hash) const;

    struct GuardHandle {
        RandomId block_number;
        DataHash hash;
        bool already_chained = false;
    };
    // Consumes the current block's next slot with an empty block, so a leaked
    // (number, hash) pair can no longer be extended by a third party.
    Result<GuardHandle> pre_chain_guard(const RandomId& account, const RandomId& current,
                                        const DataHash& current_hash);

    // Adversary hook: replaces stored bytes, books untouched.
    Status mutate_for_attack(const RandomId& account, const RandomId& block_number,
                             Bytes new_data);

    const StorageAccount* account(const RandomId& id) const;
    std::size_t account_count() const { return accounts_.size(); }
    std::uint64_t attestations_emitted() const { return attestations_emitted_; }

    std::string export_dump() const;
    Status import_dump(std::string_view dump);

private:
    RandomId fresh_token();
    static DataHash empty_hash(const CryptoProvider& p);

    CryptoProvider& provider_;
    DetRng rng_;
    std::string label_;
    StorageKind kind_;
    std::size_t capacity_;
    KeyPair keys_;
    std::vector<RandomId> account_order_;
    std::map<std::string, StorageAccount> accounts_;  // account_id -> account
    std::uint64_t attestations_emitted_ = 0;
};

}  // namespace homechain
