#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "homechain/core/crypto.hpp"
#include "homechain/core/id_registry.hpp"
#include "homechain/localchain/local_chain.hpp"

namespace homechain {

// What the miner remembers about a device's cloud storage account: enough to
// fetch the newest block and authenticate the whole chain behind it.
struct StorageHandle {
    RandomId account;
    RandomId last_block_number;
    DataHash last_hash;
};

// The home miner: the single writer of one LocalChain. Owns the owner and
// miner key pairs, the per-device shared keys, and the storage handles.
// Administrative operations demand possession of the owner private key.
class Miner {
public:
    Miner(CryptoProvider& provider, IdRegistry& ids, DetRng rng, std::string_view label,
          std::size_t mine_threshold = 5);

    const std::string& label() const { return label_; }
    const PublicKey& owner_pub() const { return owner_.pub; }
    const PrivateKey& owner_key() const { return owner_.priv; }
    const PublicKey& miner_pub() const { return miner_.pub; }
    const PrivateKey& miner_key() const { return miner_.priv; }

    // Owner operations. Each returns the administrative transaction it
    // appended (policy changes ride a separate PolicyUpdate transaction).
    Result<Transaction> add_device(const PrivateKey& owner_auth, const DeviceId& device,
                                   const std::vector<PolicyRule>& rules, std::uint64_t now);
    Result<Transaction> remove_device(const PrivateKey& owner_auth, const DeviceId& device,
                                      std::uint64_t now);
    Result<Transaction> update_policy(const PrivateKey& owner_auth,
                                      const std::vector<PolicyRule>& upserts,
                                      const std::vector<std::pair<std::string, DeviceId>>& revokes,
                                      std::uint64_t now);
    Status authorize_pk(const PrivateKey& owner_auth, const PublicKey& pk);
    Status revoke_pk(const PrivateKey& owner_auth, const PublicKey& pk);
    Result<SharedKey> grant_device_key(const PrivateKey& owner_auth, const DeviceId& a,
                                       const DeviceId& b);

    // Device-path append. `intent` narrows store transactions to the store
    // action being exercised; administrative kinds are only accepted when
    // owner-signed.
    Status append_tx(const Transaction& tx, std::optional<Action> intent = std::nullopt);

    // Policy check, verdict recording, and ledger append for a
    // requester-signed access or monitor request. The transaction is recorded
    // with output_bit 0 on deny rather than dropped.
    Result<Transaction> resolve_request(Transaction request);

    // Chains a storage-signed hash attestation into the device's ledger and
    // co-signs it. No policy decision: the attestation was solicited.
    Result<Transaction> accept_attestation(Transaction att);

    // Packages pending into a block. No verification pass, no puzzle.
    Result<Block> mine_block();

    PolicyDecision check_policy(std::string_view subject, std::string_view device,
                                Action requested) const;

    std::optional<SharedKey> device_key(const DeviceId& a, const DeviceId& b) const;
    bool can_message(const DeviceId& a, const DeviceId& b) const;

    const LocalChain& chain() const { return chain_; }
    bool has_ledger(const DeviceId& device) const { return chain_.ledgers.contains(device); }
    bool was_removed(const DeviceId& device) const { return removed_.contains(device); }
    std::optional<RandomId> latest_tx(const DeviceId& device) const;
    const Transaction* find_tx(const RandomId& id) const;
    std::size_t pending_count() const { return chain_.pending.size(); }
    std::size_t mine_threshold() const { return mine_threshold_; }
    std::uint64_t puzzle_iterations() const { return puzzle_iterations_; }

    const std::vector<PublicKey>& authorized_pks() const { return authorized_pks_; }
    bool pk_authorized(const PublicKey& pk) const;

    void set_storage_handle(const DeviceId& device, StorageHandle handle);
    const StorageHandle* storage_handle(const DeviceId& device) const;

    std::string export_dump() const { return export_chain(chain_, pending_policies_); }
    Status import_dump(std::string_view dump);

private:
    Status require_owner(const PrivateKey& key) const;
    void do_append(const Transaction& tx, const RandomId& id);
    Transaction make_policy_update(PolicyHeader next, std::uint64_t now);
    Transaction base_tx(TxKind kind, std::uint64_t now);

    CryptoProvider& provider_;
    IdRegistry& ids_;
    DetRng rng_;
    std::string label_;
    std::size_t mine_threshold_;

    KeyPair owner_;
    KeyPair miner_;

    LocalChain chain_;
    PolicyHeader mined_policy_;  // header as of the last mined block
    std::map<std::string, PolicyHeader> pending_policies_;  // policy tx id -> snapshot
    std::optional<RandomId> last_policy_tx_;
    std::unordered_map<std::string, Transaction> tx_index_;
    std::set<DeviceId> removed_;

    std::vector<PublicKey> authorized_pks_;
    std::map<DeviceId, StorageHandle> storage_handles_;
    std::map<std::pair<DeviceId, DeviceId>, SharedKey> device_keys_;

    // Incremented by the (non-existent) puzzle loop; stays zero by design.
    std::uint64_t puzzle_iterations_ = 0;
};

}  // namespace homechain
