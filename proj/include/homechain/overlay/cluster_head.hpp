#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "homechain/core/block.hpp"
#include "homechain/core/crypto.hpp"
#include "homechain/core/result.hpp"
#include "homechain/trust/trust.hpp"

namespace homechain {

// Fixed wire tags for overlay messages. Do not reorder.
enum class OverlayMsgTag : std::uint8_t {
    multisig = 1,
    block_announce = 2,
    signed_hash = 3,
    alarm = 4,
    proof_store = 5,
};

// An access request or storage attestation in flight, addressed to a home.
struct Envelope {
    OverlayMsgTag tag = OverlayMsgTag::multisig;
    std::string target_home;
    Transaction tx;

    bool operator==(const Envelope&) const = default;
};

Bytes encode_envelope(const Envelope& env);
std::optional<Envelope> decode_envelope(ByteView data);

// Last (block number, hash) per constituent home of a shared storage.
struct SharedOverlayTable {
    struct Entry {
        RandomId block_number;
        DataHash hash;
    };
    std::map<std::string, Entry> entries;

    void update(const std::string& home, RandomId bn, const DataHash& h) {
        entries[home] = Entry{std::move(bn), h};
    }
    const Entry* find(const std::string& home) const {
        const auto it = entries.find(home);
        return it == entries.end() ? nullptr : &it->second;
    }
};

struct OverlayConfig {
    std::size_t fail_threshold = 3;    // failed accesses per epoch before a PK blocks
    std::uint64_t epoch_ticks = 100;   // failure-count reset window
    std::size_t forward_cap = 1024;    // forward list bound
    std::size_t block_threshold = 5;   // pending txs per overlay block
    std::size_t proof_fanout = 2;      // CHs a resolved multisig is copied to
};

// The hash of a block with its trust multisig stripped; what the multisig
// signs, so the signature does not cover itself.
DataHash block_content_hash(const CryptoProvider& p, const Block& block);

// Full validity of an announced overlay block: multisig present and shaped
// (slot 0 is the miner, two or more signatures, content hash matches), every
// signature verifying, every transaction verifying. Fills `failed` with the
// offending transaction ids when it is the transactions that are bad.
bool overlay_block_valid(const CryptoProvider& p, const Block& block,
                         std::vector<std::string>* failed);

// One cluster head: routing lists, PK blocking, its own (divergent) view of
// the overlay chain, and a trust table over peer CHs.
class ClusterHead {
public:
    ClusterHead(CryptoProvider& provider, DetRng rng, std::string_view id,
                OverlayConfig cfg = {});

    const std::string& id() const { return id_; }
    const PublicKey& pub() const { return keys_.pub; }
    const OverlayConfig& config() const { return cfg_; }
    TrustTable& trust() { return trust_; }
    const TrustTable& trust() const { return trust_; }

    // Cluster membership. `accessible` homes appear in the requestee list.
    void add_member(const std::string& home, const PublicKey& miner_pk, bool accessible);
    void remove_member(const std::string& home);
    bool has_member(const std::string& home) const { return members_.contains(home); }
    const std::map<std::string, PublicKey>& members() const { return members_; }

    void allow_requester(const PublicKey& pk) { requester_pks_.insert(pk.id); }
    void revoke_requester(const PublicKey& pk) { requester_pks_.erase(pk.id); }

    struct Route {
        enum class Kind { delivered, forwarded, dropped_blocked, dropped_duplicate };
        Kind kind;
    };
    // Requester in the requester list, or target home accessible here ->
    // delivered into the cluster. Otherwise forwarded to every other CH
    // (duplicates suppressed by tx id) and the requester is remembered.
    Route route_multisig(const Envelope& env);
    // Attestations route purely by home membership.
    Route route_attestation(const Envelope& env);

    // Fail counting per epoch; at the threshold the PK blocks permanently.
    // Returns true when this call blocked the PK.
    bool register_access_failure(const PublicKey& pk, std::uint64_t now_tick);
    bool is_blocked(const PublicKey& pk) const { return blocked_pks_.contains(pk.id); }

    std::size_t forward_list_size() const { return forward_list_.size(); }
    std::uint64_t dropped_blocked() const { return dropped_blocked_; }
    std::uint64_t forwarded() const { return forwarded_; }

    // Overlay mining. Only fully signed transactions enter the pending pool.
    Status enqueue_tx(const Transaction& tx);
    void enqueue_unchecked(const Transaction& tx);  // adversary hook
    std::size_t pending_count() const { return pending_.size(); }
    bool block_ready() const { return pending_.size() >= cfg_.block_threshold; }
    Result<Block> build_block();  // prev = own view tip; no multisig yet
    Transaction make_block_attest(const Block& block) const;  // slot-0 signed
    void cosign_attest(Transaction& attest) const;
    // Miner keeps its own finished block without re-verification.
    void adopt_own_block(Block block);

    struct Receive {
        enum class Kind { kept, discarded_uninvolved, discarded_invalid };
        Kind kind;
        VerifyOutcome verify;
    };
    // Verify (sampled, trust-weighted), record evidence, keep iff valid and
    // this CH is involved in some transaction of the block.
    Receive receive_block(const Block& block);

    struct AlarmOutcome {
        bool processed = false;  // false for duplicates
        bool confirmed = false;  // accusation held after full re-verification
    };
    // Re-verifies the accused block completely before discarding it (and
    // debiting miner and cosigners) or penalizing the accuser.
    AlarmOutcome handle_alarm(const std::string& accuser_ch, const Block& accused);

    const Block* find_block(const DataHash& h) const;
    const std::vector<DataHash>& chain_order() const { return chain_order_; }
    std::size_t chain_size() const { return chain_order_.size(); }
    // A stored copy of a resolved multisig, by transaction id.
    const Transaction* find_proof(const RandomId& txid) const;

private:
    bool involved(const Block& block) const;
    void keep(Block block);

    CryptoProvider& provider_;
    DetRng rng_;
    std::string id_;
    OverlayConfig cfg_;
    KeyPair keys_;
    TrustTable trust_;

    std::map<std::string, PublicKey> members_;  // home -> miner pk
    std::set<std::string> requester_pks_;
    std::set<std::string> requestee_pks_;
    std::vector<std::pair<std::string, std::string>> forward_list_;  // (tx id, requester pk)
    std::unordered_set<std::string> seen_tx_ids_;
    std::map<std::string, std::size_t> fail_counts_;  // pk -> fails this epoch
    std::uint64_t fail_epoch_ = 0;
    std::set<std::string> blocked_pks_;
    std::uint64_t dropped_blocked_ = 0;
    std::uint64_t forwarded_ = 0;

    std::vector<Transaction> pending_;
    std::vector<DataHash> chain_order_;
    std::unordered_map<std::string, Block> chain_;  // content hash hex -> block
    std::unordered_map<std::string, Transaction> proofs_;  // tx id -> stored copy
    std::unordered_set<std::string> alarms_seen_;  // content hash hex
};

// Election inputs: each member's self-declared resource score plus whether
// the cluster accuses it (a dropped or lying CH never wins again).
struct MemberInfo {
    std::string node_id;
    double resource_score = 0.0;
    bool accused = false;
};

// Lowest node id among non-accused members whose score reaches the median
// of non-accused scores. Empty candidate set -> unrecoverable.
Result<std::string> reelect_ch(const std::vector<MemberInfo>& members);

}  // namespace homechain
