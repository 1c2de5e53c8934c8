#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "homechain/localchain/miner.hpp"
#include "homechain/overlay/cluster_head.hpp"
#include "homechain/sim/metrics.hpp"
#include "homechain/storage/storage_node.hpp"

namespace homechain {

class World;
class HomeActor;

// Everything a requester learns from a granted full-chain access: where the
// chain lives, the head pair to fetch it from, and the sealed tail pair.
struct GrantInfo {
    std::string storage;
    RandomId account;
    RandomId first_block_number;
    DataHash first_hash;
    RandomId last_block_number;
    DataHash last_hash;
};

// Shared state of one multisig request as it moves between actors. `path`
// is the chain of cluster indices a response must retrace.
struct RequestCtx {
    FlowTrace* flow = nullptr;
    Envelope env;
    std::vector<std::size_t> path;
    PublicKey requester;
    PrivateKey requester_key;
    std::size_t sp = SIZE_MAX;  // requester index; SIZE_MAX for adversarial keys
    std::string origin;         // network node responses are delivered to
    std::string scope;          // window | full_chain (access flows)
    std::uint64_t monitor_ticks = 1;
    bool adversary = false;
};

// A named storage tier node on the network.
class StorageActor {
public:
    StorageActor(World& w, std::string name, StorageKind kind, std::size_t hops,
                 std::size_t capacity);

    const std::string& name() const { return name_; }
    StorageKind kind() const { return node_.kind(); }
    StorageNode& node() { return node_; }

private:
    World& w_;
    std::string name_;
    StorageNode node_;
};

// A service provider: holds one keypair, issues access and monitor requests,
// and fetches granted chains straight from storage.
class SpActor {
public:
    SpActor(World& w, std::size_t index, std::string name, std::size_t cluster);

    const std::string& name() const { return name_; }
    std::size_t cluster() const { return cluster_; }
    const PublicKey& pub() const { return keys_.pub; }
    const PrivateKey& key() const { return keys_.priv; }
    const std::optional<GrantInfo>& last_grant() const { return last_grant_; }

    // Entry points; each drives one flow to completion through closures.
    void start_access(FlowTrace& flow, HomeActor& target, const std::string& device,
                      const std::string& scope);
    void start_monitor(FlowTrace& flow, HomeActor& target, const std::string& device,
                       std::uint64_t ticks);

    // Response handlers, invoked at message arrival.
    void on_denied(std::shared_ptr<RequestCtx> ctx);
    void on_grant(std::shared_ptr<RequestCtx> ctx, GrantInfo grant);
    void on_data(std::shared_ptr<RequestCtx> ctx, std::size_t bytes, bool final_part);

    // Replays the remembered grant to append adversarial data to the chain.
    void replay_grant_store(FlowTrace& flow, std::size_t data_bytes);

private:
    void send_request(FlowTrace& flow, HomeActor& target, Transaction tx,
                      const std::string& scope, std::uint64_t monitor_ticks);

    World& w_;
    std::size_t index_;
    std::string name_;
    std::size_t cluster_;
    DetRng rng_;
    KeyPair keys_;
    std::optional<GrantInfo> last_grant_;
    std::uint64_t data_parts_ = 0;
};

// A smart home: gateway node, resident miner, its devices, and its storage
// accounts. Device traffic enters the network through this actor.
class HomeActor {
public:
    HomeActor(World& w, std::size_t index, std::string name, std::size_t cluster);

    const std::string& name() const { return name_; }
    std::size_t index() const { return index_; }
    std::size_t cluster() const { return cluster_; }
    void set_cluster(std::size_t c) { cluster_ = c; }
    Miner& miner() { return miner_; }
    const Miner& miner() const { return miner_; }
    const PublicKey& miner_pub() const { return miner_.miner_pub(); }

    struct DeviceState {
        std::string name;
        bool online = true;
        // Cloud account bookkeeping mirrored from receipts. The miner keeps
        // block numbers in the clear; the wire only ever sees them encrypted.
        RandomId account;
        SharedKey cloud_key;
        RandomId first_bn;
        DataHash first_hash;
        RandomId last_bn;
        DataHash last_hash;
        bool stored = false;
        RandomId last_attest_tx;
        RandomId last_store_tx;
        // Shared storage account, when this home is in a shared group.
        RandomId shared_account;
        SharedKey shared_key;
        RandomId shared_last_bn;
        DataHash shared_last_hash;
        // In-home storage account.
        RandomId local_account;
        SharedKey local_key;
        RandomId local_last_bn;
        DataHash local_last_hash;
    };

    void setup_device(const std::string& dev);
    DeviceState& device(const std::string& dev);
    const std::vector<std::string>& device_names() const { return device_order_; }
    std::string device_node(const std::string& dev) const { return name_ + "." + dev; }

    void bootstrap_cloud(StorageActor& s);
    void bootstrap_shared(StorageActor& s);
    void grant_requester(const PublicKey& pk, const std::string& device);
    const std::vector<PublicKey>& declared_requesters() const { return declared_requesters_; }

    // Re-registers this home and its grants on a (re-)elected cluster head.
    void redeclare(ClusterHead& ch);

    // Pre-mines `blocks` blocks of `txs` store transactions each, writing the
    // data through to the cloud account with no network traffic. Bootstrap
    // state, not workload.
    void prefill(std::size_t blocks, std::size_t txs, StorageActor* cloud);

    // Flow entry points.
    void start_store(FlowTrace& flow, const std::string& dev, const std::string& target);
    void start_breach_check(FlowTrace& flow, const std::string& dev);
    void start_rogue_store(FlowTrace& flow, std::size_t data_bytes);

    // A delivered multisig request (access or monitor).
    void handle_request(std::shared_ptr<RequestCtx> ctx);

    void serve_join(FlowTrace& flow, const std::string& joiner);

    std::uint64_t last_flow_delay_per_hop() const { return last_delay_per_hop_; }

private:
    void store_to_cloud(FlowTrace& flow, const std::string& dev, Bytes data);
    void store_to_shared(FlowTrace& flow, const std::string& dev, Bytes data);
    void store_to_local(FlowTrace& flow, const std::string& dev, Bytes data);
    void respond_denied(std::shared_ptr<RequestCtx> ctx, Transaction resolved);
    void respond_access(std::shared_ptr<RequestCtx> ctx, Transaction resolved);
    void respond_monitor(std::shared_ptr<RequestCtx> ctx, Transaction resolved);
    void record_proofs(FlowTrace& flow, const Transaction& resolved);
    void relay_response(std::shared_ptr<RequestCtx> ctx, Transaction resolved, std::string msg,
                        std::size_t bytes, std::function<void()> at_origin);
    void send_attestation(FlowTrace& flow, Transaction att, std::function<void()> done);
    void maybe_mine_local();
    void finish_flow_measured(FlowTrace& flow, const std::string& outcome);

    World& w_;
    std::size_t index_;
    std::string name_;
    std::size_t cluster_;
    Miner miner_;
    StorageNode local_store_;
    std::map<std::string, DeviceState> devices_;
    std::vector<std::string> device_order_;
    std::vector<PublicKey> declared_requesters_;
    DetRng rng_;
    std::uint64_t last_delay_per_hop_ = 0;
};

// One cluster's head slot: the elected host node plus the ClusterHead
// protocol state it runs. Re-election replaces both.
class ChActor {
public:
    ChActor(World& w, std::size_t cluster);

    std::size_t cluster() const { return cluster_; }
    const std::string& node() const { return node_; }
    bool alive() const { return alive_; }
    void drop() { alive_ = false; }
    ClusterHead& ch() { return *ch_; }

    struct NodeInfo {
        std::string id;
        double score = 0.0;
        bool accused = false;
    };
    std::vector<NodeInfo>& nodes() { return nodes_; }

    // Elects the best non-accused node and rebuilds protocol state on it.
    // Returns false when no electable node remains.
    bool elect();
    std::uint64_t elected_tick() const { return elected_tick_; }

    // Message arrivals.
    void ingest_multisig(std::shared_ptr<RequestCtx> ctx, std::vector<std::size_t> path);
    void ingest_attestation(FlowTrace& flow, Envelope env);
    void ingest_proof(FlowTrace& flow, Transaction tx);
    void ingest_breach_report(FlowTrace& flow, Transaction report, std::string storage_name);
    // Cosign round: the body arrived earlier as a block_announce; `on_reply`
    // runs back at the miner when the ack or refusal lands there.
    void ingest_cosign_request(FlowTrace& flow, const DataHash& content, Transaction attest,
                               std::size_t from_cluster,
                               std::function<void(bool, Transaction)> on_reply);
    void ingest_block_body(const DataHash& content, Block body);
    void ingest_block_seal(FlowTrace& flow, const DataHash& content, const Transaction& attest);
    void ingest_alarm(FlowTrace& flow, const std::string& accuser, const Block& block);

    // Launches a mining round when the pool is full and none is in flight.
    void maybe_mine();
    // Adversary entry: mines a block containing forged transactions,
    // co-signed by a colluding head that skips verification.
    void mine_forged(FlowTrace& flow, std::size_t forged, std::size_t honest,
                     std::size_t cosigner_cluster);

    bool skip_verify = false;  // collusion script: cosign blindly
    std::set<std::string> flagged_storages;

    std::uint64_t blocks_mined() const { return blocks_mined_; }

private:
    void announce(FlowTrace& flow, Block block, std::size_t cosigner);
    void alarm_peers(FlowTrace& flow, const Block& block);
    friend class World;

    World& w_;
    std::size_t cluster_;
    std::string node_;
    bool alive_ = false;
    bool mining_ = false;
    std::uint64_t elected_tick_ = 0;
    std::unique_ptr<ClusterHead> ch_;
    std::vector<NodeInfo> nodes_;
    std::set<std::string> accused_;
    DetRng rng_;
    std::uint64_t blocks_mined_ = 0;
    std::map<std::string, Block> pending_bodies_;  // content hash -> announced body
    std::set<std::string> cosigned_;               // content hashes this head co-signed
};

}  // namespace homechain
