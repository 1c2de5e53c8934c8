#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "homechain/core/crypto.hpp"
#include "homechain/core/id_registry.hpp"
#include "homechain/flows/actors.hpp"
#include "homechain/sim/adversary.hpp"
#include "homechain/sim/event_loop.hpp"
#include "homechain/sim/metrics.hpp"
#include "homechain/sim/net.hpp"
#include "homechain/sim/topology.hpp"

namespace homechain {

// One simulated deployment: topology, actors, workload, adversaries, and
// the metrics of a single run. Everything is a pure function of the
// parameters and the seed.
class World {
public:
    World(SimParams params, std::vector<WorkItem> workload,
          std::vector<AdversaryScript> scripts, std::uint64_t seed, std::uint64_t max_ticks,
          std::string scenario_name);

    // Schedules workload and scripts, drains the loop, assembles the report.
    // Call once.
    MetricsReport run();

    const SimParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t max_ticks() const { return max_ticks_; }

    EventLoop& loop() { return loop_; }
    Net& net() { return net_; }
    Topology& topology() { return topo_; }
    CryptoProvider& provider() { return *provider_; }
    IdRegistry& ids() { return ids_; }
    SharedOverlayTable& shared_table() { return shared_table_; }

    std::size_t home_count() const { return homes_.size(); }
    std::size_t sp_count() const { return sps_.size(); }
    HomeActor& home(std::size_t i) { return *homes_[i % homes_.size()]; }
    HomeActor* home_by_name(const std::string& name);
    SpActor& sp(std::size_t i) { return *sps_[i % sps_.size()]; }
    ChActor& cluster_head(std::size_t cluster) { return *chs_[cluster % chs_.size()]; }
    std::size_t cluster_count() const { return chs_.size(); }
    StorageActor* cloud() { return cloud_.get(); }
    StorageActor* shared_storage() { return shared_.get(); }
    bool in_shared_group(std::size_t home_index) const {
        return shared_ && home_index < params_.shared_homes;
    }

    const std::deque<FlowTrace>& traces() const { return flows_; }
    const std::map<std::string, std::uint64_t>& counters() const { return counters_; }
    std::uint64_t counter(const std::string& name) const {
        auto it = counters_.find(name);
        return it == counters_.end() ? 0 : it->second;
    }
    std::string trace_output() const { return trace_text(flows_); }

    // Used by actors while the run executes.
    FlowTrace& new_flow(const std::string& kind);
    void finish_flow(FlowTrace& flow, std::string outcome);
    void bump(const std::string& counter, std::uint64_t by = 1);
    DetRng fork_rng(std::string_view label) const { return root_rng_.fork(label); }
    std::vector<std::size_t> pick_clusters(std::size_t k);  // proof fanout targets
    void arm_starvation_watchdog(std::shared_ptr<RequestCtx> ctx, std::size_t ingress,
                                 std::uint64_t expected_arrival, std::function<void()> retry);
    void reelect(std::size_t cluster);
    void flood_multisig(std::shared_ptr<RequestCtx> ctx, std::size_t from,
                        std::vector<std::size_t> path);
    void start_join(FlowTrace& flow, std::size_t cluster, std::size_t home_index);
    void change_cluster(FlowTrace* flow, std::size_t home_index, std::size_t to_cluster);
    void maybe_auto_move(HomeActor& home);

    // Run-level memory accounting.
    std::uint64_t local_blocks_total() const;
    std::uint64_t overlay_blocks_total() const;
    std::uint64_t memory_bytes_total() const;
    std::uint64_t mean_block_size() const;

private:
    void build();
    void schedule_workload();
    void schedule_scripts();
    void start_item(const WorkItem& item);
    void start_script(const AdversaryScript& s);
    void launch_dos(const AdversaryScript& s);
    MetricsReport assemble();

    SimParams params_;
    std::vector<WorkItem> workload_;
    std::vector<AdversaryScript> scripts_;
    std::uint64_t seed_;
    std::uint64_t max_ticks_;
    std::string scenario_;

    std::unique_ptr<CryptoProvider> provider_;
    DetRng root_rng_;
    IdRegistry ids_;
    EventLoop loop_;
    Topology topo_;
    Net net_;

    std::vector<std::unique_ptr<HomeActor>> homes_;
    std::vector<std::unique_ptr<SpActor>> sps_;
    std::vector<std::unique_ptr<ChActor>> chs_;
    std::unique_ptr<StorageActor> cloud_;
    std::unique_ptr<StorageActor> shared_;
    SharedOverlayTable shared_table_;

    std::deque<FlowTrace> flows_;
    std::map<std::string, std::size_t> flow_seq_;
    std::map<std::string, std::uint64_t> counters_;
    std::map<std::string, KeyPair> adv_keys_;  // fixed adversarial identities
    DetRng world_rng_;
    std::size_t join_seq_ = 0;
    bool ran_ = false;
};

}  // namespace homechain
