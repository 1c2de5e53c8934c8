#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "homechain/core/result.hpp"
#include "homechain/overlay/cluster_head.hpp"

namespace homechain {

// Scenario-level knobs. The scaling symbols map onto: clusters = N,
// storage_hops = S, blocks_per_chain = B, txs_per_block = T, data_bytes
// drives BS, trust_level = TL.
struct SimParams {
    std::size_t clusters = 1;
    std::size_t nodes_per_cluster = 3;
    std::size_t homes_per_cluster = 1;
    std::size_t devices_per_home = 1;
    std::size_t sps_per_cluster = 1;
    std::size_t storage_hops = 1;
    std::size_t shared_hops = 1;
    std::size_t shared_homes = 0;
    std::string ch_topology = "mesh";
    std::uint64_t link_delay = 1;
    std::map<std::size_t, std::uint64_t> cluster_link_delay;
    std::size_t data_bytes = 64;
    std::size_t blocks_per_chain = 0;
    std::size_t txs_per_block = 5;
    double trust_level = 0.0;
    std::size_t window_blocks = 1;
    std::uint64_t starvation_ticks = 20;
    std::size_t move_delay_hops = 4;
    bool auto_move = false;
    bool record_proofs = true;
    std::size_t storage_capacity = 4096;
    std::string crypto = "fast";
    OverlayConfig overlay;
};

Status validate_params(const SimParams& p);

// One scheduled workload entry. Indices wrap modulo the population so the
// same workload scales across topologies.
struct WorkItem {
    std::uint64_t tick = 0;
    std::size_t repeat = 1;
    std::uint64_t every = 1;
    std::string flow;  // store | access | monitor | breach_check | join | change_cluster
    std::size_t home = 0;
    std::size_t device = 0;
    std::size_t sp = 0;
    std::string target = "cloud";       // store: cloud | shared | local
    std::string scope = "full_chain";   // access: window | full_chain
    std::uint64_t monitor_ticks = 1;
    std::size_t to_cluster = 0;         // change_cluster
    bool grant = true;
    bool random_placement = false;
};

Status validate_workload(const SimParams& p, const std::vector<WorkItem>& items);

// Placement of every named node plus hop counts between any two of them.
// Devices hang off a home (1 hop), homes and service providers reach their
// cluster head in 1 hop, cluster heads form a mesh or a line, and storage
// sits a fixed hop distance from everyone.
class Topology {
public:
    explicit Topology(const SimParams& p);

    void add_endpoint(const std::string& name, std::size_t cluster);
    void add_device(const std::string& name, const std::string& home);
    void add_storage(const std::string& name, std::size_t hops);
    void set_ch(std::size_t cluster, const std::string& node);
    void remove_node(const std::string& name);
    void move_endpoint(const std::string& name, std::size_t new_cluster);

    bool has(const std::string& name) const;
    std::size_t cluster_of(const std::string& name) const;
    std::size_t ch_distance(std::size_t a, std::size_t b) const;
    std::size_t hops(const std::string& from, const std::string& to) const;
    std::uint64_t delay_per_hop(const std::string& from, const std::string& to) const;
    std::uint64_t cluster_delay(std::size_t cluster) const;
    std::size_t clusters() const { return params_.clusters; }

private:
    enum class Kind { endpoint, device, ch, storage };
    struct Loc {
        Kind kind = Kind::endpoint;
        std::size_t cluster = 0;
        std::size_t storage_hops = 0;
        std::string home;  // devices only
    };
    const Loc& loc(const std::string& name) const;

    SimParams params_;
    std::map<std::string, Loc> locs_;
};

}  // namespace homechain
