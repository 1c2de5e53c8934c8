#include "homechain/sim/topology.hpp"

#include <cstdlib>
#include <stdexcept>

namespace homechain {

Status validate_params(const SimParams& p) {
    if (p.clusters == 0) return Status::fail(Reject::invalid_params, "clusters must be positive");
    if (p.nodes_per_cluster == 0)
        return Status::fail(Reject::invalid_params, "nodes_per_cluster must be positive");
    if (p.homes_per_cluster == 0)
        return Status::fail(Reject::invalid_params, "homes_per_cluster must be positive");
    if (p.devices_per_home == 0)
        return Status::fail(Reject::invalid_params, "devices_per_home must be positive");
    if (p.txs_per_block == 0)
        return Status::fail(Reject::invalid_params, "txs_per_block must be positive");
    if (p.ch_topology != "mesh" && p.ch_topology != "line")
        return Status::fail(Reject::invalid_params, "ch_topology must be mesh or line");
    if (p.link_delay == 0) return Status::fail(Reject::invalid_params, "link_delay must be positive");
    if (p.shared_homes == 1)
        return Status::fail(Reject::invalid_params, "a shared group needs at least two homes");
    if (p.shared_homes > p.clusters * p.homes_per_cluster)
        return Status::fail(Reject::invalid_params, "shared_homes exceeds the home population");
    if (p.trust_level < 0.0 || p.trust_level >= 1.0)
        return Status::fail(Reject::invalid_params, "trust_level must be in [0, 1)");
    if (p.crypto != "fast" && p.crypto != "real")
        return Status::fail(Reject::invalid_params, "crypto must be fast or real");
    for (const auto& [cluster, delay] : p.cluster_link_delay) {
        if (cluster >= p.clusters)
            return Status::fail(Reject::invalid_params, "link delay override for unknown cluster");
        if (delay == 0) return Status::fail(Reject::invalid_params, "link delay override must be positive");
    }
    return Status::success();
}

Status validate_workload(const SimParams& p, const std::vector<WorkItem>& items) {
    for (const auto& it : items) {
        if (it.flow != "store" && it.flow != "access" && it.flow != "monitor" &&
            it.flow != "breach_check" && it.flow != "join" && it.flow != "change_cluster")
            return Status::fail(Reject::invalid_params, "unknown flow kind: " + it.flow);
        if (it.repeat == 0) return Status::fail(Reject::invalid_params, "repeat must be positive");
        if (it.every == 0) return Status::fail(Reject::invalid_params, "every must be positive");
        if (it.flow == "store" && it.target != "cloud" && it.target != "shared" &&
            it.target != "local")
            return Status::fail(Reject::invalid_params, "store target must be cloud, shared or local");
        if (it.flow == "store" && it.target == "shared" && p.shared_homes == 0)
            return Status::fail(Reject::invalid_params, "shared store needs shared_homes");
        if (it.flow == "access" && it.scope != "window" && it.scope != "full_chain")
            return Status::fail(Reject::invalid_params, "access scope must be window or full_chain");
        if (it.flow == "monitor" && it.monitor_ticks == 0)
            return Status::fail(Reject::invalid_params, "monitor_ticks must be positive");
        if (it.flow == "change_cluster" && it.to_cluster >= p.clusters)
            return Status::fail(Reject::invalid_params, "change_cluster target out of range");
    }
    return Status::success();
}

Topology::Topology(const SimParams& p) : params_(p) {}

void Topology::add_endpoint(const std::string& name, std::size_t cluster) {
    locs_[name] = Loc{Kind::endpoint, cluster, 0, {}};
}

void Topology::add_device(const std::string& name, const std::string& home) {
    Loc l;
    l.kind = Kind::device;
    l.cluster = loc(home).cluster;
    l.home = home;
    locs_[name] = l;
}

void Topology::add_storage(const std::string& name, std::size_t hops) {
    locs_[name] = Loc{Kind::storage, 0, hops, {}};
}

void Topology::set_ch(std::size_t cluster, const std::string& node) {
    locs_[node] = Loc{Kind::ch, cluster, 0, {}};
}

void Topology::remove_node(const std::string& name) { locs_.erase(name); }

void Topology::move_endpoint(const std::string& name, std::size_t new_cluster) {
    auto it = locs_.find(name);
    if (it == locs_.end()) throw std::out_of_range("unknown node: " + name);
    it->second.cluster = new_cluster;
    for (auto& [dev, l] : locs_)
        if (l.kind == Kind::device && l.home == name) l.cluster = new_cluster;
}

bool Topology::has(const std::string& name) const { return locs_.count(name) != 0; }

std::size_t Topology::cluster_of(const std::string& name) const { return loc(name).cluster; }

const Topology::Loc& Topology::loc(const std::string& name) const {
    auto it = locs_.find(name);
    if (it == locs_.end()) throw std::out_of_range("unknown node: " + name);
    return it->second;
}

std::size_t Topology::ch_distance(std::size_t a, std::size_t b) const {
    if (a == b) return 0;
    if (params_.ch_topology == "line")
        return a > b ? a - b : b - a;
    return 1;
}

std::size_t Topology::hops(const std::string& from, const std::string& to) const {
    if (from == to) return 0;
    const Loc& a = loc(from);
    const Loc& b = loc(to);

    // Devices reach their own home gateway directly; anything else goes
    // through the home first.
    if (a.kind == Kind::device) {
        if (b.kind == Kind::endpoint && to == a.home) return 1;
        return 1 + hops(a.home, to);
    }
    if (b.kind == Kind::device) return hops(to, from);

    // Storage sits at a flat configured distance.
    if (b.kind == Kind::storage) return b.storage_hops;
    if (a.kind == Kind::storage) return a.storage_hops;

    if (a.kind == Kind::ch && b.kind == Kind::ch) return ch_distance(a.cluster, b.cluster);
    if (a.kind == Kind::ch) return hops(to, from);
    if (b.kind == Kind::ch) {
        // Endpoint to a cluster head: 1 hop to its own head, then across.
        return 1 + ch_distance(a.cluster, b.cluster);
    }

    // Endpoint to endpoint always relays through the cluster head overlay.
    return 2 + ch_distance(a.cluster, b.cluster);
}

std::uint64_t Topology::cluster_delay(std::size_t cluster) const {
    auto it = params_.cluster_link_delay.find(cluster);
    return it == params_.cluster_link_delay.end() ? params_.link_delay : it->second;
}

std::uint64_t Topology::delay_per_hop(const std::string& from, const std::string& to) const {
    const Loc& a = loc(from);
    const Loc& b = loc(to);
    // Intra-cluster links inherit the cluster's delay; everything crossing
    // cluster or storage boundaries runs at the base link delay.
    if (a.kind != Kind::storage && b.kind != Kind::storage && a.cluster == b.cluster)
        return cluster_delay(a.cluster);
    return params_.link_delay;
}

}  // namespace homechain
