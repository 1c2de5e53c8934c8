#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homechain/sim/metrics.hpp"
#include "homechain/sim/topology.hpp"
#include "homechain/sim/adversary.hpp"

namespace homechain {

// Applies one swept symbol to the parameter set. N = clusters, S =
// storage_hops, B = blocks_per_chain, T = txs_per_block, BS = stored payload
// bytes (the measured mean block size lands in the report), TL = trust_level.
// False on an unknown symbol or an out-of-domain value.
bool apply_scaling_symbol(SimParams& p, const std::string& symbol, double value);

struct SweepSpec {
    std::string symbol;
    std::vector<double> values;
};

// One swept value: the reports of every seed run at that value.
struct SweepPoint {
    double value = 0.0;
    std::vector<MetricsReport> reports;
};

struct SweepResult {
    std::string symbol;
    std::vector<SweepPoint> points;
};

// One fresh world per (value, seed) pair; identical inputs, identical output.
SweepResult run_sweep(const SimParams& base, const std::vector<WorkItem>& workload,
                      const std::vector<AdversaryScript>& scripts, const SweepSpec& spec,
                      const std::vector<std::uint64_t>& seeds, std::uint64_t max_ticks,
                      const std::string& scenario);

// Reads one metric out of a report. Row metrics take a flow kind: packets,
// delay, comp_ops, mem_blocks, ok, denied, rejected, incomplete, and the
// per-completed-flow forms packets_per_ok, delay_per_ok, comp_ops_per_ok.
// Report metrics take flow "": total_packets, memory_bytes, local_blocks,
// overlay_blocks, measured_bs, and counter:<name>. nullopt when the row is
// missing or a per_ok metric has no completed flows.
std::optional<double> report_metric(const MetricsReport& r, const std::string& flow,
                                    const std::string& metric);

// Mean of report_metric across the point's seeds; nullopt if any seed lacks it.
std::optional<double> sweep_metric(const SweepPoint& pt, const std::string& flow,
                                   const std::string& metric);

}  // namespace homechain
