#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

namespace homechain {

// One end-to-end protocol exchange. Every packet a run moves is attributed
// to exactly one trace; the sum over traces equals the global counter.
struct FlowTrace {
    std::string id;    // "store_cloud#0"
    std::string kind;  // store_cloud, access, monitor, breach_check, join,
                       // mining, change_cluster, adversary
    std::uint64_t start = 0;
    std::uint64_t end = 0;
    std::string outcome = "incomplete";  // ok | denied | rejected(<reason>)
    std::size_t packets = 0;             // link traversals
    std::uint64_t comp_ops = 0;          // signature checks + sampled verifies
    std::uint64_t progress_tick = 0;     // last send or delivery
    struct Hop {
        std::uint64_t tick = 0;  // arrival
        std::string from;
        std::string to;
        std::string msg;
        std::size_t packets = 0;
    };
    std::vector<Hop> hops;

    bool done() const { return outcome != "incomplete"; }
};

// Swept symbols for one run.
struct ScalingParameters {
    std::uint64_t N = 1;   // clusters
    std::uint64_t S = 1;   // storage hop distance
    std::uint64_t B = 0;   // prefilled blocks per local chain
    std::uint64_t T = 5;   // transactions per block
    std::uint64_t BS = 0;  // measured mean local block size, bytes
    double TL = 0.0;       // preset trust level
};

struct MetricsReport {
    std::string scenario;
    std::uint64_t seed = 0;
    ScalingParameters params;

    struct Row {
        std::string flow;
        std::uint64_t packets = 0;
        std::uint64_t delay = 0;  // sum of per-flow end - start
        std::uint64_t comp_ops = 0;
        std::uint64_t mem_blocks = 0;
        std::uint64_t ok = 0;
        std::uint64_t denied = 0;
        std::uint64_t rejected = 0;
        std::uint64_t incomplete = 0;
    };
    std::vector<Row> rows;  // one per flow kind plus a trailing "all"

    std::uint64_t total_packets = 0;
    std::uint64_t memory_bytes = 0;  // serialized local miner chains
    std::uint64_t local_blocks = 0;
    std::uint64_t overlay_blocks = 0;
    std::vector<std::pair<std::string, std::uint64_t>> counters;  // sorted

    // Pinned column order:
    // scenario,seed,N,S,B,T,BS,flow,packets,delay,comp_ops,mem_blocks,outcome
    std::string to_csv(bool header = true) const;
    static std::string csv_header();
    std::string to_structured() const;
};

std::string trace_lines(const FlowTrace& f);
std::string trace_text(const std::deque<FlowTrace>& flows);

// Least-squares slope of log(y) against log(x); points with a zero
// coordinate are skipped.
double loglog_slope(const std::vector<std::pair<double, double>>& pts);

}  // namespace homechain
