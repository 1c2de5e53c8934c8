#include "homechain/sim/scaling.hpp"

#include <cmath>

#include "homechain/sim/world.hpp"

namespace homechain {

bool apply_scaling_symbol(SimParams& p, const std::string& symbol, double value) {
    const auto whole = static_cast<std::uint64_t>(value);
    if (static_cast<double>(whole) != value && symbol != "TL") return false;
    if (symbol == "N") {
        if (whole == 0) return false;
        p.clusters = whole;
    } else if (symbol == "S") {
        p.storage_hops = whole;
    } else if (symbol == "B") {
        p.blocks_per_chain = whole;
    } else if (symbol == "T") {
        if (whole == 0) return false;
        p.txs_per_block = whole;
    } else if (symbol == "BS") {
        if (whole == 0) return false;
        p.data_bytes = whole;
    } else if (symbol == "TL") {
        if (value < 0.0 || value >= 1.0) return false;
        p.trust_level = value;
    } else {
        return false;
    }
    return true;
}

SweepResult run_sweep(const SimParams& base, const std::vector<WorkItem>& workload,
                      const std::vector<AdversaryScript>& scripts, const SweepSpec& spec,
                      const std::vector<std::uint64_t>& seeds, std::uint64_t max_ticks,
                      const std::string& scenario) {
    SweepResult out;
    out.symbol = spec.symbol;
    for (const double v : spec.values) {
        SweepPoint pt;
        pt.value = v;
        for (const std::uint64_t seed : seeds) {
            SimParams p = base;
            if (!apply_scaling_symbol(p, spec.symbol, v))
                throw std::invalid_argument("bad sweep value for " + spec.symbol);
            World w(p, workload, scripts, seed, max_ticks, scenario);
            pt.reports.push_back(w.run());
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

std::optional<double> report_metric(const MetricsReport& r, const std::string& flow,
                                    const std::string& metric) {
    if (flow.empty()) {
        if (metric == "total_packets") return static_cast<double>(r.total_packets);
        if (metric == "memory_bytes") return static_cast<double>(r.memory_bytes);
        if (metric == "local_blocks") return static_cast<double>(r.local_blocks);
        if (metric == "overlay_blocks") return static_cast<double>(r.overlay_blocks);
        if (metric == "measured_bs") return static_cast<double>(r.params.BS);
        if (metric.rfind("counter:", 0) == 0) {
            const std::string name = metric.substr(8);
            for (const auto& [k, v] : r.counters)
                if (k == name) return static_cast<double>(v);
            return 0.0;  // untouched counters are zero, not missing
        }
        return std::nullopt;
    }
    for (const auto& row : r.rows) {
        if (row.flow != flow) continue;
        if (metric == "packets") return static_cast<double>(row.packets);
        if (metric == "delay") return static_cast<double>(row.delay);
        if (metric == "comp_ops") return static_cast<double>(row.comp_ops);
        if (metric == "mem_blocks") return static_cast<double>(row.mem_blocks);
        if (metric == "ok") return static_cast<double>(row.ok);
        if (metric == "denied") return static_cast<double>(row.denied);
        if (metric == "rejected") return static_cast<double>(row.rejected);
        if (metric == "incomplete") return static_cast<double>(row.incomplete);
        const bool per_ok = metric.size() > 7 && metric.rfind("_per_ok") == metric.size() - 7;
        if (per_ok) {
            if (row.ok == 0) return std::nullopt;
            const auto base = report_metric(r, flow, metric.substr(0, metric.size() - 7));
            if (!base) return std::nullopt;
            return *base / static_cast<double>(row.ok);
        }
        return std::nullopt;
    }
    return std::nullopt;
}

std::optional<double> sweep_metric(const SweepPoint& pt, const std::string& flow,
                                   const std::string& metric) {
    if (pt.reports.empty()) return std::nullopt;
    double sum = 0.0;
    for (const MetricsReport& r : pt.reports) {
        const auto v = report_metric(r, flow, metric);
        if (!v) return std::nullopt;
        sum += *v;
    }
    return sum / static_cast<double>(pt.reports.size());
}

}  // namespace homechain
