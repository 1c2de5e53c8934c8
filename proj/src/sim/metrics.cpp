#include "homechain/sim/metrics.hpp"

#include <cmath>
#include <sstream>

namespace homechain {

std::string MetricsReport::csv_header() {
    return "scenario,seed,N,S,B,T,BS,flow,packets,delay,comp_ops,mem_blocks,outcome";
}

namespace {

std::string outcome_cell(const MetricsReport::Row& r) {
    std::ostringstream os;
    os << "ok:" << r.ok << " denied:" << r.denied << " rejected:" << r.rejected
       << " incomplete:" << r.incomplete;
    return os.str();
}

}  // namespace

std::string MetricsReport::to_csv(bool header) const {
    std::ostringstream os;
    if (header) os << csv_header() << "\n";
    for (const auto& r : rows) {
        os << scenario << ',' << seed << ',' << params.N << ',' << params.S << ','
           << params.B << ',' << params.T << ',' << params.BS << ',' << r.flow << ','
           << r.packets << ',' << r.delay << ',' << r.comp_ops << ',' << r.mem_blocks << ','
           << outcome_cell(r) << "\n";
    }
    return os.str();
}

std::string MetricsReport::to_structured() const {
    std::ostringstream os;
    os << "scenario " << scenario << "\n";
    os << "seed " << seed << "\n";
    os << "param N " << params.N << "\n";
    os << "param S " << params.S << "\n";
    os << "param B " << params.B << "\n";
    os << "param T " << params.T << "\n";
    os << "param BS " << params.BS << "\n";
    os << "param TL " << params.TL << "\n";
    for (const auto& r : rows) {
        os << "flow " << r.flow << " packets " << r.packets << " delay " << r.delay
           << " comp_ops " << r.comp_ops << " mem_blocks " << r.mem_blocks << " "
           << outcome_cell(r) << "\n";
    }
    os << "total_packets " << total_packets << "\n";
    os << "memory_bytes " << memory_bytes << "\n";
    os << "local_blocks " << local_blocks << "\n";
    os << "overlay_blocks " << overlay_blocks << "\n";
    for (const auto& [name, value] : counters) os << "counter " << name << " " << value << "\n";
    return os.str();
}

std::string trace_lines(const FlowTrace& f) {
    std::ostringstream os;
    os << "flow " << f.id << " " << f.kind << " " << f.outcome << " start=" << f.start
       << " end=" << f.end << " packets=" << f.packets << " comp_ops=" << f.comp_ops << "\n";
    for (const auto& h : f.hops)
        os << "  " << h.tick << " " << h.from << " -> " << h.to << " " << h.msg << " "
           << h.packets << "\n";
    return os.str();
}

std::string trace_text(const std::deque<FlowTrace>& flows) {
    std::string out;
    for (const auto& f : flows) out += trace_lines(f);
    return out;
}

double loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (const auto& [x, y] : pts) {
        if (x <= 0.0 || y <= 0.0) continue;
        double lx = std::log(x);
        double ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

}  // namespace homechain
