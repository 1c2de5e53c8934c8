#include "homechain/cli/runner.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "homechain/sim/world.hpp"

namespace homechain {

namespace {

bool compare(const std::string& op, double v, double target, double tol) {
    if (op == "eq") return std::fabs(v - target) <= tol;
    if (op == "ge") return v + tol >= target;
    return v <= target + tol;  // le
}

std::string describe(const Assertion& a) {
    std::ostringstream os;
    os << a.kind << " ";
    if (a.kind == "counter")
        os << a.name;
    else if (a.flow.empty())
        os << a.metric;
    else
        os << a.flow << "." << a.metric;
    if (a.kind == "slope")
        os << " in [" << a.min << ", " << a.max << "]";
    else if (a.kind == "ratio")
        os << " max/min le " << a.max;
    else if (a.kind == "monotone")
        os << " " << a.direction;
    else
        os << (a.kind == "point" ? " at " + a.at + " " : " ") << a.op << " " << a.value;
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw ScenarioError(path + ": cannot write");
    f << content;
}

struct SweepEval {
    const SweepResult* sweep = nullptr;

    // y series of one metric across points; empty on any missing value.
    std::vector<double> series(const Assertion& a, std::string* why) const {
        std::vector<double> ys;
        for (const SweepPoint& pt : sweep->points) {
            const auto v = sweep_metric(pt, a.flow, a.metric);
            if (!v) {
                *why = "metric missing at value " + std::to_string(pt.value);
                return {};
            }
            ys.push_back(*v);
        }
        return ys;
    }
};

}  // namespace

int run_scenario(const Scenario& sc, const RunOptions& opt, std::ostream& out,
                 std::ostream& err) {
    if (opt.require_sweep && !sc.sweep)
        throw ScenarioError(sc.name + ": sweep subcommand needs a sweep section");

    SweepResult sweep;
    std::vector<MetricsReport> reports;
    std::string traces;
    if (sc.sweep) {
        sweep = run_sweep(sc.params, sc.workload, sc.adversaries, *sc.sweep, sc.seeds,
                          sc.max_ticks, sc.name);
        for (const SweepPoint& pt : sweep.points)
            for (const MetricsReport& r : pt.reports) reports.push_back(r);
    } else {
        for (const std::uint64_t seed : sc.seeds) {
            World w(sc.params, sc.workload, sc.adversaries, seed, sc.max_ticks, sc.name);
            reports.push_back(w.run());
            traces += w.trace_output();
        }
    }

    std::string csv = MetricsReport::csv_header();
    std::string structured;
    for (const MetricsReport& r : reports) {
        csv += r.to_csv(false);
        structured += r.to_structured() + "\n";
    }
    const std::string csv_path =
        opt.csv_override.empty() ? sc.outputs.csv : opt.csv_override;
    const std::string structured_path =
        opt.structured_override.empty() ? sc.outputs.structured : opt.structured_override;
    const std::string trace_path =
        opt.trace_override.empty() ? sc.outputs.trace : opt.trace_override;
    if (!csv_path.empty()) write_file(csv_path, csv);
    if (!structured_path.empty()) write_file(structured_path, structured);
    if (!trace_path.empty()) write_file(trace_path, traces);
    if (!opt.quiet) out << csv;

    bool all_ok = true;
    const SweepEval ev{&sweep};
    for (const Assertion& a : sc.assertions) {
        bool ok = true;
        std::ostringstream got;
        std::string why;
        if (a.kind == "counter" || a.kind == "metric") {
            const std::string flow = a.kind == "counter" ? "" : a.flow;
            const std::string metric = a.kind == "counter" ? "counter:" + a.name : a.metric;
            for (const MetricsReport& r : reports) {
                const auto v = report_metric(r, flow, metric);
                if (!v) {
                    ok = false;
                    why = "metric missing (seed " + std::to_string(r.seed) + ")";
                    break;
                }
                if (!compare(a.op, *v, a.value, a.tol)) {
                    ok = false;
                    why = "got " + std::to_string(*v) + " (seed " + std::to_string(r.seed) + ")";
                    break;
                }
            }
            if (ok) got << "all " << reports.size() << " runs";
        } else {
            const std::vector<double> ys = ev.series(a, &why);
            if (ys.empty()) {
                ok = false;
            } else if (a.kind == "slope") {
                std::vector<std::pair<double, double>> pts;
                for (std::size_t i = 0; i < ys.size(); ++i) {
                    double x = sweep.points[i].value;
                    if (a.x == "measured_bs")
                        x = *sweep_metric(sweep.points[i], "", "measured_bs");
                    pts.emplace_back(x, ys[i]);
                }
                const double slope = loglog_slope(pts);
                got << std::fixed << std::setprecision(4) << slope;
                ok = slope >= a.min && slope <= a.max;
                if (!ok) why = "slope out of band";
            } else if (a.kind == "ratio") {
                double lo = ys[0], hi = ys[0];
                for (const double y : ys) {
                    lo = std::min(lo, y);
                    hi = std::max(hi, y);
                }
                if (lo <= 0.0) {
                    ok = false;
                    why = "non-positive values";
                } else {
                    const double ratio = hi / lo;
                    got << std::fixed << std::setprecision(4) << ratio;
                    ok = ratio <= a.max;
                    if (!ok) why = "spread too wide";
                }
            } else if (a.kind == "monotone") {
                for (std::size_t i = 1; i < ys.size() && ok; ++i) {
                    if (a.direction == "nonincreasing")
                        ok = ys[i] <= ys[i - 1] + a.tol;
                    else
                        ok = ys[i] + a.tol >= ys[i - 1];
                }
                got << ys.size() << " points";
                if (!ok) why = "order violated";
            } else {  // point
                const double v = a.at == "first" ? ys.front() : ys.back();
                got << v;
                ok = compare(a.op, v, a.value, a.tol);
                if (!ok) why = "value out of range";
            }
        }
        all_ok = all_ok && ok;
        if (!opt.quiet)
            out << "assert " << describe(a) << ": " << (ok ? "ok" : "FAIL") << " ("
                << (ok ? got.str() : why) << ")\n";
        if (!ok) err << sc.name << ": assertion failed: " << describe(a) << ": " << why << "\n";
    }
    return all_ok ? 0 : 1;
}

}  // namespace homechain
