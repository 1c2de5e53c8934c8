#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "homechain/sim/adversary.hpp"
#include "homechain/sim/scaling.hpp"
#include "homechain/sim/topology.hpp"

namespace homechain {

// Unreadable file, parse error, unknown key, out-of-domain value. The
// message carries file:line:column where the parser knows it.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// One declarative check against a run or a sweep.
//   slope     loglog fit of `metric` across sweep points in [min, max];
//             x defaults to the swept value, "measured_bs" uses the report's
//             mean block size instead
//   ratio     max/min of `metric` across sweep points at most `max`
//   monotone  `metric` across sweep points never increases (or decreases,
//             per `direction`)
//   point     `metric` at the first or last sweep point compared by `op`
//   counter   run counter `name` compared by `op`, every seed
//   metric    row or report metric compared by `op`, every seed
struct Assertion {
    std::string kind;
    std::string flow;                     // row metrics; "" for report metrics
    std::string metric;
    std::string name;                     // counter assertions
    std::string op = "eq";                // eq | ge | le
    std::string at = "last";              // point: first | last
    std::string x = "value";              // slope: value | measured_bs
    std::string direction = "nonincreasing";  // monotone
    double value = 0.0;
    double tol = 1e-9;                    // point/counter/metric eq slack
    double min = 0.0;
    double max = 0.0;
};

struct ScenarioOutputs {
    std::string csv;
    std::string structured;
    std::string trace;
};

struct Scenario {
    std::string name;
    std::vector<std::uint64_t> seeds = {1};
    std::uint64_t max_ticks = 10000;
    SimParams params;
    std::vector<WorkItem> workload;
    std::vector<AdversaryScript> adversaries;
    std::optional<SweepSpec> sweep;
    std::vector<Assertion> assertions;
    ScenarioOutputs outputs;
};

// Throws ScenarioError on any problem, including keys the schema does not
// define (misspellings must not silently become defaults).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& origin);

}  // namespace homechain
