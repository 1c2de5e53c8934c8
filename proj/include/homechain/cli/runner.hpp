#pragma once

#include <iosfwd>
#include <string>

#include "homechain/cli/scenario.hpp"

namespace homechain {

struct RunOptions {
    bool quiet = false;              // silence stdout; files still written
    bool require_sweep = false;      // sweep subcommand: a sweep section is mandatory
    std::string csv_override;        // --csv
    std::string structured_override; // --structured
    std::string trace_override;      // --trace
};

// Runs every seed (and every sweep point), writes the requested outputs,
// evaluates the assertions. Returns 0 when all hold, 1 otherwise; throws
// ScenarioError for input problems. One line per assertion goes to `out`.
int run_scenario(const Scenario& sc, const RunOptions& opt, std::ostream& out,
                 std::ostream& err);

}  // namespace homechain
