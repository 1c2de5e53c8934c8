#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "homechain/cli/runner.hpp"
#include "homechain/core/crypto.hpp"

// Exit codes: 0 run completed and every assertion held, 1 an assertion
// failed, 2 bad input (unreadable file, parse error, unknown key, invalid
// parameters).
int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator for a tiered home-ledger network"};
    app.require_subcommand(1);

    std::string path;
    homechain::RunOptions opt;
    auto configure = [&](CLI::App* cmd) {
        cmd->add_option("scenario", path, "Scenario file (YAML)")->required();
        cmd->add_flag("--quiet", opt.quiet, "No stdout; output files are still written");
        cmd->add_option("--csv", opt.csv_override, "Write the metrics CSV here");
        cmd->add_option("--structured", opt.structured_override,
                        "Write the structured report here");
        cmd->add_option("--trace", opt.trace_override,
                        "Write per-flow hop traces here (plain runs only)");
    };
    CLI::App* run = app.add_subcommand("run", "Run a scenario and check its assertions");
    CLI::App* sweep =
        app.add_subcommand("sweep", "Run a scenario's parameter sweep (sweep section required)");
    configure(run);
    configure(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    opt.require_sweep = sweep->parsed();

    try {
        const homechain::Scenario sc = homechain::load_scenario(path);
        return homechain::run_scenario(sc, opt, std::cout, std::cerr);
    } catch (const homechain::ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const homechain::CryptoError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
