#include "homechain/cli/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <set>
#include <sstream>

namespace homechain {

namespace {

std::string at(const std::string& origin, const YAML::Mark& mark) {
    std::ostringstream os;
    os << origin << ":" << mark.line + 1 << ":" << mark.column + 1;
    return os.str();
}

[[noreturn]] void fail(const std::string& origin, const YAML::Node& node,
                       const std::string& what) {
    throw ScenarioError(at(origin, node.Mark()) + ": " + what);
}

void require_map(const std::string& origin, const YAML::Node& node, const std::string& what) {
    if (!node.IsMap()) fail(origin, node, what + " must be a mapping");
}

// Every map is checked against its schema so a misspelled knob is an error,
// never a silently applied default.
void check_keys(const std::string& origin, const YAML::Node& node,
                const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.contains(key))
            fail(origin, kv.first, "unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T as(const std::string& origin, const YAML::Node& node, const std::string& what) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(origin, node, "bad value for " + what);
    }
}

std::vector<std::uint64_t> parse_seeds(const std::string& origin, const YAML::Node& node) {
    std::vector<std::uint64_t> seeds;
    if (node.IsSequence()) {
        for (const auto& s : node) seeds.push_back(as<std::uint64_t>(origin, s, "seeds"));
    } else {
        seeds.push_back(as<std::uint64_t>(origin, node, "seeds"));
    }
    if (seeds.empty()) fail(origin, node, "seeds must not be empty");
    return seeds;
}

void parse_overlay(const std::string& origin, const YAML::Node& node, OverlayConfig& cfg) {
    require_map(origin, node, "overlay");
    check_keys(origin, node, {"fail_threshold", "epoch_ticks", "forward_cap", "proof_fanout"},
               "overlay");
    if (node["fail_threshold"])
        cfg.fail_threshold = as<std::size_t>(origin, node["fail_threshold"], "fail_threshold");
    if (node["epoch_ticks"])
        cfg.epoch_ticks = as<std::uint64_t>(origin, node["epoch_ticks"], "epoch_ticks");
    if (node["forward_cap"])
        cfg.forward_cap = as<std::size_t>(origin, node["forward_cap"], "forward_cap");
    if (node["proof_fanout"])
        cfg.proof_fanout = as<std::size_t>(origin, node["proof_fanout"], "proof_fanout");
}

void parse_params(const std::string& origin, const YAML::Node& node, SimParams& p) {
    require_map(origin, node, "params");
    check_keys(origin, node,
               {"clusters", "nodes_per_cluster", "homes_per_cluster", "devices_per_home",
                "sps_per_cluster", "storage_hops", "shared_hops", "shared_homes", "ch_topology",
                "link_delay", "cluster_link_delay", "data_bytes", "blocks_per_chain",
                "txs_per_block", "trust_level", "window_blocks", "starvation_ticks",
                "move_delay_hops", "auto_move", "record_proofs", "storage_capacity", "crypto",
                "overlay"},
               "params");
    if (node["clusters"]) p.clusters = as<std::size_t>(origin, node["clusters"], "clusters");
    if (node["nodes_per_cluster"])
        p.nodes_per_cluster = as<std::size_t>(origin, node["nodes_per_cluster"], "nodes_per_cluster");
    if (node["homes_per_cluster"])
        p.homes_per_cluster = as<std::size_t>(origin, node["homes_per_cluster"], "homes_per_cluster");
    if (node["devices_per_home"])
        p.devices_per_home = as<std::size_t>(origin, node["devices_per_home"], "devices_per_home");
    if (node["sps_per_cluster"])
        p.sps_per_cluster = as<std::size_t>(origin, node["sps_per_cluster"], "sps_per_cluster");
    if (node["storage_hops"])
        p.storage_hops = as<std::size_t>(origin, node["storage_hops"], "storage_hops");
    if (node["shared_hops"]) p.shared_hops = as<std::size_t>(origin, node["shared_hops"], "shared_hops");
    if (node["shared_homes"])
        p.shared_homes = as<std::size_t>(origin, node["shared_homes"], "shared_homes");
    if (node["ch_topology"])
        p.ch_topology = as<std::string>(origin, node["ch_topology"], "ch_topology");
    if (node["link_delay"]) p.link_delay = as<std::uint64_t>(origin, node["link_delay"], "link_delay");
    if (node["cluster_link_delay"]) {
        require_map(origin, node["cluster_link_delay"], "cluster_link_delay");
        for (const auto& kv : node["cluster_link_delay"])
            p.cluster_link_delay[as<std::size_t>(origin, kv.first, "cluster_link_delay key")] =
                as<std::uint64_t>(origin, kv.second, "cluster_link_delay value");
    }
    if (node["data_bytes"]) p.data_bytes = as<std::size_t>(origin, node["data_bytes"], "data_bytes");
    if (node["blocks_per_chain"])
        p.blocks_per_chain = as<std::size_t>(origin, node["blocks_per_chain"], "blocks_per_chain");
    if (node["txs_per_block"])
        p.txs_per_block = as<std::size_t>(origin, node["txs_per_block"], "txs_per_block");
    if (node["trust_level"]) p.trust_level = as<double>(origin, node["trust_level"], "trust_level");
    if (node["window_blocks"])
        p.window_blocks = as<std::size_t>(origin, node["window_blocks"], "window_blocks");
    if (node["starvation_ticks"])
        p.starvation_ticks = as<std::uint64_t>(origin, node["starvation_ticks"], "starvation_ticks");
    if (node["move_delay_hops"])
        p.move_delay_hops = as<std::size_t>(origin, node["move_delay_hops"], "move_delay_hops");
    if (node["auto_move"]) p.auto_move = as<bool>(origin, node["auto_move"], "auto_move");
    if (node["record_proofs"])
        p.record_proofs = as<bool>(origin, node["record_proofs"], "record_proofs");
    if (node["storage_capacity"])
        p.storage_capacity = as<std::size_t>(origin, node["storage_capacity"], "storage_capacity");
    if (node["crypto"]) p.crypto = as<std::string>(origin, node["crypto"], "crypto");
    if (node["overlay"]) parse_overlay(origin, node["overlay"], p.overlay);
}

WorkItem parse_work_item(const std::string& origin, const YAML::Node& node) {
    require_map(origin, node, "workload entry");
    check_keys(origin, node,
               {"tick", "repeat", "every", "flow", "home", "device", "sp", "target", "scope",
                "monitor_ticks", "to_cluster", "grant", "random_placement"},
               "workload entry");
    if (!node["flow"]) fail(origin, node, "workload entry needs a flow");
    WorkItem w;
    w.flow = as<std::string>(origin, node["flow"], "flow");
    if (node["tick"]) w.tick = as<std::uint64_t>(origin, node["tick"], "tick");
    if (node["repeat"]) w.repeat = as<std::size_t>(origin, node["repeat"], "repeat");
    if (node["every"]) w.every = as<std::uint64_t>(origin, node["every"], "every");
    if (node["home"]) w.home = as<std::size_t>(origin, node["home"], "home");
    if (node["device"]) w.device = as<std::size_t>(origin, node["device"], "device");
    if (node["sp"]) w.sp = as<std::size_t>(origin, node["sp"], "sp");
    if (node["target"]) w.target = as<std::string>(origin, node["target"], "target");
    if (node["scope"]) w.scope = as<std::string>(origin, node["scope"], "scope");
    if (node["monitor_ticks"])
        w.monitor_ticks = as<std::uint64_t>(origin, node["monitor_ticks"], "monitor_ticks");
    if (node["to_cluster"]) w.to_cluster = as<std::size_t>(origin, node["to_cluster"], "to_cluster");
    if (node["grant"]) w.grant = as<bool>(origin, node["grant"], "grant");
    if (node["random_placement"])
        w.random_placement = as<bool>(origin, node["random_placement"], "random_placement");
    return w;
}

AdversaryScript parse_script(const std::string& origin, const YAML::Node& node) {
    require_map(origin, node, "adversary entry");
    check_keys(origin, node,
               {"kind", "tick", "count", "every", "cluster", "home", "device", "sp",
                "cosigner_cluster", "forged_txs", "honest_txs", "rotate_pk"},
               "adversary entry");
    if (!node["kind"]) fail(origin, node, "adversary entry needs a kind");
    AdversaryScript s;
    s.kind = as<std::string>(origin, node["kind"], "kind");
    if (node["tick"]) s.tick = as<std::uint64_t>(origin, node["tick"], "tick");
    if (node["count"]) s.count = as<std::size_t>(origin, node["count"], "count");
    if (node["every"]) s.every = as<std::uint64_t>(origin, node["every"], "every");
    if (node["cluster"]) s.cluster = as<std::size_t>(origin, node["cluster"], "cluster");
    if (node["home"]) s.home = as<std::size_t>(origin, node["home"], "home");
    if (node["device"]) s.device = as<std::size_t>(origin, node["device"], "device");
    if (node["sp"]) s.sp = as<std::size_t>(origin, node["sp"], "sp");
    if (node["cosigner_cluster"])
        s.cosigner_cluster = as<std::size_t>(origin, node["cosigner_cluster"], "cosigner_cluster");
    if (node["forged_txs"]) s.forged_txs = as<std::size_t>(origin, node["forged_txs"], "forged_txs");
    if (node["honest_txs"]) s.honest_txs = as<std::size_t>(origin, node["honest_txs"], "honest_txs");
    if (node["rotate_pk"]) s.rotate_pk = as<bool>(origin, node["rotate_pk"], "rotate_pk");
    return s;
}

SweepSpec parse_sweep(const std::string& origin, const YAML::Node& node) {
    require_map(origin, node, "sweep");
    check_keys(origin, node, {"symbol", "values"}, "sweep");
    if (!node["symbol"] || !node["values"]) fail(origin, node, "sweep needs symbol and values");
    SweepSpec s;
    s.symbol = as<std::string>(origin, node["symbol"], "symbol");
    static const std::set<std::string> symbols = {"N", "S", "B", "T", "BS", "TL"};
    if (!symbols.contains(s.symbol)) fail(origin, node["symbol"], "unknown sweep symbol " + s.symbol);
    if (!node["values"].IsSequence()) fail(origin, node["values"], "sweep values must be a list");
    for (const auto& v : node["values"]) s.values.push_back(as<double>(origin, v, "sweep value"));
    if (s.values.size() < 2) fail(origin, node["values"], "sweep needs at least two values");
    return s;
}

Assertion parse_assertion(const std::string& origin, const YAML::Node& node) {
    require_map(origin, node, "assertion");
    check_keys(origin, node,
               {"kind", "flow", "metric", "name", "op", "at", "x", "direction", "value", "tol",
                "min", "max"},
               "assertion");
    if (!node["kind"]) fail(origin, node, "assertion needs a kind");
    Assertion a;
    a.kind = as<std::string>(origin, node["kind"], "kind");
    static const std::set<std::string> kinds = {"slope", "ratio", "monotone",
                                                "point", "counter", "metric"};
    if (!kinds.contains(a.kind)) fail(origin, node["kind"], "unknown assertion kind " + a.kind);
    if (node["flow"]) a.flow = as<std::string>(origin, node["flow"], "flow");
    if (node["metric"]) a.metric = as<std::string>(origin, node["metric"], "metric");
    if (node["name"]) a.name = as<std::string>(origin, node["name"], "name");
    if (node["op"]) a.op = as<std::string>(origin, node["op"], "op");
    if (a.op != "eq" && a.op != "ge" && a.op != "le")
        fail(origin, node["op"], "op must be eq, ge, or le");
    if (node["at"]) a.at = as<std::string>(origin, node["at"], "at");
    if (a.at != "first" && a.at != "last") fail(origin, node["at"], "at must be first or last");
    if (node["x"]) a.x = as<std::string>(origin, node["x"], "x");
    if (a.x != "value" && a.x != "measured_bs")
        fail(origin, node["x"], "x must be value or measured_bs");
    if (node["direction"]) a.direction = as<std::string>(origin, node["direction"], "direction");
    if (a.direction != "nonincreasing" && a.direction != "nondecreasing")
        fail(origin, node["direction"], "direction must be nonincreasing or nondecreasing");
    if (node["value"]) a.value = as<double>(origin, node["value"], "value");
    if (node["tol"]) a.tol = as<double>(origin, node["tol"], "tol");
    if (node["min"]) a.min = as<double>(origin, node["min"], "min");
    if (node["max"]) a.max = as<double>(origin, node["max"], "max");
    if (a.kind == "slope" && (!node["min"] || !node["max"]))
        fail(origin, node, "slope assertion needs min and max");
    if (a.kind == "ratio" && !node["max"]) fail(origin, node, "ratio assertion needs max");
    if ((a.kind == "point" || a.kind == "metric" || a.kind == "counter") && !node["value"])
        fail(origin, node, a.kind + " assertion needs value");
    if (a.kind == "counter" && a.name.empty()) fail(origin, node, "counter assertion needs name");
    if (a.kind != "counter" && a.metric.empty())
        fail(origin, node, a.kind + " assertion needs metric");
    return a;
}

void parse_outputs(const std::string& origin, const YAML::Node& node, ScenarioOutputs& out) {
    require_map(origin, node, "outputs");
    check_keys(origin, node, {"csv", "structured", "trace"}, "outputs");
    if (node["csv"]) out.csv = as<std::string>(origin, node["csv"], "csv");
    if (node["structured"]) out.structured = as<std::string>(origin, node["structured"], "structured");
    if (node["trace"]) out.trace = as<std::string>(origin, node["trace"], "trace");
}

Scenario parse_root(const std::string& origin, const YAML::Node& root) {
    if (!root.IsMap()) throw ScenarioError(origin + ": scenario must be a mapping");
    check_keys(origin, root,
               {"name", "seed", "seeds", "max_ticks", "params", "workload", "adversaries",
                "sweep", "assertions", "outputs"},
               "scenario");
    Scenario sc;
    if (root["name"]) sc.name = as<std::string>(origin, root["name"], "name");
    if (root["seed"] && root["seeds"])
        fail(origin, root["seed"], "give seed or seeds, not both");
    if (root["seed"]) sc.seeds = parse_seeds(origin, root["seed"]);
    if (root["seeds"]) sc.seeds = parse_seeds(origin, root["seeds"]);
    if (root["max_ticks"]) sc.max_ticks = as<std::uint64_t>(origin, root["max_ticks"], "max_ticks");
    if (root["params"]) parse_params(origin, root["params"], sc.params);
    if (root["workload"]) {
        if (!root["workload"].IsSequence()) fail(origin, root["workload"], "workload must be a list");
        for (const auto& n : root["workload"]) sc.workload.push_back(parse_work_item(origin, n));
    }
    if (root["adversaries"]) {
        if (!root["adversaries"].IsSequence())
            fail(origin, root["adversaries"], "adversaries must be a list");
        for (const auto& n : root["adversaries"]) sc.adversaries.push_back(parse_script(origin, n));
    }
    if (root["sweep"]) sc.sweep = parse_sweep(origin, root["sweep"]);
    if (root["assertions"]) {
        if (!root["assertions"].IsSequence())
            fail(origin, root["assertions"], "assertions must be a list");
        for (const auto& n : root["assertions"]) sc.assertions.push_back(parse_assertion(origin, n));
    }
    if (root["outputs"]) parse_outputs(origin, root["outputs"], sc.outputs);
    if (sc.name.empty()) throw ScenarioError(origin + ": scenario needs a name");
    for (const Assertion& a : sc.assertions) {
        const bool needs_sweep =
            a.kind == "slope" || a.kind == "ratio" || a.kind == "monotone" || a.kind == "point";
        if (needs_sweep && !sc.sweep)
            throw ScenarioError(origin + ": " + a.kind + " assertion needs a sweep section");
    }
    return sc;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw ScenarioError(path + ": cannot read file");
    } catch (const YAML::Exception& e) {
        throw ScenarioError(path + ":" + std::to_string(e.mark.line + 1) + ":" +
                            std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    return parse_root(path, root);
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ScenarioError(origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                            std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    return parse_root(origin, root);
}

}  // namespace homechain
