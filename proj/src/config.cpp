#include "decbandit/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "decbandit/agent.hpp"
#include "decbandit/errors.hpp"
#include "decbandit/rng.hpp"

namespace decbandit {

namespace {

std::string strip(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

// Splits "name(a,b,...)" into the name and numeric arguments.
bool split_call(const std::string& spec, std::string& name, std::vector<double>& args) {
    std::size_t open = spec.find('(');
    if (open == std::string::npos || spec.back() != ')') return false;
    name = strip(spec.substr(0, open));
    std::string body = spec.substr(open + 1, spec.size() - open - 2);
    args.clear();
    if (strip(body).empty()) return true;
    std::istringstream in(body);
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            std::size_t used = 0;
            args.push_back(std::stod(strip(token), &used));
        } catch (const std::exception&) {
            return false;
        }
    }
    return true;
}

std::vector<std::pair<int, int>> parse_edge_list(const std::string& body) {
    // body looks like [(1,2),(2,3)]; ids are 1-based in configs.
    std::vector<std::pair<int, int>> edges;
    std::vector<int> numbers;
    std::string digits;
    for (char c : body) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits += c;
        } else {
            if (!digits.empty()) numbers.push_back(std::stoi(digits));
            digits.clear();
            if (std::string("[](), \t").find(c) == std::string::npos)
                throw ConfigError(std::string("unexpected character '") + c + "' in edge list");
        }
    }
    if (!digits.empty()) numbers.push_back(std::stoi(digits));
    if (numbers.size() % 2 != 0) throw ConfigError("edge list needs pairs of node ids");
    for (std::size_t idx = 0; idx + 1 < numbers.size(); idx += 2) {
        int a = numbers[idx];
        int b = numbers[idx + 1];
        if (a < 1 || b < 1) throw ConfigError("edge list node ids are 1-based");
        edges.emplace_back(a - 1, b - 1);
    }
    return edges;
}

}  // namespace

NeighborGraph parse_graph_spec(const std::string& raw, std::uint64_t seed) {
    const std::string spec = strip(raw);
    if (spec == "fig5") return two_component_benchmark_graph();
    if (spec.starts_with("edges:")) {
        auto edges = parse_edge_list(spec.substr(6));
        if (edges.empty()) throw ConfigError("edge list graph needs at least one edge");
        int n = 0;
        for (auto [a, b] : edges) n = std::max({n, a + 1, b + 1});
        return NeighborGraph(n, std::move(edges));
    }
    std::string name;
    std::vector<double> args;
    if (!split_call(spec, name, args))
        throw ConfigError("cannot parse graph spec '" + spec +
                          "' (expected er(n,p), complete(n), cycle(n), path(n), fig5 or edges:[...])");
    auto int_arg = [&](std::size_t idx) {
        double v = args.at(idx);
        if (v < 1 || v != std::floor(v)) throw ConfigError("graph size must be a positive integer");
        return static_cast<int>(v);
    };
    if (name == "er") {
        if (args.size() != 2) throw ConfigError("er takes (n, p)");
        return gen_erdos_renyi(int_arg(0), args[1], seed, /*require_connected=*/true,
                               /*max_attempts=*/1000);
    }
    if (name == "complete" && args.size() == 1) return complete_graph(int_arg(0));
    if (name == "cycle" && args.size() == 1) return cycle_graph(int_arg(0));
    if (name == "path" && args.size() == 1) return path_graph(int_arg(0));
    throw ConfigError("unknown graph spec '" + spec + "'");
}

ArmSpec parse_arm_spec(const std::string& raw) {
    const std::string spec = strip(raw);
    std::string name;
    std::vector<double> args;
    if (!split_call(spec, name, args))
        throw ConfigError("cannot parse arm spec '" + spec +
                          "' (expected bern(mu), tnorm(mu,sigma), tnorm_mean(mu,sigma) or beta(a,b))");
    if (name == "bern" && args.size() == 1) return ArmSpec::bernoulli(args[0]);
    if (name == "tnorm" && args.size() == 2) return ArmSpec::truncated_normal(args[0], args[1]);
    if (name == "tnorm" && args.size() == 1) return ArmSpec::truncated_normal(args[0], 0.1);
    if (name == "tnorm_mean" && args.size() == 2)
        return ArmSpec::truncated_normal_mean_targeted(args[0], args[1]);
    if (name == "tnorm_mean" && args.size() == 1)
        return ArmSpec::truncated_normal_mean_targeted(args[0], 0.1);
    if (name == "beta" && args.size() == 2) return ArmSpec::beta(args[0], args[1]);
    throw ConfigError("unknown arm spec '" + spec + "'");
}

namespace {

using nlohmann::json;

template <typename T>
std::vector<T> scalar_or_list(const json& value, const std::string& key) {
    std::vector<T> out;
    if (value.is_array()) {
        for (std::size_t idx = 0; idx < value.size(); ++idx) {
            try {
                out.push_back(value[idx].get<T>());
            } catch (const json::exception& e) {
                throw ConfigError(key + "[" + std::to_string(idx) + "]: " + e.what());
            }
        }
        if (out.empty()) throw ConfigError(key + ": list must not be empty");
        return out;
    }
    try {
        out.push_back(value.get<T>());
    } catch (const json::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
    return out;
}

}  // namespace

ExperimentSpec parse_experiment_json(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object");

    static const std::set<std::string> known = {
        "graph",  "arms",  "policy",           "varsigma",   "beta",
        "T",      "runs",  "seed",             "invariant_checks", "oracle",
        "output_dir", "snapshot_interval", "label"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!known.contains(it.key()))
            throw ConfigError(origin + ": unknown key '" + it.key() + "'");

    auto require = [&](const char* key) -> const json& {
        if (!doc.contains(key)) throw ConfigError(origin + ": missing required key '" + key + "'");
        return doc.at(key);
    };

    ExperimentSpec spec;
    try {
        spec.graph = require("graph").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": graph: " + e.what());
    }
    spec.arms = scalar_or_list<std::string>(require("arms"), "arms");
    spec.policy = scalar_or_list<std::string>(require("policy"), "policy");
    for (const std::string& p : spec.policy) policy_from_name(p);  // validate early
    try {
        spec.horizon = require("T").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": T: " + e.what());
    }
    if (doc.contains("varsigma")) spec.varsigma = scalar_or_list<double>(doc["varsigma"], "varsigma");
    if (doc.contains("beta")) spec.beta = scalar_or_list<double>(doc["beta"], "beta");
    try {
        if (doc.contains("runs")) spec.runs = doc["runs"].get<int>();
        if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("invariant_checks")) spec.invariant_checks = doc["invariant_checks"].get<bool>();
        if (doc.contains("oracle")) spec.oracle = doc["oracle"].get<bool>();
        if (doc.contains("output_dir")) spec.output_dir = doc["output_dir"].get<std::string>();
        if (doc.contains("snapshot_interval"))
            spec.snapshot_interval = doc["snapshot_interval"].get<std::int64_t>();
        if (doc.contains("label")) spec.label = doc["label"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (spec.horizon < 0) throw ConfigError(origin + ": T must be nonnegative");
    if (spec.runs < 1) throw ConfigError(origin + ": runs must be at least 1");
    if (spec.snapshot_interval < 1) throw ConfigError(origin + ": snapshot_interval must be at least 1");
    return spec;
}

ExperimentSpec load_experiment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_json(buffer.str(), path);
}

}  // namespace decbandit
