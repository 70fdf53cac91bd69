#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decbandit/graph.hpp"
#include "decbandit/rewards.hpp"

namespace decbandit {

/// Parsed experiment file, before seeds and graphs are materialized.
struct ExperimentSpec {
    std::string graph;                  // graph grammar string
    std::vector<std::string> arms;      // arm grammar strings
    std::vector<std::string> policy;    // one entry, or one per agent
    std::vector<double> varsigma{0.01};
    std::vector<double> beta{0.01};
    std::int64_t horizon = 0;           // T
    int runs = 1;
    std::optional<std::uint64_t> seed;
    bool invariant_checks = false;
    bool oracle = false;
    std::string output_dir;
    std::int64_t snapshot_interval = 1;
    std::string label;                  // optional, used by the compare table
};

/// Parses the JSON experiment format. Unknown keys are rejected and schema
/// problems are reported with their key path.
ExperimentSpec parse_experiment_json(const std::string& text, const std::string& origin = "<string>");
ExperimentSpec load_experiment_file(const std::string& path);

/// Graph grammar: er(n,p), complete(n), cycle(n), path(n), fig5, or
/// edges:[(i,j),...] with 1-based node ids. The seed feeds er() generation
/// (connected graphs are required there, resampling up to 1000 attempts).
NeighborGraph parse_graph_spec(const std::string& spec, std::uint64_t seed);

/// Arm grammar: bern(mu), tnorm(mu_raw,sigma), tnorm_mean(mu,sigma),
/// beta(a,b).
ArmSpec parse_arm_spec(const std::string& spec);

}  // namespace decbandit
