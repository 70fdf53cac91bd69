#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decbandit/agent.hpp"
#include "decbandit/graph.hpp"
#include "decbandit/rewards.hpp"

namespace decbandit {

/// Fully resolved simulation inputs. Per-agent vectors always have one entry
/// per node; isolated nodes already fall back to single-agent policies when
/// this is built through `make_sim_config`.
struct SimConfig {
    NeighborGraph graph;
    WeightMatrix weights;
    ArmSet arms;
    std::vector<Policy> policies;
    std::vector<double> varsigma;
    std::vector<double> beta;
    std::int64_t horizon = 0;       // T rounds after initialization
    int run_count = 1;
    std::uint64_t master_seed = 0;
    std::int64_t snapshot_interval = 1;
    bool invariant_checks = false;
    bool track_trace = false;       // record pulls/rewards/state history
};

SimConfig make_sim_config(NeighborGraph graph, ArmSet arms, std::vector<Policy> policies,
                          std::vector<double> varsigma, std::vector<double> beta,
                          std::int64_t horizon, int run_count, std::uint64_t master_seed,
                          std::int64_t snapshot_interval = 1);

/// Complete per-round history of one run, for the coefficient oracle and the
/// invariant checks. Time index 0 is the initialization snapshot.
struct RunTrace {
    // pulls[t-1][i] / pull_rewards[t-1][i]: arm pulled between t-1 and t and
    // its reward (t = 1..T). init_rewards[i][k]: the time-0 samples.
    std::vector<std::vector<int>> pulls;
    std::vector<std::vector<double>> pull_rewards;
    std::vector<std::vector<double>> init_rewards;
    // State snapshots indexed [t][i][k], t = 0..T.
    std::vector<std::vector<std::vector<std::int64_t>>> counts;
    std::vector<std::vector<std::vector<std::int64_t>>> max_counts;
    std::vector<std::vector<std::vector<double>>> consensus;
};

/// Result of one per-round structural check over a whole run.
struct CheckResult {
    std::string name;
    bool applicable = true;
    bool pass = true;
    double margin = 0.0;   // tightest observed slack (check-specific units)
    std::int64_t violations = 0;
    std::string detail;
};

struct RunResult {
    int run_index = 0;
    std::uint64_t run_key = 0;                       // derived seed material
    std::uint64_t graph_fingerprint = 0;
    std::vector<std::int64_t> snapshot_times;        // stored t values
    std::vector<std::vector<double>> regret;         // [agent][snapshot]
    std::vector<std::vector<std::int64_t>> final_counts;  // [agent][arm]
    std::vector<CheckResult> checks;                 // filled in invariant mode
    std::optional<RunTrace> trace;                   // filled when track_trace

    double final_regret(int agent) const { return regret[agent].back(); }
};

/// Executes initialization plus `horizon` lockstep rounds. Deterministic:
/// identical (config, run_index) give bit-identical results.
RunResult run(const SimConfig& config, int run_index);

/// Gap-weighted count of suboptimal pulls. Counts must sum to T + M.
double pseudo_regret(const std::vector<std::int64_t>& pull_counts, const std::vector<double>& gaps,
                     std::int64_t horizon);

struct BatchResult {
    std::vector<RunResult> runs;
    // Mean over runs of each agent's regret at every snapshot, then the mean
    // over agents and runs, both accumulated in fixed index order.
    std::vector<std::int64_t> snapshot_times;
    std::vector<std::vector<double>> mean_regret_per_agent;  // [agent][snapshot]
    std::vector<double> mean_regret_pooled;                  // [snapshot]
};

BatchResult run_batch(const SimConfig& config, int workers = 1);

}  // namespace decbandit
