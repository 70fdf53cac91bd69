#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decbandit/config.hpp"
#include "decbandit/engine.hpp"
#include "decbandit/errors.hpp"

namespace decbandit {

/// Experiment with all randomness pinned: seed resolved, graph materialized,
/// arm models built.
struct ResolvedExperiment {
    ExperimentSpec spec;
    SimConfig sim;
    std::uint64_t master_seed = 0;
    std::string label;
};

/// Seed precedence: explicit override, then the config file, then the
/// DECBANDIT_SEED environment variable. Fails when none is present.
ResolvedExperiment resolve_experiment(const ExperimentSpec& spec,
                                      std::optional<std::uint64_t> seed_override = std::nullopt);

/// Runs the batch and writes trajectories.csv plus summary.json under
/// out_dir. Returns the summary JSON text.
std::string cmd_simulate(const ResolvedExperiment& experiment, const std::string& out_dir,
                         int workers);

/// Runs several experiments sharing (graph, arms, T, runs, seed) and writes
/// one merged trajectories CSV with a leading policy column. When
/// share_reward_seeds is false each experiment draws from displaced streams.
std::string cmd_compare(const std::vector<ResolvedExperiment>& experiments,
                        bool share_reward_seeds, const std::string& out_dir, int workers);

/// Asymptotic coefficients, the finite-time bound and the lower-bound
/// reference, tabulated over a log-spaced horizon grid per agent group.
/// Writes bounds.csv when out_dir is nonempty; returns the CSV text.
std::string cmd_bounds(const ResolvedExperiment& experiment, const std::string& out_dir);

struct VerifyOutcome {
    Status status = Status::Ok;
    std::string report_json;
};

/// Full structural verification: per-round engine checks plus the coefficient
/// oracle on every run. Desk-scale guarded (N <= 16, T <= 2000) unless
/// overridden. inject_fault perturbs one recorded consensus value to prove
/// the reconstruction check trips. Writes ledger.csv under out_dir when the
/// directory is nonempty.
VerifyOutcome cmd_verify(const ResolvedExperiment& experiment, bool override_guard,
                         bool inject_fault, const std::string& out_dir = "");

/// Rows of mean final regret grouped by (policy, neighborhood size,
/// exploration parameter); used by summary.json and the group experiments.
struct AgentGroupStat {
    std::string key;
    std::vector<int> agents;  // 1-based ids
    double mean_final_regret = 0.0;
    double std_final_regret = 0.0;
};

std::vector<AgentGroupStat> group_stats(const ResolvedExperiment& experiment,
                                        const BatchResult& batch);

}  // namespace decbandit
