#include "decbandit/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "decbandit/analysis.hpp"
#include "decbandit/oracle.hpp"
#include "decbandit/rng.hpp"

namespace decbandit {

namespace {

using nlohmann::json;

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string hex_key(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunError("cannot write '" + path + "'");
    out << text;
    if (!out) throw RunError("short write to '" + path + "'");
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw RunError("cannot create output directory '" + dir + "': " + ec.message());
}

json config_echo(const ResolvedExperiment& experiment) {
    const SimConfig& sim = experiment.sim;
    json echo;
    echo["graph"] = experiment.spec.graph;
    echo["graph_fingerprint"] = hex_key(sim.graph.fingerprint());
    echo["node_count"] = sim.graph.node_count();
    json arms = json::array();
    for (const ArmSpec& arm : sim.arms.arms()) arms.push_back(arm.describe());
    echo["arms"] = arms;
    echo["arm_means"] = sim.arms.means();
    echo["arm_gaps"] = sim.arms.gaps();
    json policies = json::array();
    for (Policy p : sim.policies) policies.push_back(policy_name(p));
    echo["policy"] = policies;
    echo["varsigma"] = sim.varsigma;
    echo["beta"] = sim.beta;
    echo["T"] = sim.horizon;
    echo["runs"] = sim.run_count;
    echo["seed"] = experiment.master_seed;
    echo["snapshot_interval"] = sim.snapshot_interval;
    echo["rho2"] = sim.weights.rho2;
    json run_keys = json::array();
    for (int r = 0; r < sim.run_count; ++r)
        run_keys.push_back(hex_key(
            RandomStream::derive_key(sim.master_seed, r, ~0ULL, StreamPurpose::Graph)));
    echo["run_keys"] = run_keys;
    echo["label"] = experiment.label;
    return echo;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

void append_trajectories(std::string& csv, const BatchResult& batch, const std::string& policy_label) {
    for (const RunResult& run : batch.runs) {
        for (std::size_t s = 0; s < run.snapshot_times.size(); ++s) {
            for (std::size_t i = 0; i < run.regret.size(); ++i) {
                if (!policy_label.empty()) {
                    csv += policy_label;
                    csv += ',';
                }
                csv += std::to_string(run.run_index);
                csv += ',';
                csv += std::to_string(run.snapshot_times[s]);
                csv += ',';
                csv += std::to_string(i + 1);  // agents are 1-based outside
                csv += ',';
                csv += fmt12(run.regret[i][s]);
                csv += '\n';
            }
        }
    }
}

json results_summary(const ResolvedExperiment& experiment, const BatchResult& batch) {
    const int n = experiment.sim.graph.node_count();
    json per_agent = json::array();
    std::vector<double> pooled;
    for (int i = 0; i < n; ++i) {
        std::vector<double> finals;
        for (const RunResult& run : batch.runs) {
            finals.push_back(run.final_regret(i));
            pooled.push_back(run.final_regret(i));
        }
        MeanStd stat = mean_std(finals);
        per_agent.push_back({{"agent", i + 1},
                             {"mean_final_regret", stat.mean},
                             {"std_final_regret", stat.std}});
    }
    MeanStd pooled_stat = mean_std(pooled);
    json groups = json::array();
    for (const AgentGroupStat& g : group_stats(experiment, batch))
        groups.push_back({{"group", g.key},
                          {"agents", g.agents},
                          {"mean_final_regret", g.mean_final_regret},
                          {"std_final_regret", g.std_final_regret}});
    return json{{"per_agent", per_agent},
                {"pooled", {{"mean_final_regret", pooled_stat.mean}, {"std_final_regret", pooled_stat.std}}},
                {"agent_groups", groups}};
}

}  // namespace

std::vector<AgentGroupStat> group_stats(const ResolvedExperiment& experiment,
                                        const BatchResult& batch) {
    const SimConfig& sim = experiment.sim;
    const int n = sim.graph.node_count();
    std::map<std::string, AgentGroupStat> groups;
    for (int i = 0; i < n; ++i) {
        Policy p = sim.policies[i];
        double param = is_kl(p) ? sim.varsigma[i] : sim.beta[i];
        char key[96];
        std::snprintf(key, sizeof(key), "%s|nbrs=%d|param=%g", policy_name(p).c_str(),
                      sim.graph.neighborhood_size(i), param);
        groups[key].key = key;
        groups[key].agents.push_back(i + 1);
    }
    std::vector<AgentGroupStat> out;
    for (auto& [key, group] : groups) {
        std::vector<double> finals;
        for (int agent : group.agents)
            for (const RunResult& run : batch.runs) finals.push_back(run.final_regret(agent - 1));
        MeanStd stat = mean_std(finals);
        group.mean_final_regret = stat.mean;
        group.std_final_regret = stat.std;
        out.push_back(group);
    }
    return out;
}

ResolvedExperiment resolve_experiment(const ExperimentSpec& spec,
                                      std::optional<std::uint64_t> seed_override) {
    std::uint64_t master = 0;
    if (seed_override) {
        master = *seed_override;
    } else if (spec.seed) {
        master = *spec.seed;
    } else if (const char* env = std::getenv("DECBANDIT_SEED")) {
        try {
            master = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("DECBANDIT_SEED is not an unsigned integer");
        }
    } else {
        throw ConfigError("no seed given: set 'seed' in the config, pass --seed, or export DECBANDIT_SEED");
    }

    NeighborGraph graph = parse_graph_spec(
        spec.graph, RandomStream::derive_key(master, 0, 0, StreamPurpose::Graph));
    std::vector<ArmSpec> arms;
    arms.reserve(spec.arms.size());
    for (const std::string& arm : spec.arms) arms.push_back(parse_arm_spec(arm));
    std::vector<Policy> policies;
    policies.reserve(spec.policy.size());
    for (const std::string& name : spec.policy) policies.push_back(policy_from_name(name));

    SimConfig sim = make_sim_config(std::move(graph), ArmSet(std::move(arms)), std::move(policies),
                                    spec.varsigma, spec.beta, spec.horizon, spec.runs, master,
                                    spec.snapshot_interval);
    sim.invariant_checks = spec.invariant_checks;
    sim.track_trace = spec.oracle;

    ResolvedExperiment experiment{spec, std::move(sim), master, spec.label};
    if (experiment.label.empty()) {
        // Derive something readable for merged tables.
        const SimConfig& s = experiment.sim;
        bool uniform = std::all_of(s.policies.begin(), s.policies.end(),
                                   [&](Policy p) { return p == s.policies[0]; });
        if (uniform) {
            Policy p = s.policies[0];
            double param = is_kl(p) ? s.varsigma[0] : s.beta[0];
            bool uniform_param = is_kl(p)
                                     ? std::equal(s.varsigma.begin() + 1, s.varsigma.end(), s.varsigma.begin())
                                     : std::equal(s.beta.begin() + 1, s.beta.end(), s.beta.begin());
            char buf[64];
            if (uniform_param)
                std::snprintf(buf, sizeof(buf), "%s(%g)", policy_name(p).c_str(), param);
            else
                std::snprintf(buf, sizeof(buf), "%s(per-agent)", policy_name(p).c_str());
            experiment.label = buf;
        } else {
            experiment.label = "mixed";
        }
    }
    return experiment;
}

std::string cmd_simulate(const ResolvedExperiment& experiment, const std::string& out_dir,
                         int workers) {
    auto started = std::chrono::steady_clock::now();
    BatchResult batch = run_batch(experiment.sim, workers);
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::string csv = "run,t,agent,regret\n";
    append_trajectories(csv, batch, "");

    json summary;
    summary["config"] = config_echo(experiment);
    summary["results"] = results_summary(experiment, batch);
    summary["runtime_seconds"] = elapsed;
    std::string summary_text = summary.dump(2) + "\n";

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_text_file(out_dir + "/trajectories.csv", csv);
        write_text_file(out_dir + "/summary.json", summary_text);
    }
    return summary_text;
}

std::string cmd_compare(const std::vector<ResolvedExperiment>& experiments,
                        bool share_reward_seeds, const std::string& out_dir, int workers) {
    if (experiments.size() < 2) throw ConfigError("compare needs at least two configs");
    const ResolvedExperiment& first = experiments.front();
    for (const ResolvedExperiment& e : experiments) {
        if (e.sim.graph.fingerprint() != first.sim.graph.fingerprint())
            throw ConfigError("compare configs must share the graph");
        if (e.spec.arms != first.spec.arms) throw ConfigError("compare configs must share the arms");
        if (e.sim.horizon != first.sim.horizon) throw ConfigError("compare configs must share T");
        if (e.sim.run_count != first.sim.run_count)
            throw ConfigError("compare configs must share the run count");
        if (e.master_seed != first.master_seed)
            throw ConfigError("compare configs must share the seed");
    }

    auto started = std::chrono::steady_clock::now();
    std::string csv = "policy,run,t,agent,regret\n";
    json per_policy = json::array();
    for (std::size_t idx = 0; idx < experiments.size(); ++idx) {
        SimConfig sim = experiments[idx].sim;
        if (!share_reward_seeds && idx > 0)
            sim.master_seed = RandomStream::derive_key(sim.master_seed, idx, 0, StreamPurpose::Graph, 1);
        BatchResult batch = run_batch(sim, workers);
        append_trajectories(csv, batch, experiments[idx].label);
        json entry;
        entry["policy"] = experiments[idx].label;
        entry["results"] = results_summary(experiments[idx], batch);
        per_policy.push_back(entry);
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    json summary;
    summary["config"] = config_echo(first);
    summary["shared_reward_seeds"] = share_reward_seeds;
    summary["policies"] = per_policy;
    summary["runtime_seconds"] = elapsed;
    std::string summary_text = summary.dump(2) + "\n";
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_text_file(out_dir + "/trajectories.csv", csv);
        write_text_file(out_dir + "/summary.json", summary_text);
    }
    return summary_text;
}

std::string cmd_bounds(const ResolvedExperiment& experiment, const std::string& out_dir) {
    const SimConfig& sim = experiment.sim;
    const std::vector<double>& mu = sim.arms.means();
    const double horizon = std::max<double>(static_cast<double>(sim.horizon), 2.0);

    // One row set per distinct (neighborhood size, parameters) group.
    std::map<std::string, int> group_agent;  // representative agent per group
    for (int i = 0; i < sim.graph.node_count(); ++i) {
        char key[96];
        std::snprintf(key, sizeof(key), "nbrs=%d|vs=%g|beta=%g", sim.graph.neighborhood_size(i),
                      sim.varsigma[i], sim.beta[i]);
        group_agent.emplace(key, i);
    }

    // Finite-bound constants are shared across agents up to their beta.
    std::string constants_note;
    std::map<double, double> threshold_by_beta;
    double overhead = 0.0;
    bool have_constants = false;
    try {
        for (double b : sim.beta)
            if (!threshold_by_beta.contains(b))
                threshold_by_beta[b] = static_cast<double>(concentration_sample_threshold(
                    b, sim.weights.rho2, sim.graph.node_count(), sim.arms.arm_count()));
        overhead = regret_overhead_constant(sim.graph.node_count(), sim.arms.arm_count(), sim.beta,
                                            sim.weights.rho2);
        have_constants = true;
    } catch (const Error& e) {
        constants_note = e.what();
    }

    std::vector<double> horizon_grid;
    for (double t = 2.0; t < horizon; t *= 1.5) horizon_grid.push_back(std::floor(t));
    horizon_grid.push_back(horizon);

    std::string csv = "T,bound_value,policy,agent_group\n";
    auto add_curve = [&](const std::string& policy, const std::string& group, double coeff_sum) {
        for (double t : horizon_grid)
            csv += fmt12(t) + "," + fmt12(coeff_sum * std::max(std::log(t), 0.0)) + "," + policy +
                   "," + group + "\n";
    };
    auto sum_of = [](const std::vector<double>& coeffs) {
        double total = 0.0;
        for (double c : coeffs) total += c;
        return total;
    };

    json groups_json = json::array();
    for (const auto& [group, agent] : group_agent) {
        int nbrs = sim.graph.neighborhood_size(agent);
        double vs = sim.varsigma[agent];
        double beta = sim.beta[agent];
        double kl_dec = sum_of(asym_coeff_klucb(mu, nbrs, vs, false));
        double kl_single = sum_of(asym_coeff_klucb(mu, nbrs, vs, true));
        double ucb_dec = sum_of(asym_coeff_ucb1(mu, nbrs, beta, false));
        double ucb_single = sum_of(asym_coeff_ucb1(mu, nbrs, beta, true));
        double lower = sum_of(lower_bound_coeff(mu, sim.graph.node_count()));
        add_curve("dec_klucb_asym", group, kl_dec);
        add_curve("single_klucb_asym", group, kl_single);
        add_curve("dec_ucb1_asym", group, ucb_dec);
        add_curve("single_ucb1_asym", group, ucb_single);
        add_curve("lower_bound", group, lower);

        json row{{"group", group},
                 {"neighborhood_size", nbrs},
                 {"varsigma", vs},
                 {"beta", beta},
                 {"asym_coeff_dec_klucb", kl_dec},
                 {"asym_coeff_single_klucb", kl_single},
                 {"asym_coeff_dec_ucb1", ucb_dec},
                 {"asym_coeff_single_ucb1", ucb_single},
                 {"lower_bound_coeff", lower}};
        if (have_constants) {
            double finite = finite_bound_ucb1(horizon, mu, nbrs, beta, threshold_by_beta[beta], overhead);
            row["finite_bound_dec_ucb1_at_T"] = finite;
            for (double t : horizon_grid)
                csv += fmt12(t) + "," +
                       fmt12(finite_bound_ucb1(std::max(t, 1.0), mu, nbrs, beta,
                                               threshold_by_beta[beta], overhead)) +
                       ",dec_ucb1_finite," + group + "\n";
        } else {
            row["finite_bound_dec_ucb1_at_T"] = nullptr;
            row["finite_bound_note"] = constants_note;
        }
        groups_json.push_back(row);
    }

    json summary;
    summary["config"] = config_echo(experiment);
    summary["rho2"] = sim.weights.rho2;
    if (have_constants)
        summary["overhead_gamma"] = overhead;
    else
        summary["constants_note"] = constants_note;
    summary["groups"] = groups_json;

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_text_file(out_dir + "/bounds.csv", csv);
        write_text_file(out_dir + "/bounds_summary.json", summary.dump(2) + "\n");
    }
    return csv;
}

namespace {

// Restriction of a whole-network trace to one connected component, with node
// ids remapped to 0..members-1. Valid because components never exchange
// messages.
RunTrace restrict_trace(const RunTrace& trace, const std::vector<int>& members) {
    RunTrace out;
    auto pick_int64 = [&](const std::vector<std::vector<std::int64_t>>& row) {
        std::vector<std::vector<std::int64_t>> picked;
        for (int i : members) picked.push_back(row[i]);
        return picked;
    };
    for (int i : members) out.init_rewards.push_back(trace.init_rewards[i]);
    for (const auto& row : trace.pulls) {
        std::vector<int> picked;
        for (int i : members) picked.push_back(row[i]);
        out.pulls.push_back(std::move(picked));
    }
    for (const auto& row : trace.pull_rewards) {
        std::vector<double> picked;
        for (int i : members) picked.push_back(row[i]);
        out.pull_rewards.push_back(std::move(picked));
    }
    for (const auto& snap : trace.counts) out.counts.push_back(pick_int64(snap));
    for (const auto& snap : trace.max_counts) out.max_counts.push_back(pick_int64(snap));
    for (const auto& snap : trace.consensus) {
        std::vector<std::vector<double>> picked;
        for (int i : members) picked.push_back(snap[i]);
        out.consensus.push_back(std::move(picked));
    }
    return out;
}

NeighborGraph restrict_graph(const NeighborGraph& graph, const std::vector<int>& members) {
    std::vector<int> position(graph.node_count(), -1);
    for (std::size_t idx = 0; idx < members.size(); ++idx) position[members[idx]] = static_cast<int>(idx);
    std::vector<std::pair<int, int>> edges;
    for (auto [a, b] : graph.edges())
        if (position[a] >= 0 && position[b] >= 0) edges.emplace_back(position[a], position[b]);
    return NeighborGraph(static_cast<int>(members.size()), std::move(edges));
}

json check_to_json(const CheckResult& check) {
    json row;
    row["name"] = check.name;
    row["applicable"] = check.applicable;
    row["pass"] = check.pass;
    row["margin"] = check.margin;
    row["violations"] = check.violations;
    if (!check.detail.empty()) row["detail"] = check.detail;
    return row;
}

}  // namespace

VerifyOutcome cmd_verify(const ResolvedExperiment& experiment, bool override_guard,
                         bool inject_fault, const std::string& out_dir) {
    const SimConfig& base = experiment.sim;
    if (!override_guard && (base.graph.node_count() > 16 || base.horizon > 2000))
        throw ConfigError("verification is desk-scale guarded (N <= 16, T <= 2000); "
                          "pass --override-guard to run anyway");

    SimConfig sim = base;
    sim.invariant_checks = true;
    sim.track_trace = true;

    bool all_single = std::all_of(sim.policies.begin(), sim.policies.end(), is_single_agent);
    auto components = connected_components(sim.graph);

    json runs_json = json::array();
    bool hard_failure = false;
    double worst_sum = 0.0, worst_recon = 0.0, worst_unpulled = 0.0, worst_closed_form = 0.0;

    for (int r = 0; r < sim.run_count; ++r) {
        RunResult result = run(sim, r);
        json run_json;
        run_json["run"] = r;
        json checks = json::array();
        for (const CheckResult& check : result.checks) {
            checks.push_back(check_to_json(check));
            if (check.applicable && !check.pass) hard_failure = true;
        }

        if (inject_fault && r == 0) {
            // Poke one recorded consensus value; reconstruction must notice.
            RunTrace& trace = *result.trace;
            std::int64_t mid = sim.horizon / 2;
            trace.consensus[mid][0][0] += 1e-3;
        }

        // The oracle runs per connected component; concentration statistics
        // are only meaningful where consensus actually happens.
        json oracle_json = json::array();
        for (const auto& members : components) {
            bool decentralized = std::none_of(members.begin(), members.end(), [&](int i) {
                return is_single_agent(sim.policies[i]);
            });
            json comp_json;
            comp_json["agents_1based"] = [&] {
                std::vector<int> out;
                for (int i : members) out.push_back(i + 1);
                return out;
            }();
            if (!decentralized) {
                comp_json["skipped"] = "single-agent policies exchange nothing to track";
                oracle_json.push_back(comp_json);
                continue;
            }
            NeighborGraph sub = restrict_graph(sim.graph, members);
            WeightMatrix sub_weights = metropolis_weights(sub);
            RunTrace sub_trace = restrict_trace(*result.trace, members);

            ConcentrationOptions options;
            options.epsilon = 1.0;
            options.rho2 = sub_weights.rho2;
            std::string threshold_note;
            try {
                options.threshold = concentration_sample_threshold(
                    options.epsilon, sub_weights.rho2, sub.node_count(), sim.arms.arm_count());
            } catch (const Error& e) {
                options.threshold = std::numeric_limits<std::int64_t>::max();
                threshold_note = e.what();
            }
            OracleReport report = run_oracle_checks(sub, sub_weights, sub_trace, options,
                                                    std::max<std::int64_t>(sim.horizon / 4, 1));
            worst_sum = std::max(worst_sum, report.max_sum_error);
            worst_recon = std::max(worst_recon, report.max_reconstruction_error);
            worst_unpulled = std::max(worst_unpulled, report.max_unpulled_coefficient);
            worst_closed_form = std::max(worst_closed_form, report.max_closed_form_gap);

            comp_json["coefficient_sum_error"] = report.max_sum_error;
            comp_json["reconstruction_error"] = report.max_reconstruction_error;
            comp_json["unpulled_coefficient"] = report.max_unpulled_coefficient;
            comp_json["closed_form_gap"] = report.max_closed_form_gap;
            json conc;
            conc["epsilon"] = options.epsilon;
            conc["threshold"] = threshold_note.empty() ? json(options.threshold) : json(nullptr);
            if (!threshold_note.empty()) conc["note"] = threshold_note;
            conc["checked"] = report.concentration.checked;
            conc["strict_violations"] = report.concentration.violations;
            conc["unexplained_violations"] = report.concentration.unexplained_violations;
            conc["max_violation_age"] = report.concentration.max_violation_age;
            conc["comment"] =
                "strict-form misses are expected for rewards still propagating; only "
                "unexplained violations are fatal";
            comp_json["concentration"] = conc;
            oracle_json.push_back(comp_json);

            if (report.max_sum_error > 1e-10 || report.max_reconstruction_error > 1e-9 ||
                report.max_unpulled_coefficient != 0.0 || report.max_closed_form_gap > 1e-10 ||
                report.concentration.unexplained_violations > 0)
                hard_failure = true;
        }
        run_json["engine_checks"] = checks;
        run_json["oracle"] = all_single && oracle_json.empty() ? json("not applicable") : oracle_json;
        runs_json.push_back(run_json);

        if (!out_dir.empty() && r == 0 && sim.graph.is_connected()) {
            CoefficientOracle oracle(sim.graph, sim.weights, *result.trace);
            oracle.advance_to(sim.horizon);
            std::string ledger = "run,t,i,k,j,tau,coefficient\n";
            for (const auto& row : oracle.nonzero_entries())
                ledger += std::to_string(r) + "," + fmt12(row[0]) + "," + fmt12(row[1] + 1) + "," +
                          fmt12(row[2] + 1) + "," + fmt12(row[3] + 1) + "," + fmt12(row[4]) + "," +
                          fmt12(row[5]) + "\n";
            ensure_dir(out_dir);
            write_text_file(out_dir + "/ledger.csv", ledger);
        }
    }

    json report;
    report["config"] = config_echo(experiment);
    report["runs"] = runs_json;
    report["worst"] = {{"coefficient_sum_error", worst_sum},
                       {"reconstruction_error", worst_recon},
                       {"unpulled_coefficient", worst_unpulled},
                       {"closed_form_gap", worst_closed_form}};
    report["status"] = hard_failure ? "invariant violation" : "ok";

    VerifyOutcome outcome;
    outcome.status = hard_failure ? Status::InvariantViolation : Status::Ok;
    outcome.report_json = report.dump(2) + "\n";
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_text_file(out_dir + "/verify_report.json", outcome.report_json);
    }
    return outcome;
}

}  // namespace decbandit
