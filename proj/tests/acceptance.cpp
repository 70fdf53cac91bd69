// Acceptance suite: one self-contained criterion per number, each printing a
// single PASS/FAIL line (plus indented detail). Run with no arguments for the
// whole battery or with a criterion number for one entry.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "decbandit/analysis.hpp"
#include "decbandit/engine.hpp"
#include "decbandit/experiment.hpp"
#include "decbandit/klcore.hpp"
#include "decbandit/oracle.hpp"
#include "decbandit/rng.hpp"

using namespace decbandit;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool condition, const std::string& note) {
        if (!condition) {
            pass = false;
            detail += "    FAILED: " + note + "\n";
        }
    }
    void info(const std::string& note) { detail += "    " + note + "\n"; }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ArmSet bernoulli_arms(std::initializer_list<double> means) {
    std::vector<ArmSpec> arms;
    for (double mu : means) arms.push_back(ArmSpec::bernoulli(mu));
    return ArmSet(std::move(arms));
}

ArmSet benchmark_arms() {
    std::vector<ArmSpec> arms;
    for (double mu : {0.6, 0.5, 0.4, 0.3, 0.2})
        arms.push_back(ArmSpec::truncated_normal_mean_targeted(mu, 0.1));
    return ArmSet(std::move(arms));
}

// Criterion 1: coefficient reconstruction equivalence on a short run.
Outcome criterion_oracle_equivalence() {
    Outcome out;
    auto start = std::chrono::steady_clock::now();
    NeighborGraph graph = path_graph(4);
    WeightMatrix weights = metropolis_weights(graph);
    double worst_recon = 0.0, worst_sum = 0.0, worst_closed = 0.0;
    for (int seed = 0; seed < 5; ++seed) {
        SimConfig config = make_sim_config(path_graph(4), bernoulli_arms({0.7, 0.5, 0.3}),
                                           {Policy::DecUcb1}, {0.01}, {0.01}, 200, 1, 900 + seed);
        config.track_trace = true;
        RunResult result = run(config, 0);
        ConcentrationOptions options{1.0, std::numeric_limits<std::int64_t>::max(), weights.rho2};
        OracleReport report = run_oracle_checks(graph, weights, *result.trace, options, 50);
        worst_recon = std::max(worst_recon, report.max_reconstruction_error);
        worst_sum = std::max(worst_sum, report.max_sum_error);
        worst_closed = std::max(worst_closed, report.max_closed_form_gap);
    }
    double elapsed = seconds_since(start);
    out.require(worst_recon <= 1e-9, "reconstruction error " + std::to_string(worst_recon));
    out.require(worst_sum <= 1e-10, "coefficient sum error " + std::to_string(worst_sum));
    out.require(worst_closed <= 1e-10, "closed-form gap " + std::to_string(worst_closed));
    out.require(elapsed < 10.0, "runtime " + std::to_string(elapsed) + "s exceeds 10s");
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max |z - sum c*X| = %.3g, max |sum c - 1| = %.3g, dual-route gap = %.3g, %.2fs",
                  worst_recon, worst_sum, worst_closed, elapsed);
    out.info(buf);
    return out;
}

// Criterion 2: per-round structural identities on random connected graphs.
Outcome criterion_structural_invariants() {
    Outcome out;
    std::int64_t rounds_checked = 0;
    for (int g = 0; g < 10; ++g) {
        int n = 4 + g % 5;  // 4..8
        NeighborGraph graph = gen_erdos_renyi(n, 0.5, 500 + g, true, 1000);
        ArmSet arms = g % 2 == 0 ? bernoulli_arms({0.7, 0.4})
                                 : bernoulli_arms({0.7, 0.6, 0.5, 0.4, 0.3});
        for (Policy policy : {Policy::DecKlUcb, Policy::DecUcb1}) {
            SimConfig config = make_sim_config(graph, arms, {policy}, {0.01}, {0.01}, 500, 1,
                                               7000 + g);
            config.invariant_checks = true;
            RunResult result = run(config, 0);
            for (const CheckResult& check : result.checks) {
                if (!check.applicable) continue;
                out.require(check.pass && check.violations == 0,
                            check.name + " on graph " + std::to_string(g) + " policy " +
                                policy_name(policy) + " (" + std::to_string(check.violations) +
                                " violations)");
            }
            rounds_checked += 501;
        }
    }
    out.info("checked " + std::to_string(rounds_checked) +
             " agent-rounds of delayed-max identity, count floor, count balance and pull-count sums");
    return out;
}

// Criterion 3: strict coefficient-concentration scan.
Outcome criterion_concentration() {
    Outcome out;
    struct Case {
        const char* name;
        NeighborGraph graph;
    };
    std::vector<Case> cases;
    cases.push_back({"complete(3)", complete_graph(3)});
    cases.push_back({"path(3)", path_graph(3)});
    for (auto& c : cases) {
        WeightMatrix weights = metropolis_weights(c.graph);
        std::int64_t threshold = concentration_sample_threshold(1.0, weights.rho2, 3, 2);
        SimConfig config = make_sim_config(c.graph, bernoulli_arms({0.7, 0.4}), {Policy::DecUcb1},
                                           {0.01}, {0.01}, 2000, 1, 31);
        config.track_trace = true;
        RunResult result = run(config, 0);
        ConcentrationOptions options{1.0, threshold, weights.rho2};
        OracleReport report = run_oracle_checks(c.graph, weights, *result.trace, options, 0);
        char buf[240];
        std::snprintf(buf, sizeof(buf),
                      "%s: threshold=%lld checked=%lld strict violations=%lld (max pull age %lld "
                      "rounds, worst excess %.3gx, unexplained %lld)",
                      c.name, static_cast<long long>(threshold),
                      static_cast<long long>(report.concentration.checked),
                      static_cast<long long>(report.concentration.violations),
                      static_cast<long long>(report.concentration.max_violation_age),
                      report.concentration.worst_excess,
                      static_cast<long long>(report.concentration.unexplained_violations));
        out.info(buf);
        out.require(report.concentration.checked > 0, std::string(c.name) + ": nothing was checked");
        out.require(report.concentration.violations == 0,
                    std::string(c.name) + ": strict concentration bound violated " +
                        std::to_string(report.concentration.violations) + " times");
        out.require(report.concentration.unexplained_violations == 0,
                    std::string(c.name) + ": violations beyond the propagation window");
        out.require(report.max_sum_error <= 1e-10, std::string(c.name) + ": coefficient sums drifted");
        out.require(report.max_reconstruction_error <= 1e-9,
                    std::string(c.name) + ": reconstruction drifted");
    }
    return out;
}

// Criterion 4: spectral gap value and mixing decay.
Outcome criterion_spectral() {
    Outcome out;
    WeightMatrix path3 = metropolis_weights(path_graph(3));
    out.require(std::abs(path3.rho2 - 2.0 / 3.0) <= 1e-12,
                "rho2(path(3)) = " + std::to_string(path3.rho2) + " not 2/3");
    double worst_slack = 1.0;
    for (int g = 0; g < 5; ++g) {
        int n = 3 + g % 4;  // 3..6
        NeighborGraph graph = gen_erdos_renyi(n, 0.5, 1200 + g, true, 1000);
        WeightMatrix weights = metropolis_weights(graph);
        Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
        for (int t = 1; t <= 30; ++t) {
            power = power * weights.entries;
            double value =
                (power - Eigen::MatrixXd::Constant(n, n, 1.0 / n)).cwiseAbs().maxCoeff();
            double allowed = std::pow(weights.rho2, t) + 1e-10;
            worst_slack = std::min(worst_slack, allowed - value);
            out.require(value <= allowed, "decay bound broken at t=" + std::to_string(t) +
                                              " on graph " + std::to_string(g));
        }
    }
    out.info("rho2(path(3)) = 2/3 within 1e-12; tightest decay slack " +
             std::to_string(worst_slack));
    return out;
}

double pooled_final_regret(const SimConfig& config) {
    BatchResult batch = run_batch(config, 2);
    return batch.mean_regret_pooled.back();
}

// Criterion 5: decentralized policies beat their single-agent baselines, and
// the KL variant beats the UCB1 variant, on the benchmark configuration.
Outcome criterion_benchmark_ordering() {
    Outcome out;
    auto start = std::chrono::steady_clock::now();
    const std::uint64_t master = 2024;
    NeighborGraph graph = parse_graph_spec(
        "er(20,0.5)", RandomStream::derive_key(master, 0, 0, StreamPurpose::Graph));
    ArmSet arms = benchmark_arms();
    auto config_for = [&](Policy policy) {
        return make_sim_config(graph, arms, {policy}, {0.01}, {0.01}, 2000, 20, master);
    };
    double dec_kl = pooled_final_regret(config_for(Policy::DecKlUcb));
    double single_kl = pooled_final_regret(config_for(Policy::SingleKlUcb));
    double dec_ucb = pooled_final_regret(config_for(Policy::DecUcb1));
    double single_ucb = pooled_final_regret(config_for(Policy::SingleUcb1));
    double elapsed = seconds_since(start);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "mean final regret: dec_klucb=%.2f single_klucb=%.2f dec_ucb1=%.2f "
                  "single_ucb1=%.2f (%.1fs)",
                  dec_kl, single_kl, dec_ucb, single_ucb, elapsed);
    out.info(buf);
    out.require(dec_kl < single_kl, "dec_klucb did not beat single_klucb");
    out.require(dec_ucb < single_ucb, "dec_ucb1 did not beat single_ucb1");
    out.require(dec_kl < dec_ucb, "dec_klucb did not beat dec_ucb1");
    out.require(elapsed < 120.0, "runtime " + std::to_string(elapsed) + "s exceeds 2 minutes");
    return out;
}

// Criterion 6: group ordering on the two-component benchmark graph.
Outcome criterion_group_ordering() {
    Outcome out;
    NeighborGraph graph = two_component_benchmark_graph();
    ArmSet arms = benchmark_arms();
    std::vector<double> params{1, 1, 1, 0.01, 0.01, 0.01, 1, 1, 1, 0.01, 0.01, 0.01};
    for (Policy policy : {Policy::DecKlUcb, Policy::DecUcb1}) {
        SimConfig config = make_sim_config(graph, arms, {policy}, params, params, 5000, 20, 9090);
        BatchResult batch = run_batch(config, 2);
        auto group_mean = [&](int first_agent) {
            double total = 0.0;
            for (int i = first_agent; i < first_agent + 3; ++i)
                for (const RunResult& r : batch.runs) total += r.final_regret(i);
            return total / (3.0 * batch.runs.size());
        };
        double g1 = group_mean(0);   // complete component, parameter 1
        double g2 = group_mean(3);   // complete component, parameter 0.01
        double g3 = group_mean(6);   // cycle component, parameter 1
        double g4 = group_mean(9);   // cycle component, parameter 0.01
        char buf[180];
        std::snprintf(buf, sizeof(buf), "%s: G1=%.2f G2=%.2f G3=%.2f G4=%.2f",
                      policy_name(policy).c_str(), g1, g2, g3, g4);
        out.info(buf);
        out.require(g3 > g4, policy_name(policy) + ": expected G3 > G4");
        out.require(g4 > g1, policy_name(policy) + ": expected G4 > G1");
        out.require(g1 > g2, policy_name(policy) + ": expected G1 > G2");
    }
    return out;
}

// Criterion 7: bound-calculator regression, dominance grid and the
// finite-bound convergence claim at T = 1e8.
Outcome criterion_bound_calculators() {
    Outcome out;
    auto coeffs = asym_coeff_ucb1({0.6, 0.5}, 20, 0.01, false);
    out.require(std::abs(coeffs[1] - 6.12060) <= 1e-5,
                "dec_ucb1 coefficient " + std::to_string(coeffs[1]) + " != 6.12060");
    auto single = asym_coeff_ucb1({0.6, 0.5}, 20, 0.01, true);
    out.require(std::abs(single[1] - 80.0) <= 1e-9 * 80.0,
                "single_ucb1 coefficient " + std::to_string(single[1]) + " != 80");

    std::vector<double> mu{0.6, 0.5, 0.4, 0.3, 0.2};
    for (int hood = 2; hood <= 24; ++hood) {
        for (double frac : {0.1, 0.9}) {
            double vs = frac * (2.0 * hood / 3.0 - 1.0);
            double kl_dec = 0.0, kl_single = 0.0;
            for (double c : asym_coeff_klucb(mu, hood, vs, false)) kl_dec += c;
            for (double c : asym_coeff_klucb(mu, hood, vs, true)) kl_single += c;
            out.require(kl_dec < kl_single, "kl dominance failed at neighborhood " +
                                                std::to_string(hood));
            double beta = frac * (std::sqrt(2.0 * hood / 3.0) - 1.0);
            double u_dec = 0.0, u_single = 0.0;
            for (double c : asym_coeff_ucb1(mu, hood, beta, false)) u_dec += c;
            for (double c : asym_coeff_ucb1(mu, hood, beta, true)) u_single += c;
            out.require(u_dec < u_single, "ucb1 dominance failed at neighborhood " +
                                              std::to_string(hood));
        }
    }

    // Convergence of finite bound / log T toward the asymptotic coefficient,
    // evaluated with honestly computed constants for a 20-agent complete
    // graph (rho2 = 0) and beta = 0.01 on the benchmark arm set.
    double asym = 0.0;
    for (double c : asym_coeff_ucb1(mu, 20, 0.01, false)) asym += c;
    std::int64_t f2 = concentration_sample_threshold(0.01, 0.0, 20, 5, 100000000);
    double gamma = 245.0;  // M^2 + 2MN + N for M=5, N=20
    for (int i = 0; i < 20; ++i) gamma += M_PI * M_PI / 3.0 + 2.0 * static_cast<double>(f2) - 1.0;
    double ratio6 = finite_bound_ucb1(1e6, mu, 20, 0.01, static_cast<double>(f2), gamma) / std::log(1e6);
    double ratio8 = finite_bound_ucb1(1e8, mu, 20, 0.01, static_cast<double>(f2), gamma) / std::log(1e8);
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "asym=%.4f, threshold F2(0.01)=%lld, overhead=%.4g, bound/logT at 1e6=%.4g, at "
                  "1e8=%.4g (rel err %.3g)",
                  asym, static_cast<long long>(f2), gamma, ratio6, ratio8,
                  std::abs(ratio8 - asym) / asym);
    out.info(buf);
    out.require(std::abs(ratio8 - asym) < std::abs(ratio6 - asym),
                "bound/logT is not converging toward the asymptotic coefficient");
    out.require(std::abs(ratio8 - asym) <= 0.01 * asym,
                "bound/logT at T=1e8 is not within 1% of the asymptotic coefficient");
    return out;
}

// Criterion 8: byte-identical simulate outputs.
Outcome criterion_determinism() {
    Outcome out;
    namespace fs = std::filesystem;
    ExperimentSpec spec;
    spec.graph = "er(10,0.5)";
    spec.arms = {"bern(0.7)", "bern(0.5)", "bern(0.3)"};
    spec.policy = {"dec_klucb"};
    spec.horizon = 200;
    spec.runs = 3;
    spec.seed = 606;
    ResolvedExperiment experiment = resolve_experiment(spec);
    fs::path base = fs::temp_directory_path() / "decbandit_acceptance_det";
    fs::remove_all(base);
    cmd_simulate(experiment, (base / "a").string(), 2);
    cmd_simulate(experiment, (base / "b").string(), 1);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    std::string a = slurp(base / "a/trajectories.csv");
    std::string b = slurp(base / "b/trajectories.csv");
    out.require(!a.empty(), "no trajectory output produced");
    out.require(a == b, "trajectories.csv differs between identical invocations");
    out.info("trajectories.csv is byte-identical across reruns (" + std::to_string(a.size()) +
             " bytes)");
    return out;
}

// Criterion 9: larger exploration constants cost regret on the benchmark.
Outcome criterion_parameter_monotonicity() {
    Outcome out;
    const std::uint64_t master = 2024;
    NeighborGraph graph = parse_graph_spec(
        "er(20,0.5)", RandomStream::derive_key(master, 0, 0, StreamPurpose::Graph));
    ArmSet arms = benchmark_arms();
    auto run_with = [&](Policy policy, double param) {
        SimConfig config =
            make_sim_config(graph, arms, {policy}, {param}, {param}, 2000, 20, master);
        return pooled_final_regret(config);
    };
    double kl_loose = run_with(Policy::DecKlUcb, 1.0);
    double kl_tight = run_with(Policy::DecKlUcb, 0.01);
    double ucb_loose = run_with(Policy::DecUcb1, 1.0);
    double ucb_tight = run_with(Policy::DecUcb1, 0.01);
    char buf[180];
    std::snprintf(buf, sizeof(buf),
                  "dec_klucb: 1.0 -> %.2f vs 0.01 -> %.2f; dec_ucb1: 1.0 -> %.2f vs 0.01 -> %.2f",
                  kl_loose, kl_tight, ucb_loose, ucb_tight);
    out.info(buf);
    out.require(kl_loose > kl_tight, "dec_klucb regret did not grow with varsigma");
    out.require(ucb_loose > ucb_tight, "dec_ucb1 regret did not grow with beta");
    return out;
}

struct Criterion {
    int number;
    const char* title;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "oracle equivalence (path(4), M=3, T=200, 5 seeds)", criterion_oracle_equivalence},
        {2, "structural invariants on random connected graphs", criterion_structural_invariants},
        {3, "strict coefficient concentration (complete(3), path(3), T=2000)",
         criterion_concentration},
        {4, "spectral gap value and mixing decay", criterion_spectral},
        {5, "benchmark outperformance ordering (er(20,0.5), T=2000, 20 runs)",
         criterion_benchmark_ordering},
        {6, "group ordering on the two-component benchmark (T=5000, 20 runs)",
         criterion_group_ordering},
        {7, "bound-calculator regression and convergence", criterion_bound_calculators},
        {8, "byte-identical simulate outputs", criterion_determinism},
        {9, "exploration-parameter monotonicity", criterion_parameter_monotonicity},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    int failures = 0;
    for (const Criterion& criterion : criteria()) {
        if (only != 0 && criterion.number != only) continue;
        Outcome outcome = criterion.run();
        std::printf("[%s] criterion %d: %s\n", outcome.pass ? "PASS" : "FAIL", criterion.number,
                    criterion.title);
        if (!outcome.detail.empty()) std::fputs(outcome.detail.c_str(), stdout);
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
