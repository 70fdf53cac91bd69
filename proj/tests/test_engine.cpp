#include <doctest.h>

#include <cmath>
#include <numeric>

#include "decbandit/engine.hpp"
#include "decbandit/errors.hpp"

using namespace decbandit;

namespace {

ArmSet bernoulli_arms(std::initializer_list<double> means) {
    std::vector<ArmSpec> arms;
    for (double mu : means) arms.push_back(ArmSpec::bernoulli(mu));
    return ArmSet(std::move(arms));
}

SimConfig small_config(NeighborGraph graph, ArmSet arms, Policy policy, std::int64_t horizon,
                       int runs = 1, std::uint64_t seed = 1234) {
    return make_sim_config(std::move(graph), std::move(arms), {policy}, {0.01}, {0.01}, horizon,
                           runs, seed);
}

}  // namespace

TEST_CASE("a single arm accrues zero regret") {
    SimConfig config = small_config(path_graph(3), bernoulli_arms({0.4}), Policy::DecUcb1, 50);
    RunResult result = run(config, 0);
    for (const auto& trajectory : result.regret)
        for (double value : trajectory) CHECK(value == 0.0);
}

TEST_CASE("deterministic replay") {
    SimConfig config =
        small_config(gen_erdos_renyi(6, 0.5, 77, true, 100), bernoulli_arms({0.7, 0.4, 0.2}),
                     Policy::DecKlUcb, 120);
    RunResult a = run(config, 3);
    RunResult b = run(config, 3);
    CHECK(a.final_counts == b.final_counts);
    CHECK(a.regret == b.regret);
    RunResult c = run(config, 4);
    CHECK(a.final_counts != c.final_counts);
}

TEST_CASE("an isolated node under a decentralized policy matches its single-agent baseline") {
    SimConfig dec = small_config(complete_graph(1), bernoulli_arms({0.8, 0.5}), Policy::DecUcb1, 200);
    SimConfig single =
        small_config(complete_graph(1), bernoulli_arms({0.8, 0.5}), Policy::SingleUcb1, 200);
    RunResult a = run(dec, 0);
    RunResult b = run(single, 0);
    CHECK(a.regret == b.regret);
    CHECK(a.final_counts == b.final_counts);

    SimConfig dec_kl = small_config(complete_graph(1), bernoulli_arms({0.8, 0.5}), Policy::DecKlUcb, 200);
    SimConfig single_kl =
        small_config(complete_graph(1), bernoulli_arms({0.8, 0.5}), Policy::SingleKlUcb, 200);
    CHECK(run(dec_kl, 0).regret == run(single_kl, 0).regret);
}

TEST_CASE("rounds preserve the count identity and regret bookkeeping") {
    SimConfig config = small_config(cycle_graph(5), bernoulli_arms({0.6, 0.5, 0.3}),
                                    Policy::DecKlUcb, 80);
    config.invariant_checks = true;
    RunResult result = run(config, 1);
    for (const CheckResult& check : result.checks) {
        INFO(check.name);
        CHECK(check.pass);
    }
    // Initialization pulls every arm once: regret starts at the gap sum.
    double gap_sum = 0.0;
    for (double gap : config.arms.gaps()) gap_sum += gap;
    for (int i = 0; i < 5; ++i) {
        CHECK(result.regret[i].front() == doctest::Approx(gap_sum).epsilon(1e-12));
        for (std::size_t s = 1; s < result.regret[i].size(); ++s)
            CHECK(result.regret[i][s] >= result.regret[i][s - 1]);
        std::int64_t total = std::accumulate(result.final_counts[i].begin(),
                                             result.final_counts[i].end(), std::int64_t{0});
        CHECK(total == 80 + 3);
    }
}

TEST_CASE("engine regret equals the gap-weighted pull counts") {
    SimConfig config = small_config(path_graph(4), bernoulli_arms({0.7, 0.5, 0.3}),
                                    Policy::DecUcb1, 60);
    RunResult result = run(config, 2);
    for (int i = 0; i < 4; ++i)
        CHECK(result.final_regret(i) ==
              doctest::Approx(pseudo_regret(result.final_counts[i], config.arms.gaps(), 60))
                  .epsilon(1e-12));
}

TEST_CASE("pseudo-regret arithmetic") {
    std::vector<double> gaps{0.0, 0.1, 0.2, 0.3, 0.4};
    SUBCASE("dominant optimal arm") {
        CHECK(pseudo_regret({101, 1, 1, 1, 1}, gaps, 100) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("all extra pulls on the best arm leave only the initialization residue") {
        CHECK(pseudo_regret({96, 1, 1, 1, 1}, gaps, 95) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero gaps mean zero regret") {
        CHECK(pseudo_regret({51, 52}, {0.0, 0.0}, 101) == 0.0);
    }
    SUBCASE("count sum mismatch is rejected") {
        CHECK_THROWS_AS(pseudo_regret({5, 5}, {0.0, 0.1}, 100), InvariantError);
    }
}

TEST_CASE("trajectory snapshots") {
    SimConfig config = small_config(path_graph(2), bernoulli_arms({0.9, 0.1}), Policy::DecUcb1, 10);
    RunResult dense = run(config, 0);
    CHECK(dense.snapshot_times.size() == 11);
    config.snapshot_interval = 3;
    RunResult thinned = run(config, 0);
    CHECK(thinned.snapshot_times == std::vector<std::int64_t>{0, 3, 6, 9, 10});
    // Stored points agree with the dense trajectory.
    for (int i = 0; i < 2; ++i) {
        CHECK(thinned.regret[i][1] == dense.regret[i][3]);
        CHECK(thinned.regret[i].back() == dense.regret[i].back());
    }
}

TEST_CASE("components evolve independently") {
    // The two-component benchmark graph restricted to its complete half must
    // reproduce a standalone complete(6) run bit for bit.
    SimConfig both = small_config(two_component_benchmark_graph(),
                                  bernoulli_arms({0.7, 0.5, 0.3}), Policy::DecUcb1, 150);
    SimConfig alone =
        small_config(complete_graph(6), bernoulli_arms({0.7, 0.5, 0.3}), Policy::DecUcb1, 150);
    RunResult a = run(both, 0);
    RunResult b = run(alone, 0);
    for (int i = 0; i < 6; ++i) {
        CHECK(a.regret[i] == b.regret[i]);
        CHECK(a.final_counts[i] == b.final_counts[i]);
    }
}

TEST_CASE("batch aggregation") {
    SUBCASE("a single run aggregates to itself") {
        SimConfig config =
            small_config(path_graph(3), bernoulli_arms({0.6, 0.4}), Policy::DecUcb1, 40, 1);
        BatchResult batch = run_batch(config);
        for (int i = 0; i < 3; ++i) CHECK(batch.mean_regret_per_agent[i] == batch.runs[0].regret[i]);
    }
    SUBCASE("parallel workers do not change the aggregate") {
        SimConfig config =
            small_config(cycle_graph(4), bernoulli_arms({0.6, 0.4, 0.2}), Policy::DecKlUcb, 60, 6);
        BatchResult serial = run_batch(config, 1);
        BatchResult parallel = run_batch(config, 2);
        CHECK(serial.mean_regret_pooled == parallel.mean_regret_pooled);
        for (int r = 0; r < 6; ++r) CHECK(serial.runs[r].regret == parallel.runs[r].regret);
    }
    SUBCASE("doubling the run count moves the pooled mean within statistical noise") {
        SimConfig config = small_config(gen_erdos_renyi(8, 0.5, 5, true, 100),
                                        bernoulli_arms({0.6, 0.5, 0.4}), Policy::DecUcb1, 300, 10);
        BatchResult small = run_batch(config, 2);
        config.run_count = 20;
        BatchResult big = run_batch(config, 2);
        std::vector<double> finals;
        for (const RunResult& r : small.runs) {
            double pooled = 0.0;
            for (int i = 0; i < 8; ++i) pooled += r.final_regret(i);
            finals.push_back(pooled / 8);
        }
        double mean = 0.0;
        for (double f : finals) mean += f;
        mean /= finals.size();
        double var = 0.0;
        for (double f : finals) var += (f - mean) * (f - mean);
        double std_err = std::sqrt(var / (finals.size() - 1)) / std::sqrt(double(finals.size()));
        CHECK(std::abs(small.mean_regret_pooled.back() - big.mean_regret_pooled.back()) <=
              3.0 * std_err + 1e-12);
    }
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(make_sim_config(path_graph(3), bernoulli_arms({0.5}), {Policy::DecUcb1},
                                    {0.1, 0.1}, {0.1}, 10, 1, 1),
                    ConfigError);
    CHECK_THROWS_AS(make_sim_config(path_graph(3), bernoulli_arms({0.5}), {Policy::DecUcb1},
                                    {-0.1}, {0.1}, 10, 1, 1),
                    ConfigError);
    CHECK_THROWS_AS(make_sim_config(path_graph(3), bernoulli_arms({0.5}), {Policy::DecUcb1}, {0.1},
                                    {0.1}, -4, 1, 1),
                    ConfigError);
}
