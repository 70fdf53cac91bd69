#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "decbandit/experiment.hpp"

using namespace decbandit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("decbandit_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentSpec tiny_spec(std::int64_t horizon = 10, int runs = 1) {
    ExperimentSpec spec;
    spec.graph = "path(3)";
    spec.arms = {"bern(0.7)", "bern(0.4)"};
    spec.policy = {"dec_ucb1"};
    spec.horizon = horizon;
    spec.runs = runs;
    spec.seed = 4242;
    return spec;
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

}  // namespace

TEST_CASE("seed precedence") {
    ExperimentSpec spec = tiny_spec();
    SUBCASE("override wins over the config") {
        CHECK(resolve_experiment(spec, 7).master_seed == 7);
        CHECK(resolve_experiment(spec).master_seed == 4242);
    }
    SUBCASE("environment fallback") {
        spec.seed.reset();
        setenv("DECBANDIT_SEED", "31337", 1);
        CHECK(resolve_experiment(spec).master_seed == 31337);
        unsetenv("DECBANDIT_SEED");
        CHECK_THROWS_AS(resolve_experiment(spec), ConfigError);
    }
}

TEST_CASE("simulate writes the advertised files") {
    fs::path dir = fresh_dir("simulate");
    ResolvedExperiment experiment = resolve_experiment(tiny_spec());
    std::string summary = cmd_simulate(experiment, dir.string(), 1);

    std::string csv = slurp(dir / "trajectories.csv");
    CHECK(csv.rfind("run,t,agent,regret\n", 0) == 0);
    // 11 trajectory rows per agent for T=10 at the default snapshot interval.
    CHECK(count_lines(csv) == 1 + 11 * 3);

    auto parsed = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(parsed["config"]["seed"] == 4242);
    CHECK(parsed["config"]["T"] == 10);
    CHECK(parsed["config"]["run_keys"].size() == 1);
    CHECK(parsed["results"]["per_agent"].size() == 3);
    CHECK(parsed["results"]["pooled"].contains("mean_final_regret"));
    CHECK(nlohmann::json::parse(summary) == parsed);
}

TEST_CASE("simulate output is byte-identical across reruns") {
    fs::path dir_a = fresh_dir("rerun_a");
    fs::path dir_b = fresh_dir("rerun_b");
    ResolvedExperiment experiment = resolve_experiment(tiny_spec(50, 3));
    cmd_simulate(experiment, dir_a.string(), 2);
    cmd_simulate(experiment, dir_b.string(), 1);
    CHECK(slurp(dir_a / "trajectories.csv") == slurp(dir_b / "trajectories.csv"));
}

TEST_CASE("compare merges policies over shared randomness") {
    auto make = [&](const std::string& policy, double param) {
        ExperimentSpec spec = tiny_spec(40, 2);
        spec.policy = {policy};
        spec.varsigma = {param};
        return resolve_experiment(spec);
    };
    fs::path dir = fresh_dir("compare");
    std::vector<ResolvedExperiment> experiments = {make("dec_klucb", 1.0), make("dec_klucb", 0.1),
                                                   make("dec_klucb", 0.01), make("single_klucb", 0.01)};
    std::string summary = cmd_compare(experiments, true, dir.string(), 1);
    std::string csv = slurp(dir / "trajectories.csv");
    CHECK(csv.rfind("policy,run,t,agent,regret\n", 0) == 0);
    for (const char* label :
         {"dec_klucb(1)", "dec_klucb(0.1)", "dec_klucb(0.01)", "single_klucb(0.01)"})
        CHECK(csv.find(label) != std::string::npos);
    auto parsed = nlohmann::json::parse(summary);
    CHECK(parsed["policies"].size() == 4);

    SUBCASE("a policy compared with itself is identical") {
        ResolvedExperiment twin_a = make("dec_klucb", 0.5);
        ResolvedExperiment twin_b = make("dec_klucb", 0.5);
        twin_b.label = "twin";
        std::string twin_summary = cmd_compare({twin_a, twin_b}, true, "", 1);
        auto twins = nlohmann::json::parse(twin_summary)["policies"];
        CHECK(twins[0]["results"]["per_agent"] == twins[1]["results"]["per_agent"]);
    }
    SUBCASE("mismatched shared fields are rejected") {
        ExperimentSpec other = tiny_spec(41, 2);
        CHECK_THROWS_AS(cmd_compare({experiments[0], resolve_experiment(other)}, true, "", 1),
                        ConfigError);
        ExperimentSpec reseeded = tiny_spec(40, 2);
        reseeded.seed = 1;
        CHECK_THROWS_AS(cmd_compare({experiments[0], resolve_experiment(reseeded)}, true, "", 1),
                        ConfigError);
    }
}

TEST_CASE("bounds table") {
    ExperimentSpec spec = tiny_spec(1000);
    ResolvedExperiment experiment = resolve_experiment(spec);
    fs::path dir = fresh_dir("bounds");
    std::string csv = cmd_bounds(experiment, dir.string());
    CHECK(csv.rfind("T,bound_value,policy,agent_group\n", 0) == 0);
    CHECK(csv.find("dec_klucb_asym") != std::string::npos);
    CHECK(csv.find("single_ucb1_asym") != std::string::npos);
    CHECK(csv.find("lower_bound") != std::string::npos);
    CHECK(csv.find("dec_ucb1_finite") != std::string::npos);
    auto parsed = nlohmann::json::parse(slurp(dir / "bounds_summary.json"));
    CHECK(parsed["groups"].size() == 2);  // path(3) has two neighborhood sizes
}

TEST_CASE("verification pipeline") {
    SUBCASE("clean decentralized run passes and reports every check") {
        ExperimentSpec spec;
        spec.graph = "path(4)";
        spec.arms = {"bern(0.7)", "bern(0.5)", "bern(0.3)"};
        spec.policy = {"dec_ucb1"};
        spec.horizon = 200;
        spec.runs = 1;
        spec.seed = 11;
        VerifyOutcome outcome = cmd_verify(resolve_experiment(spec), false, false);
        CHECK(outcome.status == Status::Ok);
        auto report = nlohmann::json::parse(outcome.report_json);
        CHECK(report["status"] == "ok");
        CHECK(report["runs"].size() == 1);
        bool saw_delayed_max = false;
        for (const auto& check : report["runs"][0]["engine_checks"]) {
            CHECK(check["pass"] == true);
            if (check["name"] == "delayed_max_identity") {
                saw_delayed_max = true;
                CHECK(check["applicable"] == true);
            }
        }
        CHECK(saw_delayed_max);
    }
    SUBCASE("injected faults are detected") {
        ExperimentSpec spec;
        spec.graph = "path(3)";
        spec.arms = {"bern(0.7)", "bern(0.4)"};
        spec.policy = {"dec_ucb1"};
        spec.horizon = 100;
        spec.runs = 1;
        spec.seed = 12;
        VerifyOutcome outcome = cmd_verify(resolve_experiment(spec), false, true);
        CHECK(outcome.status == Status::InvariantViolation);
    }
    SUBCASE("single-agent runs mark network checks not applicable") {
        ExperimentSpec spec;
        spec.graph = "path(3)";
        spec.arms = {"bern(0.7)", "bern(0.4)"};
        spec.policy = {"single_ucb1"};
        spec.horizon = 50;
        spec.runs = 1;
        spec.seed = 13;
        VerifyOutcome outcome = cmd_verify(resolve_experiment(spec), false, false);
        CHECK(outcome.status == Status::Ok);
        auto report = nlohmann::json::parse(outcome.report_json);
        for (const auto& check : report["runs"][0]["engine_checks"])
            if (check["name"] == "delayed_max_identity") CHECK(check["applicable"] == false);
    }
    SUBCASE("desk-scale guard") {
        ExperimentSpec spec = tiny_spec(5000);
        CHECK_THROWS_AS(cmd_verify(resolve_experiment(spec), false, false), ConfigError);
    }
    SUBCASE("ledger dump is written on request") {
        ExperimentSpec spec = tiny_spec(20);
        fs::path dir = fresh_dir("ledger");
        VerifyOutcome outcome = cmd_verify(resolve_experiment(spec), false, false, dir.string());
        CHECK(outcome.status == Status::Ok);
        std::string ledger = slurp(dir / "ledger.csv");
        CHECK(ledger.rfind("run,t,i,k,j,tau,coefficient\n", 0) == 0);
        CHECK(count_lines(ledger) > 10);
    }
}

TEST_CASE("group statistics split by neighborhood and parameter") {
    ExperimentSpec spec;
    spec.graph = "fig5";
    spec.arms = {"bern(0.7)", "bern(0.4)"};
    spec.policy = {"dec_ucb1"};
    spec.beta = {1, 1, 1, 0.01, 0.01, 0.01, 1, 1, 1, 0.01, 0.01, 0.01};
    spec.horizon = 50;
    spec.runs = 2;
    spec.seed = 5;
    ResolvedExperiment experiment = resolve_experiment(spec);
    BatchResult batch = run_batch(experiment.sim, 1);
    auto groups = group_stats(experiment, batch);
    REQUIRE(groups.size() == 4);
    for (const auto& group : groups) CHECK(group.agents.size() == 3);
}
