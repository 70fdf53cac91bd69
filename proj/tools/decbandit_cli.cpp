// Command-line front end for the decbandit shared library. Talks to the core
// exclusively through the C API in decbandit.h; prints summaries to stdout
// and maps db_status values straight onto exit codes
// (0 ok, 1 usage/config, 2 invariant violation, 3 runtime failure).

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "decbandit.h"

namespace {

struct ExperimentDeleter {
    void operator()(db_experiment* e) const { db_experiment_free(e); }
};
using ExperimentHandle = std::unique_ptr<db_experiment, ExperimentDeleter>;

struct StringDeleter {
    void operator()(char* s) const { db_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct CommonArgs {
    std::vector<std::string> configs;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int workers = 0;
    bool check_invariants = false;
    bool oracle = false;
    bool override_guard = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool multi_config) {
    auto* config = cmd->add_option("--config", args.configs, "experiment config file (JSON)");
    config->required();
    if (!multi_config) config->expected(1);
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "master seed override")
        ->each([&args](const std::string&) { args.has_seed = true; });
    cmd->add_option("--workers", args.workers, "worker threads for batch runs (0 = auto)");
    cmd->add_flag("--check-invariants", args.check_invariants, "run per-round structural checks");
    cmd->add_flag("--oracle", args.oracle, "record traces for the coefficient oracle");
    cmd->add_flag("--override-guard", args.override_guard, "lift the desk-scale verify guard");
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ExperimentHandle load(const CommonArgs& args, const std::string& path, int& exit_code) {
    db_experiment* raw = nullptr;
    db_status status =
        db_experiment_load_file(path.c_str(), args.has_seed ? 1 : 0, args.seed, &raw);
    if (status != DB_OK) {
        std::fprintf(stderr, "error: %s\n", db_last_error());
        exit_code = static_cast<int>(status);
        return nullptr;
    }
    ExperimentHandle handle(raw);
    if (args.check_invariants) db_experiment_set_flag(handle.get(), "invariant_checks", 1);
    if (args.oracle) db_experiment_set_flag(handle.get(), "oracle", 1);
    return handle;
}

int run_simulate(const CommonArgs& args) {
    int exit_code = 0;
    ExperimentHandle experiment = load(args, args.configs.front(), exit_code);
    if (!experiment) return exit_code;
    char* summary = nullptr;
    db_status status = db_simulate(experiment.get(), args.out_dir.c_str(),
                                   resolve_workers(args.workers), &summary);
    OwnedString owned(summary);
    if (status != DB_OK) {
        std::fprintf(stderr, "error: %s\n", db_last_error());
        return static_cast<int>(status);
    }
    std::fputs(owned.get(), stdout);
    return 0;
}

int run_compare(const CommonArgs& args, bool share_rewards) {
    if (args.configs.size() < 2) {
        std::fprintf(stderr, "error: compare needs at least two --config files\n");
        return 1;
    }
    int exit_code = 0;
    std::vector<ExperimentHandle> handles;
    std::vector<const db_experiment*> raw;
    for (const std::string& path : args.configs) {
        ExperimentHandle handle = load(args, path, exit_code);
        if (!handle) return exit_code;
        raw.push_back(handle.get());
        handles.push_back(std::move(handle));
    }
    char* summary = nullptr;
    db_status status = db_compare(raw.data(), raw.size(), share_rewards ? 1 : 0,
                                  args.out_dir.c_str(), resolve_workers(args.workers), &summary);
    OwnedString owned(summary);
    if (status != DB_OK) {
        std::fprintf(stderr, "error: %s\n", db_last_error());
        return static_cast<int>(status);
    }
    std::fputs(owned.get(), stdout);
    return 0;
}

int run_bounds(const CommonArgs& args) {
    int exit_code = 0;
    ExperimentHandle experiment = load(args, args.configs.front(), exit_code);
    if (!experiment) return exit_code;
    char* table = nullptr;
    db_status status = db_bounds(experiment.get(), args.out_dir.c_str(), &table);
    OwnedString owned(table);
    if (status != DB_OK) {
        std::fprintf(stderr, "error: %s\n", db_last_error());
        return static_cast<int>(status);
    }
    std::fputs(owned.get(), stdout);
    return 0;
}

int run_verify(const CommonArgs& args, bool inject_fault) {
    int exit_code = 0;
    ExperimentHandle experiment = load(args, args.configs.front(), exit_code);
    if (!experiment) return exit_code;
    char* report = nullptr;
    db_status status = db_verify(experiment.get(), args.override_guard ? 1 : 0,
                                 inject_fault ? 1 : 0, args.out_dir.c_str(), &report);
    OwnedString owned(report);
    if (owned) std::fputs(owned.get(), stdout);
    if (status != DB_OK) {
        std::fprintf(stderr, "error: %s\n", db_last_error());
        return static_cast<int>(status);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decbandit: decentralized multi-armed bandit simulator (library v" +
                 std::to_string(db_version()) + ")"};
    app.require_subcommand(1);

    CommonArgs simulate_args, compare_args, bounds_args, verify_args;
    bool no_share_rewards = false;
    bool inject_fault = false;

    CLI::App* simulate = app.add_subcommand("simulate", "run an experiment batch");
    add_common(simulate, simulate_args, false);

    CLI::App* compare = app.add_subcommand("compare", "run several policies on shared seeds");
    add_common(compare, compare_args, true);
    compare->add_flag("--no-share-rewards", no_share_rewards,
                      "draw independent reward streams per policy");

    CLI::App* bounds = app.add_subcommand("bounds", "tabulate regret-bound calculators");
    add_common(bounds, bounds_args, false);

    CLI::App* verify = app.add_subcommand("verify", "run structural checks and the oracle");
    add_common(verify, verify_args, false);
    verify->add_flag("--inject-fault", inject_fault,
                     "perturb one recorded value to demonstrate detection");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (simulate->parsed()) return run_simulate(simulate_args);
    if (compare->parsed()) return run_compare(compare_args, !no_share_rewards);
    if (bounds->parsed()) return run_bounds(bounds_args);
    if (verify->parsed()) return run_verify(verify_args, inject_fault);
    return 1;
}
