#include "decbandit.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "decbandit/experiment.hpp"
#include "decbandit/klcore.hpp"

using decbandit::Error;
using decbandit::ResolvedExperiment;
using decbandit::Status;

struct db_experiment {
    ResolvedExperiment resolved;
};

namespace {

thread_local std::string g_last_error = "ok";

db_status on_error(const std::exception& e, db_status fallback) {
    g_last_error = e.what();
    if (const auto* typed = dynamic_cast<const Error*>(&e))
        return static_cast<db_status>(static_cast<int>(typed->status()));
    return fallback;
}

char* copy_string(const std::string& text) {
    char* out = new (std::nothrow) char[text.size() + 1];
    if (out != nullptr) std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

db_status load_common(decbandit::ExperimentSpec spec, int has_seed_override,
                      uint64_t seed_override, db_experiment** out) {
    std::optional<std::uint64_t> seed;
    if (has_seed_override != 0) seed = seed_override;
    auto* handle = new db_experiment{decbandit::resolve_experiment(spec, seed)};
    *out = handle;
    return DB_OK;
}

}  // namespace

extern "C" {

const char* db_last_error(void) { return g_last_error.c_str(); }

db_status db_experiment_load_file(const char* path, int has_seed_override, uint64_t seed_override,
                                  db_experiment** out) {
    if (path == nullptr || out == nullptr) {
        g_last_error = "db_experiment_load_file: null argument";
        return DB_ERR_CONFIG;
    }
    *out = nullptr;
    try {
        return load_common(decbandit::load_experiment_file(path), has_seed_override, seed_override,
                           out);
    } catch (const std::exception& e) {
        return on_error(e, DB_ERR_CONFIG);
    }
}

db_status db_experiment_load_string(const char* json_text, int has_seed_override,
                                    uint64_t seed_override, db_experiment** out) {
    if (json_text == nullptr || out == nullptr) {
        g_last_error = "db_experiment_load_string: null argument";
        return DB_ERR_CONFIG;
    }
    *out = nullptr;
    try {
        return load_common(decbandit::parse_experiment_json(json_text), has_seed_override,
                           seed_override, out);
    } catch (const std::exception& e) {
        return on_error(e, DB_ERR_CONFIG);
    }
}

void db_experiment_free(db_experiment* experiment) { delete experiment; }

int db_experiment_node_count(const db_experiment* experiment) {
    return experiment == nullptr ? 0 : experiment->resolved.sim.graph.node_count();
}

int db_experiment_arm_count(const db_experiment* experiment) {
    return experiment == nullptr ? 0 : experiment->resolved.sim.arms.arm_count();
}

uint64_t db_experiment_seed(const db_experiment* experiment) {
    return experiment == nullptr ? 0 : experiment->resolved.master_seed;
}

db_status db_experiment_set_flag(db_experiment* experiment, const char* name, int value) {
    if (experiment == nullptr || name == nullptr) {
        g_last_error = "db_experiment_set_flag: null argument";
        return DB_ERR_CONFIG;
    }
    const std::string flag = name;
    if (flag == "invariant_checks") {
        experiment->resolved.sim.invariant_checks = value != 0;
        return DB_OK;
    }
    if (flag == "oracle") {
        experiment->resolved.sim.track_trace = value != 0;
        return DB_OK;
    }
    g_last_error = "unknown flag '" + flag + "'";
    return DB_ERR_CONFIG;
}

db_status db_simulate(const db_experiment* experiment, const char* out_dir, int workers,
                      char** summary_json) {
    if (experiment == nullptr) {
        g_last_error = "db_simulate: null experiment";
        return DB_ERR_CONFIG;
    }
    try {
        std::string summary = decbandit::cmd_simulate(
            experiment->resolved, out_dir == nullptr ? "" : out_dir, workers);
        if (summary_json != nullptr) *summary_json = copy_string(summary);
        return DB_OK;
    } catch (const std::exception& e) {
        return on_error(e, DB_ERR_RUNTIME);
    }
}

db_status db_compare(const db_experiment* const* experiments, size_t count,
                     int share_reward_seeds, const char* out_dir, int workers,
                     char** summary_json) {
    if (experiments == nullptr || count == 0) {
        g_last_error = "db_compare: no experiments";
        return DB_ERR_CONFIG;
    }
    try {
        std::vector<ResolvedExperiment> resolved;
        resolved.reserve(count);
        for (size_t idx = 0; idx < count; ++idx) {
            if (experiments[idx] == nullptr) {
                g_last_error = "db_compare: null experiment handle";
                return DB_ERR_CONFIG;
            }
            resolved.push_back(experiments[idx]->resolved);
        }
        std::string summary = decbandit::cmd_compare(resolved, share_reward_seeds != 0,
                                                     out_dir == nullptr ? "" : out_dir, workers);
        if (summary_json != nullptr) *summary_json = copy_string(summary);
        return DB_OK;
    } catch (const std::exception& e) {
        return on_error(e, DB_ERR_RUNTIME);
    }
}

db_status db_bounds(const db_experiment* experiment, const char* out_dir, char** table_csv) {
    if (experiment == nullptr) {
        g_last_error = "db_bounds: null experiment";
        return DB_ERR_CONFIG;
    }
    try {
        std::string table =
            decbandit::cmd_bounds(experiment->resolved, out_dir == nullptr ? "" : out_dir);
        if (table_csv != nullptr) *table_csv = copy_string(table);
        return DB_OK;
    } catch (const std::exception& e) {
        return on_error(e, DB_ERR_RUNTIME);
    }
}

db_status db_verify(const db_experiment* experiment, int override_guard, int inject_fault,
                    const char* out_dir, char** report_json) {
    if (experiment == nullptr) {
        g_last_error = "db_verify: null experiment";
        return DB_ERR_CONFIG;
    }
    try {
        decbandit::VerifyOutcome outcome =
            decbandit::cmd_verify(experiment->resolved, override_guard != 0, inject_fault != 0,
                                  out_dir == nullptr ? "" : out_dir);
        if (report_json != nullptr) *report_json = copy_string(outcome.report_json);
        if (outcome.status != Status::Ok) {
            g_last_error = "verification found violations; see the report";
            return static_cast<db_status>(static_cast<int>(outcome.status));
        }
        return DB_OK;
    } catch (const std::exception& e) {
        return on_error(e, DB_ERR_RUNTIME);
    }
}

void db_string_free(char* text) { delete[] text; }

double db_kl_div(double p, double q) {
    try {
        return decbandit::kl_div(p, q);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return std::numeric_limits<double>::quiet_NaN();
    }
}

double db_kl_ucb_solve(double z, int64_t n, double budget) {
    try {
        return decbandit::kl_ucb_solve(z, n, budget);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return std::numeric_limits<double>::quiet_NaN();
    }
}

uint32_t db_version(void) { return 10000; }

}  // extern "C"
