#include "decbandit/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "decbandit/errors.hpp"

namespace decbandit {

SimConfig make_sim_config(NeighborGraph graph, ArmSet arms, std::vector<Policy> policies,
                          std::vector<double> varsigma, std::vector<double> beta,
                          std::int64_t horizon, int run_count, std::uint64_t master_seed,
                          std::int64_t snapshot_interval) {
    const int n = graph.node_count();
    auto broadcast_to_n = [n](auto& vec, const char* what) {
        if (vec.size() == 1) vec.assign(n, vec[0]);
        if (static_cast<int>(vec.size()) != n)
            throw ConfigError(std::string(what) + " must be a scalar or one entry per agent");
    };
    broadcast_to_n(policies, "policy");
    broadcast_to_n(varsigma, "varsigma");
    broadcast_to_n(beta, "beta");
    if (horizon < 0) throw ConfigError("horizon must be nonnegative");
    if (run_count < 1) throw ConfigError("run count must be at least 1");
    if (snapshot_interval < 1) throw ConfigError("snapshot interval must be at least 1");
    for (double v : varsigma)
        if (v < 0.0) throw ConfigError("varsigma must be nonnegative");
    for (double b : beta)
        if (b < 0.0) throw ConfigError("beta must be nonnegative");
    for (int i = 0; i < n; ++i) policies[i] = effective_policy(policies[i], graph.neighborhood_size(i));

    WeightMatrix weights = metropolis_weights(graph);
    SimConfig config{std::move(graph), std::move(weights), std::move(arms),   std::move(policies),
                     std::move(varsigma), std::move(beta), horizon,           run_count,
                     master_seed,         snapshot_interval};
    return config;
}

namespace {

std::uint64_t hash_broadcasts(const std::vector<Broadcast>& snapshot) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (const Broadcast& b : snapshot) {
        feed(static_cast<std::uint64_t>(b.sender));
        for (std::int64_t m : b.m) feed(static_cast<std::uint64_t>(m));
        for (double z : b.z) {
            std::uint64_t bits;
            std::memcpy(&bits, &z, sizeof bits);
            feed(bits);
        }
    }
    return h;
}

// Accumulates the per-round structural checks for one run. All checks are
// scoped to connected components; the network-consistency ones apply only to
// components where every agent runs a decentralized policy.
class InvariantChecker {
public:
    InvariantChecker(const SimConfig& config)
        : config_(config),
          distances_(shortest_distances(config.graph)),
          components_(connected_components(config.graph)) {
        const int n = config.graph.node_count();
        component_of_.assign(n, 0);
        for (int c = 0; c < static_cast<int>(components_.size()); ++c)
            for (int i : components_[c]) component_of_[i] = c;
        component_all_decentralized_.assign(components_.size(), true);
        for (int c = 0; c < static_cast<int>(components_.size()); ++c)
            for (int i : components_[c])
                if (is_single_agent(config.policies[i])) component_all_decentralized_[c] = false;
        any_network_component_ =
            std::any_of(component_all_decentralized_.begin(), component_all_decentralized_.end(),
                        [](bool b) { return b; });

        count_identity_ = {"round_count_identity", true, true, 0.0, 0, ""};
        delayed_max_ = {"delayed_max_identity", any_network_component_, true, 0.0, 0, ""};
        gap_floor_ = {"count_gap_floor", any_network_component_, true,
                      std::numeric_limits<double>::infinity(), 0, ""};
        balance_ = {"count_balance", any_network_component_, true,
                    std::numeric_limits<double>::infinity(), 0, ""};
        lockstep_ = {"lockstep_snapshot", true, true, 0.0, 0, ""};
    }

    // counts_hist holds snapshots for times 0..t inclusive.
    void check_round(std::int64_t t, const std::vector<AgentState>& agents,
                     const std::vector<std::vector<std::vector<std::int64_t>>>& counts_hist) {
        const int n = config_.graph.node_count();
        const int arms = config_.arms.arm_count();

        for (int i = 0; i < n; ++i) {
            std::int64_t total = 0;
            for (std::int64_t c : agents[i].counts()) total += c;
            double diff = std::abs(static_cast<double>(total - (t + arms)));
            if (diff != 0.0) {
                count_identity_.pass = false;
                count_identity_.violations++;
                count_identity_.margin = std::max(count_identity_.margin, diff);
            }
        }

        for (int c = 0; c < static_cast<int>(components_.size()); ++c) {
            if (!component_all_decentralized_[c]) continue;
            const auto& members = components_[c];
            const auto comp_n = static_cast<std::int64_t>(members.size());
            const double gap_bound = static_cast<double>(arms) *
                                     static_cast<double>(arms + 2 * comp_n);
            const std::int64_t balance_threshold =
                2 * (static_cast<std::int64_t>(arms) * arms + 2 * arms * comp_n + comp_n);
            for (int i : members) {
                for (int k = 0; k < arms; ++k) {
                    // m equals the max over the component of counts delayed by
                    // the graph distance (counts are 0 before time 0).
                    std::int64_t expected = 0;
                    for (int j : members) {
                        std::int64_t when = t - distances_.at(j, i);
                        std::int64_t njk = when < 0 ? 0 : counts_hist[when][j][k];
                        expected = std::max(expected, njk);
                    }
                    std::int64_t m = agents[i].max_count_estimates()[k];
                    if (m != expected) {
                        delayed_max_.pass = false;
                        delayed_max_.violations++;
                        delayed_max_.margin =
                            std::max(delayed_max_.margin, std::abs(static_cast<double>(m - expected)));
                    }

                    double slack = static_cast<double>(agents[i].counts()[k]) -
                                   (static_cast<double>(m) - gap_bound);
                    gap_floor_.margin = std::min(gap_floor_.margin, slack);
                    if (!(slack > 0.0)) {
                        gap_floor_.pass = false;
                        gap_floor_.violations++;
                    }

                    std::int64_t nik = agents[i].counts()[k];
                    if (nik >= balance_threshold) {
                        for (int h : members) {
                            std::int64_t nhk = agents[h].counts()[k];
                            double lo = static_cast<double>(nik) - 0.5 * static_cast<double>(nhk);
                            double hi = 1.5 * static_cast<double>(nhk) - static_cast<double>(nik);
                            balance_.margin = std::min({balance_.margin, lo, hi});
                            if (lo < 0.0 || hi < 0.0) {
                                balance_.pass = false;
                                balance_.violations++;
                            }
                        }
                    }
                }
            }
        }
    }

    void check_lockstep(std::uint64_t hash_before, std::uint64_t hash_after) {
        if (hash_before != hash_after) {
            lockstep_.pass = false;
            lockstep_.violations++;
        }
    }

    std::vector<CheckResult> finish() {
        if (!std::isfinite(gap_floor_.margin)) gap_floor_.margin = 0.0;
        if (!std::isfinite(balance_.margin)) {
            balance_.margin = 0.0;
            balance_.detail = "count-balance precondition never reached";
        }
        if (!any_network_component_) {
            delayed_max_.detail = gap_floor_.detail = balance_.detail =
                "not applicable: no all-decentralized component";
        }
        return {count_identity_, delayed_max_, gap_floor_, balance_, lockstep_};
    }

private:
    const SimConfig& config_;
    DistanceTable distances_;
    std::vector<std::vector<int>> components_;
    std::vector<int> component_of_;
    std::vector<bool> component_all_decentralized_;
    bool any_network_component_ = false;
    CheckResult count_identity_, delayed_max_, gap_floor_, balance_, lockstep_;
};

}  // namespace

RunResult run(const SimConfig& config, int run_index) {
    const int n = config.graph.node_count();
    const int arms = config.arms.arm_count();
    const std::int64_t horizon = config.horizon;

    std::vector<std::vector<RandomStream>> reward_streams(n);
    std::vector<RandomStream> tiebreak_streams;
    tiebreak_streams.reserve(n);
    for (int i = 0; i < n; ++i) {
        reward_streams[i].reserve(arms);
        for (int k = 0; k < arms; ++k)
            reward_streams[i].push_back(RandomStream::keyed(config.master_seed, run_index, i,
                                                            StreamPurpose::ArmRewards, k));
        tiebreak_streams.push_back(
            RandomStream::keyed(config.master_seed, run_index, i, StreamPurpose::Tiebreak));
    }

    // Initialization: every agent samples every arm exactly once at time 0.
    std::vector<AgentState> agents;
    agents.reserve(n);
    std::vector<std::vector<double>> init_rewards(n, std::vector<double>(arms));
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < arms; ++k) init_rewards[i][k] = config.arms.arms()[k].sample(reward_streams[i][k]);
        ConfidenceParams params{config.varsigma[i], config.beta[i], config.graph.neighborhood_size(i)};
        agents.emplace_back(i, config.policies[i], params, init_rewards[i]);
    }

    const std::vector<double>& gaps = config.arms.gaps();
    double init_regret = 0.0;
    for (double gap : gaps) init_regret += gap;
    std::vector<double> cumulative_regret(n, init_regret);

    RunResult result;
    result.run_index = run_index;
    result.run_key = RandomStream::derive_key(config.master_seed, run_index, ~0ULL, StreamPurpose::Graph);
    result.graph_fingerprint = config.graph.fingerprint();
    result.regret.assign(n, {});

    auto snapshot_due = [&](std::int64_t t) {
        return t == 0 || t == horizon || (t % config.snapshot_interval) == 0;
    };
    auto store_snapshot = [&](std::int64_t t) {
        result.snapshot_times.push_back(t);
        for (int i = 0; i < n; ++i) result.regret[i].push_back(cumulative_regret[i]);
    };
    store_snapshot(0);

    const bool keep_history = config.invariant_checks || config.track_trace;
    std::vector<std::vector<std::vector<std::int64_t>>> counts_hist;
    RunTrace trace;
    auto record_state = [&]() {
        std::vector<std::vector<std::int64_t>> counts_now(n), max_now(n);
        std::vector<std::vector<double>> z_now(n);
        for (int i = 0; i < n; ++i) {
            counts_now[i] = agents[i].counts();
            max_now[i] = agents[i].max_count_estimates();
            z_now[i] = agents[i].consensus_estimates();
        }
        counts_hist.push_back(counts_now);
        if (config.track_trace) {
            trace.counts.push_back(std::move(counts_now));
            trace.max_counts.push_back(std::move(max_now));
            trace.consensus.push_back(std::move(z_now));
        }
    };
    std::optional<InvariantChecker> checker;
    if (config.invariant_checks) checker.emplace(config);
    if (keep_history) {
        record_state();
        if (config.track_trace) trace.init_rewards = init_rewards;
        if (checker) checker->check_round(0, agents, counts_hist);
    }

    std::vector<Broadcast> snapshot(n);
    std::vector<std::vector<double>> weight_rows(n);
    std::vector<std::vector<int>> inbox_senders(n);
    for (int i = 0; i < n; ++i) {
        inbox_senders[i].push_back(i);
        weight_rows[i].push_back(config.weights.entries(i, i));
        for (int j : config.graph.adjacent(i)) {
            inbox_senders[i].push_back(j);
            weight_rows[i].push_back(config.weights.entries(i, j));
        }
    }

    std::vector<int> chosen(n);
    std::vector<double> rewards(n);
    for (std::int64_t t = 0; t < horizon; ++t) {
        // (1) every agent decides on its time-t state
        for (int i = 0; i < n; ++i) chosen[i] = agents[i].decide(static_cast<double>(t), tiebreak_streams[i]);
        // (2) rewards are drawn only for the chosen arms
        for (int i = 0; i < n; ++i)
            rewards[i] = config.arms.arms()[chosen[i]].sample(reward_streams[i][chosen[i]]);
        // (3) lockstep snapshot of all time-t broadcasts
        for (int i = 0; i < n; ++i) snapshot[i] = agents[i].make_broadcast();
        std::uint64_t hash_before = checker ? hash_broadcasts(snapshot) : 0;
        // (4) all agents advance to t+1
        for (int i = 0; i < n; ++i) {
            std::vector<const Broadcast*> inbox;
            inbox.reserve(inbox_senders[i].size());
            for (int j : inbox_senders[i]) inbox.push_back(&snapshot[j]);
            agents[i].update(chosen[i], rewards[i], weight_rows[i], inbox);
        }
        if (checker) checker->check_lockstep(hash_before, hash_broadcasts(snapshot));

        for (int i = 0; i < n; ++i) cumulative_regret[i] += gaps[chosen[i]];
        if (snapshot_due(t + 1)) store_snapshot(t + 1);
        if (keep_history) {
            record_state();
            if (config.track_trace) {
                trace.pulls.push_back(chosen);
                trace.pull_rewards.push_back(rewards);
            }
            if (checker) checker->check_round(t + 1, agents, counts_hist);
        }
    }

    result.final_counts.assign(n, {});
    for (int i = 0; i < n; ++i) result.final_counts[i] = agents[i].counts();
    if (checker) result.checks = checker->finish();
    if (config.track_trace) result.trace = std::move(trace);
    return result;
}

double pseudo_regret(const std::vector<std::int64_t>& pull_counts, const std::vector<double>& gaps,
                     std::int64_t horizon) {
    if (pull_counts.size() != gaps.size())
        throw InvariantError("pull counts and gaps must have the same arm count");
    std::int64_t total = 0;
    for (std::int64_t c : pull_counts) total += c;
    const std::int64_t expected = horizon + static_cast<std::int64_t>(gaps.size());
    if (total != expected)
        throw InvariantError("pull counts sum to " + std::to_string(total) + ", expected T+M = " +
                             std::to_string(expected));
    double regret = 0.0;
    for (std::size_t k = 0; k < gaps.size(); ++k)
        if (gaps[k] > 0.0) regret += static_cast<double>(pull_counts[k]) * gaps[k];
    return regret;
}

BatchResult run_batch(const SimConfig& config, int workers) {
    const int runs = config.run_count;
    BatchResult batch;
    batch.runs.resize(runs);

    workers = std::clamp(workers, 1, runs);
    if (workers == 1) {
        for (int r = 0; r < runs; ++r) batch.runs[r] = run(config, r);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&]() {
            for (;;) {
                int r = next.fetch_add(1);
                if (r >= runs) return;
                try {
                    batch.runs[r] = run(config, r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    const int n = config.graph.node_count();
    batch.snapshot_times = batch.runs[0].snapshot_times;
    const std::size_t snaps = batch.snapshot_times.size();
    batch.mean_regret_per_agent.assign(n, std::vector<double>(snaps, 0.0));
    batch.mean_regret_pooled.assign(snaps, 0.0);
    for (int r = 0; r < runs; ++r)
        for (int i = 0; i < n; ++i)
            for (std::size_t s = 0; s < snaps; ++s)
                batch.mean_regret_per_agent[i][s] += batch.runs[r].regret[i][s];
    for (int i = 0; i < n; ++i)
        for (std::size_t s = 0; s < snaps; ++s) {
            batch.mean_regret_per_agent[i][s] /= runs;
            batch.mean_regret_pooled[s] += batch.mean_regret_per_agent[i][s];
        }
    for (std::size_t s = 0; s < snaps; ++s) batch.mean_regret_pooled[s] /= n;
    return batch;
}

}  // namespace decbandit
