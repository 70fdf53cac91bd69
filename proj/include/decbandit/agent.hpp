#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "decbandit/klcore.hpp"
#include "decbandit/rng.hpp"

namespace decbandit {

enum class Policy {
    DecKlUcb,
    DecUcb1,
    SingleKlUcb,
    SingleUcb1,
};

bool is_single_agent(Policy p);
bool is_kl(Policy p);
std::string policy_name(Policy p);
Policy policy_from_name(const std::string& name);

/// Single-agent fallback for isolated nodes; other nodes keep their policy.
Policy effective_policy(Policy requested, int neighborhood_size);

/// One round's outgoing message: the sender's per-arm max-count estimates and
/// consensus estimates, both taken at the same clock time.
struct Broadcast {
    int sender = -1;
    std::vector<std::int64_t> m;
    std::vector<double> z;
};

/// Per-agent learning state. Counters follow the decide / broadcast / update
/// cycle driven by the engine; one state is owned by one executor at a time.
class AgentState {
public:
    AgentState(int agent_id, Policy policy, ConfidenceParams params,
               std::span<const double> initial_rewards);

    int agent_id() const { return agent_id_; }
    Policy policy() const { return policy_; }
    const ConfidenceParams& params() const { return params_; }
    int arm_count() const { return static_cast<int>(counts_.size()); }

    const std::vector<std::int64_t>& counts() const { return counts_; }
    const std::vector<std::int64_t>& max_count_estimates() const { return max_counts_; }
    const std::vector<double>& sample_means() const { return sample_means_; }
    const std::vector<double>& consensus_estimates() const { return consensus_; }

    /// Arms whose local count lags the estimated network maximum by at least
    /// the arm count; these are forced to catch up. Sorted ascending.
    std::vector<int> arm_index_set() const;

    /// Chooses the arm to pull between clock times t and t+1. The tiebreak
    /// stream is consumed only when the catch-up set is nonempty.
    int decide(double t, RandomStream& tiebreak) const;

    /// Advances the state to time t+1 from the chosen arm's fresh reward and
    /// the time-t broadcasts of the whole neighborhood (self included).
    /// weights[idx] is the fusion weight for inbox[idx].
    void update(int chosen_arm, double reward, std::span<const double> weights,
                std::span<const Broadcast* const> inbox);

    Broadcast make_broadcast() const;

private:
    int agent_id_;
    Policy policy_;
    ConfidenceParams params_;
    std::vector<std::int64_t> counts_;        // n
    std::vector<std::int64_t> max_counts_;    // m
    std::vector<double> reward_sums_;         // running sums, means stay exact
    std::vector<double> sample_means_;        // xbar
    std::vector<double> consensus_;           // z, stored unclamped
};

}  // namespace decbandit
