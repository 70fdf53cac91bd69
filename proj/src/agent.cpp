#include "decbandit/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "decbandit/errors.hpp"

namespace decbandit {

bool is_single_agent(Policy p) { return p == Policy::SingleKlUcb || p == Policy::SingleUcb1; }

bool is_kl(Policy p) { return p == Policy::DecKlUcb || p == Policy::SingleKlUcb; }

std::string policy_name(Policy p) {
    switch (p) {
        case Policy::DecKlUcb: return "dec_klucb";
        case Policy::DecUcb1: return "dec_ucb1";
        case Policy::SingleKlUcb: return "single_klucb";
        case Policy::SingleUcb1: return "single_ucb1";
    }
    return "?";
}

Policy policy_from_name(const std::string& name) {
    if (name == "dec_klucb") return Policy::DecKlUcb;
    if (name == "dec_ucb1") return Policy::DecUcb1;
    if (name == "single_klucb") return Policy::SingleKlUcb;
    if (name == "single_ucb1") return Policy::SingleUcb1;
    throw ConfigError("unknown policy '" + name +
                      "' (expected dec_klucb, dec_ucb1, single_klucb or single_ucb1)");
}

Policy effective_policy(Policy requested, int neighborhood_size) {
    if (neighborhood_size <= 1) {
        if (requested == Policy::DecKlUcb) return Policy::SingleKlUcb;
        if (requested == Policy::DecUcb1) return Policy::SingleUcb1;
    }
    return requested;
}

AgentState::AgentState(int agent_id, Policy policy, ConfidenceParams params,
                       std::span<const double> initial_rewards)
    : agent_id_(agent_id), policy_(policy), params_(params) {
    const std::size_t m = initial_rewards.size();
    if (m == 0) throw ConfigError("agent needs one initialization reward per arm");
    counts_.assign(m, 1);
    max_counts_.assign(m, 1);
    reward_sums_.assign(initial_rewards.begin(), initial_rewards.end());
    sample_means_.assign(initial_rewards.begin(), initial_rewards.end());
    consensus_.assign(initial_rewards.begin(), initial_rewards.end());
}

std::vector<int> AgentState::arm_index_set() const {
    const auto arm_total = static_cast<std::int64_t>(counts_.size());
    std::vector<int> lagging;
    for (int k = 0; k < static_cast<int>(counts_.size()); ++k)
        if (counts_[k] <= max_counts_[k] - arm_total) lagging.push_back(k);
    return lagging;
}

int AgentState::decide(double t, RandomStream& tiebreak) const {
    if (!is_single_agent(policy_)) {
        std::vector<int> lagging = arm_index_set();
        if (!lagging.empty())
            return lagging[tiebreak.uniform_below(lagging.size())];
    }
    // Index scores: the inverted KL budget for the KL policies, estimate plus
    // additive bonus for UCB1. Single-agent variants score their own sample
    // mean; decentralized ones score the fused estimate.
    const bool single = is_single_agent(policy_);
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < arm_count(); ++k) {
        double estimate = single ? sample_means_[k] : consensus_[k];
        double score;
        if (is_kl(policy_)) {
            double budget = kl_budget(t, params_, single);
            score = kl_ucb_solve(std::clamp(estimate, 0.0, 1.0), counts_[k], budget);
        } else {
            score = estimate + ucb1_bonus(t, counts_[k], params_, single);
        }
        if (score > best_score) {  // ties keep the lowest arm index
            best_score = score;
            best = k;
        }
    }
    return best;
}

void AgentState::update(int chosen_arm, double reward, std::span<const double> weights,
                        std::span<const Broadcast* const> inbox) {
    const int m = arm_count();
    if (chosen_arm < 0 || chosen_arm >= m) throw RunError("chosen arm out of range");

    std::vector<double> previous_means = sample_means_;
    counts_[chosen_arm] += 1;
    reward_sums_[chosen_arm] += reward;
    sample_means_[chosen_arm] = reward_sums_[chosen_arm] / static_cast<double>(counts_[chosen_arm]);

    if (is_single_agent(policy_)) {
        // No fusion: the estimate is the sample mean and the max-count
        // estimate never leaves the local count.
        consensus_ = sample_means_;
        max_counts_ = counts_;
        return;
    }

    if (weights.size() != inbox.size())
        throw RunError("fusion weights and inbox sizes differ");
    bool saw_self = false;
    for (const Broadcast* b : inbox) {
        if (b == nullptr || static_cast<int>(b->m.size()) != m || static_cast<int>(b->z.size()) != m)
            throw RunError("neighbor broadcast missing or with wrong arm count");
        saw_self = saw_self || b->sender == agent_id_;
    }
    if (!saw_self) throw RunError("inbox must carry the agent's own broadcast");

    for (int k = 0; k < m; ++k) {
        double fused = 0.0;
        std::int64_t max_seen = counts_[k];
        for (std::size_t idx = 0; idx < inbox.size(); ++idx) {
            fused += weights[idx] * inbox[idx]->z[k];
            max_seen = std::max(max_seen, inbox[idx]->m[k]);
        }
        consensus_[k] = fused + sample_means_[k] - previous_means[k];
        max_counts_[k] = max_seen;
    }
}

Broadcast AgentState::make_broadcast() const {
    return Broadcast{agent_id_, max_counts_, consensus_};
}

}  // namespace decbandit
