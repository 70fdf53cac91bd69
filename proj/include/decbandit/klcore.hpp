#pragma once

#include <cstdint>

namespace decbandit {

/// Exploration constants plus the neighborhood size they are scaled by.
struct ConfidenceParams {
    double varsigma = 0.01;   // KL-UCB exploration constant
    double beta = 0.01;       // UCB1 exploration constant
    int neighborhood_size = 1;
};

/// Bernoulli KL divergence d(p;q) with the 0*log(0) = 0 convention.
/// d(p;1) = inf for p < 1 and d(p;0) = inf for p > 0. Throws on inputs
/// outside [0,1].
double kl_div(double p, double q);

/// Largest q in [z,1] with n*d(z;q) <= budget, by bisection (absolute
/// tolerance 1e-9, at most 100 halvings). z = 1 returns 1.
double kl_ucb_solve(double z, std::int64_t n, double budget);

/// Confidence budget for the KL policies. Log terms are clamped at zero so
/// early rounds stay greedy.
double kl_budget(double t, const ConfidenceParams& params, bool single_agent);

/// Additive confidence bonus for the UCB1 policies.
double ucb1_bonus(double t, std::int64_t n, const ConfidenceParams& params, bool single_agent);

}  // namespace decbandit
