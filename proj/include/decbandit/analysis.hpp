#pragma once

#include <cstdint>
#include <vector>

namespace decbandit {

/// Per-arm asymptotic regret coefficients (the log-horizon multipliers).
/// Arms tied with the best mean contribute zero. Decentralized variants scale
/// with the neighborhood size; single-agent variants reproduce the classic
/// one-agent coefficients.
std::vector<double> asym_coeff_klucb(const std::vector<double>& mu, int neighborhood_size,
                                     double varsigma, bool single_agent);
std::vector<double> asym_coeff_ucb1(const std::vector<double>& mu, int neighborhood_size,
                                    double beta, bool single_agent);

/// Smallest sample count after which the consensus-coefficient concentration
/// bound engages (often written F2). Scans n upward for the first point where
/// both spectral-decay conditions hold and keep holding up to the persistence
/// horizon max(10*candidate, 1e4); the result is floored at 2(M^2+2MN+N).
/// Throws when rho2 >= 1 or when the scan exceeds `scan_cap`.
std::int64_t concentration_sample_threshold(double epsilon, double rho2, int node_count,
                                            int arm_count, std::int64_t scan_cap = 1000000);

/// Additive finite-time regret overhead (often written Gamma), built from the
/// per-agent concentration thresholds.
double regret_overhead_constant(int node_count, int arm_count, const std::vector<double>& betas,
                                double rho2, std::int64_t scan_cap = 1000000);

/// Finite-time regret bound for decentralized UCB1 at horizon T, given the
/// precomputed threshold and overhead constants.
double finite_bound_ucb1(double horizon, const std::vector<double>& mu, int neighborhood_size,
                         double beta, double threshold_f2, double overhead_gamma);

/// Reference per-arm lower-bound coefficients for an N-agent network with
/// Bernoulli-interpretable means (informational overlay only).
std::vector<double> lower_bound_coeff(const std::vector<double>& mu, int node_count);

}  // namespace decbandit
