#include "decbandit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "decbandit/errors.hpp"
#include "decbandit/klcore.hpp"

namespace decbandit {

namespace {

double best_mean(const std::vector<double>& mu) {
    if (mu.empty()) throw ConfigError("need at least one arm mean");
    return *std::max_element(mu.begin(), mu.end());
}

}  // namespace

std::vector<double> asym_coeff_klucb(const std::vector<double>& mu, int neighborhood_size,
                                     double varsigma, bool single_agent) {
    const double mu1 = best_mean(mu);
    std::vector<double> coeffs(mu.size(), 0.0);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (!(mu1 - mu[k] > 0.0)) continue;  // tied arms excluded
        double divergence = kl_div(mu[k], mu1);
        if (!(divergence > 0.0)) continue;
        coeffs[k] = single_agent
                        ? 1.0 / divergence
                        : 3.0 * (1.0 + varsigma) / (2.0 * neighborhood_size * divergence);
    }
    return coeffs;
}

std::vector<double> asym_coeff_ucb1(const std::vector<double>& mu, int neighborhood_size,
                                    double beta, bool single_agent) {
    const double mu1 = best_mean(mu);
    std::vector<double> coeffs(mu.size(), 0.0);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        double gap = mu1 - mu[k];
        if (!(gap > 0.0)) continue;
        coeffs[k] = single_agent ? 8.0 / gap
                                 : 12.0 * (1.0 + beta) * (1.0 + beta) / (neighborhood_size * gap);
    }
    return coeffs;
}

std::int64_t concentration_sample_threshold(double epsilon, double rho2, int node_count,
                                            int arm_count, std::int64_t scan_cap) {
    if (!(epsilon > 0.0)) throw ConfigError("concentration threshold needs epsilon > 0");
    if (!(rho2 >= 0.0 && rho2 < 1.0))
        throw ConfigError("concentration threshold needs rho2 in [0,1), got " + std::to_string(rho2));
    const std::int64_t m = arm_count;
    const std::int64_t n_agents = node_count;
    const std::int64_t floor_value = 2 * (m * m + 2 * m * n_agents + n_agents);
    const double target = epsilon / static_cast<double>(node_count);
    const double log_inv_rho = rho2 > 0.0 ? std::log(1.0 / rho2) : 0.0;

    // decay_sum tracks sum_{h=2}^{n} rho2^(n-h) / ((h-1)h) by the recurrence
    // S(n+1) = rho2*S(n) + 1/(n(n+1)).
    double decay_sum = 0.0;
    double rho_pow = 1.0;  // rho2^n, starting below at n=1
    std::int64_t candidate = -1;
    for (std::int64_t n = 1;; ++n) {
        rho_pow *= rho2;
        if (n > 1) decay_sum = rho2 * decay_sum + 1.0 / (static_cast<double>(n - 1) * n);
        double nd = static_cast<double>(n);
        bool decay_ok = (rho_pow + decay_sum) * nd * std::sqrt(nd) <= target;
        bool window_ok = rho2 == 0.0 ? true : (2.0 / nd) * (std::log(nd) / log_inv_rho) < 1.0;
        if (decay_ok && window_ok) {
            if (candidate < 0) candidate = n;
            // Both conditions must persist; accept only after a verified range.
            if (n >= std::max<std::int64_t>(10 * candidate, 10000))
                return std::max(candidate, floor_value);
        } else {
            candidate = -1;
            // The cap bounds how far we look for the start of the persistent
            // run; the persistence sweep itself may extend past it.
            if (n >= scan_cap)
                throw RunError("concentration threshold scan exceeded cap " +
                               std::to_string(scan_cap) + " (rho2=" + std::to_string(rho2) +
                               "); raise the cap to continue");
        }
    }
}

double regret_overhead_constant(int node_count, int arm_count, const std::vector<double>& betas,
                                double rho2, std::int64_t scan_cap) {
    if (static_cast<int>(betas.size()) != node_count)
        throw ConfigError("need one beta per agent for the overhead constant");
    const double m = arm_count;
    const double n = node_count;
    double total = m * m + 2.0 * m * n + n;
    const double pi = 3.14159265358979323846;
    for (double beta : betas) {
        auto f2 = concentration_sample_threshold(beta, rho2, node_count, arm_count, scan_cap);
        total += pi * pi / 3.0 + 2.0 * static_cast<double>(f2) - 1.0;
    }
    return total;
}

double finite_bound_ucb1(double horizon, const std::vector<double>& mu, int neighborhood_size,
                         double beta, double threshold_f2, double overhead_gamma) {
    if (!(horizon >= 1.0)) throw ConfigError("finite bound needs horizon >= 1");
    const double mu1 = best_mean(mu);
    const double log_t = std::max(std::log(horizon), 0.0);
    double bound = 0.0;
    for (double mean : mu) {
        double gap = mu1 - mean;
        if (!(gap > 0.0)) continue;
        double log_term = 12.0 * (1.0 + beta) * (1.0 + beta) * log_t / (neighborhood_size * gap * gap);
        bound += (std::max(log_term, 2.0 * threshold_f2) + overhead_gamma) * gap;
    }
    return bound;
}

std::vector<double> lower_bound_coeff(const std::vector<double>& mu, int node_count) {
    const double mu1 = best_mean(mu);
    std::vector<double> coeffs(mu.size(), 0.0);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        double gap = mu1 - mu[k];
        if (!(gap > 0.0)) continue;
        double divergence = kl_div(mu[k], mu1);
        if (!(divergence > 0.0)) continue;
        coeffs[k] = gap / (node_count * divergence);
    }
    return coeffs;
}

}  // namespace decbandit
