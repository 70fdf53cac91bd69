#include "decbandit/klcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace decbandit {

double kl_div(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw std::domain_error("kl_div arguments must lie in [0,1], got p=" + std::to_string(p) +
                                " q=" + std::to_string(q));
    double total = 0.0;
    if (p > 0.0) {
        if (q == 0.0) return std::numeric_limits<double>::infinity();
        total += p * std::log(p / q);
    }
    if (p < 1.0) {
        if (q == 1.0) return std::numeric_limits<double>::infinity();
        total += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    }
    return std::max(total, 0.0);
}

double kl_ucb_solve(double z, std::int64_t n, double budget) {
    if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("kl_ucb_solve needs z in [0,1]");
    if (n < 1) throw std::domain_error("kl_ucb_solve needs n >= 1");
    if (budget < 0.0) throw std::domain_error("kl_ucb_solve needs a nonnegative budget");
    if (z >= 1.0) return 1.0;
    if (budget == 0.0) return z;
    // d(z;.) is increasing on [z,1] and n*d(z;1) = inf, so the target stays
    // bracketed: lo always feasible, hi always infeasible.
    double lo = z;
    double hi = 1.0;
    for (int iter = 0; iter < 100 && hi - lo > 1e-9; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (static_cast<double>(n) * kl_div(z, mid) <= budget)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

namespace {

// max(log t, 0) and max(log log t, 0); both vanish for t <= 1.
void clamped_logs(double t, double& l1, double& l2) {
    l1 = t > 1.0 ? std::log(t) : 0.0;
    l2 = l1 > 1.0 ? std::log(l1) : 0.0;
}

}  // namespace

double kl_budget(double t, const ConfidenceParams& params, bool single_agent) {
    double l1, l2;
    clamped_logs(t, l1, l2);
    if (single_agent) return l1 + 3.0 * l2;
    return 3.0 * (1.0 + params.varsigma) * (l1 + 3.0 * l2) /
           (2.0 * static_cast<double>(params.neighborhood_size));
}

double ucb1_bonus(double t, std::int64_t n, const ConfidenceParams& params, bool single_agent) {
    double l1, l2;
    clamped_logs(t, l1, l2);
    if (single_agent) return std::sqrt(2.0 * l1 / static_cast<double>(n));
    return (1.0 + params.beta) *
           std::sqrt(3.0 * l1 / (static_cast<double>(params.neighborhood_size) * static_cast<double>(n)));
}

}  // namespace decbandit
