#pragma once

#include <string>
#include <vector>

#include "decbandit/rng.hpp"

namespace decbandit {

enum class ArmKind {
    Bernoulli,
    TruncatedNormal,  // normal(mu_raw, sigma) rejected onto [0,1]
    Beta,
};

/// One arm's reward model. All kinds produce samples in [0,1] and expose the
/// exact mean used by the regret accountant.
class ArmSpec {
public:
    static ArmSpec bernoulli(double mu);
    static ArmSpec truncated_normal(double mu_raw, double sigma);
    /// Truncated normal whose post-truncation mean equals `mu` exactly; the
    /// raw location is recovered by bisection (tolerance 1e-9 on the mean).
    static ArmSpec truncated_normal_mean_targeted(double mu, double sigma);
    static ArmSpec beta(double a, double b);

    ArmKind kind() const { return kind_; }
    double true_mean() const { return mean_; }
    double param_a() const { return a_; }  // mu / mu_raw / alpha
    double param_b() const { return b_; }  // - / sigma / beta

    double sample(RandomStream& stream) const;
    std::string describe() const;

private:
    ArmSpec(ArmKind kind, double a, double b, double mean) : kind_(kind), a_(a), b_(b), mean_(mean) {}

    ArmKind kind_;
    double a_;
    double b_;
    double mean_;
};

/// Ordered arm collection with precomputed means and gaps. Input order is
/// free; the best arm is found internally.
class ArmSet {
public:
    explicit ArmSet(std::vector<ArmSpec> arms);

    int arm_count() const { return static_cast<int>(arms_.size()); }
    const std::vector<ArmSpec>& arms() const { return arms_; }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& gaps() const { return gaps_; }
    double best_mean() const { return best_mean_; }

private:
    std::vector<ArmSpec> arms_;
    std::vector<double> means_;
    std::vector<double> gaps_;
    double best_mean_;
};

/// Mean of normal(mu_raw, sigma) truncated to [0,1], by adaptive quadrature
/// of the raw density (absolute tolerance 1e-10).
double truncated_normal_mean(double mu_raw, double sigma);

}  // namespace decbandit
