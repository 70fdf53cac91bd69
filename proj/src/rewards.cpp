#include "decbandit/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "decbandit/errors.hpp"

namespace decbandit {

namespace {

// Adaptive Simpson on [a,b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a);
    double fb = f(b);
    double fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double truncated_normal_mean(double mu_raw, double sigma) {
    if (sigma <= 0.0) throw ConfigError("truncated normal needs sigma > 0");
    // The density is rescaled so its maximum over [0,1] is one; the ratio of
    // the two integrals is unaffected and neither underflows for locations
    // far outside the interval.
    const double anchor = std::clamp(mu_raw, 0.0, 1.0);
    const double peak = (anchor - mu_raw) / sigma;
    auto density = [mu_raw, sigma, peak](double x) {
        double u = (x - mu_raw) / sigma;
        return std::exp(-0.5 * (u * u - peak * peak));
    };
    // Seed the adaptive rule at the density's own length scale so narrow
    // interior or boundary spikes cannot hide between initial sample points.
    const int panels = std::clamp(static_cast<int>(std::ceil(2.0 / sigma)), 8, 4096);
    const double tol = 1e-10 / panels;
    double mass = 0.0;
    double first = 0.0;
    for (int p = 0; p < panels; ++p) {
        double a = static_cast<double>(p) / panels;
        double b = static_cast<double>(p + 1) / panels;
        mass += integrate(density, a, b, tol);
        first += integrate([&](double x) { return x * density(x); }, a, b, tol);
    }
    if (mass <= 0.0) throw ConfigError("truncated normal has no mass on [0,1]");
    return first / mass;
}

ArmSpec ArmSpec::bernoulli(double mu) {
    if (mu < 0.0 || mu > 1.0) throw ConfigError("bernoulli mean must be in [0,1]");
    return ArmSpec(ArmKind::Bernoulli, mu, 0.0, mu);
}

ArmSpec ArmSpec::truncated_normal(double mu_raw, double sigma) {
    return ArmSpec(ArmKind::TruncatedNormal, mu_raw, sigma, truncated_normal_mean(mu_raw, sigma));
}

ArmSpec ArmSpec::truncated_normal_mean_targeted(double mu, double sigma) {
    if (mu <= 0.0 || mu >= 1.0) throw ConfigError("targeted truncated mean must be inside (0,1)");
    // The truncated mean is strictly increasing in the raw location.
    double lo = -50.0;
    double hi = 51.0;
    double mid = mu;
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        double value = truncated_normal_mean(mid, sigma);
        if (std::abs(value - mu) <= 1e-9) break;
        if (value < mu)
            lo = mid;
        else
            hi = mid;
    }
    return ArmSpec(ArmKind::TruncatedNormal, mid, sigma, truncated_normal_mean(mid, sigma));
}

ArmSpec ArmSpec::beta(double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw ConfigError("beta shape parameters must be positive");
    return ArmSpec(ArmKind::Beta, a, b, a / (a + b));
}

double ArmSpec::sample(RandomStream& stream) const {
    switch (kind_) {
        case ArmKind::Bernoulli:
            return stream.uniform01() < a_ ? 1.0 : 0.0;
        case ArmKind::TruncatedNormal:
            for (int iter = 0; iter < 1000000; ++iter) {
                double x = stream.normal(a_, b_);
                if (x >= 0.0 && x <= 1.0) return x;
            }
            throw RunError("truncated normal rejection failed to land in [0,1]");
        case ArmKind::Beta:
            return stream.beta(a_, b_);
    }
    throw RunError("unknown arm kind");
}

std::string ArmSpec::describe() const {
    char buf[96];
    switch (kind_) {
        case ArmKind::Bernoulli:
            std::snprintf(buf, sizeof(buf), "bern(%g)", a_);
            break;
        case ArmKind::TruncatedNormal:
            std::snprintf(buf, sizeof(buf), "tnorm(%.12g,%g)", a_, b_);
            break;
        case ArmKind::Beta:
            std::snprintf(buf, sizeof(buf), "beta(%g,%g)", a_, b_);
            break;
    }
    return buf;
}

ArmSet::ArmSet(std::vector<ArmSpec> arms) : arms_(std::move(arms)) {
    if (arms_.empty()) throw ConfigError("arm set needs at least one arm");
    means_.reserve(arms_.size());
    for (const ArmSpec& arm : arms_) means_.push_back(arm.true_mean());
    best_mean_ = *std::max_element(means_.begin(), means_.end());
    gaps_.reserve(arms_.size());
    for (double mu : means_) gaps_.push_back(best_mean_ - mu);
}

}  // namespace decbandit
