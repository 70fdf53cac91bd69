#include "decbandit/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "decbandit/errors.hpp"

namespace decbandit {

CoefficientOracle::CoefficientOracle(const NeighborGraph& graph, const WeightMatrix& weights,
                                     const RunTrace& trace)
    : graph_(graph), weights_(weights), trace_(trace) {
    node_count_ = graph.node_count();
    arm_count_ = static_cast<int>(trace.init_rewards.empty() ? 0 : trace.init_rewards[0].size());
    horizon_ = static_cast<std::int64_t>(trace.pulls.size());
    if (static_cast<int>(trace.init_rewards.size()) != node_count_ || arm_count_ == 0)
        throw RunError("trace does not match the graph it is checked against");
    if (!graph.is_connected())
        throw ConfigError("the coefficient oracle expects a connected graph; run components separately");

    const std::size_t slots = static_cast<std::size_t>(node_count_) * (horizon_ + 1);
    coeff_.assign(node_count_, std::vector<std::vector<double>>(
                                   arm_count_, std::vector<double>(slots, 0.0)));
    xcoeff_.assign(node_count_,
                   std::vector<std::vector<double>>(arm_count_, std::vector<double>(horizon_ + 1, 0.0)));
    rewards_.assign(arm_count_, std::vector<double>(slots, 0.0));
    pull_times_.assign(node_count_, std::vector<std::vector<std::int64_t>>(arm_count_));
    counts_.assign(node_count_, std::vector<std::int64_t>(arm_count_, 1));
    scratch_.assign(node_count_, std::vector<double>(slots, 0.0));

    for (int j = 0; j < node_count_; ++j) {
        for (int k = 0; k < arm_count_; ++k) {
            // Initialization pulls every arm once at time 0.
            pull_times_[j][k].push_back(0);
            rewards_[k][slot(j, 0)] = trace_.init_rewards[j][k];
            xcoeff_[j][k][0] = 1.0;
            coeff_[j][k][slot(j, 0)] = 1.0;
        }
    }
    for (std::int64_t t = 1; t <= horizon_; ++t) {
        for (int j = 0; j < node_count_; ++j) {
            int k = trace_.pulls[t - 1][j];
            pull_times_[j][k].push_back(t);
            rewards_[k][slot(j, t)] = trace_.pull_rewards[t - 1][j];
        }
    }
}

void CoefficientOracle::advance() {
    if (current_time_ >= horizon_) throw RunError("oracle advanced past the trace horizon");
    const std::int64_t t = current_time_;
    const std::size_t active = static_cast<std::size_t>(t + 2);  // slots with tau <= t+1 per agent

    for (int k = 0; k < arm_count_; ++k) {
        // Fusion part: scratch_i = sum_h w_ih coeff_h over the neighborhood.
        for (int i = 0; i < node_count_; ++i) {
            auto& row = scratch_[i];
            const double wii = weights_.entries(i, i);
            const auto& self = coeff_[i][k];
            for (int j = 0; j < node_count_; ++j) {
                double* out = row.data() + slot(j, 0);
                const double* in = self.data() + slot(j, 0);
                for (std::size_t tau = 0; tau < active; ++tau) out[tau] = wii * in[tau];
            }
            for (int h : graph_.adjacent(i)) {
                const double wih = weights_.entries(i, h);
                const auto& other = coeff_[h][k];
                for (int j = 0; j < node_count_; ++j) {
                    double* out = row.data() + slot(j, 0);
                    const double* in = other.data() + slot(j, 0);
                    for (std::size_t tau = 0; tau < active; ++tau) out[tau] += wih * in[tau];
                }
            }
        }
        // Local increment: the change in the agent's own sample-mean
        // coefficients enters only its own source slots.
        for (int i = 0; i < node_count_; ++i) {
            if (trace_.pulls[t][i] != k) continue;
            auto& xrow = xcoeff_[i][k];
            const std::int64_t n_old = counts_[i][k];
            const std::int64_t n_new = n_old + 1;
            const double shrink = static_cast<double>(n_old) / static_cast<double>(n_new);
            auto& row = scratch_[i];
            for (std::int64_t pull : pull_times_[i][k]) {
                if (pull > t) break;
                double updated = xrow[pull] * shrink;
                row[slot(i, pull)] += updated - xrow[pull];
                xrow[pull] = updated;
            }
            xrow[t + 1] = 1.0 / static_cast<double>(n_new);
            row[slot(i, t + 1)] += xrow[t + 1];
        }
        for (int i = 0; i < node_count_; ++i) coeff_[i][k].swap(scratch_[i]);
    }
    for (int i = 0; i < node_count_; ++i) counts_[i][trace_.pulls[t][i]]++;
    current_time_ = t + 1;
}

void CoefficientOracle::advance_to(std::int64_t t) {
    while (current_time_ < t) advance();
}

bool CoefficientOracle::pulled_at(int j, int k, std::int64_t tau) const {
    if (tau == 0) return true;
    if (tau > current_time_) return false;
    return trace_.pulls[tau - 1][j] == k;
}

double CoefficientOracle::coefficient(int i, int k, int j, std::int64_t tau) const {
    return coeff_[i][k][slot(j, tau)];
}

double CoefficientOracle::coefficient_sum(int i, int k) const {
    const auto& row = coeff_[i][k];
    double total = 0.0;
    for (int j = 0; j < node_count_; ++j) {
        const double* in = row.data() + slot(j, 0);
        for (std::int64_t tau = 0; tau <= current_time_; ++tau) total += in[tau];
    }
    return total;
}

double CoefficientOracle::reconstruct(int i, int k) const {
    const auto& row = coeff_[i][k];
    const auto& rx = rewards_[k];
    double total = 0.0;
    for (int j = 0; j < node_count_; ++j) {
        const std::size_t base = slot(j, 0);
        for (std::int64_t tau = 0; tau <= current_time_; ++tau)
            total += row[base + tau] * rx[base + tau];
    }
    return total;
}

double CoefficientOracle::trace_consensus(int i, int k) const {
    return trace_.consensus[current_time_][i][k];
}

const Eigen::MatrixXd& CoefficientOracle::weight_power(std::int64_t exponent) {
    if (weight_powers_.empty())
        weight_powers_.push_back(Eigen::MatrixXd::Identity(node_count_, node_count_));
    while (static_cast<std::int64_t>(weight_powers_.size()) <= exponent)
        weight_powers_.push_back(weight_powers_.back() * weights_.entries);
    return weight_powers_[exponent];
}

double CoefficientOracle::closed_form_coefficient(int i, int k, int j, std::int64_t tau) {
    const auto& times = pull_times_[j][k];
    auto it = std::lower_bound(times.begin(), times.end(), tau);
    if (it == times.end() || *it != tau || tau > current_time_) return 0.0;
    const std::int64_t ordinal = (it - times.begin()) + 1;  // 1-based pull index
    const std::int64_t n = counts_[j][k];
    // Pull `ordinal` contributes through every later sample mean: its weight
    // is [W^(t-tau)]_ij / ordinal minus the tail corrections at later pulls.
    double value = weight_power(current_time_ - tau)(i, j) / static_cast<double>(ordinal);
    for (std::int64_t h = ordinal + 1; h <= n; ++h) {
        std::int64_t pull = times[h - 1];
        value -= weight_power(current_time_ - pull)(i, j) /
                 (static_cast<double>(h - 1) * static_cast<double>(h));
    }
    return value;
}

double CoefficientOracle::closed_form_gap() {
    double worst = 0.0;
    for (int j = 0; j < node_count_; ++j) {
        for (int k = 0; k < arm_count_; ++k) {
            const auto& times = pull_times_[j][k];
            const std::int64_t n = counts_[j][k];
            for (int i = 0; i < node_count_; ++i) {
                // One downward sweep shares the tail sums across ordinals.
                double tail = 0.0;
                for (std::int64_t l = n; l >= 1; --l) {
                    if (l < n) {
                        std::int64_t pull = times[l];
                        tail += weight_power(current_time_ - pull)(i, j) /
                                (static_cast<double>(l) * static_cast<double>(l + 1));
                    }
                    double closed =
                        weight_power(current_time_ - times[l - 1])(i, j) / static_cast<double>(l) - tail;
                    double propagated = coeff_[i][k][slot(j, times[l - 1])];
                    worst = std::max(worst, std::abs(closed - propagated));
                }
            }
        }
    }
    return worst;
}

void CoefficientOracle::scan_structure(OracleReport& report) const {
    for (int i = 0; i < node_count_; ++i) {
        for (int k = 0; k < arm_count_; ++k) {
            report.max_sum_error =
                std::max(report.max_sum_error, std::abs(coefficient_sum(i, k) - 1.0));
            report.max_reconstruction_error = std::max(
                report.max_reconstruction_error, std::abs(reconstruct(i, k) - trace_consensus(i, k)));
            const auto& row = coeff_[i][k];
            for (int j = 0; j < node_count_; ++j)
                for (std::int64_t tau = 0; tau <= current_time_; ++tau)
                    if (!pulled_at(j, k, tau))
                        report.max_unpulled_coefficient =
                            std::max(report.max_unpulled_coefficient, std::abs(row[slot(j, tau)]));
        }
    }
}

void CoefficientOracle::scan_concentration(const ConcentrationOptions& options,
                                           ConcentrationReport& report) const {
    const double n_agents = static_cast<double>(node_count_);
    for (int j = 0; j < node_count_; ++j) {
        for (int k = 0; k < arm_count_; ++k) {
            const std::int64_t n = counts_[j][k];
            if (n < options.threshold) continue;
            const double nd = static_cast<double>(n);
            const double allowed = options.epsilon / n_agents / (nd * std::sqrt(nd));
            const double center = 1.0 / (n_agents * nd);
            const auto& times = pull_times_[j][k];
            for (int i = 0; i < node_count_; ++i) {
                // Tail of the spectral-decay estimate, accumulated downward so
                // each ordinal gets its provable deviation bound in O(1).
                double tail = 0.0;
                for (std::int64_t l = n; l >= 1; --l) {
                    if (l < n)
                        tail += std::pow(options.rho2, static_cast<double>(n - l - 1)) /
                                (static_cast<double>(l) * static_cast<double>(l + 1));
                    const std::int64_t tau = times[l - 1];
                    const double c = coeff_[i][k][slot(j, tau)];
                    const double deviation = std::abs(c - center);
                    report.checked++;
                    report.tightest_margin = std::min(report.tightest_margin, allowed - deviation);
                    if (deviation > allowed) {
                        report.violations++;
                        report.worst_excess = std::max(report.worst_excess, deviation / allowed);
                        report.max_violation_age = std::max(report.max_violation_age, current_time_ - tau);
                        double provable =
                            std::pow(options.rho2, static_cast<double>(current_time_ - tau)) /
                                static_cast<double>(l) +
                            tail;
                        if (provable <= allowed) report.unexplained_violations++;
                    }
                }
            }
        }
    }
}

std::vector<std::array<double, 6>> CoefficientOracle::nonzero_entries() const {
    std::vector<std::array<double, 6>> rows;
    for (int i = 0; i < node_count_; ++i)
        for (int k = 0; k < arm_count_; ++k)
            for (int j = 0; j < node_count_; ++j)
                for (std::int64_t tau = 0; tau <= current_time_; ++tau) {
                    double c = coeff_[i][k][slot(j, tau)];
                    if (c != 0.0)
                        rows.push_back({static_cast<double>(current_time_), static_cast<double>(i),
                                        static_cast<double>(k), static_cast<double>(j),
                                        static_cast<double>(tau), c});
                }
    return rows;
}

OracleReport run_oracle_checks(const NeighborGraph& graph, const WeightMatrix& weights,
                               const RunTrace& trace, const ConcentrationOptions& options,
                               std::int64_t closed_form_stride) {
    CoefficientOracle oracle(graph, weights, trace);
    OracleReport report;
    oracle.scan_structure(report);
    oracle.scan_concentration(options, report.concentration);
    while (oracle.time() < oracle.horizon()) {
        oracle.advance();
        oracle.scan_structure(report);
        oracle.scan_concentration(options, report.concentration);
        if (closed_form_stride > 0 &&
            (oracle.time() % closed_form_stride == 0 || oracle.time() == oracle.horizon()))
            report.max_closed_form_gap = std::max(report.max_closed_form_gap, oracle.closed_form_gap());
    }
    return report;
}

}  // namespace decbandit
