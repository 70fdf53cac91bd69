#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "decbandit/engine.hpp"
#include "decbandit/graph.hpp"

namespace decbandit {

struct ConcentrationOptions {
    double epsilon = 1.0;
    std::int64_t threshold = 0;  // sample count where the bound engages
    double rho2 = 0.0;
};

struct ConcentrationReport {
    std::int64_t checked = 0;
    std::int64_t violations = 0;
    // Violations where even the spectral-decay argument predicts the bound
    // should hold; these indicate a real defect rather than a reward that has
    // not finished propagating through the network.
    std::int64_t unexplained_violations = 0;
    double tightest_margin = std::numeric_limits<double>::infinity();  // allowed - deviation
    double worst_excess = 0.0;            // max deviation / allowed among violations
    std::int64_t max_violation_age = -1;  // largest t - tau among violations
};

struct OracleReport {
    double max_sum_error = 0.0;
    double max_reconstruction_error = 0.0;
    double max_unpulled_coefficient = 0.0;
    double max_closed_form_gap = 0.0;
    ConcentrationReport concentration;
};

/// Expands every consensus estimate as an explicit linear combination of raw
/// rewards by propagating coefficients through the same recursions the agents
/// run. A second, independent construction from cached weight-matrix powers
/// cross-checks the propagation.
class CoefficientOracle {
public:
    CoefficientOracle(const NeighborGraph& graph, const WeightMatrix& weights, const RunTrace& trace);

    std::int64_t time() const { return current_time_; }
    std::int64_t horizon() const { return horizon_; }
    int node_count() const { return node_count_; }
    int arm_count() const { return arm_count_; }

    void advance();
    void advance_to(std::int64_t t);

    std::int64_t pull_count(int j, int k) const { return counts_[j][k]; }
    bool pulled_at(int j, int k, std::int64_t tau) const;

    double coefficient(int i, int k, int j, std::int64_t tau) const;
    double coefficient_sum(int i, int k) const;

    /// Sum of coefficient * reward over all sources, evaluated from the
    /// stored arrays (not by replaying the value recursion).
    double reconstruct(int i, int k) const;

    /// The consensus value the agents actually computed, from the trace.
    double trace_consensus(int i, int k) const;

    /// Same coefficient from the matrix-power closed form.
    double closed_form_coefficient(int i, int k, int j, std::int64_t tau);

    /// Max |propagated - closed form| over every nonzero entry at the
    /// current time.
    double closed_form_gap();

    /// Updates running maxima for the sum-to-one, reconstruction and
    /// unpulled-coefficient checks at the current time.
    void scan_structure(OracleReport& report) const;

    void scan_concentration(const ConcentrationOptions& options, ConcentrationReport& report) const;

    /// Flat (t, i, k, j, tau, coefficient) rows for the nonzero entries at
    /// the current time.
    std::vector<std::array<double, 6>> nonzero_entries() const;

private:
    std::size_t slot(int j, std::int64_t tau) const {
        return static_cast<std::size_t>(j) * (horizon_ + 1) + static_cast<std::size_t>(tau);
    }
    const Eigen::MatrixXd& weight_power(std::int64_t exponent);

    const NeighborGraph& graph_;
    const WeightMatrix& weights_;
    const RunTrace& trace_;
    int node_count_;
    int arm_count_;
    std::int64_t horizon_;
    std::int64_t current_time_ = 0;

    // coeff_[i][k][slot(j,tau)] and the agents' own sample-mean coefficients
    // xcoeff_[j][k][tau]; rewards_[k][slot(j,tau)] holds the raw draws.
    std::vector<std::vector<std::vector<double>>> coeff_;
    std::vector<std::vector<std::vector<double>>> xcoeff_;
    std::vector<std::vector<double>> rewards_;
    std::vector<std::vector<std::vector<std::int64_t>>> pull_times_;  // [j][k] ascending
    std::vector<std::vector<std::int64_t>> counts_;
    std::vector<Eigen::MatrixXd> weight_powers_;
    std::vector<std::vector<double>> scratch_;  // per-agent rows reused in advance()
};

/// Runs the oracle across the whole trace, scanning every round; the closed
/// form is cross-checked every `closed_form_stride` rounds (and always at the
/// end) when the stride is positive.
OracleReport run_oracle_checks(const NeighborGraph& graph, const WeightMatrix& weights,
                               const RunTrace& trace, const ConcentrationOptions& options,
                               std::int64_t closed_form_stride = 0);

}  // namespace decbandit
