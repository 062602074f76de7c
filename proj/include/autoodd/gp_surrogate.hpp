// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace autoodd {

/// RBF kernel parameters of one axis regressor. Fixed (no marginal-likelihood
/// optimization); overridable from config. The noise floor absorbs the label
/// variation a single axis cannot explain: the same axis coordinate is seen
/// with conflicting pass/fail outcomes whenever the other axes drive the result.
struct GpHyperparams {
    double signal_variance = 1.0;
    double lengthscale = 1.0;
    double noise_variance = 0.1;

    void validate() const;
};

/// Posterior prediction at one point.
struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact Gaussian-Process regressor over one axis's embedding coordinates
/// with binary failure targets (1 = failure).
///
/// Targets are treated as regression observations around a prior mean of 0.5:
/// the prior is subtracted before the solve and added back on prediction, so
/// an unfitted or far-from-data query reads as "failure probability unknown"
/// rather than "certain pass".
///
/// Kernel: k(a,b) = signal_variance * exp(-|a-b|^2 / (2 * lengthscale^2)),
/// with noise_variance added on the gram diagonal. The fit factorizes
/// K + sigma_n^2 I by Cholesky; if factorization fails, a diagonal jitter
/// escalates from 1e-10 doubling up to 1e-4 before giving up.
class GpAxisModel {
public:
    static constexpr double kPriorMean = 0.5;

    /// Unfitted model: posterior() answers with the prior.
    explicit GpAxisModel(GpHyperparams hp = {}) : hp_(hp) { hp_.validate(); }

    /// Exact fit from scratch. `inputs` are axis coordinate vectors of equal
    /// dimension; `targets` are 0/1 outcomes. Throws ValidationError on bad
    /// shapes or non-finite values, NumericalError if the gram matrix cannot
    /// be factorized after jitter escalation.
    static GpAxisModel fit(std::size_t axis_index,
                           const std::vector<std::vector<double>>& inputs,
                           const std::vector<double>& targets,
                           const GpHyperparams& hp);

    bool fitted() const { return train_size() > 0; }
    std::size_t axis_index() const { return axis_index_; }
    std::size_t train_size() const { return static_cast<std::size_t>(train_inputs_.rows()); }
    std::size_t dimension() const { return dimension_; }
    const GpHyperparams& hyperparams() const { return hp_; }

    /// Lower-triangular factor L with L*L^T = K_XX + sigma_n^2 I (+ jitter).
    const Eigen::MatrixXd& cholesky_factor() const { return chol_lower_; }

    /// Predictive mean and variance at one point. The mean is
    /// 0.5 + k_*^T alpha; the variance is sigma_f^2 - |L^-1 k_*|^2, clamped
    /// to zero when within -1e-10 (larger negatives raise NumericalError).
    Posterior posterior(std::span<const double> point) const;

private:
    std::size_t axis_index_ = 0;
    std::size_t dimension_ = 0;
    GpHyperparams hp_{};
    Eigen::MatrixXd train_inputs_;  // m x d
    Eigen::VectorXd train_targets_; // raw 0/1 values
    Eigen::MatrixXd chol_lower_;    // m x m
    Eigen::VectorXd alpha_;         // (K + sn2 I)^-1 (y - 0.5)
};

/// Cross-axis aggregation of K per-axis posteriors under an operational
/// weight p >= 0 for the scenario:
///   failure_score     = p * mean(posterior means), clamped to [0, 1]
///   uncertainty_score = mean(posterior standard deviations)
std::pair<double, double> aggregate(std::span<const Posterior> posteriors, double weight);

/// Posterior landscape of one axis: a (mean, std) row per keyword.
struct LandscapeRow {
    std::string keyword;
    double mean = 0.0;
    double stddev = 0.0;
};

struct AxisLandscape {
    std::string axis;
    std::vector<LandscapeRow> rows;
};

} // namespace autoodd
