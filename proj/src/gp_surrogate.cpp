// SPDX-License-Identifier: Apache-2.0
#include "autoodd/gp_surrogate.hpp"

#include "autoodd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace autoodd {

void GpHyperparams::validate() const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw ValidationError("gp signal variance must be strictly positive");
    }
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
        throw ValidationError("gp lengthscale must be strictly positive");
    }
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
        throw ValidationError("gp noise variance must be strictly positive");
    }
}

namespace {

double rbf(const GpHyperparams& hp, double squared_distance) {
    return hp.signal_variance * std::exp(-squared_distance / (2.0 * hp.lengthscale * hp.lengthscale));
}

} // namespace

GpAxisModel GpAxisModel::fit(std::size_t axis_index,
                             const std::vector<std::vector<double>>& inputs,
                             const std::vector<double>& targets,
                             const GpHyperparams& hp) {
    hp.validate();
    if (inputs.empty()) {
        throw ValidationError("gp fit needs at least one observation");
    }
    if (inputs.size() != targets.size()) {
        throw ValidationError("gp fit: inputs and targets differ in length");
    }
    const std::size_t m = inputs.size();
    const std::size_t d = inputs.front().size();
    if (d == 0) {
        throw ValidationError("gp fit: zero-dimensional inputs");
    }

    GpAxisModel model(hp);
    model.axis_index_ = axis_index;
    model.dimension_ = d;
    model.train_inputs_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
    model.train_targets_.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        if (inputs[i].size() != d) {
            throw ValidationError("gp fit: inputs differ in dimension");
        }
        for (std::size_t j = 0; j < d; ++j) {
            const double v = inputs[i][j];
            if (!std::isfinite(v)) {
                throw ValidationError("gp fit: non-finite input coordinate");
            }
            model.train_inputs_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
        if (targets[i] != 0.0 && targets[i] != 1.0) {
            throw ValidationError("gp fit: targets must be 0 or 1");
        }
        model.train_targets_(static_cast<Eigen::Index>(i)) = targets[i];
    }

    Eigen::MatrixXd gram(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = hp.signal_variance + hp.noise_variance;
        for (std::size_t j = i + 1; j < m; ++j) {
            const double sq = (model.train_inputs_.row(static_cast<Eigen::Index>(i)) -
                               model.train_inputs_.row(static_cast<Eigen::Index>(j)))
                                  .squaredNorm();
            const double k = rbf(hp, sq);
            gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k;
            gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = k;
        }
    }

    double jitter = 0.0;
    for (;;) {
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() == Eigen::Success) {
            model.chol_lower_ = llt.matrixL();
            break;
        }
        jitter = (jitter == 0.0) ? 1e-10 : jitter * 2.0;
        if (jitter > 1e-4) {
            throw NumericalError("gp fit: gram matrix is not positive definite after jitter escalation");
        }
        gram.diagonal().array() += jitter;
    }

    const Eigen::VectorXd centered = model.train_targets_.array() - kPriorMean;
    model.alpha_ = model.chol_lower_.triangularView<Eigen::Lower>().solve(centered);
    model.chol_lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(model.alpha_);
    return model;
}

Posterior GpAxisModel::posterior(std::span<const double> point) const {
    if (!fitted()) {
        return Posterior{kPriorMean, hp_.signal_variance};
    }
    if (point.size() != dimension_) {
        throw ValidationError("gp posterior: point dimension does not match axis dimension");
    }
    for (const double v : point) {
        if (!std::isfinite(v)) {
            throw ValidationError("gp posterior: non-finite query coordinate");
        }
    }

    const auto m = train_inputs_.rows();
    Eigen::VectorXd kstar(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < dimension_; ++j) {
            const double diff = train_inputs_(i, static_cast<Eigen::Index>(j)) - point[j];
            sq += diff * diff;
        }
        kstar(i) = rbf(hp_, sq);
    }

    Posterior p;
    p.mean = kPriorMean + kstar.dot(alpha_);
    const Eigen::VectorXd v = chol_lower_.triangularView<Eigen::Lower>().solve(kstar);
    double variance = hp_.signal_variance - v.squaredNorm();
    if (variance < 0.0) {
        if (variance < -1e-10) {
            throw NumericalError("gp posterior: variance underflowed below the clamp window");
        }
        variance = 0.0;
    }
    p.variance = variance;
    return p;
}

std::pair<double, double> aggregate(std::span<const Posterior> posteriors, double weight) {
    if (posteriors.empty()) {
        throw ValidationError("aggregate needs at least one axis posterior");
    }
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw ValidationError("aggregate: operational weight must be >= 0");
    }
    double mean_sum = 0.0;
    double std_sum = 0.0;
    for (const auto& p : posteriors) {
        mean_sum += p.mean;
        std_sum += std::sqrt(std::max(p.variance, 0.0));
    }
    const double k = static_cast<double>(posteriors.size());
    const double failure = std::clamp(weight * (mean_sum / k), 0.0, 1.0);
    return {failure, std_sum / k};
}

} // namespace autoodd
