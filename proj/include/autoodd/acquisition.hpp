// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autoodd/descriptor_space.hpp"
#include "autoodd/embedding.hpp"
#include "autoodd/gp_surrogate.hpp"
#include "autoodd/rng.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace autoodd {

/// Selection rule used when the epsilon heuristic overrides the agent.
enum class AcquisitionMode { MaxFailure, MaxUncertainty, RandomUnqueried };

std::string_view acquisition_mode_name(AcquisitionMode mode);
AcquisitionMode parse_acquisition_mode(std::string_view name);

/// The epsilon override: with probability epsilon the agent's proposal is
/// replaced by the mode's selection. Owns the named draw stream.
struct OverridePolicy {
    double epsilon = 0.1;
    AcquisitionMode mode = AcquisitionMode::MaxUncertainty;
    RngStream stream{0};
};

/// Draws once from the policy's stream; true iff the draw lands below epsilon.
bool should_override(OverridePolicy& policy);

/// Membership bitmap over scenario indices plus the running count.
class QueriedSet {
public:
    explicit QueriedSet(std::uint64_t universe) : mask_(universe, false) {}

    bool contains(std::uint64_t index) const { return mask_.at(index); }
    void insert(std::uint64_t index) {
        if (!mask_.at(index)) {
            mask_[index] = true;
            ++count_;
        }
    }
    std::uint64_t size() const { return count_; }
    std::uint64_t universe() const { return mask_.size(); }
    bool exhausted() const { return count_ == mask_.size(); }

private:
    std::vector<bool> mask_;
    std::uint64_t count_ = 0;
};

/// Operational scenario weights p. Uniform (1.0) unless a table overrides
/// individual scenarios.
class OperationalWeights {
public:
    OperationalWeights() = default;

    /// Loads a JSON array of {"scenario": {category: keyword, ...}, "weight": w}
    /// entries; unlisted scenarios keep weight 1.
    static OperationalWeights from_json(std::string_view json_text, const DescriptorSpace& space);
    static OperationalWeights from_file(const std::string& path, const DescriptorSpace& space);

    double weight(std::uint64_t scenario_index) const {
        const auto it = overrides_.find(scenario_index);
        return it == overrides_.end() ? 1.0 : it->second;
    }

    bool is_uniform() const { return overrides_.empty(); }

private:
    std::unordered_map<std::uint64_t, double> overrides_;
};

/// Per-keyword posterior cache over one model snapshot. Every scenario's
/// axis-k posterior depends only on its axis-k keyword, so scans over the
/// grid evaluate each GP once per keyword instead of once per scenario.
class ScenarioScorer {
public:
    ScenarioScorer(const DescriptorSpace& space,
                   const std::vector<AxisEmbedder>& embedders,
                   const std::vector<GpAxisModel>& models);

    const Posterior& axis_posterior(std::size_t axis, std::size_t keyword_idx) const {
        return per_axis_.at(axis).at(keyword_idx);
    }

    /// (failure_score, uncertainty_score) for one scenario at weight p.
    std::pair<double, double> scores(const Scenario& scenario, double weight) const;

private:
    std::vector<std::vector<Posterior>> per_axis_;
};

/// Chooses the unqueried scenario the override substitutes for the agent's
/// proposal. Exhaustive scan, ties broken by lowest flat index; RandomUnqueried
/// draws from `random_choice`. Returns nullopt when the grid is exhausted.
std::optional<Scenario> select_override(AcquisitionMode mode,
                                        const DescriptorSpace& space,
                                        const std::vector<AxisEmbedder>& embedders,
                                        const std::vector<GpAxisModel>& models,
                                        const QueriedSet& queried,
                                        const OperationalWeights& weights,
                                        RngStream& random_choice);

/// Full per-axis posterior landscape at the keyword embeddings.
std::vector<AxisLandscape> compute_landscape(const DescriptorSpace& space,
                                             const std::vector<AxisEmbedder>& embedders,
                                             const std::vector<GpAxisModel>& models);

} // namespace autoodd
