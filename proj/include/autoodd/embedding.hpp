// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autoodd/descriptor_space.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace autoodd {

/// Maps one category's keywords to per-axis coordinate vectors, z-scored
/// over the category's full keyword set (population statistics: the keyword
/// list is the whole axis). Immutable after build.
///
/// Kinds:
///  - ordinal: keyword position as a 1-D coordinate
///  - table:   configured vectors (e.g. precomputed text-encoder outputs)
///  - hash:    deterministic digest-derived vector, stable across platforms
class AxisEmbedder {
public:
    static AxisEmbedder build(const Category& category);

    const std::string& category_name() const { return category_name_; }
    EmbeddingKind kind() const { return kind_; }
    std::size_t dimension() const { return dimension_; }

    /// Normalized coordinates of a keyword by axis position. O(1).
    const std::vector<double>& embed_index(std::size_t keyword_idx) const;

    /// Normalized coordinates by keyword spelling (case-insensitive).
    const std::vector<double>& embed(std::string_view keyword) const;

    /// Fitted per-dimension (mean, scale) pairs, in raw-coordinate units.
    const std::vector<std::pair<double, double>>& normalization() const { return normalization_; }

private:
    AxisEmbedder() = default;

    std::string category_name_;
    EmbeddingKind kind_ = EmbeddingKind::Hash;
    std::size_t dimension_ = 0;
    std::vector<std::vector<double>> coords_; // one normalized vector per keyword
    std::vector<std::pair<double, double>> normalization_;
    // keyword lookup is delegated to a copy of the category
    std::vector<std::string> folded_keywords_;
};

/// One embedder per category, in declaration order.
std::vector<AxisEmbedder> build_embedders(const DescriptorSpace& space);

/// Per-axis coordinate vectors of one scenario, axis order = declaration order.
struct ScenarioEmbedding {
    std::vector<std::vector<double>> axes;

    bool operator==(const ScenarioEmbedding& other) const = default;
};

ScenarioEmbedding embed_scenario(const DescriptorSpace& space,
                                 const std::vector<AxisEmbedder>& embedders,
                                 const Scenario& scenario);

} // namespace autoodd
