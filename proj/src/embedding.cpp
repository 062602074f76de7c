// SPDX-License-Identifier: Apache-2.0
#include "autoodd/embedding.hpp"

#include "autoodd/errors.hpp"
#include "autoodd/rng.hpp"

#include <cmath>

namespace autoodd {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Raw (pre-normalization) coordinates per keyword for one category.
std::vector<std::vector<double>> raw_coordinates(const Category& cat) {
    const auto& spec = cat.embedding_spec();
    std::vector<std::vector<double>> raw;
    raw.reserve(cat.size());
    switch (spec.kind) {
    case EmbeddingKind::Ordinal:
        for (std::size_t i = 0; i < cat.size(); ++i) {
            raw.push_back({static_cast<double>(i)});
        }
        break;
    case EmbeddingKind::Table:
        for (const auto& kw : cat.keywords()) {
            raw.push_back(spec.table.at(kw)); // coverage validated by Category
        }
        break;
    case EmbeddingKind::Hash:
        for (const auto& kw : cat.keywords()) {
            const std::uint64_t digest = fnv1a64(kw);
            std::vector<double> v;
            v.reserve(spec.hash_dim);
            for (std::size_t j = 0; j < spec.hash_dim; ++j) {
                const std::uint64_t z = mix64(digest ^ (0x9e3779b97f4a7c15ull * (j + 1)));
                v.push_back(static_cast<double>(z >> 11) * 0x1.0p-53);
            }
            raw.push_back(std::move(v));
        }
        break;
    }
    return raw;
}

} // namespace

AxisEmbedder AxisEmbedder::build(const Category& category) {
    AxisEmbedder e;
    e.category_name_ = category.name();
    e.kind_ = category.embedding_spec().kind;
    e.coords_ = raw_coordinates(category);
    e.dimension_ = e.coords_.front().size();
    for (const auto& kw : category.keywords()) {
        e.folded_keywords_.push_back(fold(kw));
    }

    // z-score each dimension over the axis's keyword population; a constant
    // dimension keeps scale 1 so the degenerate axis maps to 0
    const double n = static_cast<double>(e.coords_.size());
    e.normalization_.resize(e.dimension_);
    for (std::size_t j = 0; j < e.dimension_; ++j) {
        double mean = 0.0;
        for (const auto& v : e.coords_) {
            mean += v[j];
        }
        mean /= n;
        double var = 0.0;
        for (const auto& v : e.coords_) {
            var += (v[j] - mean) * (v[j] - mean);
        }
        double scale = std::sqrt(var / n);
        if (scale < 1e-12) {
            scale = 1.0;
        }
        e.normalization_[j] = {mean, scale};
        for (auto& v : e.coords_) {
            v[j] = (v[j] - mean) / scale;
        }
    }
    return e;
}

const std::vector<double>& AxisEmbedder::embed_index(std::size_t keyword_idx) const {
    if (keyword_idx >= coords_.size()) {
        throw ValidationError("keyword index out of range for axis '" + category_name_ + "'");
    }
    return coords_[keyword_idx];
}

const std::vector<double>& AxisEmbedder::embed(std::string_view keyword) const {
    const std::string f = fold(keyword);
    for (std::size_t i = 0; i < folded_keywords_.size(); ++i) {
        if (folded_keywords_[i] == f) {
            return coords_[i];
        }
    }
    throw ValidationError("unknown keyword '" + std::string(keyword) + "' for axis '" + category_name_ + "'");
}

std::vector<AxisEmbedder> build_embedders(const DescriptorSpace& space) {
    std::vector<AxisEmbedder> embedders;
    embedders.reserve(space.axis_count());
    for (const auto& cat : space.categories()) {
        embedders.push_back(AxisEmbedder::build(cat));
    }
    return embedders;
}

ScenarioEmbedding embed_scenario(const DescriptorSpace& space,
                                 const std::vector<AxisEmbedder>& embedders,
                                 const Scenario& scenario) {
    if (embedders.size() != space.axis_count() || scenario.keyword_indices.size() != space.axis_count()) {
        throw ValidationError("embedder/scenario arity does not match the space");
    }
    ScenarioEmbedding e;
    e.axes.reserve(space.axis_count());
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        e.axes.push_back(embedders[k].embed_index(scenario.keyword_indices[k]));
    }
    return e;
}

} // namespace autoodd
