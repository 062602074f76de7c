// SPDX-License-Identifier: Apache-2.0
#include "autoodd/acquisition.hpp"

#include "autoodd/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace autoodd {

std::string_view acquisition_mode_name(AcquisitionMode mode) {
    switch (mode) {
    case AcquisitionMode::MaxFailure: return "failure";
    case AcquisitionMode::MaxUncertainty: return "uncertainty";
    case AcquisitionMode::RandomUnqueried: return "random";
    }
    return "?";
}

AcquisitionMode parse_acquisition_mode(std::string_view name) {
    const std::string f = fold(name);
    if (f == "failure") {
        return AcquisitionMode::MaxFailure;
    }
    if (f == "uncertainty") {
        return AcquisitionMode::MaxUncertainty;
    }
    if (f == "random") {
        return AcquisitionMode::RandomUnqueried;
    }
    throw ConfigError("unknown override mode '" + std::string(name) + "' (expected failure|uncertainty|random)");
}

bool should_override(OverridePolicy& policy) {
    if (policy.epsilon < 0.0 || policy.epsilon > 1.0 || !std::isfinite(policy.epsilon)) {
        throw ValidationError("epsilon must lie in [0, 1]");
    }
    return policy.stream.next_unit() < policy.epsilon;
}

OperationalWeights OperationalWeights::from_json(std::string_view json_text, const DescriptorSpace& space) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("weight table parse error: ") + e.what());
    }
    if (!doc.is_array()) {
        throw ConfigError("weight table must be a JSON array");
    }
    OperationalWeights w;
    for (const auto& entry : doc) {
        if (!entry.is_object() || !entry.contains("scenario") || !entry.contains("weight") ||
            !entry["scenario"].is_object() || !entry["weight"].is_number()) {
            throw ConfigError("weight table entries must be {\"scenario\": {...}, \"weight\": number}");
        }
        const double weight = entry["weight"].get<double>();
        if (!(weight >= 0.0) || !std::isfinite(weight)) {
            throw ConfigError("weight table: weights must be >= 0");
        }
        std::vector<std::string> values(space.axis_count());
        std::vector<bool> filled(space.axis_count(), false);
        for (const auto& [name, kw] : entry["scenario"].items()) {
            const auto k = space.find_category(name);
            if (!k) {
                throw ConfigError("weight table: unknown category '" + name + "'");
            }
            if (!kw.is_string()) {
                throw ConfigError("weight table: keyword for '" + name + "' must be a string");
            }
            values[*k] = kw.get<std::string>();
            filled[*k] = true;
        }
        for (std::size_t k = 0; k < space.axis_count(); ++k) {
            if (!filled[k]) {
                throw ConfigError("weight table: scenario is missing category '" + space.category(k).name() + "'");
            }
        }
        const Scenario s = parse_keywords(space, values);
        w.overrides_[s.index] = weight;
    }
    return w;
}

OperationalWeights OperationalWeights::from_file(const std::string& path, const DescriptorSpace& space) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open weight table '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), space);
}

ScenarioScorer::ScenarioScorer(const DescriptorSpace& space,
                               const std::vector<AxisEmbedder>& embedders,
                               const std::vector<GpAxisModel>& models) {
    if (embedders.size() != space.axis_count() || models.size() != space.axis_count()) {
        throw ValidationError("scorer: embedder/model count does not match the space");
    }
    per_axis_.resize(space.axis_count());
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        const auto& cat = space.category(k);
        per_axis_[k].reserve(cat.size());
        for (std::size_t i = 0; i < cat.size(); ++i) {
            per_axis_[k].push_back(models[k].posterior(embedders[k].embed_index(i)));
        }
    }
}

std::pair<double, double> ScenarioScorer::scores(const Scenario& scenario, double weight) const {
    std::vector<Posterior> posts;
    posts.reserve(per_axis_.size());
    for (std::size_t k = 0; k < per_axis_.size(); ++k) {
        posts.push_back(axis_posterior(k, scenario.keyword_indices.at(k)));
    }
    return aggregate(posts, weight);
}

std::optional<Scenario> select_override(AcquisitionMode mode,
                                        const DescriptorSpace& space,
                                        const std::vector<AxisEmbedder>& embedders,
                                        const std::vector<GpAxisModel>& models,
                                        const QueriedSet& queried,
                                        const OperationalWeights& weights,
                                        RngStream& random_choice) {
    const std::uint64_t n = space.total_count();
    if (queried.universe() != n) {
        throw ValidationError("queried set universe does not match the space");
    }
    const std::uint64_t remaining = n - queried.size();
    if (remaining == 0) {
        return std::nullopt;
    }

    if (mode == AcquisitionMode::RandomUnqueried) {
        std::uint64_t target = random_choice.next_below(remaining);
        for (std::uint64_t i = 0; i < n; ++i) {
            if (queried.contains(i)) {
                continue;
            }
            if (target == 0) {
                return scenario_from_index(space, i);
            }
            --target;
        }
        throw ValidationError("queried-set count is inconsistent with its mask");
    }

    const ScenarioScorer scorer(space, embedders, models);
    double best = -1.0;
    std::uint64_t best_index = 0;
    bool found = false;
    Scenario cursor = scenario_from_index(space, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        // in-place mixed-radix increment keeps the scan allocation-free
        if (i > 0) {
            for (std::size_t k = space.axis_count(); k-- > 0;) {
                if (++cursor.keyword_indices[k] < space.category(k).size()) {
                    break;
                }
                cursor.keyword_indices[k] = 0;
            }
            cursor.index = i;
        }
        if (queried.contains(i)) {
            continue;
        }
        const auto [failure, uncertainty] = scorer.scores(cursor, weights.weight(i));
        const double score = (mode == AcquisitionMode::MaxFailure) ? failure : uncertainty;
        if (!found || score > best) {
            best = score;
            best_index = i;
            found = true;
        }
    }
    return scenario_from_index(space, best_index);
}

std::vector<AxisLandscape> compute_landscape(const DescriptorSpace& space,
                                             const std::vector<AxisEmbedder>& embedders,
                                             const std::vector<GpAxisModel>& models) {
    const ScenarioScorer scorer(space, embedders, models);
    std::vector<AxisLandscape> landscape;
    landscape.reserve(space.axis_count());
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        AxisLandscape axis;
        axis.axis = space.category(k).name();
        const auto& keywords = space.category(k).keywords();
        for (std::size_t i = 0; i < keywords.size(); ++i) {
            const Posterior& p = scorer.axis_posterior(k, i);
            axis.rows.push_back({keywords[i], p.mean, std::sqrt(std::max(p.variance, 0.0))});
        }
        landscape.push_back(std::move(axis));
    }
    return landscape;
}

} // namespace autoodd
