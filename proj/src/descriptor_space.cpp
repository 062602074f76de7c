// SPDX-License-Identifier: Apache-2.0
#include "autoodd/descriptor_space.hpp"

#include "autoodd/errors.hpp"
#include "autoodd/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace autoodd {

using nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::string fold(std::string_view s) {
    std::string out{trim(s)};
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

namespace {

bool parses_as_integer(std::string_view s) {
    s = trim(s);
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        s.remove_prefix(1);
    }
    if (s.empty()) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

const char* kind_name(EmbeddingKind kind) {
    switch (kind) {
    case EmbeddingKind::Ordinal: return "ordinal";
    case EmbeddingKind::Table: return "table";
    case EmbeddingKind::Hash: return "hash";
    }
    return "?";
}

} // namespace

Category::Category(std::string name, std::vector<std::string> keywords, EmbeddingSpec spec)
    : name_(std::move(name)), keywords_(std::move(keywords)), spec_(std::move(spec)) {
    if (trim(name_).empty()) {
        throw ValidationError("category name must be non-empty");
    }
    if (keywords_.empty()) {
        throw ValidationError("category '" + name_ + "' has no keywords");
    }
    folded_.reserve(keywords_.size());
    std::unordered_set<std::string> seen;
    for (const auto& kw : keywords_) {
        if (trim(kw).empty()) {
            throw ValidationError("category '" + name_ + "' has an empty keyword");
        }
        auto f = fold(kw);
        if (!seen.insert(f).second) {
            throw ValidationError("category '" + name_ + "' has duplicate keyword '" + kw + "'");
        }
        folded_.push_back(std::move(f));
    }
    if (spec_.kind == EmbeddingKind::Table) {
        std::size_t dim = 0;
        for (const auto& kw : keywords_) {
            auto it = spec_.table.find(kw);
            if (it == spec_.table.end()) {
                throw ValidationError("category '" + name_ + "': embedding table is missing keyword '" + kw + "'");
            }
            if (dim == 0) {
                dim = it->second.size();
            }
            if (it->second.empty() || it->second.size() != dim) {
                throw ValidationError("category '" + name_ + "': embedding table vectors must share one non-zero dimension");
            }
            for (const double v : it->second) {
                if (!std::isfinite(v)) {
                    throw ValidationError("category '" + name_ + "': embedding table value for '" + kw + "' is not finite");
                }
            }
        }
    }
    if (spec_.kind == EmbeddingKind::Hash && spec_.hash_dim == 0) {
        throw ValidationError("category '" + name_ + "': hash embedding dimension must be positive");
    }
}

std::optional<std::size_t> Category::find_keyword(std::string_view value) const {
    const std::string f = fold(value);
    for (std::size_t i = 0; i < folded_.size(); ++i) {
        if (folded_[i] == f) {
            return i;
        }
    }
    return std::nullopt;
}

DescriptorSpace::DescriptorSpace(std::string task_description, std::vector<Category> categories)
    : task_description_(std::move(task_description)), categories_(std::move(categories)) {
    if (categories_.empty()) {
        throw ValidationError("descriptor space needs at least one category");
    }
    std::unordered_set<std::string> names;
    for (const auto& cat : categories_) {
        if (!names.insert(fold(cat.name())).second) {
            throw ValidationError("duplicate category name '" + cat.name() + "'");
        }
    }
    strides_.assign(categories_.size(), 1);
    for (std::size_t k = categories_.size(); k-- > 1;) {
        // stride of the category before k
        std::uint64_t s = 0;
        if (__builtin_mul_overflow(strides_[k], static_cast<std::uint64_t>(categories_[k].size()), &s)) {
            throw ValidationError("combination count overflows 64 bits");
        }
        strides_[k - 1] = s;
    }
    if (__builtin_mul_overflow(strides_[0], static_cast<std::uint64_t>(categories_[0].size()), &total_count_)) {
        throw ValidationError("combination count overflows 64 bits");
    }
    digest_ = fnv1a64(canonical_config(*this));
}

std::optional<std::size_t> DescriptorSpace::find_category(std::string_view name) const {
    const std::string f = fold(name);
    for (std::size_t k = 0; k < categories_.size(); ++k) {
        if (fold(categories_[k].name()) == f) {
            return k;
        }
    }
    return std::nullopt;
}

namespace {

EmbeddingSpec parse_embedding_spec(const ordered_json& obj, const std::string& cat_name) {
    EmbeddingSpec spec;
    for (const auto& [key, value] : obj.items()) {
        if (key != "type" && key != "table" && key != "dim") {
            throw ConfigError("category '" + cat_name + "': unknown embedding field '" + key + "'");
        }
    }
    if (!obj.contains("type") || !obj["type"].is_string()) {
        throw ConfigError("category '" + cat_name + "': embedding needs a string 'type'");
    }
    const std::string type = obj["type"].get<std::string>();
    if (type == "ordinal") {
        spec.kind = EmbeddingKind::Ordinal;
        if (obj.contains("table") || obj.contains("dim")) {
            throw ConfigError("category '" + cat_name + "': ordinal embedding takes no 'table' or 'dim'");
        }
    } else if (type == "table") {
        spec.kind = EmbeddingKind::Table;
        if (!obj.contains("table") || !obj["table"].is_object()) {
            throw ConfigError("category '" + cat_name + "': table embedding needs a 'table' object");
        }
        if (obj.contains("dim")) {
            throw ConfigError("category '" + cat_name + "': table embedding takes no 'dim'");
        }
        for (const auto& [kw, vec] : obj["table"].items()) {
            if (!vec.is_array() || vec.empty()) {
                throw ConfigError("category '" + cat_name + "': table entry '" + kw + "' must be a non-empty number array");
            }
            std::vector<double> v;
            v.reserve(vec.size());
            for (const auto& x : vec) {
                if (!x.is_number()) {
                    throw ConfigError("category '" + cat_name + "': table entry '" + kw + "' must contain only numbers");
                }
                v.push_back(x.get<double>());
            }
            spec.table.emplace(kw, std::move(v));
        }
    } else if (type == "hash") {
        spec.kind = EmbeddingKind::Hash;
        if (obj.contains("table")) {
            throw ConfigError("category '" + cat_name + "': hash embedding takes no 'table'");
        }
        if (obj.contains("dim")) {
            if (!obj["dim"].is_number_unsigned() || obj["dim"].get<std::uint64_t>() == 0) {
                throw ConfigError("category '" + cat_name + "': hash 'dim' must be a positive integer");
            }
            spec.hash_dim = obj["dim"].get<std::size_t>();
        }
    } else {
        throw ConfigError("category '" + cat_name + "': embedding type must be one of ordinal, table, hash");
    }
    return spec;
}

} // namespace

DescriptorSpace load_space(std::string_view config_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(config_text);
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, config_text.size());
        const auto line = 1 + std::count(config_text.begin(), config_text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError("space config parse error at line " + std::to_string(line) + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("space config must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (key != "task_description" && key != "categories") {
            throw ConfigError("space config: unknown field '" + key + "'");
        }
    }
    if (!doc.contains("task_description") || !doc["task_description"].is_string()) {
        throw ConfigError("space config needs a string 'task_description'");
    }
    if (!doc.contains("categories") || !doc["categories"].is_array() || doc["categories"].empty()) {
        throw ConfigError("space config needs a non-empty 'categories' array");
    }

    std::vector<Category> categories;
    categories.reserve(doc["categories"].size());
    for (const auto& entry : doc["categories"]) {
        if (!entry.is_object()) {
            throw ConfigError("space config: each category must be an object");
        }
        for (const auto& [key, value] : entry.items()) {
            if (key != "name" && key != "keywords" && key != "embedding") {
                throw ConfigError("space config: unknown category field '" + key + "'");
            }
        }
        if (!entry.contains("name") || !entry["name"].is_string()) {
            throw ConfigError("space config: category needs a string 'name'");
        }
        const std::string name = entry["name"].get<std::string>();
        if (!entry.contains("keywords") || !entry["keywords"].is_array()) {
            throw ConfigError("category '" + name + "' needs a 'keywords' array");
        }
        std::vector<std::string> keywords;
        keywords.reserve(entry["keywords"].size());
        for (const auto& kw : entry["keywords"]) {
            if (!kw.is_string()) {
                throw ConfigError("category '" + name + "': keywords must be strings");
            }
            keywords.push_back(kw.get<std::string>());
        }

        EmbeddingSpec spec;
        if (entry.contains("embedding")) {
            if (!entry["embedding"].is_object()) {
                throw ConfigError("category '" + name + "': 'embedding' must be an object");
            }
            spec = parse_embedding_spec(entry["embedding"], name);
        } else {
            const bool all_integer = !keywords.empty() &&
                std::all_of(keywords.begin(), keywords.end(),
                            [](const std::string& k) { return parses_as_integer(k); });
            spec.kind = all_integer ? EmbeddingKind::Ordinal : EmbeddingKind::Hash;
            spec.hash_dim = 2;
        }
        categories.emplace_back(name, std::move(keywords), std::move(spec));
    }
    return DescriptorSpace(doc["task_description"].get<std::string>(), std::move(categories));
}

DescriptorSpace load_space_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open space config '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_space(buf.str());
}

std::string canonical_config(const DescriptorSpace& space) {
    ordered_json doc;
    doc["task_description"] = space.task_description();
    doc["categories"] = ordered_json::array();
    for (const auto& cat : space.categories()) {
        ordered_json entry;
        entry["name"] = cat.name();
        entry["keywords"] = cat.keywords();
        ordered_json emb;
        const auto& spec = cat.embedding_spec();
        emb["type"] = kind_name(spec.kind);
        if (spec.kind == EmbeddingKind::Table) {
            ordered_json table;
            for (const auto& kw : cat.keywords()) {
                table[kw] = spec.table.at(kw);
            }
            emb["table"] = std::move(table);
        } else if (spec.kind == EmbeddingKind::Hash) {
            emb["dim"] = spec.hash_dim;
        }
        entry["embedding"] = std::move(emb);
        doc["categories"].push_back(std::move(entry));
    }
    return doc.dump();
}

Scenario scenario_from_index(const DescriptorSpace& space, std::uint64_t index) {
    if (index >= space.total_count()) {
        throw ValidationError("scenario index " + std::to_string(index) + " out of range [0, " +
                              std::to_string(space.total_count()) + ")");
    }
    Scenario s;
    s.index = index;
    s.keyword_indices.resize(space.axis_count());
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        s.keyword_indices[k] = static_cast<std::size_t>(index / space.strides_[k]);
        index %= space.strides_[k];
    }
    return s;
}

std::uint64_t index_of(const DescriptorSpace& space, std::span<const std::size_t> keyword_indices) {
    if (keyword_indices.size() != space.axis_count()) {
        throw ValidationError("keyword index list has wrong arity");
    }
    std::uint64_t index = 0;
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        if (keyword_indices[k] >= space.category(k).size()) {
            throw ValidationError("keyword index out of range for category '" + space.category(k).name() + "'");
        }
        index += keyword_indices[k] * space.strides_[k];
    }
    return index;
}

Scenario parse_keywords(const DescriptorSpace& space, std::span<const std::string> values) {
    if (values.size() != space.axis_count()) {
        throw ValidationError("expected " + std::to_string(space.axis_count()) + " keywords, got " +
                              std::to_string(values.size()));
    }
    Scenario s;
    s.keyword_indices.resize(space.axis_count());
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        const auto idx = space.category(k).find_keyword(values[k]);
        if (!idx) {
            throw ValidationError("unknown keyword '" + values[k] + "' for category '" +
                                  space.category(k).name() + "'");
        }
        s.keyword_indices[k] = *idx;
    }
    s.index = index_of(space, s.keyword_indices);
    return s;
}

const std::string& keyword_of(const DescriptorSpace& space, const Scenario& scenario, std::size_t k) {
    return space.category(k).keywords().at(scenario.keyword_indices.at(k));
}

std::string render_prompt(const DescriptorSpace& space, const Scenario& scenario) {
    std::string out = "Test scenario with ";
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        if (k > 0) {
            out += ", ";
        }
        out += space.category(k).name();
        out += ": ";
        out += keyword_of(space, scenario, k);
    }
    out += ".";
    return out;
}

std::vector<std::string> extract_prompt_keywords(const DescriptorSpace& space, std::string_view prompt) {
    constexpr std::string_view prefix = "Test scenario with ";
    std::size_t pos = prompt.find(prefix);
    if (pos == std::string_view::npos) {
        throw ValidationError("prompt does not match the scenario template");
    }
    pos += prefix.size();
    std::vector<std::string> values;
    values.reserve(space.axis_count());
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        const std::string label = space.category(k).name() + ": ";
        if (prompt.compare(pos, label.size(), label) != 0) {
            throw ValidationError("prompt is missing category '" + space.category(k).name() + "'");
        }
        pos += label.size();
        std::size_t end;
        if (k + 1 < space.axis_count()) {
            const std::string next = ", " + space.category(k + 1).name() + ": ";
            end = prompt.find(next, pos);
            if (end == std::string_view::npos) {
                throw ValidationError("prompt is missing category '" + space.category(k + 1).name() + "'");
            }
        } else {
            end = prompt.rfind('.');
            if (end == std::string_view::npos || end < pos) {
                throw ValidationError("prompt is missing the closing period");
            }
        }
        values.emplace_back(prompt.substr(pos, end - pos));
        pos = (k + 1 < space.axis_count()) ? end + 2 : end;
    }
    return values;
}

Scenario parse_prompt(const DescriptorSpace& space, std::string_view prompt) {
    const auto values = extract_prompt_keywords(space, prompt);
    return parse_keywords(space, values);
}

} // namespace autoodd
