// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace autoodd {

enum class EmbeddingKind { Ordinal, Table, Hash };

/// Per-category embedding configuration. When a config file gives no
/// `embedding` object the kind is defaulted: ordinal if every keyword parses
/// as an integer, hash(2) otherwise.
struct EmbeddingSpec {
    EmbeddingKind kind = EmbeddingKind::Hash;
    std::size_t hash_dim = 2;
    std::map<std::string, std::vector<double>> table;
};

/// One axis of the search space: a name plus an ordered list of distinct
/// keywords. Keyword lookup is case-insensitive and trims surrounding
/// whitespace; the configured spelling stays canonical.
class Category {
public:
    Category(std::string name, std::vector<std::string> keywords, EmbeddingSpec spec);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& keywords() const { return keywords_; }
    const EmbeddingSpec& embedding_spec() const { return spec_; }
    std::size_t size() const { return keywords_.size(); }

    /// Position of `value` in the keyword list, or nullopt if unknown.
    std::optional<std::size_t> find_keyword(std::string_view value) const;

private:
    std::string name_;
    std::vector<std::string> keywords_;
    std::vector<std::string> folded_; // trimmed + lowercased, same order
    EmbeddingSpec spec_;
};

/// One scenario of the grid: a keyword position per category plus the
/// canonical flat index. Index and positions always agree.
struct Scenario {
    std::vector<std::size_t> keyword_indices;
    std::uint64_t index = 0;

    bool operator==(const Scenario& other) const = default;
};

/// The finite combinatorial input space: an ordered list of categories and
/// the task description shown to agents. Immutable after construction.
class DescriptorSpace {
public:
    DescriptorSpace(std::string task_description, std::vector<Category> categories);

    std::size_t axis_count() const { return categories_.size(); }
    const std::vector<Category>& categories() const { return categories_; }
    const Category& category(std::size_t k) const { return categories_.at(k); }
    const std::string& task_description() const { return task_description_; }

    /// Product of per-category keyword counts (N).
    std::uint64_t total_count() const { return total_count_; }

    /// FNV-1a digest of the canonical config form; traces carry it so that
    /// reports can reject mixes of incompatible runs.
    std::uint64_t digest() const { return digest_; }

    std::optional<std::size_t> find_category(std::string_view name) const;

private:
    std::string task_description_;
    std::vector<Category> categories_;
    std::vector<std::uint64_t> strides_; // last category varies fastest
    std::uint64_t total_count_ = 0;
    std::uint64_t digest_ = 0;

    friend Scenario scenario_from_index(const DescriptorSpace&, std::uint64_t);
    friend std::uint64_t index_of(const DescriptorSpace&, std::span<const std::size_t>);
};

/// Parses and validates a JSON space config (see README for the schema).
/// Throws ConfigError with a line/field locus on malformed input.
DescriptorSpace load_space(std::string_view config_text);
DescriptorSpace load_space_file(const std::string& path);

/// Canonical JSON form of a space; load_space(canonical_config(s)) == s.
std::string canonical_config(const DescriptorSpace& space);

/// Mixed-radix decode of a flat index (last declared category varies fastest).
Scenario scenario_from_index(const DescriptorSpace& space, std::uint64_t index);

/// Inverse of scenario_from_index.
std::uint64_t index_of(const DescriptorSpace& space, std::span<const std::size_t> keyword_indices);

/// Builds a Scenario from one keyword per category, declaration order.
/// Matching is case-insensitive with surrounding whitespace trimmed.
Scenario parse_keywords(const DescriptorSpace& space, std::span<const std::string> values);

/// The scenario's keyword for axis k (canonical spelling).
const std::string& keyword_of(const DescriptorSpace& space, const Scenario& scenario, std::size_t k);

/// Deterministic one-sentence prompt listing "category: keyword" pairs in
/// declaration order. parse_prompt inverts it.
std::string render_prompt(const DescriptorSpace& space, const Scenario& scenario);

/// Extracts the keyword list back out of a rendered prompt.
std::vector<std::string> extract_prompt_keywords(const DescriptorSpace& space, std::string_view prompt);

/// parse_keywords ∘ extract_prompt_keywords.
Scenario parse_prompt(const DescriptorSpace& space, std::string_view prompt);

/// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

/// Trims and lowercases (ASCII) for case-insensitive keyword matching.
std::string fold(std::string_view s);

} // namespace autoodd
