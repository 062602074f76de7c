// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autoodd/descriptor_space.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace autoodd {

/// One failure rule: a partial assignment, nullopt = wildcard on that axis.
/// A scenario matches when every pinned axis agrees.
struct FailureRule {
    std::vector<std::optional<std::size_t>> keyword_by_axis;
};

/// Rule-based failure oracle: a scenario fails iff it matches at least one
/// rule. Stands in for a real model whose failure set is known by
/// construction (e.g. data held out of training).
class FailureOracleSpec {
public:
    explicit FailureOracleSpec(std::vector<FailureRule> rules = {});

    /// Parses {"rules": [{"digit": "7", "color": "*"}, ...]}.
    static FailureOracleSpec from_json(std::string_view json_text, const DescriptorSpace& space);
    static FailureOracleSpec from_file(const std::string& path, const DescriptorSpace& space);

    /// Single rule pinning one axis: every scenario with that keyword fails.
    static FailureOracleSpec missing(const DescriptorSpace& space,
                                     std::string_view category,
                                     std::string_view keyword);

    bool fails(const Scenario& scenario) const;

    /// Size of the union of the rules' match sets (exhaustive scan; grids
    /// here are desk-scale).
    std::uint64_t failure_count(const DescriptorSpace& space) const;

    const std::vector<FailureRule>& rules() const { return rules_; }

    std::string to_json(const DescriptorSpace& space) const;

private:
    std::vector<FailureRule> rules_;
};

/// `count` distinct full assignments drawn uniformly without replacement.
FailureOracleSpec make_random_sparse_spec(const DescriptorSpace& space,
                                          std::uint64_t count,
                                          std::uint64_t seed);

/// Canonical serialized record of a scenario for external adapters: a JSON
/// object with category names as keys, declaration order.
std::string convert_to_record(const DescriptorSpace& space, const Scenario& scenario);

/// Inverse of convert_to_record.
Scenario parse_record(const DescriptorSpace& space, std::string_view record);

/// Model-under-test interface: true = failure. Adapter trouble raises
/// AdapterError; an outcome is never fabricated.
class MutAdapter {
public:
    virtual ~MutAdapter() = default;
    virtual bool query(const DescriptorSpace& space, const Scenario& scenario) = 0;
    virtual std::string description() const = 0;
};

class OracleAdapter final : public MutAdapter {
public:
    OracleAdapter(FailureOracleSpec spec, std::string description);
    bool query(const DescriptorSpace& space, const Scenario& scenario) override;
    std::string description() const override { return description_; }
    const FailureOracleSpec& spec() const { return spec_; }

private:
    FailureOracleSpec spec_;
    std::string description_;
};

/// Line protocol over a child process: one request line (the canonical
/// record), one response line ("0" pass / "1" fail). The process is spawned
/// on first query and kept alive across queries.
class SubprocessAdapter final : public MutAdapter {
public:
    SubprocessAdapter(std::string command, std::chrono::milliseconds timeout);
    ~SubprocessAdapter() override;
    SubprocessAdapter(const SubprocessAdapter&) = delete;
    SubprocessAdapter& operator=(const SubprocessAdapter&) = delete;

    bool query(const DescriptorSpace& space, const Scenario& scenario) override;
    std::string description() const override { return "exec:" + command_; }

private:
    void ensure_started();
    void shutdown() noexcept;

    std::string command_;
    std::chrono::milliseconds timeout_;
    int child_pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string read_buffer_;
};

/// POSTs the canonical record, expects {"failure": true|false}.
class HttpAdapter final : public MutAdapter {
public:
    HttpAdapter(std::string url, std::chrono::milliseconds timeout);
    bool query(const DescriptorSpace& space, const Scenario& scenario) override;
    std::string description() const override { return "http:" + url_; }

private:
    std::string url_;
    std::string host_port_;
    std::string path_;
    std::chrono::milliseconds timeout_;
};

/// Builds an adapter from the CLI shorthand:
///   oracle:<path> | oracle-missing:<category>=<keyword> |
///   oracle-sparse:<count>:<seed> | exec:<command> | http:<url>
std::unique_ptr<MutAdapter> make_adapter(const std::string& spec,
                                         const DescriptorSpace& space,
                                         std::chrono::milliseconds timeout);

/// Loads just the oracle component of a shorthand (for report baselines).
FailureOracleSpec load_oracle_spec(const std::string& spec, const DescriptorSpace& space);

} // namespace autoodd
