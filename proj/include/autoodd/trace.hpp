// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autoodd/acquisition.hpp"
#include "autoodd/descriptor_space.hpp"
#include "autoodd/embedding.hpp"
#include "autoodd/gp_surrogate.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace autoodd {

/// One executed model query. Violation turns (repeats, unparseable replies)
/// never reach the trace; executed scenario indices are therefore all
/// distinct.
struct TraceStep {
    std::uint64_t t = 0;
    std::optional<Scenario> agent_proposal;
    Scenario executed;
    bool overridden = false;
    std::optional<AcquisitionMode> override_mode_used;
    std::string introspection;
    bool outcome = false; // true = failure
    ScenarioEmbedding embedding;
    std::uint64_t distinct_failures = 0;
    std::uint64_t distinct_queried = 0;

    bool operator==(const TraceStep& other) const = default;
};

enum class StopKind { AgentStop, BudgetExhausted, GridExhausted, Aborted };

std::string_view stop_kind_name(StopKind kind);

struct StopReason {
    StopKind kind = StopKind::BudgetExhausted;
    std::string detail; // agent summary for AgentStop, diagnostic for Aborted

    bool operator==(const StopReason& other) const = default;
};

/// Ordered record of one audit run; the ground truth for every metric and
/// report. Self-contained: the header carries the full space config.
struct AuditTrace {
    nlohmann::ordered_json config;       // audit config snapshot
    nlohmann::ordered_json space_config; // canonical space config
    std::uint64_t space_digest = 0;
    std::vector<TraceStep> steps;
    StopReason stop_reason;
    std::string final_summary;
    std::vector<AxisLandscape> final_landscape; // per-axis GP state after the last fit

    bool operator==(const AuditTrace& other) const;
};

/// Line-delimited format: one header record, one record per step, one footer
/// record. read_trace(write_trace(t)) == t, and identical runs produce
/// byte-identical output.
void write_trace(const AuditTrace& trace, std::ostream& out);
void write_trace_file(const AuditTrace& trace, const std::string& path);

AuditTrace read_trace(std::istream& in);
AuditTrace read_trace_file(const std::string& path);

/// Rebuilds the descriptor space embedded in a trace header.
DescriptorSpace space_from_trace(const AuditTrace& trace);

} // namespace autoodd
