// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autoodd/descriptor_space.hpp"
#include "autoodd/embedding.hpp"
#include "autoodd/gp_surrogate.hpp"
#include "autoodd/mut_harness.hpp"
#include "autoodd/trace.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace autoodd {

/// Failure discovery curve: d(t) = cumulative count of distinct failing
/// scenarios found by executed step t (t starts at 1).
struct DiscoveryCurve {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> points;
    std::uint64_t total_failures = 0; // F
    std::uint64_t grid_size = 0;      // N
};

/// Builds the curve from a trace's running counters. `known_failure_count`
/// comes from the oracle spec (or elsewhere); observing more failures than
/// that is an inconsistency error.
DiscoveryCurve discovery_curve(const AuditTrace& trace, std::uint64_t known_failure_count);

/// Expected d(t) for uniform sampling without replacement: t * F / N.
double random_baseline(std::uint64_t n, std::uint64_t f, std::uint64_t t);

/// Expected index of the last failure under a uniform random query order:
/// F * (N + 1) / (F + 1).
double expected_steps_to_all_failures(std::uint64_t n, std::uint64_t f);

/// First executed step t with d(t) == f, if the trace got there.
std::optional<std::uint64_t> steps_to_find_all(const AuditTrace& trace, std::uint64_t f);

/// Posterior landscape of one axis at its keyword embeddings.
AxisLandscape landscape(const std::vector<GpAxisModel>& models,
                        const DescriptorSpace& space,
                        const std::vector<AxisEmbedder>& embedders,
                        std::size_t axis);

/// Human-readable report over one or many traces of the same space:
/// per-keyword failure rates per axis, discovery curves, baseline comparison,
/// override statistics, and the agents' summaries. Traces from different
/// spaces are rejected.
std::string report(std::span<const AuditTrace> traces, const std::optional<FailureOracleSpec>& oracle);

/// Discovery-curve table, comma-separated with a header row. Multi-trace
/// input aggregates per step (mean and min/max band); traces that ended
/// early hold their final value.
void write_curves_csv(std::span<const AuditTrace> traces, std::ostream& out);

/// Final per-axis GP landscape rows of every trace, comma-separated.
void write_landscape_csv(std::span<const AuditTrace> traces, std::ostream& out);

} // namespace autoodd
