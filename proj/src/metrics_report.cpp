// SPDX-License-Identifier: Apache-2.0
#include "autoodd/metrics_report.hpp"

#include "autoodd/acquisition.hpp"
#include "autoodd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace autoodd {

DiscoveryCurve discovery_curve(const AuditTrace& trace, std::uint64_t known_failure_count) {
    DiscoveryCurve curve;
    curve.total_failures = known_failure_count;
    curve.grid_size = space_from_trace(trace).total_count();
    curve.points.reserve(trace.steps.size());
    for (const auto& step : trace.steps) {
        if (step.distinct_failures > known_failure_count) {
            throw ValidationError("trace observed " + std::to_string(step.distinct_failures) +
                                  " failures but only " + std::to_string(known_failure_count) +
                                  " were declared");
        }
        curve.points.emplace_back(step.t + 1, step.distinct_failures);
    }
    return curve;
}

double random_baseline(std::uint64_t n, std::uint64_t f, std::uint64_t t) {
    if (n == 0 || f > n || t > n) {
        throw ValidationError("random_baseline needs F <= N and t <= N");
    }
    return static_cast<double>(t) * static_cast<double>(f) / static_cast<double>(n);
}

double expected_steps_to_all_failures(std::uint64_t n, std::uint64_t f) {
    if (f < 1 || f > n) {
        throw ValidationError("expected_steps_to_all_failures needs 1 <= F <= N");
    }
    return static_cast<double>(f) * static_cast<double>(n + 1) / static_cast<double>(f + 1);
}

std::optional<std::uint64_t> steps_to_find_all(const AuditTrace& trace, std::uint64_t f) {
    for (const auto& step : trace.steps) {
        if (step.distinct_failures >= f) {
            return step.t + 1;
        }
    }
    return std::nullopt;
}

AxisLandscape landscape(const std::vector<GpAxisModel>& models,
                        const DescriptorSpace& space,
                        const std::vector<AxisEmbedder>& embedders,
                        std::size_t axis) {
    if (axis >= space.axis_count()) {
        throw ValidationError("landscape: axis index out of range");
    }
    return compute_landscape(space, embedders, models).at(axis);
}

namespace {

void require_single_space(std::span<const AuditTrace> traces) {
    if (traces.empty()) {
        throw ValidationError("report needs at least one trace");
    }
    for (const auto& t : traces) {
        if (t.space_digest != traces.front().space_digest) {
            throw ValidationError("traces come from different descriptor spaces");
        }
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct CurveBand {
    std::vector<double> mean;
    std::vector<std::uint64_t> min;
    std::vector<std::uint64_t> max;
};

/// Per-step aggregation across traces; short traces hold their last value.
CurveBand aggregate_curves(std::span<const AuditTrace> traces) {
    std::size_t max_len = 0;
    for (const auto& t : traces) {
        max_len = std::max(max_len, t.steps.size());
    }
    CurveBand band;
    band.mean.assign(max_len, 0.0);
    band.min.assign(max_len, std::numeric_limits<std::uint64_t>::max());
    band.max.assign(max_len, 0);
    for (const auto& t : traces) {
        std::uint64_t last = 0;
        for (std::size_t i = 0; i < max_len; ++i) {
            if (i < t.steps.size()) {
                last = t.steps[i].distinct_failures;
            }
            band.mean[i] += static_cast<double>(last);
            band.min[i] = std::min(band.min[i], last);
            band.max[i] = std::max(band.max[i], last);
        }
    }
    for (auto& m : band.mean) {
        m /= static_cast<double>(traces.size());
    }
    return band;
}

} // namespace

std::string report(std::span<const AuditTrace> traces, const std::optional<FailureOracleSpec>& oracle) {
    require_single_space(traces);
    const DescriptorSpace space = space_from_trace(traces.front());
    const std::uint64_t n = space.total_count();

    std::ostringstream out;
    out << "=== AutoODD audit report ===\n";
    out << "traces: " << traces.size() << ", grid size N=" << n << ", axes:";
    for (const auto& cat : space.categories()) {
        out << " " << cat.name() << "(" << cat.size() << ")";
    }
    out << "\n";
    out << "definition: the failure discovery curve d(t) counts cumulative distinct failing scenarios "
           "by executed step t\n";

    std::optional<std::uint64_t> total_failures;
    if (oracle) {
        total_failures = oracle->failure_count(space);
        out << "oracle: F=" << *total_failures << " failing scenarios in the grid\n";
        if (*total_failures >= 1) {
            out << "random-order expectation: E[steps to find all F] = "
                << fmt(expected_steps_to_all_failures(n, *total_failures)) << ", baseline d(t) = t*"
                << *total_failures << "/" << n << "\n";
        }
    }

    out << "\nper-trace outcomes:\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& t = traces[i];
        std::uint64_t overridden = 0;
        for (const auto& s : t.steps) {
            overridden += s.overridden ? 1 : 0;
        }
        const std::uint64_t found = t.steps.empty() ? 0 : t.steps.back().distinct_failures;
        const std::uint64_t covered = t.steps.empty() ? 0 : t.steps.back().distinct_queried;
        out << "  trace " << i << ": steps=" << t.steps.size() << " failures=" << found
            << " coverage=" << covered << "/" << n << " overridden=" << overridden << " stop="
            << stop_kind_name(t.stop_reason.kind) << "\n";
        if (total_failures && *total_failures >= 1) {
            const auto steps_all = steps_to_find_all(t, *total_failures);
            if (steps_all) {
                out << "    found all " << *total_failures << " failures by step " << *steps_all << "\n";
            }
            discovery_curve(t, *total_failures); // consistency check
        }
    }

    if (traces.front().steps.empty()) {
        out << "\nno executed steps; nothing further to aggregate\n";
        return out.str();
    }

    // pooled per-axis keyword failure rates
    out << "\nper-axis keyword failure rates (pooled over traces, rate = failures/queries):\n";
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        const auto& cat = space.category(k);
        std::vector<std::uint64_t> tries(cat.size(), 0);
        std::vector<std::uint64_t> fails(cat.size(), 0);
        for (const auto& t : traces) {
            for (const auto& s : t.steps) {
                const std::size_t idx = s.executed.keyword_indices.at(k);
                ++tries[idx];
                fails[idx] += s.outcome ? 1 : 0;
            }
        }
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < cat.size(); ++i) {
            order.push_back(i);
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double ra = tries[a] ? static_cast<double>(fails[a]) / static_cast<double>(tries[a]) : 0.0;
            const double rb = tries[b] ? static_cast<double>(fails[b]) / static_cast<double>(tries[b]) : 0.0;
            return ra > rb;
        });
        out << "  axis " << cat.name() << ":";
        bool first = true;
        for (const std::size_t i : order) {
            const double rate = tries[i] ? static_cast<double>(fails[i]) / static_cast<double>(tries[i]) : 0.0;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", rate);
            out << (first ? " " : ", ") << cat.keywords()[i] << " " << buf << " (" << fails[i] << "/"
                << tries[i] << ")";
            first = false;
        }
        out << "\n";
    }

    // discovery curve band at deciles
    const CurveBand band = aggregate_curves(traces);
    out << "\ndiscovery curve (t, mean d, min..max";
    if (total_failures) {
        out << ", baseline t*F/N";
    }
    out << "):\n";
    const std::size_t len = band.mean.size();
    for (std::size_t decile = 1; decile <= 10; ++decile) {
        const std::size_t idx = std::max<std::size_t>(1, (len * decile) / 10) - 1;
        out << "  t=" << (idx + 1) << ": " << fmt(band.mean[idx]) << " [" << band.min[idx] << ".."
            << band.max[idx] << "]";
        if (total_failures) {
            out << " baseline " << fmt(random_baseline(n, *total_failures, std::min<std::uint64_t>(idx + 1, n)));
        }
        out << "\n";
        if (idx + 1 >= len) {
            break;
        }
    }

    std::uint64_t zero_failure_traces = 0;
    for (const auto& t : traces) {
        if (t.steps.empty() || t.steps.back().distinct_failures == 0) {
            ++zero_failure_traces;
        }
    }
    if (zero_failure_traces == traces.size()) {
        out << "\nno failures were discovered in any trace; the discovery curve is flat at zero\n";
    }

    out << "\nagent summaries:\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        out << "  trace " << i << ": " << traces[i].final_summary << "\n";
    }
    return out.str();
}

void write_curves_csv(std::span<const AuditTrace> traces, std::ostream& out) {
    require_single_space(traces);
    const CurveBand band = aggregate_curves(traces);
    out << "t,mean_distinct_failures,min_distinct_failures,max_distinct_failures,traces\n";
    for (std::size_t i = 0; i < band.mean.size(); ++i) {
        out << (i + 1) << "," << band.mean[i] << "," << band.min[i] << "," << band.max[i] << ","
            << traces.size() << "\n";
    }
}

void write_landscape_csv(std::span<const AuditTrace> traces, std::ostream& out) {
    require_single_space(traces);
    out << "trace,axis,keyword,posterior_mean,posterior_std\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (const auto& axis : traces[i].final_landscape) {
            for (const auto& row : axis.rows) {
                out << i << "," << axis.axis << "," << row.keyword << "," << row.mean << ","
                    << row.stddev << "\n";
            }
        }
    }
}

} // namespace autoodd
