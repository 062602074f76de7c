// SPDX-License-Identifier: Apache-2.0
#include "autoodd/trace.hpp"

#include "autoodd/errors.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace autoodd {

using nlohmann::ordered_json;

std::string_view stop_kind_name(StopKind kind) {
    switch (kind) {
    case StopKind::AgentStop: return "agent_stop";
    case StopKind::BudgetExhausted: return "budget_exhausted";
    case StopKind::GridExhausted: return "grid_exhausted";
    case StopKind::Aborted: return "aborted";
    }
    return "?";
}

namespace {

StopKind parse_stop_kind(std::string_view name) {
    if (name == "agent_stop") return StopKind::AgentStop;
    if (name == "budget_exhausted") return StopKind::BudgetExhausted;
    if (name == "grid_exhausted") return StopKind::GridExhausted;
    if (name == "aborted") return StopKind::Aborted;
    throw TraceError("unknown stop reason '" + std::string(name) + "'");
}

std::string to_hex(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << std::setfill('0') << std::setw(16) << v;
    return out.str();
}

std::uint64_t from_hex(const std::string& s) {
    return std::stoull(s, nullptr, 16);
}

ordered_json scenario_to_json(const DescriptorSpace& space, const Scenario& s) {
    ordered_json obj;
    ordered_json assignment = ordered_json::object();
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        assignment[space.category(k).name()] = keyword_of(space, s, k);
    }
    obj["assignment"] = std::move(assignment);
    obj["index"] = s.index;
    return obj;
}

Scenario scenario_from_json(const DescriptorSpace& space, const ordered_json& obj) {
    std::vector<std::string> values;
    values.reserve(space.axis_count());
    const auto& assignment = obj.at("assignment");
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        values.push_back(assignment.at(space.category(k).name()).get<std::string>());
    }
    Scenario s = parse_keywords(space, values);
    if (s.index != obj.at("index").get<std::uint64_t>()) {
        throw TraceError("scenario index does not match its assignment");
    }
    return s;
}

ordered_json landscape_to_json(const std::vector<AxisLandscape>& landscape) {
    ordered_json arr = ordered_json::array();
    for (const auto& axis : landscape) {
        ordered_json entry;
        entry["axis"] = axis.axis;
        ordered_json rows = ordered_json::array();
        for (const auto& row : axis.rows) {
            rows.push_back({row.keyword, row.mean, row.stddev});
        }
        entry["rows"] = std::move(rows);
        arr.push_back(std::move(entry));
    }
    return arr;
}

std::vector<AxisLandscape> landscape_from_json(const ordered_json& arr) {
    std::vector<AxisLandscape> landscape;
    for (const auto& entry : arr) {
        AxisLandscape axis;
        axis.axis = entry.at("axis").get<std::string>();
        for (const auto& row : entry.at("rows")) {
            axis.rows.push_back({row.at(0).get<std::string>(), row.at(1).get<double>(), row.at(2).get<double>()});
        }
        landscape.push_back(std::move(axis));
    }
    return landscape;
}

} // namespace

bool AuditTrace::operator==(const AuditTrace& other) const {
    const auto landscape_equal = [](const std::vector<AxisLandscape>& a, const std::vector<AxisLandscape>& b) {
        if (a.size() != b.size()) {
            return false;
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].axis != b[i].axis || a[i].rows.size() != b[i].rows.size()) {
                return false;
            }
            for (std::size_t j = 0; j < a[i].rows.size(); ++j) {
                const auto& ra = a[i].rows[j];
                const auto& rb = b[i].rows[j];
                if (ra.keyword != rb.keyword || ra.mean != rb.mean || ra.stddev != rb.stddev) {
                    return false;
                }
            }
        }
        return true;
    };
    return config == other.config && space_config == other.space_config &&
           space_digest == other.space_digest && steps == other.steps &&
           stop_reason == other.stop_reason && final_summary == other.final_summary &&
           landscape_equal(final_landscape, other.final_landscape);
}

void write_trace(const AuditTrace& trace, std::ostream& out) {
    const DescriptorSpace space = space_from_trace(trace);

    ordered_json header;
    header["kind"] = "header";
    header["version"] = 1;
    header["space_digest"] = to_hex(trace.space_digest);
    header["config"] = trace.config;
    header["space"] = trace.space_config;
    out << header.dump() << '\n';

    for (const auto& step : trace.steps) {
        ordered_json rec;
        rec["kind"] = "step";
        rec["t"] = step.t;
        rec["proposal"] = step.agent_proposal ? scenario_to_json(space, *step.agent_proposal) : ordered_json();
        rec["executed"] = scenario_to_json(space, step.executed);
        rec["overridden"] = step.overridden;
        rec["override_mode"] = step.override_mode_used
                                   ? ordered_json(std::string(acquisition_mode_name(*step.override_mode_used)))
                                   : ordered_json();
        rec["introspection"] = step.introspection;
        rec["outcome"] = step.outcome;
        rec["embedding"] = step.embedding.axes;
        rec["distinct_failures"] = step.distinct_failures;
        rec["distinct_queried"] = step.distinct_queried;
        out << rec.dump() << '\n';
    }

    ordered_json footer;
    footer["kind"] = "footer";
    footer["stop"] = std::string(stop_kind_name(trace.stop_reason.kind));
    footer["detail"] = trace.stop_reason.detail;
    footer["summary"] = trace.final_summary;
    footer["landscape"] = landscape_to_json(trace.final_landscape);
    out << footer.dump() << '\n';
}

void write_trace_file(const AuditTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw TraceError("cannot open trace file '" + path + "' for writing");
    }
    write_trace(trace, out);
}

AuditTrace read_trace(std::istream& in) {
    AuditTrace trace;
    std::string line;
    std::size_t line_no = 0;
    std::size_t last_valid_line = 0;
    bool have_header = false;
    bool have_footer = false;
    std::optional<DescriptorSpace> space;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            throw TraceError("trace line " + std::to_string(line_no) + ": blank line");
        }
        ordered_json rec;
        try {
            rec = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what() +
                             " (last valid line: " + std::to_string(last_valid_line) + ")");
        }
        try {
            const std::string kind = rec.at("kind").get<std::string>();
            if (kind == "header") {
                if (have_header) {
                    throw TraceError("duplicate header");
                }
                trace.space_digest = from_hex(rec.at("space_digest").get<std::string>());
                trace.config = rec.at("config");
                trace.space_config = rec.at("space");
                space = load_space(trace.space_config.dump());
                if (space->digest() != trace.space_digest) {
                    throw TraceError("space digest does not match the embedded space config");
                }
                have_header = true;
            } else if (kind == "step") {
                if (!have_header || have_footer) {
                    throw TraceError("step record out of order");
                }
                TraceStep step;
                step.t = rec.at("t").get<std::uint64_t>();
                if (step.t != trace.steps.size()) {
                    throw TraceError("step index " + std::to_string(step.t) + " out of order");
                }
                if (!rec.at("proposal").is_null()) {
                    step.agent_proposal = scenario_from_json(*space, rec.at("proposal"));
                }
                step.executed = scenario_from_json(*space, rec.at("executed"));
                step.overridden = rec.at("overridden").get<bool>();
                if (!rec.at("override_mode").is_null()) {
                    step.override_mode_used = parse_acquisition_mode(rec.at("override_mode").get<std::string>());
                }
                step.introspection = rec.at("introspection").get<std::string>();
                step.outcome = rec.at("outcome").get<bool>();
                step.embedding.axes = rec.at("embedding").get<std::vector<std::vector<double>>>();
                step.distinct_failures = rec.at("distinct_failures").get<std::uint64_t>();
                step.distinct_queried = rec.at("distinct_queried").get<std::uint64_t>();
                trace.steps.push_back(std::move(step));
            } else if (kind == "footer") {
                if (!have_header || have_footer) {
                    throw TraceError("footer record out of order");
                }
                trace.stop_reason.kind = parse_stop_kind(rec.at("stop").get<std::string>());
                trace.stop_reason.detail = rec.at("detail").get<std::string>();
                trace.final_summary = rec.at("summary").get<std::string>();
                trace.final_landscape = landscape_from_json(rec.at("landscape"));
                have_footer = true;
            } else {
                throw TraceError("unknown record kind '" + kind + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
        last_valid_line = line_no;
    }
    if (!have_header) {
        throw TraceError("trace has no header record");
    }
    if (!have_footer) {
        throw TraceError("trace is truncated: no footer record (last valid line: " +
                         std::to_string(last_valid_line) + ")");
    }
    return trace;
}

AuditTrace read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TraceError("cannot open trace file '" + path + "'");
    }
    return read_trace(in);
}

DescriptorSpace space_from_trace(const AuditTrace& trace) {
    return load_space(trace.space_config.dump());
}

} // namespace autoodd
