// SPDX-License-Identifier: Apache-2.0
#include "autoodd/agent.hpp"

#include "autoodd/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace autoodd {

namespace {

std::string join_keywords(const std::vector<std::string>& keywords) {
    if (keywords.size() == 1) {
        return keywords.front();
    }
    std::string out;
    for (std::size_t i = 0; i + 1 < keywords.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += keywords[i];
    }
    out += ", and " + keywords.back();
    return out;
}

std::string signature(const DescriptorSpace& space, std::string_view fn) {
    std::string out{fn};
    out += "(";
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        if (k > 0) {
            out += ", ";
        }
        out += space.category(k).name();
    }
    out += ")";
    return out;
}

std::string quoted_args(const DescriptorSpace& space, const Scenario& scenario) {
    std::string out;
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        if (k > 0) {
            out += ", ";
        }
        out += "'" + keyword_of(space, scenario, k) + "'";
    }
    return out;
}

} // namespace

std::string render_generate_call(const DescriptorSpace& space, const Scenario& scenario) {
    return "generate(" + quoted_args(space, scenario) + ")";
}

std::string build_task_prompt(const DescriptorSpace& space, bool enable_uncertainty_tool) {
    std::ostringstream out;
    out << space.task_description() << "\n";
    out << "Each scenario picks exactly one keyword from each of the " << space.axis_count()
        << (space.axis_count() == 1 ? " category" : " categories") << ":\n";
    for (const auto& cat : space.categories()) {
        out << "- " << cat.name() << ": " << join_keywords(cat.keywords()) << "\n";
    }
    out << "Solve this task by alternating between:\n"
        << "Introspect: Reason about what you've learned so far and decide your next step.\n"
        << "Action: Call exactly one function in each Action step.\n"
        << "---\n"
        << "Available Actions:\n"
        << "You may use the following " << (enable_uncertainty_tool ? "three" : "two") << " functions:\n";
    out << "1. " << signature(space, "generate") << "\n"
        << "   - Tests the model on the specified scenario: one keyword per category, in the order listed above\n"
        << "   - Returns 1 for success and 0 for failure\n"
        << "   - The results of this function are deterministic and WILL NOT CHANGE if queried multiple times\n"
        << "   - Example: " << render_generate_call(space, scenario_from_index(space, 0)) << "\n"
        << "   - After each generate call, you will be given the result and asked if you want to query more or if you are ready to give a summary\n"
        << "   - DO NOT REPEAT generate calls for the same scenario\n";
    out << "2. STOP(summary)\n"
        << "   - Use this function when you are finished querying the model and output a summary of your findings\n"
        << "   - You can only call STOP() directly after a generate call\n";
    if (enable_uncertainty_tool) {
        out << "3. " << signature(space, "get_uncertainty") << "\n"
            << "   - Returns the surrogate model's current uncertainty estimate for a scenario without querying the model\n"
            << "   - Does not consume query budget\n";
    }
    out << "---\n"
        << "Rules:\n"
        << "- Every response must contain one Introspect step and one Action step and NOTHING ELSE\n"
        << "- DO NOT REPEAT generate calls for the same scenario, the result WILL NOT change\n"
        << "- Only one function call is allowed per Action step\n"
        << "- After every generate call, you will be given the result and asked if you want to query more or if you are ready to give a summary\n";
    return out.str();
}

namespace {

struct RawCall {
    std::string function; // folded name
    std::string args;     // inner text, untrimmed
    std::size_t begin = 0;
};

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

/// Scans for function calls of the known names, respecting quotes and
/// nested parentheses inside the argument list. Disabled tools are still
/// scanned so their calls produce a diagnosis instead of "no action".
std::vector<RawCall> scan_calls(std::string_view text) {
    static const std::vector<std::string> names = {"generate", "stop", "get_uncertainty"};
    std::vector<RawCall> calls;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i > 0 && is_word_char(text[i - 1])) {
            continue;
        }
        for (const auto& name : names) {
            if (text.size() - i < name.size()) {
                continue;
            }
            if (fold(text.substr(i, name.size())) != name) {
                continue;
            }
            std::size_t j = i + name.size();
            if (j < text.size() && is_word_char(text[j])) {
                continue;
            }
            while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) {
                ++j;
            }
            if (j >= text.size() || text[j] != '(') {
                continue;
            }
            // capture to the matching close paren
            std::size_t depth = 0;
            char quote = '\0';
            std::size_t end = std::string_view::npos;
            for (std::size_t p = j; p < text.size(); ++p) {
                const char c = text[p];
                if (quote != '\0') {
                    if (c == quote) {
                        quote = '\0';
                    }
                    continue;
                }
                if (c == '\'' || c == '"') {
                    quote = c;
                } else if (c == '(') {
                    ++depth;
                } else if (c == ')') {
                    if (--depth == 0) {
                        end = p;
                        break;
                    }
                }
            }
            if (end == std::string_view::npos) {
                continue; // unbalanced; not a call
            }
            calls.push_back({name, std::string(text.substr(j + 1, end - j - 1)), i});
            i = end; // resume after this call
            break;
        }
    }
    return calls;
}

std::string strip_quotes(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
        s = s.substr(1, s.size() - 2);
    }
    return std::string(s);
}

std::vector<std::string> split_args(std::string_view args) {
    std::vector<std::string> out;
    if (trim(args).empty()) {
        return out;
    }
    std::string current;
    char quote = '\0';
    for (const char c : args) {
        if (quote != '\0') {
            if (c == quote) {
                quote = '\0';
            }
            current += c;
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
            current += c;
        } else if (c == ',') {
            out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    out.push_back(current);
    for (auto& a : out) {
        a = strip_quotes(a);
    }
    return out;
}

std::string introspection_before(std::string_view text, std::size_t call_begin) {
    return std::string(trim(text.substr(0, call_begin)));
}

} // namespace

ParsedReply parse_reply(const DescriptorSpace& space, std::string_view reply, bool allow_uncertainty_tool) {
    ParsedReply parsed;
    const auto calls = scan_calls(reply);
    if (calls.empty()) {
        parsed.diagnosis = "no action: the reply contains no function call";
        return parsed;
    }
    if (calls.size() > 1) {
        parsed.diagnosis = "multiple calls: only one function call is allowed per Action step";
        return parsed;
    }
    const RawCall& call = calls.front();
    parsed.introspection = introspection_before(reply, call.begin);

    if (call.function == "stop") {
        const std::string summary = strip_quotes(call.args);
        if (summary.empty()) {
            parsed.diagnosis = "STOP called without a summary";
            return parsed;
        }
        parsed.kind = ParsedReply::Kind::Stop;
        parsed.summary = summary;
        return parsed;
    }

    if (call.function == "get_uncertainty" && !allow_uncertainty_tool) {
        parsed.diagnosis = "get_uncertainty is not available in this audit";
        return parsed;
    }

    const auto values = split_args(call.args);
    try {
        parsed.scenario = parse_keywords(space, values);
    } catch (const ValidationError& e) {
        parsed.diagnosis = e.what();
        return parsed;
    }
    parsed.kind = (call.function == "generate") ? ParsedReply::Kind::Generate
                                                : ParsedReply::Kind::UncertaintyQuery;
    return parsed;
}

double get_uncertainty(const DescriptorSpace& space,
                       const std::vector<AxisEmbedder>& embedders,
                       const std::vector<GpAxisModel>& models,
                       const Scenario& scenario) {
    const ScenarioScorer scorer(space, embedders, models);
    return scorer.scores(scenario, 1.0).second;
}

std::string scripted_summary(const DescriptorSpace& space, const AuditTrace& trace) {
    std::uint64_t failures = 0;
    for (const auto& step : trace.steps) {
        failures += step.outcome ? 1 : 0;
    }
    std::ostringstream out;
    out << "Audit summary: " << failures << " of " << trace.steps.size()
        << " queried scenarios failed; grid size " << space.total_count() << ".";
    if (failures == 0) {
        out << " No failures were discovered.";
        return out.str();
    }

    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        const auto& cat = space.category(k);
        std::vector<std::uint64_t> tries(cat.size(), 0);
        std::vector<std::uint64_t> fails(cat.size(), 0);
        for (const auto& step : trace.steps) {
            const std::size_t idx = step.executed.keyword_indices.at(k);
            ++tries[idx];
            fails[idx] += step.outcome ? 1 : 0;
        }
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < cat.size(); ++i) {
            if (tries[i] > 0) {
                order.push_back(i);
            }
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double ra = static_cast<double>(fails[a]) / static_cast<double>(tries[a]);
            const double rb = static_cast<double>(fails[b]) / static_cast<double>(tries[b]);
            return ra > rb;
        });
        out << "\nAxis " << cat.name() << ":";
        bool first = true;
        for (const std::size_t i : order) {
            const double rate = static_cast<double>(fails[i]) / static_cast<double>(tries[i]);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", rate);
            out << (first ? " " : ", ") << cat.keywords()[i] << " rate " << buf << " (" << fails[i] << "/"
                << tries[i] << ")";
            first = false;
        }
    }
    return out.str();
}

std::string Agent::summarize(const AuditView& view, const AuditTrace& trace) {
    return scripted_summary(view.space, trace);
}

AgentTurn RandomAgent::next_action(const AuditView& view, const std::optional<AgentFeedback>& feedback) {
    (void)feedback; // dedupe comes from the shared queried set
    const std::uint64_t n = view.queried.universe();
    const std::uint64_t remaining = n - view.queried.size();
    AgentTurn turn;
    if (remaining == 0) {
        AgentAction stop;
        stop.kind = AgentAction::Kind::Stop;
        stop.summary = "Every scenario in the grid has been queried; see the final summary.";
        turn.action = stop;
        return turn;
    }
    std::uint64_t target = stream_.next_below(remaining);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (view.queried.contains(i)) {
            continue;
        }
        if (target == 0) {
            AgentAction act;
            act.kind = AgentAction::Kind::GenerateTest;
            act.scenario = scenario_from_index(view.space, i);
            turn.action = act;
            return turn;
        }
        --target;
    }
    throw ValidationError("queried-set count is inconsistent with its mask");
}

AgentTurn GpGreedyAgent::next_action(const AuditView& view, const std::optional<AgentFeedback>& feedback) {
    if (feedback && feedback->outcome.value_or(false)) {
        failure_seen_ = true;
    }
    const AcquisitionMode mode = failure_seen_ ? AcquisitionMode::MaxFailure : AcquisitionMode::MaxUncertainty;
    const auto selection =
        select_override(mode, view.space, view.embedders, view.models, view.queried, view.weights, unused_);
    AgentTurn turn;
    if (!selection) {
        AgentAction stop;
        stop.kind = AgentAction::Kind::Stop;
        stop.summary = "Every scenario in the grid has been queried; see the final summary.";
        turn.action = stop;
        return turn;
    }
    AgentAction act;
    act.kind = AgentAction::Kind::GenerateTest;
    act.scenario = *selection;
    turn.action = act;
    return turn;
}

LlmAgent::LlmAgent(std::shared_ptr<ChatClient> client, Options options)
    : client_(std::move(client)), options_(options) {
    if (!client_) {
        throw ValidationError("llm agent needs a chat client");
    }
}

void LlmAgent::ensure_opening(const AuditView& view) {
    if (opened_) {
        return;
    }
    transcript_.push_back({"system", build_task_prompt(view.space, options_.enable_uncertainty_tool)});
    transcript_.push_back({"user", "Begin the audit now. Respond with one Introspect step and one Action step."});
    opened_ = true;
}

std::string LlmAgent::render_feedback(const AuditView& view, const AgentFeedback& feedback) const {
    if (feedback.violation) {
        return "Violation: " + feedback.violation->message +
               " Respond with exactly one Introspect step and one Action step.";
    }
    std::ostringstream out;
    if (feedback.was_overridden && feedback.executed_scenario) {
        out << "Note: the exploration heuristic overrode your proposal this step; the executed call was "
            << render_generate_call(view.space, *feedback.executed_scenario) << ".\n";
    }
    const bool failed = feedback.outcome.value_or(false);
    out << "Result: " << (failed ? "0 -> The model FAILED." : "1 -> The model succeeded.")
        << " Query more, or call STOP(summary) if you are finished.";
    return out.str();
}

AgentTurn LlmAgent::next_action(const AuditView& view, const std::optional<AgentFeedback>& feedback) {
    ensure_opening(view);
    if (feedback) {
        transcript_.push_back({"user", render_feedback(view, *feedback)});
    }

    int reprompts = 0;
    int tool_calls = 0;
    for (;;) {
        const std::string reply = client_->complete(transcript_);
        transcript_.push_back({"assistant", reply});
        const ParsedReply parsed = parse_reply(view.space, reply, options_.enable_uncertainty_tool);

        switch (parsed.kind) {
        case ParsedReply::Kind::Generate: {
            AgentTurn turn;
            AgentAction act;
            act.kind = AgentAction::Kind::GenerateTest;
            act.scenario = parsed.scenario;
            act.introspection = parsed.introspection;
            turn.action = act;
            return turn;
        }
        case ParsedReply::Kind::Stop: {
            AgentTurn turn;
            AgentAction act;
            act.kind = AgentAction::Kind::Stop;
            act.summary = parsed.summary;
            act.introspection = parsed.introspection;
            turn.action = act;
            return turn;
        }
        case ParsedReply::Kind::UncertaintyQuery: {
            if (++tool_calls > options_.max_tool_calls_per_turn) {
                AgentTurn turn;
                turn.violation = Violation{ViolationKind::ParseFailure,
                                           "too many get_uncertainty calls in one turn"};
                return turn;
            }
            const double u = get_uncertainty(view.space, view.embedders, view.models, parsed.scenario);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6f", u);
            transcript_.push_back({"user", "get_uncertainty -> " + std::string(buf) +
                                               ". Continue: respond with one Introspect step and one Action step."});
            continue;
        }
        case ParsedReply::Kind::Invalid: {
            if (++reprompts > options_.max_reprompts) {
                AgentTurn turn;
                turn.violation = Violation{ViolationKind::ParseFailure, parsed.diagnosis};
                return turn;
            }
            transcript_.push_back({"user", "Your reply was not valid (" + parsed.diagnosis +
                                               "). Respond with exactly one Introspect step and one Action "
                                               "step containing exactly one function call."});
            continue;
        }
        }
    }
}

std::string LlmAgent::summarize(const AuditView& view, const AuditTrace& trace) {
    if (trace.stop_reason.kind == StopKind::AgentStop && !trace.stop_reason.detail.empty()) {
        return trace.stop_reason.detail;
    }
    transcript_.push_back({"user", "The audit has ended (" + std::string(stop_kind_name(trace.stop_reason.kind)) +
                                       "). Give your final summary of the discovered failure patterns, in "
                                       "terms of the category keywords, as STOP(summary)."});
    std::string reply;
    try {
        reply = client_->complete(transcript_);
    } catch (const TransportError& e) {
        return "[fallback summary; llm transport failed: " + std::string(e.what()) + "] " +
               scripted_summary(view.space, trace);
    }
    transcript_.push_back({"assistant", reply});
    const ParsedReply parsed = parse_reply(view.space, reply, options_.enable_uncertainty_tool);
    if (parsed.kind == ParsedReply::Kind::Stop) {
        return parsed.summary;
    }
    return std::string(trim(reply));
}

} // namespace autoodd
