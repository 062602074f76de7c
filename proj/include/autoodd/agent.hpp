// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autoodd/acquisition.hpp"
#include "autoodd/chat_client.hpp"
#include "autoodd/descriptor_space.hpp"
#include "autoodd/embedding.hpp"
#include "autoodd/gp_surrogate.hpp"
#include "autoodd/rng.hpp"
#include "autoodd/trace.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace autoodd {

struct AgentAction {
    enum class Kind { GenerateTest, Stop };
    Kind kind = Kind::GenerateTest;
    Scenario scenario;         // GenerateTest
    std::string summary;       // Stop; non-empty
    std::string introspection; // recorded verbatim, never interpreted
};

enum class ViolationKind { RepeatAttempt, ParseFailure };

struct Violation {
    ViolationKind kind = ViolationKind::RepeatAttempt;
    std::string message;
};

/// What the engine reports back after each agent turn. A violated turn has
/// no outcome; an executed turn has no violation.
struct AgentFeedback {
    std::optional<Scenario> executed_scenario;
    std::optional<bool> outcome; // true = failure
    bool was_overridden = false;
    std::optional<Violation> violation;
};

/// Read-only view of the audit state shared with agents. Scripted agents
/// use it to dedupe and to run GP-guided selection on the same code path as
/// the override.
struct AuditView {
    const DescriptorSpace& space;
    const std::vector<AxisEmbedder>& embedders;
    const std::vector<GpAxisModel>& models;
    const QueriedSet& queried;
    const OperationalWeights& weights;
};

/// One agent turn: either an action, or a parse-failure violation (LLM
/// replies that stayed unparseable through the reprompt allowance).
struct AgentTurn {
    std::optional<AgentAction> action;
    std::optional<Violation> violation;
};

class Agent {
public:
    virtual ~Agent() = default;

    /// `feedback` reports the previous turn's result (absent on the first call).
    virtual AgentTurn next_action(const AuditView& view, const std::optional<AgentFeedback>& feedback) = 0;

    /// Final human-readable summary once the audit is finished.
    virtual std::string summarize(const AuditView& view, const AuditTrace& trace);

    virtual std::string name() const = 0;
};

/// Uniform draw over unqueried scenarios; stops when none remain.
class RandomAgent final : public Agent {
public:
    explicit RandomAgent(RngStream stream) : stream_(stream) {}
    AgentTurn next_action(const AuditView& view, const std::optional<AgentFeedback>& feedback) override;
    std::string name() const override { return "random"; }

private:
    RngStream stream_;
};

/// GP-guided scripted agent: maximum-uncertainty selection until the first
/// failure is observed, maximum-predicted-failure afterwards. Shares the
/// selection code path with the override.
class GpGreedyAgent final : public Agent {
public:
    GpGreedyAgent() = default;
    AgentTurn next_action(const AuditView& view, const std::optional<AgentFeedback>& feedback) override;
    std::string name() const override { return "gp-greedy"; }

private:
    bool failure_seen_ = false;
    RngStream unused_{0}; // select_override needs a stream; scripted modes never draw
};

/// Parsed form of one assistant reply.
struct ParsedReply {
    enum class Kind { Generate, Stop, UncertaintyQuery, Invalid };
    Kind kind = Kind::Invalid;
    Scenario scenario;       // Generate / UncertaintyQuery
    std::string summary;     // Stop
    std::string introspection;
    std::string diagnosis;   // Invalid
};

/// Extracts the single function call from a reply: generate(...) maps its
/// positional arguments onto the categories, STOP(...) captures the summary,
/// get_uncertainty(...) is accepted when the tool is enabled. Multiple or
/// missing calls come back as Invalid with a diagnosis; diagnoses are values,
/// not errors.
ParsedReply parse_reply(const DescriptorSpace& space, std::string_view reply, bool allow_uncertainty_tool);

/// Instantiates the conversation protocol prompt: task description, category
/// and keyword listing, the available functions with the K-argument generate
/// signature, and the interaction rules.
std::string build_task_prompt(const DescriptorSpace& space, bool enable_uncertainty_tool);

/// "generate('kw1', 'kw2', ...)" for a scenario; parse_reply inverts it.
std::string render_generate_call(const DescriptorSpace& space, const Scenario& scenario);

/// Aggregate posterior uncertainty for one scenario; the optional agent tool
/// and the maximum-uncertainty override score the same quantity.
double get_uncertainty(const DescriptorSpace& space,
                       const std::vector<AxisEmbedder>& embedders,
                       const std::vector<GpAxisModel>& models,
                       const Scenario& scenario);

/// Structured fallback summary: per-keyword failure rates and the top
/// failing keywords per axis, computed from the trace.
std::string scripted_summary(const DescriptorSpace& space, const AuditTrace& trace);

/// Conversation-protocol agent over a chat-completion client.
class LlmAgent final : public Agent {
public:
    struct Options {
        bool enable_uncertainty_tool = false;
        int max_reprompts = 2;           // extra attempts per turn on unparseable replies
        int max_tool_calls_per_turn = 16;
    };

    LlmAgent(std::shared_ptr<ChatClient> client, Options options);

    AgentTurn next_action(const AuditView& view, const std::optional<AgentFeedback>& feedback) override;
    std::string summarize(const AuditView& view, const AuditTrace& trace) override;
    std::string name() const override { return "llm"; }

    const std::vector<ChatMessage>& transcript() const { return transcript_; }

private:
    void ensure_opening(const AuditView& view);
    std::string render_feedback(const AuditView& view, const AgentFeedback& feedback) const;

    std::shared_ptr<ChatClient> client_;
    Options options_;
    std::vector<ChatMessage> transcript_;
    bool opened_ = false;
};

} // namespace autoodd
