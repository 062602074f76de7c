// SPDX-License-Identifier: Apache-2.0
#include "autoodd/audit_engine.hpp"

#include "autoodd/errors.hpp"

#include <cmath>

namespace autoodd {

using nlohmann::ordered_json;

void AuditConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0) || !std::isfinite(epsilon)) {
        throw ValidationError("epsilon must lie in [0, 1]");
    }
    if (budget < 1) {
        throw ValidationError("budget must be at least 1");
    }
    gp.validate();
    if (agent_kind != "random" && agent_kind != "gp-greedy" && agent_kind != "llm") {
        throw ValidationError("agent kind must be one of random, gp-greedy, llm");
    }
}

ordered_json AuditConfig::to_json() const {
    ordered_json doc;
    doc["epsilon"] = epsilon;
    doc["override"] = std::string(acquisition_mode_name(override_mode));
    doc["budget"] = budget;
    doc["seed"] = seed;
    doc["gp"] = {{"signal_variance", gp.signal_variance},
                 {"lengthscale", gp.lengthscale},
                 {"noise_variance", gp.noise_variance}};
    doc["agent"] = agent_kind;
    doc["mut"] = mut_spec;
    doc["stop_on_full_coverage"] = stop_on_full_coverage;
    doc["enable_uncertainty_tool"] = enable_uncertainty_tool;
    doc["llm_replay"] = llm_replay_path;
    doc["weights"] = weights.is_uniform() ? "uniform" : "table";
    return doc;
}

namespace {

void check_scenario(const DescriptorSpace& space, const Scenario& scenario) {
    if (scenario.keyword_indices.size() != space.axis_count() ||
        index_of(space, scenario.keyword_indices) != scenario.index) {
        throw ValidationError("agent proposed a scenario that does not belong to the space");
    }
}

} // namespace

AuditTrace run_audit(const AuditConfig& config,
                     const DescriptorSpace& space,
                     Agent& agent,
                     MutAdapter& adapter) {
    config.validate();

    const auto embedders = build_embedders(space);
    std::vector<GpAxisModel> models;
    models.reserve(space.axis_count());
    for (std::size_t k = 0; k < space.axis_count(); ++k) {
        models.emplace_back(config.gp);
    }
    std::vector<std::vector<std::vector<double>>> axis_inputs(space.axis_count());
    std::vector<double> targets;

    QueriedSet queried(space.total_count());
    OverridePolicy policy{config.epsilon, config.override_mode, named_stream(config.seed, "override-draw")};
    RngStream random_choice = named_stream(config.seed, "random-override-choice");

    AuditTrace trace;
    trace.config = config.to_json();
    trace.config["mut"] = adapter.description();
    trace.space_config = ordered_json::parse(canonical_config(space));
    trace.space_digest = space.digest();

    const AuditView view{space, embedders, models, queried, config.weights};

    std::optional<AgentFeedback> pending_feedback;
    std::optional<StopReason> stop;
    std::uint64_t steps_used = 0;
    std::uint64_t failures = 0;
    int consecutive_violations = 0;
    bool generate_called = false;

    while (!stop) {
        if (config.stop_on_full_coverage && queried.exhausted()) {
            stop = StopReason{StopKind::GridExhausted, ""};
            break;
        }
        if (steps_used >= config.budget) {
            stop = StopReason{StopKind::BudgetExhausted, ""};
            break;
        }

        AgentTurn turn;
        try {
            turn = agent.next_action(view, pending_feedback);
        } catch (const TransportError& e) {
            stop = StopReason{StopKind::Aborted, e.what()};
            break;
        }
        pending_feedback.reset();

        if (turn.violation) {
            // unparseable replies already consumed the reprompt allowance
            steps_used += 1;
            AgentFeedback fb;
            fb.violation = turn.violation;
            pending_feedback = fb;
            continue;
        }
        if (!turn.action) {
            throw ValidationError("agent returned neither an action nor a violation");
        }
        const AgentAction& action = *turn.action;

        if (action.kind == AgentAction::Kind::Stop) {
            if (!generate_called) {
                consecutive_violations += 1;
                AgentFeedback fb;
                fb.violation = Violation{ViolationKind::ParseFailure,
                                         "STOP() is only allowed directly after a generate call."};
                pending_feedback = fb;
                if (consecutive_violations >= 2) {
                    steps_used += 1;
                    consecutive_violations = 0;
                }
                continue;
            }
            stop = StopReason{StopKind::AgentStop, action.summary};
            break;
        }

        // GenerateTest
        check_scenario(space, action.scenario);
        generate_called = true;
        Scenario executed = action.scenario;
        bool overridden = false;

        if (should_override(policy)) {
            const auto selection = select_override(policy.mode, space, embedders, models, queried,
                                                   config.weights, random_choice);
            if (!selection) {
                stop = StopReason{StopKind::GridExhausted, ""};
                break;
            }
            executed = *selection;
            overridden = true;
        }

        if (queried.contains(executed.index)) {
            // only agent proposals can repeat; the override picks unqueried ones
            consecutive_violations += 1;
            AgentFeedback fb;
            fb.executed_scenario = executed;
            fb.violation = Violation{ViolationKind::RepeatAttempt,
                                     render_generate_call(space, executed) +
                                         " was already queried; the result WILL NOT change. DO NOT "
                                         "REPEAT generate calls."};
            pending_feedback = fb;
            if (consecutive_violations >= 2) {
                steps_used += 1;
                consecutive_violations = 0;
            }
            continue;
        }
        consecutive_violations = 0;

        bool outcome = false;
        try {
            outcome = adapter.query(space, executed);
        } catch (const AdapterError& e) {
            stop = StopReason{StopKind::Aborted, e.what()};
            break;
        }

        const ScenarioEmbedding embedding = embed_scenario(space, embedders, executed);
        targets.push_back(outcome ? 1.0 : 0.0);
        for (std::size_t k = 0; k < space.axis_count(); ++k) {
            axis_inputs[k].push_back(embedding.axes[k]);
            models[k] = GpAxisModel::fit(k, axis_inputs[k], targets, config.gp);
        }
        queried.insert(executed.index);
        failures += outcome ? 1 : 0;

        TraceStep step;
        step.t = trace.steps.size();
        step.agent_proposal = action.scenario;
        step.executed = executed;
        step.overridden = overridden;
        if (overridden) {
            step.override_mode_used = policy.mode;
        }
        step.introspection = action.introspection;
        step.outcome = outcome;
        step.embedding = embedding;
        step.distinct_failures = failures;
        step.distinct_queried = queried.size();
        trace.steps.push_back(std::move(step));

        steps_used += 1;

        AgentFeedback fb;
        fb.executed_scenario = executed;
        fb.outcome = outcome;
        fb.was_overridden = overridden;
        pending_feedback = fb;
    }

    trace.stop_reason = *stop;
    trace.final_landscape = compute_landscape(space, embedders, models);
    if (trace.stop_reason.kind == StopKind::Aborted) {
        trace.final_summary = scripted_summary(space, trace);
    } else {
        trace.final_summary = agent.summarize(view, trace);
    }
    return trace;
}

} // namespace autoodd
