// SPDX-License-Identifier: Apache-2.0
#include "autoodd/audit_engine.hpp"
#include "autoodd/chat_client.hpp"
#include "autoodd/errors.hpp"
#include "autoodd/metrics_report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace {

using namespace autoodd;

int cmd_run(const std::string& space_path,
            const std::string& mut_spec,
            const std::string& agent_kind,
            const AuditConfig& base_config,
            const std::string& weights_path,
            const std::string& out_path,
            std::uint64_t adapter_timeout_ms) {
    const DescriptorSpace space = load_space_file(space_path);

    AuditConfig config = base_config;
    config.agent_kind = agent_kind;
    config.mut_spec = mut_spec;
    config.adapter_timeout = std::chrono::milliseconds(adapter_timeout_ms);
    if (!weights_path.empty()) {
        config.weights = OperationalWeights::from_file(weights_path, space);
    }

    const auto adapter = make_adapter(mut_spec, space, config.adapter_timeout);

    std::unique_ptr<Agent> agent;
    if (agent_kind == "random") {
        agent = std::make_unique<RandomAgent>(named_stream(config.seed, "random-agent"));
    } else if (agent_kind == "gp-greedy") {
        agent = std::make_unique<GpGreedyAgent>();
    } else if (agent_kind == "llm") {
        std::shared_ptr<ChatClient> client;
        if (!config.llm_replay_path.empty()) {
            client = std::make_shared<ReplayChatClient>(ReplayChatClient::from_file(config.llm_replay_path));
        } else {
            client = std::make_shared<HttpChatClient>(HttpChatClient::options_from_env());
        }
        LlmAgent::Options opts;
        opts.enable_uncertainty_tool = config.enable_uncertainty_tool;
        agent = std::make_unique<LlmAgent>(client, opts);
    } else {
        throw ConfigError("unknown agent kind '" + agent_kind + "'");
    }

    const AuditTrace trace = run_audit(config, space, *agent, *adapter);
    write_trace_file(trace, out_path);

    const std::uint64_t failures = trace.steps.empty() ? 0 : trace.steps.back().distinct_failures;
    const std::uint64_t covered = trace.steps.empty() ? 0 : trace.steps.back().distinct_queried;
    std::cout << "stop=" << stop_kind_name(trace.stop_reason.kind) << " steps=" << trace.steps.size()
              << " failures=" << failures << " coverage=" << covered << "/" << space.total_count()
              << " trace=" << out_path << "\n";
    if (trace.stop_reason.kind == StopKind::Aborted) {
        std::cerr << "audit aborted: " << trace.stop_reason.detail << "\n";
        return 3;
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& trace_paths,
               const std::string& oracle_spec,
               const std::string& csv_path,
               const std::string& landscape_csv_path) {
    std::vector<AuditTrace> traces;
    traces.reserve(trace_paths.size());
    for (const auto& p : trace_paths) {
        traces.push_back(read_trace_file(p));
    }
    std::optional<FailureOracleSpec> oracle;
    if (!oracle_spec.empty()) {
        const DescriptorSpace space = space_from_trace(traces.front());
        if (oracle_spec.rfind("oracle", 0) == 0) {
            oracle = load_oracle_spec(oracle_spec, space);
        } else {
            oracle = FailureOracleSpec::from_file(oracle_spec, space);
        }
    }
    std::cout << report(traces, oracle);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) {
            throw ConfigError("cannot open '" + csv_path + "' for writing");
        }
        write_curves_csv(traces, out);
    }
    if (!landscape_csv_path.empty()) {
        std::ofstream out(landscape_csv_path);
        if (!out) {
            throw ConfigError("cannot open '" + landscape_csv_path + "' for writing");
        }
        write_landscape_csv(traces, out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AutoODD: failure-landscape audits of black-box models over combinatorial scenario grids"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run one audit and write its trace");
    std::string space_path;
    std::string mut_spec;
    std::string agent_kind = "random";
    std::string out_path;
    std::string weights_path;
    std::string override_mode = "uncertainty";
    std::uint64_t adapter_timeout_ms = 10000;
    AuditConfig config;
    run->add_option("--space", space_path, "Space config file (JSON)")->required();
    run->add_option("--mut", mut_spec,
                    "Model under test: oracle:<path> | oracle-missing:<cat>=<kw> | "
                    "oracle-sparse:<count>:<seed> | exec:<command> | http:<url>")
        ->required();
    run->add_option("--agent", agent_kind, "Agent: random | gp-greedy | llm")
        ->check(CLI::IsMember({"random", "gp-greedy", "llm"}));
    run->add_option("--epsilon", config.epsilon, "Override probability in [0,1]")->check(CLI::Range(0.0, 1.0));
    run->add_option("--override", override_mode, "Override mode: failure | uncertainty | random")
        ->check(CLI::IsMember({"failure", "uncertainty", "random"}));
    run->add_option("--budget", config.budget, "Maximum executed model queries")->check(CLI::PositiveNumber);
    run->add_option("--seed", config.seed, "Root seed");
    run->add_option("--out", out_path, "Trace output file")->required();
    run->add_option("--gp-signal-var", config.gp.signal_variance, "GP signal variance");
    run->add_option("--gp-lengthscale", config.gp.lengthscale, "GP lengthscale");
    run->add_option("--gp-noise-var", config.gp.noise_variance, "GP noise variance");
    run->add_option("--weights", weights_path, "Operational weight table (JSON)");
    run->add_option("--llm-replay", config.llm_replay_path, "Replay transcript for the llm agent");
    run->add_flag("--enable-uncertainty-tool", config.enable_uncertainty_tool,
                  "Expose get_uncertainty() to the llm agent");
    run->add_option("--stop-on-full-coverage", config.stop_on_full_coverage,
                    "Stop once every scenario is queried (default true)");
    run->add_option("--adapter-timeout-ms", adapter_timeout_ms, "Per-query adapter timeout");

    // report
    auto* rep = app.add_subcommand("report", "Summarize one or more traces");
    std::vector<std::string> trace_paths;
    std::string oracle_spec;
    std::string csv_path;
    std::string landscape_csv_path;
    rep->add_option("traces", trace_paths, "Trace files")->required()->expected(-1);
    rep->add_option("--spec", oracle_spec, "Oracle spec (file path or oracle-* shorthand) for baselines");
    rep->add_option("--csv", csv_path, "Write the discovery-curve table here");
    rep->add_option("--landscape-csv", landscape_csv_path, "Write the per-axis GP landscape here");

    // baseline
    auto* base = app.add_subcommand("baseline", "Analytic random-search expectations");
    std::uint64_t bn = 0;
    std::uint64_t bf = 0;
    std::uint64_t bt = 0;
    base->add_option("--n", bn, "Grid size N")->required();
    base->add_option("--f", bf, "Total failures F")->required();
    base->add_option("--t", bt, "Step t")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            config.override_mode = parse_acquisition_mode(override_mode);
            return cmd_run(space_path, mut_spec, agent_kind, config, weights_path, out_path,
                           adapter_timeout_ms);
        }
        if (rep->parsed()) {
            return cmd_report(trace_paths, oracle_spec, csv_path, landscape_csv_path);
        }
        if (base->parsed()) {
            std::cout << "expected d(" << bt << ") = " << random_baseline(bn, bf, bt) << "\n";
            if (bf >= 1) {
                std::cout << "expected steps to all " << bf
                          << " failures = " << expected_steps_to_all_failures(bn, bf) << "\n";
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
