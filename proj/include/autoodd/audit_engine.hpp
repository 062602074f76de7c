// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "autoodd/acquisition.hpp"
#include "autoodd/agent.hpp"
#include "autoodd/descriptor_space.hpp"
#include "autoodd/gp_surrogate.hpp"
#include "autoodd/mut_harness.hpp"
#include "autoodd/trace.hpp"

#include <chrono>
#include <cstdint>
#include <string>

namespace autoodd {

/// Full configuration of one audit run. One root seed fans out to named
/// streams (override draw, random override choice, random agent) so ablations
/// change one component without perturbing the others' randomness.
struct AuditConfig {
    double epsilon = 0.1;
    AcquisitionMode override_mode = AcquisitionMode::MaxUncertainty;
    std::uint64_t budget = 100; // executed model queries (violation penalties also count)
    std::uint64_t seed = 0;
    GpHyperparams gp;
    std::string agent_kind = "random"; // random | gp-greedy | llm
    std::string mut_spec;              // informational; the adapter is injected
    bool stop_on_full_coverage = true;
    bool enable_uncertainty_tool = false;
    std::string llm_replay_path;
    OperationalWeights weights;
    std::chrono::milliseconds adapter_timeout{10000};

    void validate() const;
    nlohmann::ordered_json to_json() const;
};

/// Runs the audit loop to completion: per agent turn, draw the override
/// decision, possibly substitute the proposal, enforce the no-repeat rule,
/// query the model, refit every axis GP on the full history, and record the
/// step. Stops on agent STOP, exhausted budget, or exhausted grid; adapter
/// or transport failure aborts with the partial trace preserved.
AuditTrace run_audit(const AuditConfig& config,
                     const DescriptorSpace& space,
                     Agent& agent,
                     MutAdapter& adapter);

} // namespace autoodd
