// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a strict JSON schema covering data, model,
// federation, selector and output settings. Unknown keys are rejected, and
// the fully resolved config echoes back as JSON so a run can be reproduced
// bit-identically from its echo.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsel/fedsim/fedsim.hpp"

#include "json.hpp"

namespace fedsel {

struct OutputConfig {
    std::string directory = "out";
    int checkpoint_every = 0;  // rounds; 0 disables checkpoints
    bool plots = true;
    bool export_datasets = false;
};

struct ExperimentConfig {
    fed::SimulationConfig simulation;
    OutputConfig output;
    std::vector<std::uint64_t> seeds = {1};
    int threads = 0;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

ExperimentConfig load_config(const std::string& path);

/// Apply a dotted-path override, e.g. "federation.rounds=10" or
/// "selector.algorithm=abc". The value is parsed as JSON when possible and
/// falls back to a plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace fedsel
