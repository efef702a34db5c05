// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Round loop of the federated simulation: distribute the global model,
// score layer importance per client, solve the per-client layer masks on
// the server, run masked local SGD, aggregate, evaluate, record.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fedsel/core/data.hpp"
#include "fedsel/core/model.hpp"
#include "fedsel/selector/selector.hpp"

namespace fedsel::fed {

enum class AggregationMode {
    weighted_sum,  // delta_t = sum_i alpha_i * delta_i (zeros for non-selecting clients)
    renormalized,  // per layer, divide by the alpha mass of the selecting clients
};

AggregationMode aggregation_from_string(const std::string& name);
std::string to_string(AggregationMode m);

struct BudgetSpec {
    // "uniform", "custom", or one of the named device-heterogeneity
    // patterns: task1 [6,6,4,4,2], task2 [6,6,6,4,4,4,2,2],
    // task3 [2,2,2,4,4,4,6,6,6], task4 [6,4,2,2], task5 [6,6,6,4,2].
    // Named patterns tile cyclically across the clients.
    std::string pattern = "uniform";
    int uniform_value = 4;
    std::vector<int> custom;

    std::vector<int> resolve(int clients, int layers) const;  // clamps to [1, layers]
};

struct FederationConfig {
    int rounds = 30;
    int local_steps = 5;
    int batch_size = 32;
    double learning_rate = 0.5;
    double client_fraction = 1.0;
    BudgetSpec budgets;
    core::LossKind train_loss = core::LossKind::cross_entropy;
    int probe_size = 64;
    std::size_t gram_cap = 256;
    int recompute_importance_every = 1;
    AggregationMode aggregation = AggregationMode::weighted_sum;
    int threads = 0;  // 0 = hardware concurrency
};

struct ClientUpdate {
    std::vector<std::vector<double>> layer_deltas;  // (theta_0 - theta_tau) / lr, zero rows for unselected layers
    double alpha = 0.0;
    std::vector<std::uint8_t> mask_row;
    double mean_train_loss = 0.0;
};

/// Masked local SGD: only layers with mask_row[l] == 1 are updated; the
/// other layers stay bit-identical. Batches are drawn deterministically
/// from the seed. A non-finite loss aborts with a NumericalError naming
/// the client.
ClientUpdate local_train_masked(const core::LayeredModel& global_model,
                                const core::ClientDataset& client,
                                std::span<const std::uint8_t> mask_row, int steps,
                                double learning_rate, int batch_size, core::LossKind loss,
                                std::uint64_t seed, int client_id = -1);

/// Per-layer alpha-weighted sum of the client deltas.
std::vector<std::vector<double>> aggregate(const std::vector<ClientUpdate>& updates,
                                           AggregationMode mode);

/// theta <- theta - lr * delta.
void apply_delta(core::LayeredModel& model, const std::vector<std::vector<double>>& delta,
                 double learning_rate);

struct ClientMetrics {
    int client = 0;
    double train_loss = 0.0;
    double eval_loss = 0.0;
    double eval_accuracy = 0.0;
};

struct RoundRecord {
    int round = 0;  // 1-based
    std::vector<int> participants;
    std::vector<ClientMetrics> clients;
    double global_loss = 0.0;
    double global_accuracy = 0.0;
    selector::ObjectivePair objectives;       // of the chosen mask
    std::vector<int> selection_counts;        // n_l over participants
    selector::SelectionMask mask;             // rows follow `participants`
    std::vector<selector::ObjectivePair> archive_objectives;
    linalg::Matrix importance;                // N x L scores used this round
    double wall_ms = 0.0;
};

struct SimulationConfig {
    core::ModelConfig model;
    core::DataConfig data;
    FederationConfig federation;
    selector::SolverConfig solver;
};

struct RunResult {
    std::vector<RoundRecord> records;
    core::LayeredModel model;
};

using CheckpointSink = std::function<void(int round, const core::LayeredModel&)>;

/// Runs the whole federation. All randomness derives from `seed`; the seed
/// fields inside the sub-configs are ignored. If `data` is null the bundle
/// is generated from the config. `checkpoint_every` <= 0 disables the sink.
RunResult run_federation(const SimulationConfig& config, std::uint64_t seed,
                         const core::DataBundle* data = nullptr,
                         const CheckpointSink& checkpoint = nullptr,
                         int checkpoint_every = 0);

/// Checkpoint format: one JSON header line listing the layer shapes and
/// activations, then the raw little-endian float64 parameters in layer
/// order (weights row-major, then bias).
void save_checkpoint(const core::LayeredModel& model, const std::string& path);
core::LayeredModel load_checkpoint(const std::string& path);

}  // namespace fedsel::fed
