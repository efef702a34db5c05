// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic non-IID client data: a shared Gaussian mixture over classes,
// with per-client label proportions drawn from a Dirichlet distribution.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsel/linalg/matrix.hpp"

namespace fedsel::core {

struct DataConfig {
    int clients = 8;
    double dirichlet_gamma = 0.5;
    int samples_per_client = 150;
    std::vector<int> samples_per_client_list;  // optional per-client override
    double eval_fraction = 0.25;
    int input_dim = 16;
    int classes = 10;
    double mixture_scale = 2.0;   // spread of the class means
    double noise_sigma = 1.0;     // within-class standard deviation
    int global_eval_samples = 512;
    std::uint64_t seed = 0;
};

struct ClientDataset {
    linalg::Matrix train_inputs;
    linalg::Matrix train_targets;  // one-hot
    std::vector<int> train_labels;
    linalg::Matrix eval_inputs;
    linalg::Matrix eval_targets;
    std::vector<int> eval_labels;
    std::vector<double> label_proportions;  // the Dirichlet draw

    int sample_count() const { return static_cast<int>(train_inputs.rows()); }  // d_i
};

struct DataBundle {
    std::vector<ClientDataset> clients;
    linalg::Matrix eval_inputs;  // pooled global evaluation set, uniform labels
    linalg::Matrix eval_targets;
    std::vector<int> eval_labels;
    linalg::Matrix class_means;  // classes x input_dim
};

/// Deterministic under seed. Per-client class counts follow the Dirichlet
/// draw by largest-remainder rounding, so the requested per-client total is
/// met exactly. A draw that would leave a train or eval partition empty is
/// resampled up to 8 times, then rejected as a configuration error.
DataBundle generate_clients(const DataConfig& config);

/// Relative sample sizes alpha_i = d_i / sum_j d_j.
std::vector<double> client_weights(const std::vector<ClientDataset>& clients);

struct ProbeBatch {
    linalg::Matrix inputs;
    linalg::Matrix targets;
    int n() const { return static_cast<int>(inputs.rows()); }
};

/// n rows from the client's train split: without replacement when d_i >= n,
/// with replacement otherwise.
ProbeBatch sample_probe(const ClientDataset& client, int n, std::uint64_t seed);

/// One row per sample: feature columns then the integer label.
void export_dataset_csv(const ClientDataset& client, const std::string& path);

}  // namespace fedsel::core
