// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsel/core/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "fedsel/core/rng.hpp"
#include "fedsel/errors.hpp"

namespace fedsel::core {

using linalg::Matrix;

namespace {

constexpr std::uint64_t kMeansTag = 0x6D65616E73ull;
constexpr std::uint64_t kClientTag = 0x636C69656E74ull;
constexpr std::uint64_t kGlobalTag = 0x676C6F62616Cull;

std::vector<int> largest_remainder_counts(const std::vector<double>& proportions, int total) {
    const int k = static_cast<int>(proportions.size());
    std::vector<int> counts(k);
    std::vector<std::pair<double, int>> remainders(k);
    int assigned = 0;
    for (int c = 0; c < k; ++c) {
        const double exact = proportions[c] * total;
        counts[c] = static_cast<int>(std::floor(exact));
        assigned += counts[c];
        remainders[c] = {exact - std::floor(exact), c};
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int r = 0; r < total - assigned; ++r) counts[remainders[r].second] += 1;
    return counts;
}

void fill_gaussian_sample(Rng& rng, const Matrix& means, int label, double sigma, double* out,
                          int dim) {
    const double* mu = means.row(label);
    for (int j = 0; j < dim; ++j) out[j] = mu[j] + sigma * rng.normal();
}

struct LabeledSet {
    Matrix inputs;
    Matrix targets;
    std::vector<int> labels;
};

LabeledSet materialize(const std::vector<int>& labels, const Matrix& means, double sigma,
                       int input_dim, int classes, Rng& rng) {
    LabeledSet set;
    const int n = static_cast<int>(labels.size());
    set.inputs = Matrix(n, input_dim);
    set.targets = Matrix(n, classes);
    set.labels = labels;
    for (int i = 0; i < n; ++i) {
        fill_gaussian_sample(rng, means, labels[i], sigma, set.inputs.row(i), input_dim);
        set.targets(i, labels[i]) = 1.0;
    }
    return set;
}

}  // namespace

DataBundle generate_clients(const DataConfig& config) {
    if (config.clients < 2) throw ConfigError("need at least 2 clients");
    if (config.dirichlet_gamma <= 0.0) throw ConfigError("dirichlet_gamma must be positive");
    if (config.classes < 2) throw ConfigError("need at least 2 classes");
    if (config.input_dim < 1) throw ConfigError("input_dim must be positive");
    if (!(config.eval_fraction > 0.0 && config.eval_fraction < 1.0))
        throw ConfigError("eval_fraction must lie in (0, 1)");
    if (!config.samples_per_client_list.empty() &&
        static_cast<int>(config.samples_per_client_list.size()) != config.clients)
        throw ConfigError("samples_per_client_list must have one entry per client");

    auto samples_for = [&](int i) {
        return config.samples_per_client_list.empty() ? config.samples_per_client
                                                      : config.samples_per_client_list[i];
    };
    for (int i = 0; i < config.clients; ++i)
        if (samples_for(i) < 2)
            throw ConfigError("each client needs at least 2 samples (train + eval)");

    DataBundle bundle;
    Rng means_rng(derive_seed(config.seed, {kMeansTag}));
    bundle.class_means = Matrix(config.classes, config.input_dim);
    for (std::size_t idx = 0; idx < bundle.class_means.size(); ++idx)
        bundle.class_means.data()[idx] = config.mixture_scale * means_rng.normal();

    bundle.clients.reserve(config.clients);
    for (int i = 0; i < config.clients; ++i) {
        Rng rng(derive_seed(config.seed, {kClientTag, static_cast<std::uint64_t>(i)}));
        const int total = samples_for(i);
        const int eval_count =
            std::clamp(static_cast<int>(std::lround(config.eval_fraction * total)), 1, total - 1);

        ClientDataset client;
        bool ok = false;
        for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
            const std::vector<double> proportions =
                rng.dirichlet(config.dirichlet_gamma, config.classes);
            const std::vector<int> counts = largest_remainder_counts(proportions, total);
            std::vector<int> labels;
            labels.reserve(total);
            for (int c = 0; c < config.classes; ++c)
                labels.insert(labels.end(), counts[c], c);
            rng.shuffle(labels);

            const std::vector<int> eval_labels(labels.begin(), labels.begin() + eval_count);
            const std::vector<int> train_labels(labels.begin() + eval_count, labels.end());
            if (train_labels.empty() || eval_labels.empty()) continue;

            LabeledSet train = materialize(train_labels, bundle.class_means, config.noise_sigma,
                                           config.input_dim, config.classes, rng);
            LabeledSet eval = materialize(eval_labels, bundle.class_means, config.noise_sigma,
                                          config.input_dim, config.classes, rng);
            client.train_inputs = std::move(train.inputs);
            client.train_targets = std::move(train.targets);
            client.train_labels = std::move(train.labels);
            client.eval_inputs = std::move(eval.inputs);
            client.eval_targets = std::move(eval.targets);
            client.eval_labels = std::move(eval.labels);
            client.label_proportions = proportions;
            ok = true;
        }
        if (!ok)
            throw ConfigError("client " + std::to_string(i) +
                              ": could not draw a non-empty partition");
        bundle.clients.push_back(std::move(client));
    }

    Rng geval_rng(derive_seed(config.seed, {kGlobalTag}));
    std::vector<int> labels(config.global_eval_samples);
    for (int i = 0; i < config.global_eval_samples; ++i) labels[i] = i % config.classes;
    LabeledSet geval = materialize(labels, bundle.class_means, config.noise_sigma,
                                   config.input_dim, config.classes, geval_rng);
    bundle.eval_inputs = std::move(geval.inputs);
    bundle.eval_targets = std::move(geval.targets);
    bundle.eval_labels = std::move(geval.labels);
    return bundle;
}

std::vector<double> client_weights(const std::vector<ClientDataset>& clients) {
    std::vector<double> w(clients.size());
    double total = 0.0;
    for (std::size_t i = 0; i < clients.size(); ++i) {
        w[i] = static_cast<double>(clients[i].sample_count());
        total += w[i];
    }
    for (double& x : w) x /= total;
    return w;
}

ProbeBatch sample_probe(const ClientDataset& client, int n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("probe size must be positive");
    Rng rng(seed);
    const std::size_t d = client.train_inputs.rows();
    std::vector<std::size_t> picks;
    if (d >= static_cast<std::size_t>(n)) {
        picks = rng.sample_without_replacement(d, n);
    } else {
        picks.reserve(n);
        for (int i = 0; i < n; ++i) picks.push_back(rng.index(d));
    }
    ProbeBatch batch;
    batch.inputs = Matrix(n, client.train_inputs.cols());
    batch.targets = Matrix(n, client.train_targets.cols());
    for (int i = 0; i < n; ++i) {
        std::copy_n(client.train_inputs.row(picks[i]), batch.inputs.cols(), batch.inputs.row(i));
        std::copy_n(client.train_targets.row(picks[i]), batch.targets.cols(),
                    batch.targets.row(i));
    }
    return batch;
}

void export_dataset_csv(const ClientDataset& client, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    const std::size_t dim = client.train_inputs.cols();
    for (std::size_t j = 0; j < dim; ++j) out << "x" << j << ",";
    out << "label\n";
    char buf[32];
    auto write_rows = [&](const Matrix& inputs, const std::vector<int>& labels) {
        for (std::size_t i = 0; i < inputs.rows(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", inputs(i, j));
                out << buf << ",";
            }
            out << labels[i] << "\n";
        }
    };
    write_rows(client.train_inputs, client.train_labels);
    write_rows(client.eval_inputs, client.eval_labels);
}

}  // namespace fedsel::core
