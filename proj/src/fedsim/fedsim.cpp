// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsel/fedsim/fedsim.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>

#include "fedsel/core/parallel.hpp"
#include "fedsel/core/rng.hpp"
#include "fedsel/errors.hpp"
#include "fedsel/kernels/kernels.hpp"
#include "fedsel/lntk/lntk.hpp"

#include "json.hpp"

namespace fedsel::fed {

using core::LayeredModel;
using linalg::Matrix;

namespace {

constexpr std::uint64_t kModelTag = 0x6D6F64ull;
constexpr std::uint64_t kDataTag = 0x646174ull;
constexpr std::uint64_t kSampleTag = 0x73616Dull;
constexpr std::uint64_t kProbeTag = 0x70726Full;
constexpr std::uint64_t kTrainTag = 0x747261ull;
constexpr std::uint64_t kSelectTag = 0x73656Cull;

}  // namespace

AggregationMode aggregation_from_string(const std::string& name) {
    if (name == "weighted_sum") return AggregationMode::weighted_sum;
    if (name == "renormalized") return AggregationMode::renormalized;
    throw ConfigError("unknown aggregation mode: " + name);
}

std::string to_string(AggregationMode m) {
    return m == AggregationMode::weighted_sum ? "weighted_sum" : "renormalized";
}

std::vector<int> BudgetSpec::resolve(int clients, int layers) const {
    std::vector<int> base;
    if (pattern == "uniform") {
        base.assign(clients, uniform_value);
    } else if (pattern == "custom") {
        if (static_cast<int>(custom.size()) != clients)
            throw ConfigError("custom budgets need one entry per client");
        base = custom;
    } else {
        static const std::vector<std::pair<std::string, std::vector<int>>> named = {
            {"task1", {6, 6, 4, 4, 2}},
            {"task2", {6, 6, 6, 4, 4, 4, 2, 2}},
            {"task3", {2, 2, 2, 4, 4, 4, 6, 6, 6}},
            {"task4", {6, 4, 2, 2}},
            {"task5", {6, 6, 6, 4, 2}},
        };
        const auto it = std::find_if(named.begin(), named.end(),
                                     [&](const auto& p) { return p.first == pattern; });
        if (it == named.end()) throw ConfigError("unknown budget pattern: " + pattern);
        base.resize(clients);
        for (int i = 0; i < clients; ++i) base[i] = it->second[i % it->second.size()];
    }
    bool warned = false;
    for (int& b : base) {
        if (b < 1) throw ConfigError("budgets must be at least 1");
        if (b > layers) {
            if (!warned) {
                std::cerr << "warning: clamping budgets to the layer count " << layers << "\n";
                warned = true;
            }
            b = layers;
        }
    }
    return base;
}

ClientUpdate local_train_masked(const LayeredModel& global_model,
                                const core::ClientDataset& client,
                                std::span<const std::uint8_t> mask_row, int steps,
                                double learning_rate, int batch_size, core::LossKind loss,
                                std::uint64_t seed, int client_id) {
    if (mask_row.size() != global_model.layer_count())
        throw ConfigError("mask row length must equal the layer count");
    if (steps < 1 || batch_size < 1 || learning_rate <= 0.0)
        throw ConfigError("local training needs positive steps, batch size and learning rate");

    LayeredModel model = global_model;
    core::Rng rng(seed);
    const std::size_t d = client.train_inputs.rows();
    const std::size_t batch = std::min<std::size_t>(batch_size, d);

    double loss_sum = 0.0;
    for (int step = 0; step < steps; ++step) {
        const auto picks = rng.sample_without_replacement(d, batch);
        Matrix inputs(batch, client.train_inputs.cols());
        Matrix targets(batch, client.train_targets.cols());
        for (std::size_t r = 0; r < batch; ++r) {
            std::copy_n(client.train_inputs.row(picks[r]), inputs.cols(), inputs.row(r));
            std::copy_n(client.train_targets.row(picks[r]), targets.cols(), targets.row(r));
        }
        const core::LossGrads grads = core::loss_and_layer_grads(model, inputs, targets, loss);
        if (!std::isfinite(grads.loss))
            throw NumericalError("client " + std::to_string(client_id) + " step " +
                                 std::to_string(step + 1) + ": non-finite training loss");
        loss_sum += grads.loss;
        for (std::size_t l = 0; l < model.layer_count(); ++l)
            if (mask_row[l]) model.add_to_layer(l, -learning_rate, grads.layer_grads[l]);
    }

    ClientUpdate update;
    update.mask_row.assign(mask_row.begin(), mask_row.end());
    update.mean_train_loss = loss_sum / steps;
    update.layer_deltas.resize(model.layer_count());
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const std::size_t p = model.layer_param_count(l);
        update.layer_deltas[l].assign(p, 0.0);
        if (mask_row[l]) {
            const auto before = global_model.layer_params(l);
            const auto after = model.layer_params(l);
            for (std::size_t j = 0; j < p; ++j)
                update.layer_deltas[l][j] = (before[j] - after[j]) / learning_rate;
        }
    }
    return update;
}

std::vector<std::vector<double>> aggregate(const std::vector<ClientUpdate>& updates,
                                           AggregationMode mode) {
    if (updates.empty()) throw ConfigError("aggregate: no client updates");
    const std::size_t L = updates.front().layer_deltas.size();
    std::vector<std::vector<double>> delta(L);
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t p = updates.front().layer_deltas[l].size();
        delta[l].assign(p, 0.0);
        double mass = 0.0;
        for (const ClientUpdate& u : updates) {
            if (u.layer_deltas.size() != L || u.layer_deltas[l].size() != p)
                throw ConfigError("aggregate: mismatched layer shapes");
            kernels::axpy(u.alpha, u.layer_deltas[l].data(), delta[l].data(), p);
            if (u.mask_row[l]) mass += u.alpha;
        }
        if (mode == AggregationMode::renormalized && mass > 0.0)
            kernels::scal(1.0 / mass, delta[l].data(), p);
    }
    return delta;
}

void apply_delta(LayeredModel& model, const std::vector<std::vector<double>>& delta,
                 double learning_rate) {
    for (std::size_t l = 0; l < model.layer_count(); ++l)
        model.add_to_layer(l, -learning_rate, delta[l]);
}

namespace {

Matrix rows_subset(const Matrix& m, const std::vector<int>& rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
        std::copy_n(m.row(rows[r]), m.cols(), out.row(r));
    return out;
}

// Relative per-layer gradient norms on a probe batch, one row per client.
Matrix gradient_norm_signal(const LayeredModel& model,
                            const std::vector<core::ClientDataset>& clients,
                            const std::vector<int>& participants,
                            const FederationConfig& fedcfg, core::LossKind loss,
                            std::uint64_t seed) {
    const std::size_t L = model.layer_count();
    Matrix signal(participants.size(), L);
    core::parallel_for(participants.size(), fedcfg.threads, [&](std::size_t i) {
        const auto probe = core::sample_probe(clients[participants[i]], fedcfg.probe_size,
                                              core::derive_seed(seed, {i}));
        const auto grads = core::loss_and_layer_grads(model, probe.inputs, probe.targets, loss);
        for (std::size_t l = 0; l < L; ++l) {
            const auto params = model.layer_params(l);
            const double gnorm = linalg::norm2(grads.layer_grads[l]);
            const double pnorm = linalg::norm2(params);
            signal(i, l) = gnorm / (pnorm + 1e-12);
        }
    });
    return signal;
}

std::vector<double> weight_magnitude_signal(const LayeredModel& model) {
    std::vector<double> magnitude(model.layer_count());
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const auto params = model.layer_params(l);
        double sum = 0.0;
        for (double p : params) sum += std::abs(p);
        magnitude[l] = sum / static_cast<double>(params.size());
    }
    return magnitude;
}

}  // namespace

RunResult run_federation(const SimulationConfig& config, std::uint64_t seed,
                         const core::DataBundle* data, const CheckpointSink& checkpoint,
                         int checkpoint_every) {
    const FederationConfig& fedcfg = config.federation;
    if (fedcfg.rounds < 1 || fedcfg.local_steps < 1)
        throw ConfigError("rounds and local steps must be positive");
    if (!(fedcfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(fedcfg.client_fraction > 0.0 && fedcfg.client_fraction <= 1.0))
        throw ConfigError("client fraction must lie in (0, 1]");

    core::DataBundle generated;
    if (data == nullptr) {
        core::DataConfig datacfg = config.data;
        datacfg.seed = core::derive_seed(seed, {kDataTag});
        generated = core::generate_clients(datacfg);
        data = &generated;
    }
    const int N = static_cast<int>(data->clients.size());

    core::ModelConfig modelcfg = config.model;
    modelcfg.seed = core::derive_seed(seed, {kModelTag});
    LayeredModel model = core::build_model(modelcfg);
    const int L = static_cast<int>(model.layer_count());

    const std::vector<int> budgets = fedcfg.budgets.resolve(N, L);
    const std::vector<double> alphas = core::client_weights(data->clients);

    RunResult result{{}, model};
    Matrix importance;  // reused between rounds when recomputation is off
    lntk::ImportanceOptions importance_opts;
    importance_opts.probe_size = fedcfg.probe_size;
    importance_opts.gram.dimension_cap = fedcfg.gram_cap;
    importance_opts.threads = fedcfg.threads;
    selector::ParetoArchive previous_archive(config.solver.archive_capacity);

    for (int round = 1; round <= fedcfg.rounds; ++round) {
        const auto tick = std::chrono::steady_clock::now();

        // participant sampling
        std::vector<int> participants(N);
        std::iota(participants.begin(), participants.end(), 0);
        if (fedcfg.client_fraction < 1.0) {
            const int count = std::max(1, static_cast<int>(std::lround(fedcfg.client_fraction * N)));
            core::Rng rng(core::derive_seed(seed, {kSampleTag, static_cast<std::uint64_t>(round)}));
            auto picks = rng.sample_without_replacement(N, count);
            std::sort(picks.begin(), picks.end());
            participants.assign(picks.begin(), picks.end());
        }

        // client-level importance on the incoming global model
        const bool recompute = importance.empty() ||
                               (round - 1) % std::max(fedcfg.recompute_importance_every, 1) == 0;
        if (recompute) {
            importance_opts.seed =
                core::derive_seed(seed, {kProbeTag, static_cast<std::uint64_t>(round)});
            importance = lntk::importance_scores(model, data->clients, importance_opts).scores;
        }
        const Matrix sub_importance = rows_subset(importance, participants);
        std::vector<int> sub_budgets(participants.size());
        for (std::size_t r = 0; r < participants.size(); ++r)
            sub_budgets[r] = budgets[participants[r]];

        // server-level mask selection
        selector::SolveResult solved;
        const std::uint64_t select_seed =
            core::derive_seed(seed, {kSelectTag, static_cast<std::uint64_t>(round)});
        if (is_meta_heuristic(config.solver.algorithm) ||
            config.solver.algorithm == selector::Algorithm::lntk_only) {
            selector::SolverConfig solvecfg = config.solver;
            solvecfg.seed = select_seed;
            try {
                solved = selector::solve(sub_importance, sub_budgets, solvecfg,
                                         config.solver.warm_start ? &previous_archive : nullptr);
            } catch (const std::exception& e) {
                std::cerr << "warning: selector failed (" << e.what()
                          << "); falling back to the greedy client proposal\n";
                solved.chosen = selector::greedy_top_b(sub_importance, sub_budgets);
                solved.archive = selector::ParetoArchive(config.solver.archive_capacity);
                solved.archive.insert(selector::evaluate(solved.chosen, sub_importance),
                                      solved.chosen);
            }
            previous_archive = solved.archive;
        } else {
            selector::BaselineSignals signals;
            signals.importance = sub_importance;
            signals.weight_magnitude = weight_magnitude_signal(model);
            if (config.solver.algorithm == selector::Algorithm::grad_norm) {
                signals.gradient_norm = gradient_norm_signal(
                    model, data->clients, participants, fedcfg, fedcfg.train_loss, select_seed);
            }
            solved.chosen = selector::baseline_select(config.solver.algorithm, signals,
                                                      sub_budgets, select_seed);
            solved.archive = selector::ParetoArchive(config.solver.archive_capacity);
            solved.archive.insert(selector::evaluate(solved.chosen, sub_importance),
                                  solved.chosen);
        }

        // masked local training
        std::vector<ClientUpdate> updates(participants.size());
        core::parallel_for(participants.size(), fedcfg.threads, [&](std::size_t r) {
            const int client_id = participants[r];
            std::vector<std::uint8_t> row(L);
            for (int l = 0; l < L; ++l) row[l] = solved.chosen.get(static_cast<int>(r), l);
            updates[r] = local_train_masked(
                model, data->clients[client_id], row, fedcfg.local_steps, fedcfg.learning_rate,
                fedcfg.batch_size, fedcfg.train_loss,
                core::derive_seed(seed, {kTrainTag, static_cast<std::uint64_t>(round),
                                         static_cast<std::uint64_t>(client_id)}),
                client_id);
            updates[r].alpha = alphas[client_id];
        });

        const auto delta = aggregate(updates, fedcfg.aggregation);
        apply_delta(model, delta, fedcfg.learning_rate);

        // evaluation
        RoundRecord record;
        record.round = round;
        record.participants = participants;
        record.mask = solved.chosen;
        record.selection_counts = selector::selection_counts(solved.chosen);
        record.objectives = selector::evaluate(solved.chosen, sub_importance);
        record.archive_objectives = solved.archive.objectives();
        record.importance = importance;
        record.global_loss =
            core::eval_loss(model, data->eval_inputs, data->eval_targets, fedcfg.train_loss);
        record.global_accuracy =
            core::accuracy(model.forward(data->eval_inputs), data->eval_labels);
        record.clients.resize(participants.size());
        core::parallel_for(participants.size(), fedcfg.threads, [&](std::size_t r) {
            const core::ClientDataset& client = data->clients[participants[r]];
            ClientMetrics metrics;
            metrics.client = participants[r];
            metrics.train_loss = updates[r].mean_train_loss;
            metrics.eval_loss =
                core::eval_loss(model, client.eval_inputs, client.eval_targets, fedcfg.train_loss);
            metrics.eval_accuracy =
                core::accuracy(model.forward(client.eval_inputs), client.eval_labels);
            record.clients[r] = metrics;
        });
        record.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - tick)
                             .count();
        result.records.push_back(std::move(record));

        if (checkpoint && checkpoint_every > 0 && round % checkpoint_every == 0)
            checkpoint(round, model);
    }
    result.model = std::move(model);
    return result;
}

void save_checkpoint(const LayeredModel& model, const std::string& path) {
    nlohmann::json header;
    header["input_dim"] = model.input_dim();
    header["layers"] = nlohmann::json::array();
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const core::Layer& layer = model.layer(l);
        header["layers"].push_back({{"fan_in", layer.fan_in()},
                                    {"fan_out", layer.fan_out()},
                                    {"activation", core::to_string(layer.activation)}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint " + path);
    out << header.dump() << "\n";
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint layout assumes a little-endian host");
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const auto params = model.layer_params(l);
        out.write(reinterpret_cast<const char*>(params.data()),
                  static_cast<std::streamsize>(params.size() * sizeof(double)));
    }
}

LayeredModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read checkpoint " + path);
    std::string header_line;
    std::getline(in, header_line);
    const nlohmann::json header = nlohmann::json::parse(header_line);

    std::vector<core::Layer> layers;
    for (const auto& spec : header.at("layers")) {
        core::Layer layer;
        const std::size_t fan_in = spec.at("fan_in").get<std::size_t>();
        const std::size_t fan_out = spec.at("fan_out").get<std::size_t>();
        layer.weights = Matrix(fan_out, fan_in);
        layer.bias.assign(fan_out, 0.0);
        layer.activation = core::activation_from_string(spec.at("activation").get<std::string>());
        layers.push_back(std::move(layer));
    }
    LayeredModel model(header.at("input_dim").get<std::size_t>(), std::move(layers));
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        std::vector<double> params(model.layer_param_count(l));
        in.read(reinterpret_cast<char*>(params.data()),
                static_cast<std::streamsize>(params.size() * sizeof(double)));
        if (!in) throw ConfigError("checkpoint " + path + " is truncated");
        model.set_layer_params(l, params);
    }
    return model;
}

}  // namespace fedsel::fed
