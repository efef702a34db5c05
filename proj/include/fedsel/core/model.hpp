// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Small layered MLPs with explicit per-layer parameter access, batched
// forward evaluation, per-layer Jacobians of the outputs, and loss
// gradients. Everything is double precision and deterministic.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsel/linalg/matrix.hpp"

namespace fedsel::core {

enum class Activation { identity, tanh, sigmoid };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

struct Layer {
    linalg::Matrix weights;    // fan_out x fan_in
    std::vector<double> bias;  // fan_out
    Activation activation = Activation::identity;

    std::size_t fan_in() const { return weights.cols(); }
    std::size_t fan_out() const { return weights.rows(); }
    std::size_t param_count() const { return weights.size() + bias.size(); }
};

/// Sequence of dense layers. Parameters of layer l flatten as
/// [weights row-major..., bias...]; layer indices are 0-based throughout
/// the code and 1-based only in user-facing output.
class LayeredModel {
public:
    LayeredModel() = default;
    LayeredModel(std::size_t input_dim, std::vector<Layer> layers);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return layers_.back().fan_out(); }
    std::size_t layer_count() const { return layers_.size(); }

    const Layer& layer(std::size_t l) const { return layers_[l]; }
    Layer& layer(std::size_t l) { return layers_[l]; }

    std::size_t param_count() const;
    std::size_t layer_param_count(std::size_t l) const { return layers_[l].param_count(); }

    std::vector<double> layer_params(std::size_t l) const;
    void set_layer_params(std::size_t l, std::span<const double> params);
    /// params[l] += alpha * delta (flat layout), leaving other layers untouched.
    void add_to_layer(std::size_t l, double alpha, std::span<const double> delta);

    /// Batched forward pass: inputs n x input_dim -> outputs n x output_dim.
    linalg::Matrix forward(const linalg::Matrix& inputs) const;

    struct ForwardCache {
        std::vector<linalg::Matrix> activations;     // [0]=inputs, [l]=post-activation of layer l
        std::vector<linalg::Matrix> preactivations;  // [l-1]=pre-activation of layer l
        const linalg::Matrix& outputs() const { return activations.back(); }
    };
    ForwardCache forward_cached(const linalg::Matrix& inputs) const;

private:
    std::size_t input_dim_ = 0;
    std::vector<Layer> layers_;
};

struct ModelConfig {
    int depth = 12;                  // number of weight layers
    int input_dim = 16;
    std::vector<int> hidden_widths;  // depth-1 entries
    int classes = 10;
    Activation hidden_activation = Activation::tanh;
    std::uint64_t seed = 0;
};

/// Deterministic construction: weights uniform with standard deviation
/// 1/sqrt(fan_in) (i.e. U(-sqrt(3)/sqrt(fan_in), +sqrt(3)/sqrt(fan_in))),
/// biases zero, hidden activations per config, identity output layer.
/// Same config and seed give a bit-identical model.
LayeredModel build_model(const ModelConfig& config);

double apply_activation(Activation a, double x);
double activation_derivative(Activation a, double preactivation);

/// Jacobian of the flattened outputs with respect to layer l's parameters.
/// Row ordering is sample-major: row (i*k + c) holds d outputs(i, c) / d theta_l.
linalg::Matrix layer_jacobian(const LayeredModel& model, const linalg::Matrix& inputs,
                              std::size_t l);

/// All per-layer Jacobians from a single backward sweep.
std::vector<linalg::Matrix> all_layer_jacobians(const LayeredModel& model,
                                                const linalg::Matrix& inputs);

enum class LossKind { squared_error, cross_entropy };

LossKind loss_from_string(const std::string& name);
std::string to_string(LossKind k);

/// Loss conventions:
///   squared_error:  0.5 * sum_{i,c} (z - y)^2   (batch sum; the kernel-dynamics convention)
///   cross_entropy:  softmax + NLL, averaged over the batch
double loss_value(const linalg::Matrix& outputs, const linalg::Matrix& targets, LossKind kind);

/// d loss / d outputs, n x k.
linalg::Matrix output_loss_gradient(const linalg::Matrix& outputs, const linalg::Matrix& targets,
                                    LossKind kind);

struct LossGrads {
    double loss = 0.0;
    std::vector<std::vector<double>> layer_grads;  // flat per-layer gradients
};

LossGrads loss_and_layer_grads(const LayeredModel& model, const linalg::Matrix& inputs,
                               const linalg::Matrix& targets, LossKind kind);

/// Per-sample mean loss for evaluation/reporting (divides the squared-error
/// batch sum by n; cross-entropy is already a mean).
double eval_loss(const LayeredModel& model, const linalg::Matrix& inputs,
                 const linalg::Matrix& targets, LossKind kind);

double accuracy(const linalg::Matrix& outputs, std::span<const int> labels);

}  // namespace fedsel::core
