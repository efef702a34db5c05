// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsel/core/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "fedsel/core/rng.hpp"
#include "fedsel/errors.hpp"
#include "fedsel/kernels/kernels.hpp"

namespace fedsel::core {

using linalg::Matrix;

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation: " + name);
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "identity";
}

LossKind loss_from_string(const std::string& name) {
    if (name == "squared_error") return LossKind::squared_error;
    if (name == "cross_entropy") return LossKind::cross_entropy;
    throw ConfigError("unknown loss kind: " + name);
}

std::string to_string(LossKind k) {
    return k == LossKind::squared_error ? "squared_error" : "cross_entropy";
}

double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::tanh: return std::tanh(x);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

double activation_derivative(Activation a, double preactivation) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::tanh: {
            const double t = std::tanh(preactivation);
            return 1.0 - t * t;
        }
        case Activation::sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-preactivation));
            return s * (1.0 - s);
        }
    }
    return 1.0;
}

LayeredModel::LayeredModel(std::size_t input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
    if (layers_.empty()) throw ConfigError("model needs at least one layer");
    std::size_t expect = input_dim_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        if (layer.fan_in() != expect)
            throw ConfigError("layer " + std::to_string(l + 1) + " fan-in mismatch");
        if (layer.bias.size() != layer.fan_out())
            throw ConfigError("layer " + std::to_string(l + 1) + " bias size mismatch");
        expect = layer.fan_out();
    }
}

std::size_t LayeredModel::param_count() const {
    std::size_t total = 0;
    for (const Layer& l : layers_) total += l.param_count();
    return total;
}

std::vector<double> LayeredModel::layer_params(std::size_t l) const {
    const Layer& layer = layers_[l];
    std::vector<double> out;
    out.reserve(layer.param_count());
    out.insert(out.end(), layer.weights.storage().begin(), layer.weights.storage().end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
    return out;
}

void LayeredModel::set_layer_params(std::size_t l, std::span<const double> params) {
    Layer& layer = layers_[l];
    assert(params.size() == layer.param_count());
    std::copy_n(params.begin(), layer.weights.size(), layer.weights.storage().begin());
    std::copy_n(params.begin() + layer.weights.size(), layer.bias.size(), layer.bias.begin());
}

void LayeredModel::add_to_layer(std::size_t l, double alpha, std::span<const double> delta) {
    Layer& layer = layers_[l];
    assert(delta.size() == layer.param_count());
    kernels::axpy(alpha, delta.data(), layer.weights.data(), layer.weights.size());
    kernels::axpy(alpha, delta.data() + layer.weights.size(), layer.bias.data(),
                  layer.bias.size());
}

namespace {

Matrix layer_forward(const Layer& layer, const Matrix& input, Matrix* preactivation_out) {
    Matrix pre = linalg::matmul_nt(input, layer.weights);
    for (std::size_t i = 0; i < pre.rows(); ++i) {
        double* row = pre.row(i);
        for (std::size_t j = 0; j < pre.cols(); ++j) row[j] += layer.bias[j];
    }
    Matrix post(pre.rows(), pre.cols());
    for (std::size_t idx = 0; idx < pre.size(); ++idx)
        post.data()[idx] = apply_activation(layer.activation, pre.data()[idx]);
    if (preactivation_out) *preactivation_out = std::move(pre);
    return post;
}

}  // namespace

Matrix LayeredModel::forward(const Matrix& inputs) const {
    if (inputs.cols() != input_dim_) throw ConfigError("forward: input dimension mismatch");
    Matrix cur = inputs;
    for (const Layer& layer : layers_) cur = layer_forward(layer, cur, nullptr);
    return cur;
}

LayeredModel::ForwardCache LayeredModel::forward_cached(const Matrix& inputs) const {
    if (inputs.cols() != input_dim_) throw ConfigError("forward: input dimension mismatch");
    ForwardCache cache;
    cache.activations.reserve(layers_.size() + 1);
    cache.preactivations.resize(layers_.size());
    cache.activations.push_back(inputs);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        cache.activations.push_back(
            layer_forward(layers_[l], cache.activations.back(), &cache.preactivations[l]));
    }
    return cache;
}

LayeredModel build_model(const ModelConfig& config) {
    if (config.depth < 2) throw ConfigError("model depth must be at least 2");
    if (static_cast<int>(config.hidden_widths.size()) != config.depth - 1)
        throw ConfigError("hidden_widths must have depth-1 entries");
    if (config.input_dim < 1 || config.classes < 1)
        throw ConfigError("input_dim and classes must be positive");
    for (int w : config.hidden_widths)
        if (w < 1) throw ConfigError("hidden widths must be positive");

    Rng rng(derive_seed(config.seed, {0x6D6F64656Cull}));  // "model" stream
    std::vector<Layer> layers;
    layers.reserve(config.depth);
    std::size_t fan_in = config.input_dim;
    for (int l = 0; l < config.depth; ++l) {
        const bool last = l == config.depth - 1;
        const std::size_t fan_out =
            last ? static_cast<std::size_t>(config.classes)
                 : static_cast<std::size_t>(config.hidden_widths[l]);
        Layer layer;
        layer.weights = Matrix(fan_out, fan_in);
        layer.bias.assign(fan_out, 0.0);
        layer.activation = last ? Activation::identity : config.hidden_activation;
        const double bound = std::sqrt(3.0) / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t idx = 0; idx < layer.weights.size(); ++idx)
            layer.weights.data()[idx] = rng.uniform(-bound, bound);
        fan_in = fan_out;
        layers.push_back(std::move(layer));
    }
    return LayeredModel(config.input_dim, std::move(layers));
}

namespace {

// Propagates d outputs / d preactivation matrices backward. deltas[l] has
// one (n*k) x fan_out(l) block per layer, rows sample-major.
std::vector<Matrix> output_deltas(const LayeredModel& model,
                                  const LayeredModel::ForwardCache& cache) {
    const std::size_t L = model.layer_count();
    const std::size_t n = cache.activations[0].rows();
    const std::size_t k = model.output_dim();
    std::vector<Matrix> deltas(L);

    // d outputs / d preact_L: diagonal of activation derivatives per sample
    Matrix last(n * k, k);
    for (std::size_t i = 0; i < n; ++i) {
        const double* pre = cache.preactivations[L - 1].row(i);
        for (std::size_t c = 0; c < k; ++c)
            last(i * k + c, c) =
                activation_derivative(model.layer(L - 1).activation, pre[c]);
    }
    deltas[L - 1] = std::move(last);

    for (std::size_t l = L - 1; l > 0; --l) {
        Matrix next = linalg::matmul(deltas[l], model.layer(l).weights);
        const Matrix& pre = cache.preactivations[l - 1];
        const Activation act = model.layer(l - 1).activation;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c) {
                double* row = next.row(i * k + c);
                const double* p = pre.row(i);
                for (std::size_t j = 0; j < next.cols(); ++j)
                    row[j] *= activation_derivative(act, p[j]);
            }
        }
        deltas[l - 1] = std::move(next);
    }
    return deltas;
}

Matrix jacobian_from_delta(const Matrix& delta, const Matrix& prev_activation, std::size_t n,
                           std::size_t k) {
    const std::size_t fan_out = delta.cols();
    const std::size_t fan_in = prev_activation.cols();
    Matrix jac(n * k, fan_out * (fan_in + 1));
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = prev_activation.row(i);
        for (std::size_t c = 0; c < k; ++c) {
            const std::size_t r = i * k + c;
            const double* d = delta.row(r);
            double* out = jac.row(r);
            for (std::size_t o = 0; o < fan_out; ++o)
                kernels::scale_copy(d[o], a, out + o * fan_in, fan_in);
            // bias block
            std::copy_n(d, fan_out, out + fan_out * fan_in);
        }
    }
    return jac;
}

}  // namespace

std::vector<Matrix> all_layer_jacobians(const LayeredModel& model, const Matrix& inputs) {
    const auto cache = model.forward_cached(inputs);
    const auto deltas = output_deltas(model, cache);
    const std::size_t n = inputs.rows();
    const std::size_t k = model.output_dim();
    std::vector<Matrix> jacobians(model.layer_count());
    for (std::size_t l = 0; l < model.layer_count(); ++l)
        jacobians[l] = jacobian_from_delta(deltas[l], cache.activations[l], n, k);
    return jacobians;
}

Matrix layer_jacobian(const LayeredModel& model, const Matrix& inputs, std::size_t l) {
    if (l >= model.layer_count()) throw ConfigError("layer index out of range");
    const auto cache = model.forward_cached(inputs);
    const auto deltas = output_deltas(model, cache);
    return jacobian_from_delta(deltas[l], cache.activations[l], inputs.rows(),
                               model.output_dim());
}

namespace {

Matrix softmax(const Matrix& outputs) {
    Matrix p(outputs.rows(), outputs.cols());
    for (std::size_t i = 0; i < outputs.rows(); ++i) {
        const double* z = outputs.row(i);
        double zmax = z[0];
        for (std::size_t c = 1; c < outputs.cols(); ++c) zmax = std::max(zmax, z[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < outputs.cols(); ++c) {
            p(i, c) = std::exp(z[c] - zmax);
            sum += p(i, c);
        }
        for (std::size_t c = 0; c < outputs.cols(); ++c) p(i, c) /= sum;
    }
    return p;
}

}  // namespace

double loss_value(const Matrix& outputs, const Matrix& targets, LossKind kind) {
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
        throw ConfigError("loss: outputs/targets shape mismatch");
    const std::size_t n = outputs.rows();
    if (kind == LossKind::squared_error) {
        double s = 0.0;
        for (std::size_t idx = 0; idx < outputs.size(); ++idx) {
            const double d = outputs.data()[idx] - targets.data()[idx];
            s += d * d;
        }
        return 0.5 * s;
    }
    const Matrix p = softmax(outputs);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < outputs.cols(); ++c)
            if (targets(i, c) > 0.0)
                s -= targets(i, c) * std::log(std::max(p(i, c), 1e-300));
    return s / static_cast<double>(n);
}

Matrix output_loss_gradient(const Matrix& outputs, const Matrix& targets, LossKind kind) {
    Matrix g(outputs.rows(), outputs.cols());
    if (kind == LossKind::squared_error) {
        for (std::size_t idx = 0; idx < outputs.size(); ++idx)
            g.data()[idx] = outputs.data()[idx] - targets.data()[idx];
        return g;
    }
    const Matrix p = softmax(outputs);
    const double inv_n = 1.0 / static_cast<double>(outputs.rows());
    for (std::size_t idx = 0; idx < outputs.size(); ++idx)
        g.data()[idx] = (p.data()[idx] - targets.data()[idx]) * inv_n;
    return g;
}

LossGrads loss_and_layer_grads(const LayeredModel& model, const Matrix& inputs,
                               const Matrix& targets, LossKind kind) {
    const auto cache = model.forward_cached(inputs);
    const Matrix& outputs = cache.outputs();
    LossGrads result;
    result.loss = loss_value(outputs, targets, kind);
    result.layer_grads.resize(model.layer_count());

    // delta = d loss / d preactivation of the current layer, n x fan_out
    Matrix delta = output_loss_gradient(outputs, targets, kind);
    const std::size_t L = model.layer_count();
    for (std::size_t l = L; l-- > 0;) {
        const Layer& layer = model.layer(l);
        const Matrix& pre = cache.preactivations[l];
        for (std::size_t i = 0; i < delta.rows(); ++i) {
            double* row = delta.row(i);
            const double* p = pre.row(i);
            for (std::size_t j = 0; j < delta.cols(); ++j)
                row[j] *= activation_derivative(layer.activation, p[j]);
        }
        const Matrix grad_w = linalg::matmul_tn(delta, cache.activations[l]);
        std::vector<double> flat(layer.param_count());
        std::copy_n(grad_w.data(), grad_w.size(), flat.begin());
        for (std::size_t j = 0; j < layer.fan_out(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < delta.rows(); ++i) s += delta(i, j);
            flat[grad_w.size() + j] = s;
        }
        result.layer_grads[l] = std::move(flat);
        if (l > 0) delta = linalg::matmul(delta, layer.weights);
    }
    return result;
}

double eval_loss(const LayeredModel& model, const Matrix& inputs, const Matrix& targets,
                 LossKind kind) {
    const double v = loss_value(model.forward(inputs), targets, kind);
    if (kind == LossKind::squared_error) return v / static_cast<double>(inputs.rows());
    return v;
}

double accuracy(const Matrix& outputs, std::span<const int> labels) {
    if (outputs.rows() == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < outputs.rows(); ++i) {
        const double* row = outputs.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < outputs.cols(); ++c)
            if (row[c] > row[best]) best = c;
        if (static_cast<int>(best) == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(outputs.rows());
}

}  // namespace fedsel::core
