// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsel/lntk/lntk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <ostream>

#include "fedsel/core/parallel.hpp"
#include "fedsel/core/rng.hpp"
#include "fedsel/errors.hpp"
#include "fedsel/kernels/kernels.hpp"
#include "fedsel/linalg/sym_eigen.hpp"

namespace fedsel::lntk {

using linalg::Matrix;

GramMode GramOptions::mode_for(std::size_t classes) const {
    if (force_full && force_block_sum)
        throw ConfigError("cannot force both full and block-sum Gram modes");
    if (force_full) return GramMode::full;
    if (force_block_sum) return GramMode::class_block_sum;
    return classes <= static_cast<std::size_t>(full_gram_class_limit)
               ? GramMode::full
               : GramMode::class_block_sum;
}

namespace {

void check_cap(std::size_t dim, std::size_t cap) {
    if (dim > cap)
        throw ConfigError("Gram dimension " + std::to_string(dim) + " exceeds cap " +
                          std::to_string(cap) +
                          "; reduce the probe size or raise the gram cap");
}

// jac rows are sample-major: row (i*k + c).
Matrix gram_from_jacobian(const Matrix& jac, std::size_t n, std::size_t k, GramMode mode) {
    if (mode == GramMode::full) return linalg::matmul_nt(jac, jac);
    Matrix g(n, n);
    const std::size_t p = jac.cols();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < k; ++c)
                acc += kernels::dot(jac.row(i * k + c), jac.row(j * k + c), p);
            g(i, j) = acc;
            g(j, i) = acc;
        }
    }
    return g;
}

}  // namespace

GramMatrix lntk_gram(const core::LayeredModel& model, const Matrix& inputs, std::size_t l,
                     const GramOptions& options) {
    const std::size_t n = inputs.rows();
    const std::size_t k = model.output_dim();
    const GramMode mode = options.mode_for(k);
    check_cap(mode == GramMode::full ? n * k : n, options.dimension_cap);
    const Matrix jac = core::layer_jacobian(model, inputs, l);
    return {gram_from_jacobian(jac, n, k, mode), l, mode};
}

std::vector<GramMatrix> lntk_grams(const core::LayeredModel& model, const Matrix& inputs,
                                   const GramOptions& options) {
    const std::size_t n = inputs.rows();
    const std::size_t k = model.output_dim();
    const GramMode mode = options.mode_for(k);
    check_cap(mode == GramMode::full ? n * k : n, options.dimension_cap);
    const auto jacobians = core::all_layer_jacobians(model, inputs);
    std::vector<GramMatrix> grams;
    grams.reserve(jacobians.size());
    for (std::size_t l = 0; l < jacobians.size(); ++l)
        grams.push_back({gram_from_jacobian(jacobians[l], n, k, mode), l, mode});
    return grams;
}

PowerIterationResult power_iteration(const Matrix& gram, double tolerance, int max_iterations) {
    if (gram.rows() != gram.cols()) throw NumericalError("power_iteration: matrix not square");
    const std::size_t dim = gram.rows();
    PowerIterationResult result;
    result.vector.assign(dim, 0.0);
    if (dim == 0) {
        result.converged = true;
        return result;
    }

    double trace = 0.0;
    for (std::size_t i = 0; i < dim; ++i) trace += gram(i, i);
    if (trace <= 0.0) {
        // zero (or numerically vanished) PSD matrix
        result.vector[0] = 1.0;
        result.value = 0.0;
        result.converged = true;
        return result;
    }

    core::Rng rng(core::derive_seed(0x706F776572ull, {dim}));
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    linalg::normalize(v);

    std::vector<double> w;
    for (int it = 1; it <= max_iterations; ++it) {
        w = linalg::matvec(gram, v);
        const double norm_w = linalg::norm2(w);
        if (norm_w <= 1e-300) {
            // iterate fell into the null space; restart from a shifted vector
            for (std::size_t i = 0; i < dim; ++i) v[i] = (i + 1.0);
            linalg::normalize(v);
            continue;
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double next = w[i] / norm_w;
            const double d = next - v[i];
            diff += d * d;
            v[i] = next;
        }
        result.iterations = it;
        if (std::sqrt(diff) <= tolerance) {
            result.converged = true;
            break;
        }
    }
    w = linalg::matvec(gram, v);
    result.value = kernels::dot(v.data(), w.data(), dim);
    result.vector = std::move(v);
    return result;
}

LayerSpectrum principal_eigen(const GramMatrix& gram) {
    LayerSpectrum spectrum;
    spectrum.layer = gram.layer;
    PowerIterationResult pi = power_iteration(gram.values);
    if (pi.converged) {
        spectrum.eigenvalues = {pi.value};
        spectrum.principal_vector = std::move(pi.vector);
        return spectrum;
    }
    if (gram.values.rows() <= 64) {
        const auto eig = linalg::sym_eigen(gram.values);
        spectrum.eigenvalues = eig.values;
        spectrum.principal_vector.resize(gram.values.rows());
        for (std::size_t i = 0; i < gram.values.rows(); ++i)
            spectrum.principal_vector[i] = eig.vectors(i, 0);
        return spectrum;
    }
    throw NumericalError("principal_eigen: power iteration did not converge for layer " +
                         std::to_string(gram.layer + 1) + " (dimension " +
                         std::to_string(gram.values.rows()) + ")");
}

ImportanceMatrix importance_scores(const core::LayeredModel& model,
                                   const std::vector<core::ClientDataset>& clients,
                                   const ImportanceOptions& options) {
    const std::size_t N = clients.size();
    const std::size_t L = model.layer_count();
    ImportanceMatrix importance;
    importance.scores = Matrix(N, L);
    importance.principal_eigenvalues = Matrix(N, L);

    static std::mutex warn_mutex;

    core::parallel_for(N, options.threads, [&](std::size_t i) {
        const core::ProbeBatch probe = core::sample_probe(
            clients[i], options.probe_size, core::derive_seed(options.seed, {i}));
        const auto grams = lntk_grams(model, probe.inputs, options.gram);
        double total = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const double lambda = std::max(principal_eigen(grams[l]).eigenvalues.front(), 0.0);
            importance.principal_eigenvalues(i, l) = lambda;
            total += lambda;
        }
        if (total <= 0.0) {
            std::lock_guard<std::mutex> lock(warn_mutex);
            std::cerr << "warning: client " << i
                      << " has an all-zero layer spectrum; using a uniform importance row\n";
            for (std::size_t l = 0; l < L; ++l)
                importance.scores(i, l) = 1.0 / static_cast<double>(L);
            return;
        }
        for (std::size_t l = 0; l < L; ++l)
            importance.scores(i, l) = importance.principal_eigenvalues(i, l) / total;
    });
    return importance;
}

void write_importance_csv(const ImportanceMatrix& importance, std::ostream& out) {
    const std::size_t L = importance.scores.cols();
    out << "client";
    for (std::size_t l = 1; l <= L; ++l) out << ",s_" << l;
    out << "\n";
    char buf[32];
    for (std::size_t i = 0; i < importance.scores.rows(); ++i) {
        out << i;
        for (std::size_t l = 0; l < L; ++l) {
            std::snprintf(buf, sizeof(buf), "%.17g", importance.scores(i, l));
            out << "," << buf;
        }
        out << "\n";
    }
}

LossReductionEstimate loss_reduction_estimate(const core::LayeredModel& model,
                                              const Matrix& inputs, const Matrix& targets,
                                              core::LossKind kind, const GramOptions& options) {
    if (kind != core::LossKind::squared_error)
        throw ConfigError("loss_reduction_estimate supports squared error only");
    GramOptions opts = options;
    opts.force_full = true;
    opts.force_block_sum = false;

    const Matrix outputs = model.forward(inputs);
    const Matrix grad = core::output_loss_gradient(outputs, targets, kind);
    // flatten sample-major to match the Jacobian row ordering
    std::vector<double> g;
    g.reserve(grad.size());
    for (std::size_t i = 0; i < grad.rows(); ++i)
        for (std::size_t c = 0; c < grad.cols(); ++c) g.push_back(grad(i, c));

    const auto grams = lntk_grams(model, inputs, opts);
    LossReductionEstimate estimate;
    estimate.per_layer.resize(grams.size());
    Matrix total(grams.front().values.rows(), grams.front().values.cols());
    for (std::size_t l = 0; l < grams.size(); ++l) {
        const auto gv = linalg::matvec(grams[l].values, g);
        estimate.per_layer[l] = kernels::dot(g.data(), gv.data(), g.size());
        linalg::add_inplace(total, grams[l].values);

        const LayerSpectrum spectrum = principal_eigen(grams[l]);
        const double proj =
            kernels::dot(spectrum.principal_vector.data(), g.data(), g.size());
        estimate.rank1 += std::max(spectrum.eigenvalues.front(), 0.0) * proj * proj;
    }
    const auto tv = linalg::matvec(total, g);
    estimate.full = kernels::dot(g.data(), tv.data(), g.size());
    return estimate;
}

}  // namespace fedsel::lntk
