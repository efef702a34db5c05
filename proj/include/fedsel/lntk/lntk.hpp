// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Layerwise kernel Gram matrices of the model's output Jacobians, their
// principal eigenvalues, and the per-client layer importance scores built
// from them. The full-model Gram decomposes exactly as the sum of the
// per-layer Grams, and the loss-reduction diagnostic checks the quadratic
// form that makes larger principal eigenvalues mean faster loss descent.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fedsel/core/data.hpp"
#include "fedsel/core/model.hpp"
#include "fedsel/linalg/matrix.hpp"

namespace fedsel::lntk {

enum class GramMode {
    full,             // (n*k) x (n*k) Gram of the flattened output Jacobian
    class_block_sum,  // n x n sum of per-class Grams (memory fallback for large k)
};

struct GramOptions {
    std::size_t dimension_cap = 256;  // max Gram dimension
    int full_gram_class_limit = 4;    // use full mode when k <= this
    bool force_full = false;
    bool force_block_sum = false;

    GramMode mode_for(std::size_t classes) const;
};

struct GramMatrix {
    linalg::Matrix values;
    std::size_t layer = 0;
    GramMode mode = GramMode::full;
};

/// Gram of layer l's output Jacobian on the probe inputs. Throws
/// ConfigError when the Gram dimension would exceed the cap.
GramMatrix lntk_gram(const core::LayeredModel& model, const linalg::Matrix& inputs,
                     std::size_t l, const GramOptions& options = {});

/// All layers from one backward sweep (same result as per-layer calls).
std::vector<GramMatrix> lntk_grams(const core::LayeredModel& model,
                                   const linalg::Matrix& inputs,
                                   const GramOptions& options = {});

struct LayerSpectrum {
    std::vector<double> eigenvalues;        // descending; at least the head
    std::vector<double> principal_vector;   // unit norm
    std::size_t layer = 0;
};

struct PowerIterationResult {
    double value = 0.0;
    std::vector<double> vector;
    int iterations = 0;
    bool converged = false;
};

/// Power iteration on a symmetric PSD matrix; tolerance is on the change of
/// the iterate between steps.
PowerIterationResult power_iteration(const linalg::Matrix& gram, double tolerance = 1e-8,
                                     int max_iterations = 1000);

/// Principal eigenpair. Power iteration first; on non-convergence a full
/// Jacobi decomposition is used for dimensions <= 64, otherwise a
/// NumericalError is raised.
LayerSpectrum principal_eigen(const GramMatrix& gram);

struct ImportanceMatrix {
    linalg::Matrix scores;                 // N x L, rows sum to 1
    linalg::Matrix principal_eigenvalues;  // N x L raw lambda_1 values
};

struct ImportanceOptions {
    int probe_size = 64;
    GramOptions gram;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Client-specific normalized layer importance. A client whose principal
/// eigenvalues are all zero gets a uniform row (with a warning on stderr).
ImportanceMatrix importance_scores(const core::LayeredModel& model,
                                   const std::vector<core::ClientDataset>& clients,
                                   const ImportanceOptions& options);

/// Export scores as CSV: rows are clients, columns are layers.
void write_importance_csv(const ImportanceMatrix& importance, std::ostream& out);

struct LossReductionEstimate {
    double full = 0.0;               // g^T (sum_l Gram_l) g  with g = d loss / d outputs
    std::vector<double> per_layer;   // addends g^T Gram_l g
    double rank1 = 0.0;              // sum_l lambda_1 (u_1^T g)^2
};

/// Squared-error-only diagnostic; any other loss kind is rejected.
LossReductionEstimate loss_reduction_estimate(const core::LayeredModel& model,
                                              const linalg::Matrix& inputs,
                                              const linalg::Matrix& targets,
                                              core::LossKind kind = core::LossKind::squared_error,
                                              const GramOptions& options = {});

}  // namespace fedsel::lntk
