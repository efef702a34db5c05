// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "fedsel/linalg/matrix.hpp"

namespace fedsel::linalg {

/// Eigenvalues in descending order; column j of `vectors` is the unit
/// eigenvector for `values[j]`.
struct EigenDecomposition {
    std::vector<double> values;
    Matrix vectors;
};

/// Full eigendecomposition of a real symmetric matrix by cyclic Jacobi
/// rotations. Intended for the modest dimensions this library works with
/// (a few hundred at most). Throws NumericalError if the sweep limit is
/// reached without convergence.
EigenDecomposition sym_eigen(const Matrix& a, int max_sweeps = 64);

}  // namespace fedsel::linalg
