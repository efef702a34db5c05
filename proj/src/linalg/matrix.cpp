// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsel/linalg/matrix.hpp"

#include <cassert>
#include <cmath>

#include "fedsel/kernels/kernels.hpp"

namespace fedsel::linalg {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    assert(a.cols() == b.cols());
    Matrix c(a.rows(), b.rows());
    const std::size_t k = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            ci[j] = kernels::dot(ai, b.row(j), k);
        }
    }
    return c;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    assert(a.cols() == b.rows());
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t p = 0; p < a.cols(); ++p) {
            kernels::axpy(ai[p], b.row(p), ci, b.cols());
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows());
    Matrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (std::size_t r = 0; r < a.cols(); ++r) {
            kernels::axpy(ai[r], bi, c.row(r), b.cols());
        }
    }
    return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    assert(a.cols() == x.size());
    std::vector<double> y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = kernels::dot(a.row(i), x.data(), a.cols());
    return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
    assert(a.rows() == x.size());
    std::vector<double> y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) kernels::axpy(x[i], a.row(i), y.data(), a.cols());
    return y;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

void add_inplace(Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    kernels::axpy(1.0, b.data(), a.data(), a.size());
}

void axpy_inplace(Matrix& a, double alpha, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    kernels::axpy(alpha, b.data(), a.data(), a.size());
}

double frobenius_norm(const Matrix& a) {
    return std::sqrt(kernels::dot(a.data(), a.data(), a.size()));
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

bool all_finite(const Matrix& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a.data()[i])) return false;
    return true;
}

double norm2(std::span<const double> v) {
    return std::sqrt(kernels::dot(v.data(), v.data(), v.size()));
}

void normalize(std::span<double> v) {
    const double n = norm2(v);
    if (n > 0.0) kernels::scal(1.0 / n, v.data(), v.size());
}

}  // namespace fedsel::linalg
