// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal dense row-major matrix plus the handful of products the rest of
// the library needs. Inner loops route through fedsel::kernels so they pick
// up the SIMD backend.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedsel::linalg {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    std::span<double> row_span(std::size_t i) { return {row(i), cols_}; }
    std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A * B^T, A is m x k, B is n x k, C is m x n.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// C = A * B, A is m x k, B is k x n.
Matrix matmul(const Matrix& a, const Matrix& b);

// C = A^T * B, A is n x m, B is n x k, C is m x k.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// y = A * x.
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

// y = A^T * x.
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);

Matrix transpose(const Matrix& a);

void add_inplace(Matrix& a, const Matrix& b);           // a += b
void axpy_inplace(Matrix& a, double alpha, const Matrix& b);  // a += alpha*b

double frobenius_norm(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& a);

double norm2(std::span<const double> v);
void normalize(std::span<double> v);

}  // namespace fedsel::linalg
