// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops behind the dense linear algebra layer.
// Scalar reference implementations always exist; on x86-64 an AVX2+FMA
// variant is selected at runtime when the CPU supports it. Both backends
// are equivalence-tested against each other (tests/test_kernels.cpp).

#pragma once

#include <cstddef>
#include <string_view>

namespace fedsel::kernels {

enum class Backend { scalar, avx2 };

/// Backend currently used by the dispatching entry points.
Backend active_backend();

std::string_view backend_name(Backend b);

/// Force a specific backend (used by the equivalence tests). Requesting
/// Backend::avx2 on a CPU without AVX2+FMA throws std::runtime_error.
void set_backend(Backend b);

/// Re-run CPU detection and restore the default backend choice.
void reset_backend();

bool cpu_has_avx2();

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x[i] *= alpha
void scal(double alpha, double* x, std::size_t n);

// dst[i] = alpha * src[i]
void scale_copy(double alpha, const double* src, double* dst, std::size_t n);

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void scal_scalar(double alpha, double* x, std::size_t n);
void scale_copy_scalar(double alpha, const double* src, double* dst, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scal_avx2(double alpha, double* x, std::size_t n);
void scale_copy_avx2(double alpha, const double* src, double* dst, std::size_t n);
#endif

}  // namespace detail

}  // namespace fedsel::kernels
