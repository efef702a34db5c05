// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsel/kernels/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace fedsel::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void scale_copy_scalar(double alpha, const double* src, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = alpha * src[i];
}

}  // namespace detail

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

struct Dispatch {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scal)(double, double*, std::size_t);
    void (*scale_copy)(double, const double*, double*, std::size_t);
};

constexpr Dispatch kScalar{Backend::scalar, detail::dot_scalar, detail::axpy_scalar,
                           detail::scal_scalar, detail::scale_copy_scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Dispatch kAvx2{Backend::avx2, detail::dot_avx2, detail::axpy_avx2,
                         detail::scal_avx2, detail::scale_copy_avx2};
#endif

const Dispatch* detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) return &kAvx2;
#endif
    return &kScalar;
}

std::atomic<const Dispatch*> g_dispatch{nullptr};

const Dispatch* dispatch() {
    const Dispatch* d = g_dispatch.load(std::memory_order_acquire);
    if (d == nullptr) {
        d = detect();
        g_dispatch.store(d, std::memory_order_release);
    }
    return d;
}

}  // namespace

Backend active_backend() { return dispatch()->backend; }

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

void set_backend(Backend b) {
    if (b == Backend::scalar) {
        g_dispatch.store(&kScalar, std::memory_order_release);
        return;
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::avx2 && cpu_has_avx2()) {
        g_dispatch.store(&kAvx2, std::memory_order_release);
        return;
    }
#endif
    throw std::runtime_error("requested kernel backend is not supported on this CPU");
}

void reset_backend() { g_dispatch.store(detect(), std::memory_order_release); }

double dot(const double* a, const double* b, std::size_t n) { return dispatch()->dot(a, b, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    dispatch()->axpy(alpha, x, y, n);
}

void scal(double alpha, double* x, std::size_t n) { dispatch()->scal(alpha, x, n); }

void scale_copy(double alpha, const double* src, double* dst, std::size_t n) {
    dispatch()->scale_copy(alpha, src, dst, n);
}

}  // namespace fedsel::kernels
