// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsel/core/rng.hpp"

#include <cmath>
#include <numbers>

#include "fedsel/errors.hpp"

namespace fedsel::core {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t s = splitmix64(base);
    for (std::uint64_t p : parts) s = splitmix64(s ^ splitmix64(p));
    return s;
}

double Rng::normal() {
    // u1 in (0,1] so the log is finite
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) throw NumericalError("gamma: shape must be positive");
    if (shape < 1.0) {
        const double u = 1.0 - uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::vector<double> Rng::dirichlet(double concentration, int k) {
    std::vector<double> g(k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        g[i] = gamma(concentration);
        sum += g[i];
    }
    if (sum <= 0.0) {
        // all draws underflowed; fall back to a one-hot draw, the standard
        // limit of Dirichlet as concentration -> 0
        std::vector<double> one_hot(k, 0.0);
        one_hot[index(k)] = 1.0;
        return one_hot;
    }
    for (int i = 0; i < k; ++i) g[i] /= sum;
    return g;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t j = 0; j < k && j < n; ++j) {
        const std::size_t pick = j + index(n - j);
        std::swap(pool[j], pool[pick]);
        out.push_back(pool[j]);
    }
    return out;
}

}  // namespace fedsel::core
