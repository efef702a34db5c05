// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Reproducible random numbers. The engine is std::mt19937_64 (bit-exact by
// the standard); the distribution transforms are implemented here because
// the standard library's distributions are implementation-defined and would
// break cross-compiler reproducibility of seeded runs.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fedsel::core {

/// Mix a base seed with stream labels into an independent derived seed
/// (splitmix64 finalizer applied per part).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (two engine draws per sample).
    double normal();

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze.
    double gamma(double shape);

    /// Dirichlet(concentration * 1_k).
    std::vector<double> dirichlet(double concentration, int k);

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

    /// k distinct indices from [0, n), in selection order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

}  // namespace fedsel::core
