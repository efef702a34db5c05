// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Server-side layer assignment: produce budget-feasible per-client layer
// masks that trade off total importance against the variance of the
// per-layer selection counts. Five meta-heuristics explore the Pareto
// front; simple baselines provide reference selections.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fedsel/linalg/matrix.hpp"

namespace fedsel::selector {

struct SelectionMask {
    int clients = 0;
    int layers = 0;
    std::vector<std::uint8_t> bits;  // clients x layers, row-major
    std::vector<int> budgets;        // per-client selection caps

    SelectionMask() = default;
    SelectionMask(int n, int l, std::vector<int> budget_list);

    std::uint8_t get(int i, int l) const { return bits[i * layers + l]; }
    void set(int i, int l, bool v) { bits[i * layers + l] = v ? 1 : 0; }
    int row_sum(int i) const;
    bool feasible() const;  // 1 <= row sum <= budget for every row

    bool operator==(const SelectionMask&) const = default;
};

struct ObjectivePair {
    double importance = 0.0;  // maximize
    double variance = 0.0;    // minimize

    bool operator==(const ObjectivePair&) const = default;
};

/// a dominates b: importance >= and variance <=, at least one strict.
bool dominates(const ObjectivePair& a, const ObjectivePair& b);

/// Exact objectives of a mask against the importance matrix.
ObjectivePair evaluate(const SelectionMask& mask, const linalg::Matrix& importance);

/// Per-layer counts n_l of clients selecting each layer.
std::vector<int> selection_counts(const SelectionMask& mask);

/// Variance of the selection-count histogram: (1/L) sum (n_l - mean)^2.
double selection_variance(const std::vector<int>& counts);

/// Fast non-dominated sort; front 0 is the maximal non-dominated set.
std::vector<std::vector<int>> non_dominated_sort(const std::vector<ObjectivePair>& points);

/// NSGA-II crowding distance over one front; extremes get +infinity.
std::vector<double> crowding_distance(const std::vector<ObjectivePair>& front);

/// Enforce feasibility in place: rows over budget keep their top-importance
/// selections (ties to the lower layer index); empty rows get the row's
/// argmax-importance layer. Feasible masks pass through unchanged.
void repair(SelectionMask& mask, const linalg::Matrix& importance);

struct ArchiveEntry {
    ObjectivePair objectives;
    SelectionMask mask;
};

/// Bounded set of mutually non-dominated entries. Inserting a dominated or
/// objective-duplicate candidate is a no-op; overflow drops the entry with
/// the smallest crowding distance.
class ParetoArchive {
public:
    explicit ParetoArchive(std::size_t capacity = 50);

    bool insert(const ObjectivePair& objectives, const SelectionMask& mask);
    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t capacity() const { return capacity_; }
    std::vector<ObjectivePair> objectives() const;

private:
    void truncate();
    std::size_t capacity_;
    std::vector<ArchiveEntry> entries_;
};

/// Knee-point extraction: normalize both objectives to [0,1] over the
/// archive and pick the entry closest to the ideal corner (best importance,
/// zero variance); ties break toward higher importance, then lower variance.
const ArchiveEntry& knee_point(const ParetoArchive& archive);

enum class Algorithm {
    nsga,
    abc,
    aco,
    sa,
    mopso,
    lntk_only,
    last_k,
    random_k,
    magnitude,
    grad_norm,
};

Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Algorithm a);
bool is_meta_heuristic(Algorithm a);

struct SolverConfig {
    Algorithm algorithm = Algorithm::nsga;
    int population = 40;
    int iterations = 100;
    double mutation_rate = -1.0;  // < 0 means 1/L
    double crossover_rate = 0.9;
    double evaporation = 0.1;        // ACO rho
    double pheromone_exponent = 1.0;
    double importance_exponent = 1.0;
    double initial_temperature = 1.0;
    double cooling = 0.95;
    double inertia = 0.7;
    double cognitive = 1.5;
    double social = 1.5;
    int abc_limit = 10;
    std::size_t archive_capacity = 50;
    bool variance_enabled = true;  // false = single-objective importance mode
    bool warm_start = false;       // reuse the previous round's archive
    std::uint64_t seed = 0;
    std::ostream* trace = nullptr;  // optional JSONL iteration trace
};

struct SolveResult {
    ParetoArchive archive;
    SelectionMask chosen;
};

/// Run the configured meta-heuristic (or lntk_only). Budgets above the
/// layer count are clamped with a warning. Deterministic under seed.
SolveResult solve(const linalg::Matrix& importance, const std::vector<int>& budgets,
                  const SolverConfig& config, const ParetoArchive* warm_archive = nullptr);

/// Per-client greedy top-budget selection by importance (the client
/// proposal that the meta-heuristics refine; also the lntk_only baseline).
SelectionMask greedy_top_b(const linalg::Matrix& importance, const std::vector<int>& budgets);

struct BaselineSignals {
    linalg::Matrix importance;             // N x L (lntk_only)
    std::vector<double> weight_magnitude;  // per-layer mean |parameter| (magnitude)
    linalg::Matrix gradient_norm;          // N x L relative gradient norms (grad_norm)
};

SelectionMask baseline_select(Algorithm kind, const BaselineSignals& signals,
                              const std::vector<int>& budgets, std::uint64_t seed);

/// Exhaustive Pareto front over all full-budget masks (every client uses
/// its whole budget). Feasible only for tiny instances; the enumeration
/// size is capped at 10^7.
std::vector<ArchiveEntry> enumerate_true_front(const linalg::Matrix& importance,
                                               const std::vector<int>& budgets);

}  // namespace fedsel::selector
