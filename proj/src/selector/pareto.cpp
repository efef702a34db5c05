// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Dominance machinery shared by all solvers: objective evaluation, fast
// non-dominated sorting, crowding distance, archive maintenance, knee-point
// extraction, repair, and the exhaustive small-instance front.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "fedsel/errors.hpp"
#include "fedsel/selector/selector.hpp"

namespace fedsel::selector {

using linalg::Matrix;

SelectionMask::SelectionMask(int n, int l, std::vector<int> budget_list)
    : clients(n), layers(l), bits(static_cast<std::size_t>(n) * l, 0),
      budgets(std::move(budget_list)) {
    if (static_cast<int>(budgets.size()) != n)
        throw ConfigError("mask needs one budget per client");
}

int SelectionMask::row_sum(int i) const {
    int s = 0;
    for (int l = 0; l < layers; ++l) s += get(i, l);
    return s;
}

bool SelectionMask::feasible() const {
    for (int i = 0; i < clients; ++i) {
        const int s = row_sum(i);
        if (s < 1 || s > budgets[i]) return false;
    }
    return true;
}

bool dominates(const ObjectivePair& a, const ObjectivePair& b) {
    if (a.importance < b.importance || a.variance > b.variance) return false;
    return a.importance > b.importance || a.variance < b.variance;
}

ObjectivePair evaluate(const SelectionMask& mask, const Matrix& importance) {
    if (static_cast<int>(importance.rows()) != mask.clients ||
        static_cast<int>(importance.cols()) != mask.layers)
        throw ConfigError("evaluate: mask and importance shapes differ");
    ObjectivePair obj;
    for (int i = 0; i < mask.clients; ++i)
        for (int l = 0; l < mask.layers; ++l)
            if (mask.get(i, l)) obj.importance += importance(i, l);
    obj.variance = selection_variance(selection_counts(mask));
    return obj;
}

std::vector<int> selection_counts(const SelectionMask& mask) {
    std::vector<int> counts(mask.layers, 0);
    for (int i = 0; i < mask.clients; ++i)
        for (int l = 0; l < mask.layers; ++l) counts[l] += mask.get(i, l);
    return counts;
}

double selection_variance(const std::vector<int>& counts) {
    if (counts.empty()) return 0.0;
    const double mean =
        std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());
    double var = 0.0;
    for (int c : counts) {
        const double d = c - mean;
        var += d * d;
    }
    return var / static_cast<double>(counts.size());
}

std::vector<std::vector<int>> non_dominated_sort(const std::vector<ObjectivePair>& points) {
    const int n = static_cast<int>(points.size());
    std::vector<std::vector<int>> dominated_by(n);
    std::vector<int> domination_count(n, 0);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            if (dominates(points[a], points[b])) dominated_by[a].push_back(b);
            else if (dominates(points[b], points[a])) ++domination_count[a];
        }
    }
    std::vector<std::vector<int>> fronts;
    std::vector<int> current;
    for (int i = 0; i < n; ++i)
        if (domination_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<int> next;
        for (int a : current)
            for (int b : dominated_by[a])
                if (--domination_count[b] == 0) next.push_back(b);
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<ObjectivePair>& front) {
    const int n = static_cast<int>(front.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> distance(n, 0.0);
    if (n <= 2) return std::vector<double>(n, inf);

    auto accumulate_objective = [&](auto key) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return key(front[a]) < key(front[b]); });
        const double lo = key(front[order.front()]);
        const double hi = key(front[order.back()]);
        distance[order.front()] = inf;
        distance[order.back()] = inf;
        if (hi - lo <= 0.0) return;
        for (int r = 1; r + 1 < n; ++r) {
            if (std::isinf(distance[order[r]])) continue;
            distance[order[r]] +=
                (key(front[order[r + 1]]) - key(front[order[r - 1]])) / (hi - lo);
        }
    };
    accumulate_objective([](const ObjectivePair& p) { return p.importance; });
    accumulate_objective([](const ObjectivePair& p) { return p.variance; });
    return distance;
}

void repair(SelectionMask& mask, const Matrix& importance) {
    for (int i = 0; i < mask.clients; ++i) {
        const int budget = mask.budgets[i];
        int selected = mask.row_sum(i);
        if (selected > budget) {
            // keep the top-importance selections; ties to the lower index
            std::vector<int> chosen;
            for (int l = 0; l < mask.layers; ++l)
                if (mask.get(i, l)) chosen.push_back(l);
            std::stable_sort(chosen.begin(), chosen.end(), [&](int a, int b) {
                if (importance(i, a) != importance(i, b))
                    return importance(i, a) > importance(i, b);
                return a < b;
            });
            for (std::size_t r = budget; r < chosen.size(); ++r) mask.set(i, chosen[r], false);
            selected = budget;
        }
        if (selected == 0) {
            int best = 0;
            for (int l = 1; l < mask.layers; ++l)
                if (importance(i, l) > importance(i, best)) best = l;
            mask.set(i, best, true);
        }
    }
}

ParetoArchive::ParetoArchive(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

std::vector<ObjectivePair> ParetoArchive::objectives() const {
    std::vector<ObjectivePair> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.objectives);
    return out;
}

bool ParetoArchive::insert(const ObjectivePair& objectives, const SelectionMask& mask) {
    for (const ArchiveEntry& e : entries_)
        if (dominates(e.objectives, objectives) || e.objectives == objectives) return false;
    std::erase_if(entries_,
                  [&](const ArchiveEntry& e) { return dominates(objectives, e.objectives); });
    entries_.push_back({objectives, mask});
    if (entries_.size() > capacity_) truncate();
    return true;
}

void ParetoArchive::truncate() {
    while (entries_.size() > capacity_) {
        const auto distance = crowding_distance(
            [&] {
                std::vector<ObjectivePair> objs;
                objs.reserve(entries_.size());
                for (const auto& e : entries_) objs.push_back(e.objectives);
                return objs;
            }());
        // drop the most crowded entry; later index loses on ties
        std::size_t victim = 0;
        for (std::size_t i = 1; i < entries_.size(); ++i)
            if (distance[i] <= distance[victim]) victim = i;
        entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(victim));
    }
}

const ArchiveEntry& knee_point(const ParetoArchive& archive) {
    if (archive.empty()) throw NumericalError("knee_point: empty archive");
    const auto& entries = archive.entries();
    double imp_lo = entries.front().objectives.importance;
    double imp_hi = imp_lo;
    double var_lo = entries.front().objectives.variance;
    double var_hi = var_lo;
    for (const auto& e : entries) {
        imp_lo = std::min(imp_lo, e.objectives.importance);
        imp_hi = std::max(imp_hi, e.objectives.importance);
        var_lo = std::min(var_lo, e.objectives.variance);
        var_hi = std::max(var_hi, e.objectives.variance);
    }
    const double imp_span = imp_hi - imp_lo;
    const double var_span = var_hi - var_lo;

    const ArchiveEntry* best = nullptr;
    double best_dist = 0.0;
    for (const auto& e : entries) {
        const double imp_n = imp_span > 0.0 ? (e.objectives.importance - imp_lo) / imp_span : 1.0;
        const double var_n = var_span > 0.0 ? (e.objectives.variance - var_lo) / var_span : 0.0;
        const double dist = std::sqrt((1.0 - imp_n) * (1.0 - imp_n) + var_n * var_n);
        const bool better =
            best == nullptr || dist < best_dist ||
            (dist == best_dist &&
             (e.objectives.importance > best->objectives.importance ||
              (e.objectives.importance == best->objectives.importance &&
               e.objectives.variance < best->objectives.variance)));
        if (better) {
            best = &e;
            best_dist = dist;
        }
    }
    return *best;
}

std::vector<ArchiveEntry> enumerate_true_front(const Matrix& importance,
                                               const std::vector<int>& budgets) {
    const int N = static_cast<int>(importance.rows());
    const int L = static_cast<int>(importance.cols());
    if (static_cast<int>(budgets.size()) != N)
        throw ConfigError("enumerate_true_front: one budget per client required");

    // per-client list of all full-budget layer subsets
    std::vector<std::vector<std::vector<int>>> options(N);
    double total = 1.0;
    for (int i = 0; i < N; ++i) {
        const int b = std::min(budgets[i], L);
        if (b < 1) throw ConfigError("enumerate_true_front: budgets must be >= 1");
        std::vector<int> comb(b);
        std::iota(comb.begin(), comb.end(), 0);
        for (;;) {
            options[i].push_back(comb);
            int pos = b - 1;
            while (pos >= 0 && comb[pos] == L - b + pos) --pos;
            if (pos < 0) break;
            ++comb[pos];
            for (int q = pos + 1; q < b; ++q) comb[q] = comb[q - 1] + 1;
        }
        total *= static_cast<double>(options[i].size());
        if (total > 1e7) throw ConfigError("enumeration too large; shrink the instance");
    }

    std::vector<ArchiveEntry> front;
    SelectionMask mask(N, L, budgets);
    std::vector<std::size_t> cursor(N, 0);
    for (;;) {
        std::fill(mask.bits.begin(), mask.bits.end(), 0);
        for (int i = 0; i < N; ++i)
            for (int l : options[i][cursor[i]]) mask.set(i, l, true);
        const ObjectivePair obj = evaluate(mask, importance);

        bool dominated = false;
        for (const auto& e : front)
            if (dominates(e.objectives, obj) || e.objectives == obj) {
                dominated = true;
                break;
            }
        if (!dominated) {
            std::erase_if(front,
                          [&](const ArchiveEntry& e) { return dominates(obj, e.objectives); });
            front.push_back({obj, mask});
        }

        int i = N - 1;
        while (i >= 0 && ++cursor[i] == options[i].size()) cursor[i--] = 0;
        if (i < 0) break;
    }
    std::sort(front.begin(), front.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        return a.objectives.importance > b.objectives.importance;
    });
    return front;
}

}  // namespace fedsel::selector
