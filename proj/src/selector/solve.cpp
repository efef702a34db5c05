// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// The five meta-heuristic solvers behind solve(), plus the baseline
// selectors. All of them start from (or seed their archive with) the
// clients' greedy importance proposal and refine it under the two
// objectives. Every algorithm is deterministic under the config seed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <ostream>

#include "fedsel/core/rng.hpp"
#include "fedsel/errors.hpp"
#include "fedsel/selector/selector.hpp"

namespace fedsel::selector {

using core::Rng;
using linalg::Matrix;

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "nsga") return Algorithm::nsga;
    if (name == "abc") return Algorithm::abc;
    if (name == "aco") return Algorithm::aco;
    if (name == "sa") return Algorithm::sa;
    if (name == "mopso") return Algorithm::mopso;
    if (name == "lntk_only") return Algorithm::lntk_only;
    if (name == "last_k") return Algorithm::last_k;
    if (name == "random_k") return Algorithm::random_k;
    if (name == "magnitude") return Algorithm::magnitude;
    if (name == "grad_norm") return Algorithm::grad_norm;
    throw ConfigError("unknown selector algorithm: " + name);
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::nsga: return "nsga";
        case Algorithm::abc: return "abc";
        case Algorithm::aco: return "aco";
        case Algorithm::sa: return "sa";
        case Algorithm::mopso: return "mopso";
        case Algorithm::lntk_only: return "lntk_only";
        case Algorithm::last_k: return "last_k";
        case Algorithm::random_k: return "random_k";
        case Algorithm::magnitude: return "magnitude";
        case Algorithm::grad_norm: return "grad_norm";
    }
    return "nsga";
}

bool is_meta_heuristic(Algorithm a) {
    switch (a) {
        case Algorithm::nsga:
        case Algorithm::abc:
        case Algorithm::aco:
        case Algorithm::sa:
        case Algorithm::mopso: return true;
        default: return false;
    }
}

namespace {

struct Instance {
    const Matrix& importance;
    std::vector<int> budgets;
    int clients;
    int layers;
    bool variance_enabled;

    ObjectivePair eval(const SelectionMask& mask) const {
        ObjectivePair obj = evaluate(mask, importance);
        if (!variance_enabled) obj.variance = 0.0;
        return obj;
    }

    SelectionMask blank_mask() const { return SelectionMask(clients, layers, budgets); }
};

// Roulette pick of `count` distinct layers per row, weighted by importance
// (plus a floor so zero-importance layers stay reachable).
void sample_row_by_importance(SelectionMask& mask, int client, int count, const Matrix& s,
                              Rng& rng) {
    const int L = mask.layers;
    std::vector<int> pool(L);
    std::iota(pool.begin(), pool.end(), 0);
    for (int pick = 0; pick < count && !pool.empty(); ++pick) {
        double total = 0.0;
        for (int l : pool) total += s(client, l) + 1e-9;
        double r = rng.uniform() * total;
        std::size_t chosen = pool.size() - 1;
        for (std::size_t idx = 0; idx < pool.size(); ++idx) {
            r -= s(client, pool[idx]) + 1e-9;
            if (r <= 0.0) {
                chosen = idx;
                break;
            }
        }
        mask.set(client, pool[chosen], true);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
}

SelectionMask random_feasible_mask(const Instance& inst, Rng& rng) {
    SelectionMask mask = inst.blank_mask();
    for (int i = 0; i < inst.clients; ++i)
        sample_row_by_importance(mask, i, inst.budgets[i], inst.importance, rng);
    return mask;
}

// Neighborhood move: swap a selected and an unselected layer for one random
// client; occasionally grow or shrink the row inside its budget instead.
void mutate_neighbor(SelectionMask& mask, Rng& rng) {
    const int i = static_cast<int>(rng.index(mask.clients));
    std::vector<int> on;
    std::vector<int> off;
    for (int l = 0; l < mask.layers; ++l) (mask.get(i, l) ? on : off).push_back(l);

    enum Move { swap_move, add_move, remove_move };
    std::vector<Move> moves;
    if (!on.empty() && !off.empty()) moves.push_back(swap_move);
    if (static_cast<int>(on.size()) < mask.budgets[i] && !off.empty()) moves.push_back(add_move);
    if (on.size() > 1) moves.push_back(remove_move);
    if (moves.empty()) return;

    switch (moves[rng.index(moves.size())]) {
        case swap_move:
            mask.set(i, on[rng.index(on.size())], false);
            mask.set(i, off[rng.index(off.size())], true);
            break;
        case add_move: mask.set(i, off[rng.index(off.size())], true); break;
        case remove_move: mask.set(i, on[rng.index(on.size())], false); break;
    }
}

struct Individual {
    SelectionMask mask;
    ObjectivePair objectives;
};

std::vector<Individual> initial_population(const Instance& inst, const SelectionMask& greedy,
                                           int size, Rng& rng) {
    std::vector<Individual> pop;
    pop.reserve(size);
    pop.push_back({greedy, inst.eval(greedy)});
    while (static_cast<int>(pop.size()) < size) {
        SelectionMask mask = random_feasible_mask(inst, rng);
        pop.push_back({mask, inst.eval(mask)});
    }
    return pop;
}

void insert_population(ParetoArchive& archive, const std::vector<Individual>& pop) {
    for (const Individual& ind : pop) archive.insert(ind.objectives, ind.mask);
}

void trace_iteration(std::ostream* trace, int iteration, const ParetoArchive& archive) {
    if (!trace) return;
    char buf[64];
    *trace << "{\"iteration\":" << iteration << ",\"archive\":[";
    bool first = true;
    for (const auto& e : archive.entries()) {
        std::snprintf(buf, sizeof(buf), "[%.17g,%.17g]", e.objectives.importance,
                      e.objectives.variance);
        *trace << (first ? "" : ",") << buf;
        first = false;
    }
    *trace << "]}\n";
}

// ---------------------------------------------------------------------------
// NSGA: (mu+lambda) evolution with non-dominated sorting and crowding.
// ---------------------------------------------------------------------------
void solve_nsga(const Instance& inst, const SolverConfig& cfg, const SelectionMask& greedy,
                ParetoArchive& archive, Rng& rng) {
    const double mutation =
        cfg.mutation_rate > 0.0 ? cfg.mutation_rate : 1.0 / static_cast<double>(inst.layers);
    std::vector<Individual> pop = initial_population(inst, greedy, cfg.population, rng);
    insert_population(archive, pop);

    std::vector<int> rank(pop.size());
    std::vector<double> crowd(pop.size());
    auto refresh_rank_crowd = [&](const std::vector<Individual>& p) {
        std::vector<ObjectivePair> objs;
        objs.reserve(p.size());
        for (const auto& ind : p) objs.push_back(ind.objectives);
        const auto fronts = non_dominated_sort(objs);
        rank.assign(p.size(), 0);
        crowd.assign(p.size(), 0.0);
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            std::vector<ObjectivePair> front_objs;
            front_objs.reserve(fronts[f].size());
            for (int idx : fronts[f]) front_objs.push_back(objs[idx]);
            const auto d = crowding_distance(front_objs);
            for (std::size_t j = 0; j < fronts[f].size(); ++j) {
                rank[fronts[f][j]] = static_cast<int>(f);
                crowd[fronts[f][j]] = d[j];
            }
        }
    };

    auto tournament = [&]() -> const Individual& {
        const std::size_t a = rng.index(pop.size());
        const std::size_t b = rng.index(pop.size());
        if (rank[a] != rank[b]) return pop[rank[a] < rank[b] ? a : b];
        return pop[crowd[a] >= crowd[b] ? a : b];
    };

    for (int it = 0; it < cfg.iterations; ++it) {
        refresh_rank_crowd(pop);
        std::vector<Individual> offspring;
        offspring.reserve(pop.size());
        while (offspring.size() < pop.size()) {
            const Individual& pa = tournament();
            const Individual& pb = tournament();
            SelectionMask child = pa.mask;
            if (rng.uniform() < cfg.crossover_rate) {
                // uniform crossover at client-row granularity
                for (int i = 0; i < inst.clients; ++i)
                    if (rng.uniform() < 0.5)
                        for (int l = 0; l < inst.layers; ++l)
                            child.set(i, l, pb.mask.get(i, l) != 0);
            }
            for (int i = 0; i < inst.clients; ++i)
                for (int l = 0; l < inst.layers; ++l)
                    if (rng.uniform() < mutation) child.set(i, l, child.get(i, l) == 0);
            repair(child, inst.importance);
            offspring.push_back({child, inst.eval(child)});
        }
        insert_population(archive, offspring);

        // (mu+lambda) survival
        std::vector<Individual> combined = std::move(pop);
        combined.insert(combined.end(), offspring.begin(), offspring.end());
        std::vector<ObjectivePair> objs;
        objs.reserve(combined.size());
        for (const auto& ind : combined) objs.push_back(ind.objectives);
        const auto fronts = non_dominated_sort(objs);
        pop.clear();
        for (const auto& front : fronts) {
            if (pop.size() >= static_cast<std::size_t>(cfg.population)) break;
            if (pop.size() + front.size() <= static_cast<std::size_t>(cfg.population)) {
                for (int idx : front) pop.push_back(combined[idx]);
                continue;
            }
            std::vector<ObjectivePair> front_objs;
            front_objs.reserve(front.size());
            for (int idx : front) front_objs.push_back(objs[idx]);
            const auto d = crowding_distance(front_objs);
            std::vector<std::size_t> order(front.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
            for (std::size_t j = 0; pop.size() < static_cast<std::size_t>(cfg.population); ++j)
                pop.push_back(combined[front[order[j]]]);
        }
        trace_iteration(cfg.trace, it, archive);
    }
}

// ---------------------------------------------------------------------------
// ABC: employed / onlooker / scout phases over a pool of food sources.
// Onlooker probabilities combine the importance rank and the diversity
// (low-variance) rank of each source.
// ---------------------------------------------------------------------------
void solve_abc(const Instance& inst, const SolverConfig& cfg, const SelectionMask& greedy,
               ParetoArchive& archive, Rng& rng) {
    std::vector<Individual> sources = initial_population(inst, greedy, cfg.population, rng);
    std::vector<int> trials(sources.size(), 0);
    insert_population(archive, sources);

    auto try_improve = [&](std::size_t j) {
        SelectionMask neighbor = sources[j].mask;
        mutate_neighbor(neighbor, rng);
        repair(neighbor, inst.importance);
        const ObjectivePair obj = inst.eval(neighbor);
        archive.insert(obj, neighbor);
        if (dominates(obj, sources[j].objectives)) {
            sources[j] = {neighbor, obj};
            trials[j] = 0;
            return;
        }
        if (!dominates(sources[j].objectives, obj) && rng.uniform() < 0.5)
            sources[j] = {neighbor, obj};  // sideways move across the front
        ++trials[j];
    };

    for (int it = 0; it < cfg.iterations; ++it) {
        for (std::size_t j = 0; j < sources.size(); ++j) try_improve(j);

        // rank-sum onlooker weights: rank 1 = best importance / lowest variance
        std::vector<std::size_t> by_imp(sources.size());
        std::vector<std::size_t> by_var(sources.size());
        std::iota(by_imp.begin(), by_imp.end(), 0);
        std::iota(by_var.begin(), by_var.end(), 0);
        std::stable_sort(by_imp.begin(), by_imp.end(), [&](std::size_t a, std::size_t b) {
            return sources[a].objectives.importance > sources[b].objectives.importance;
        });
        std::stable_sort(by_var.begin(), by_var.end(), [&](std::size_t a, std::size_t b) {
            return sources[a].objectives.variance < sources[b].objectives.variance;
        });
        std::vector<double> weight(sources.size(), 0.0);
        for (std::size_t r = 0; r < sources.size(); ++r) {
            weight[by_imp[r]] += 1.0 / static_cast<double>(r + 1);
            weight[by_var[r]] += 1.0 / static_cast<double>(r + 1);
        }
        const double total = std::accumulate(weight.begin(), weight.end(), 0.0);

        for (std::size_t pick = 0; pick < sources.size(); ++pick) {
            double r = rng.uniform() * total;
            std::size_t j = sources.size() - 1;
            for (std::size_t idx = 0; idx < sources.size(); ++idx) {
                r -= weight[idx];
                if (r <= 0.0) {
                    j = idx;
                    break;
                }
            }
            try_improve(j);
        }

        for (std::size_t j = 0; j < sources.size(); ++j) {
            if (trials[j] > cfg.abc_limit) {
                SelectionMask fresh = random_feasible_mask(inst, rng);
                sources[j] = {fresh, inst.eval(fresh)};
                trials[j] = 0;
                archive.insert(sources[j].objectives, sources[j].mask);
            }
        }
        trace_iteration(cfg.trace, it, archive);
    }
}

// ---------------------------------------------------------------------------
// ACO: per-(client, layer) pheromone trails, construction probability
// proportional to tau^a * importance^b, evaporation plus deposits on the
// current archive members.
// ---------------------------------------------------------------------------
void solve_aco(const Instance& inst, const SolverConfig& cfg, const SelectionMask& greedy,
               ParetoArchive& archive, Rng& rng) {
    constexpr double kTauMin = 0.01;
    constexpr double kTauMax = 1.0;
    Matrix tau(inst.clients, inst.layers, 0.5);
    archive.insert(inst.eval(greedy), greedy);

    for (int it = 0; it < cfg.iterations; ++it) {
        for (int ant = 0; ant < cfg.population; ++ant) {
            SelectionMask mask = inst.blank_mask();
            for (int i = 0; i < inst.clients; ++i) {
                std::vector<int> pool(inst.layers);
                std::iota(pool.begin(), pool.end(), 0);
                for (int pick = 0; pick < inst.budgets[i]; ++pick) {
                    double total = 0.0;
                    std::vector<double> w(pool.size());
                    for (std::size_t idx = 0; idx < pool.size(); ++idx) {
                        const int l = pool[idx];
                        w[idx] = std::pow(tau(i, l), cfg.pheromone_exponent) *
                                 std::pow(inst.importance(i, l) + 1e-9, cfg.importance_exponent);
                        total += w[idx];
                    }
                    double r = rng.uniform() * total;
                    std::size_t chosen = pool.size() - 1;
                    for (std::size_t idx = 0; idx < pool.size(); ++idx) {
                        r -= w[idx];
                        if (r <= 0.0) {
                            chosen = idx;
                            break;
                        }
                    }
                    mask.set(i, pool[chosen], true);
                    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
                }
            }
            archive.insert(inst.eval(mask), mask);
        }

        // evaporate, then deposit along archive selections
        for (std::size_t idx = 0; idx < tau.size(); ++idx)
            tau.data()[idx] *= 1.0 - cfg.evaporation;
        const double deposit =
            cfg.evaporation / static_cast<double>(std::max<std::size_t>(archive.size(), 1));
        for (const auto& e : archive.entries())
            for (int i = 0; i < inst.clients; ++i)
                for (int l = 0; l < inst.layers; ++l)
                    if (e.mask.get(i, l)) tau(i, l) += deposit;
        for (std::size_t idx = 0; idx < tau.size(); ++idx)
            tau.data()[idx] = std::clamp(tau.data()[idx], kTauMin, kTauMax);
        trace_iteration(cfg.trace, it, archive);
    }
}

// ---------------------------------------------------------------------------
// SA: single trajectory with Metropolis acceptance on a scalarized energy,
// geometric cooling per iteration block. The step budget matches the
// population methods (population x iterations).
// ---------------------------------------------------------------------------
void solve_sa(const Instance& inst, const SolverConfig& cfg, const SelectionMask& greedy,
              ParetoArchive& archive, Rng& rng) {
    const ObjectivePair greedy_obj = inst.eval(greedy);
    archive.insert(greedy_obj, greedy);
    const double imp_ref = greedy_obj.importance > 0.0 ? greedy_obj.importance : 1.0;
    const double var_ref =
        std::max(1.0, static_cast<double>(inst.clients) * inst.clients / 4.0);
    const auto energy = [&](const ObjectivePair& o) {
        return -(o.importance / imp_ref) + o.variance / var_ref;
    };

    SelectionMask current = random_feasible_mask(inst, rng);
    ObjectivePair current_obj = inst.eval(current);
    archive.insert(current_obj, current);
    double temperature = cfg.initial_temperature;

    for (int it = 0; it < cfg.iterations; ++it) {
        for (int step = 0; step < cfg.population; ++step) {
            SelectionMask neighbor = current;
            mutate_neighbor(neighbor, rng);
            repair(neighbor, inst.importance);
            const ObjectivePair obj = inst.eval(neighbor);
            archive.insert(obj, neighbor);
            const double d_energy = energy(obj) - energy(current_obj);
            if (d_energy <= 0.0 ||
                rng.uniform() < std::exp(-d_energy / std::max(temperature, 1e-12))) {
                current = std::move(neighbor);
                current_obj = obj;
            }
        }
        temperature *= cfg.cooling;
        trace_iteration(cfg.trace, it, archive);
    }
}

// ---------------------------------------------------------------------------
// MOPSO: continuous positions per (client, layer) discretized to the top
// budget entries per row; leaders sampled from the archive by crowding.
// ---------------------------------------------------------------------------
void solve_mopso(const Instance& inst, const SolverConfig& cfg, const SelectionMask& greedy,
                 ParetoArchive& archive, Rng& rng) {
    struct Particle {
        Matrix position;
        Matrix velocity;
        SelectionMask best_mask;
        ObjectivePair best_obj;
        Matrix best_position;
    };

    auto discretize = [&](const Matrix& pos) {
        SelectionMask mask = inst.blank_mask();
        for (int i = 0; i < inst.clients; ++i) {
            std::vector<int> order(inst.layers);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                if (pos(i, a) != pos(i, b)) return pos(i, a) > pos(i, b);
                return a < b;
            });
            for (int r = 0; r < inst.budgets[i]; ++r) mask.set(i, order[r], true);
        }
        return mask;
    };

    std::vector<Particle> swarm(cfg.population);
    for (int p = 0; p < cfg.population; ++p) {
        Particle& particle = swarm[p];
        particle.position = Matrix(inst.clients, inst.layers);
        particle.velocity = Matrix(inst.clients, inst.layers);
        for (int i = 0; i < inst.clients; ++i) {
            double row_max = 0.0;
            for (int l = 0; l < inst.layers; ++l)
                row_max = std::max(row_max, inst.importance(i, l));
            for (int l = 0; l < inst.layers; ++l) {
                const double s_norm =
                    row_max > 0.0 ? inst.importance(i, l) / row_max : 0.0;
                // particle 0 is the greedy proposal; the rest are
                // importance-biased random positions
                particle.position(i, l) =
                    p == 0 ? s_norm : rng.uniform() * (0.25 + 0.75 * s_norm);
            }
        }
        const SelectionMask mask = discretize(particle.position);
        const ObjectivePair obj = inst.eval(mask);
        particle.best_mask = mask;
        particle.best_obj = obj;
        particle.best_position = particle.position;
        archive.insert(obj, mask);
    }

    auto pick_leader = [&]() -> const ArchiveEntry& {
        const auto& entries = archive.entries();
        if (entries.size() == 1) return entries.front();
        const auto crowd = crowding_distance(archive.objectives());
        const std::size_t a = rng.index(entries.size());
        const std::size_t b = rng.index(entries.size());
        return entries[crowd[a] >= crowd[b] ? a : b];  // prefer sparse regions
    };

    for (int it = 0; it < cfg.iterations; ++it) {
        for (Particle& particle : swarm) {
            const ArchiveEntry& leader = pick_leader();
            for (int i = 0; i < inst.clients; ++i) {
                for (int l = 0; l < inst.layers; ++l) {
                    const double r1 = rng.uniform();
                    const double r2 = rng.uniform();
                    double v = cfg.inertia * particle.velocity(i, l) +
                               cfg.cognitive * r1 *
                                   (particle.best_position(i, l) - particle.position(i, l)) +
                               cfg.social * r2 *
                                   (static_cast<double>(leader.mask.get(i, l)) -
                                    particle.position(i, l));
                    v = std::clamp(v, -1.0, 1.0);
                    particle.velocity(i, l) = v;
                    particle.position(i, l) = std::clamp(particle.position(i, l) + v, 0.0, 1.0);
                }
            }
            const SelectionMask mask = discretize(particle.position);
            const ObjectivePair obj = inst.eval(mask);
            archive.insert(obj, mask);
            if (dominates(obj, particle.best_obj) ||
                (!dominates(particle.best_obj, obj) && rng.uniform() < 0.5)) {
                particle.best_mask = mask;
                particle.best_obj = obj;
                particle.best_position = particle.position;
            }
        }
        trace_iteration(cfg.trace, it, archive);
    }
}

std::vector<int> clamp_budgets(const std::vector<int>& budgets, int layers) {
    std::vector<int> out = budgets;
    bool warned = false;
    for (int& b : out) {
        if (b > layers) {
            if (!warned) {
                std::cerr << "warning: budgets above the layer count are clamped to " << layers
                          << "\n";
                warned = true;
            }
            b = layers;
        }
        if (b < 1) throw ConfigError("budgets must be at least 1");
    }
    return out;
}

}  // namespace

SelectionMask greedy_top_b(const Matrix& importance, const std::vector<int>& budgets) {
    const int N = static_cast<int>(importance.rows());
    const int L = static_cast<int>(importance.cols());
    SelectionMask mask(N, L, clamp_budgets(budgets, L));
    for (int i = 0; i < N; ++i) {
        std::vector<int> order(L);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (importance(i, a) != importance(i, b)) return importance(i, a) > importance(i, b);
            return a < b;
        });
        for (int r = 0; r < mask.budgets[i]; ++r) mask.set(i, order[r], true);
    }
    return mask;
}

SolveResult solve(const Matrix& importance, const std::vector<int>& budgets,
                  const SolverConfig& config, const ParetoArchive* warm_archive) {
    const int N = static_cast<int>(importance.rows());
    const int L = static_cast<int>(importance.cols());
    if (N < 1 || L < 1) throw ConfigError("solve: empty importance matrix");
    if (static_cast<int>(budgets.size()) != N)
        throw ConfigError("solve: one budget per client required");

    Instance inst{importance, clamp_budgets(budgets, L), N, L, config.variance_enabled};
    const SelectionMask greedy = greedy_top_b(importance, inst.budgets);

    if (config.algorithm == Algorithm::lntk_only) {
        ParetoArchive archive(config.archive_capacity);
        archive.insert(inst.eval(greedy), greedy);
        return {archive, greedy};
    }
    if (!is_meta_heuristic(config.algorithm))
        throw ConfigError("solve: algorithm " + to_string(config.algorithm) +
                          " needs baseline signals; use baseline_select");

    if (config.population < 4 && config.algorithm != Algorithm::sa)
        throw ConfigError("population-based solvers need a population of at least 4");
    for (double rate : {config.crossover_rate, config.evaporation, config.cooling})
        if (!(rate > 0.0 && rate <= 1.0))
            throw ConfigError("solver rates must lie in (0, 1]");
    if (config.iterations < 1) throw ConfigError("iterations must be positive");

    ParetoArchive archive(config.archive_capacity);
    if (config.warm_start && warm_archive != nullptr)
        for (const auto& e : warm_archive->entries())
            if (e.mask.clients == N && e.mask.layers == L && e.mask.feasible())
                archive.insert(inst.eval(e.mask), e.mask);

    Rng rng(config.seed);
    switch (config.algorithm) {
        case Algorithm::nsga: solve_nsga(inst, config, greedy, archive, rng); break;
        case Algorithm::abc: solve_abc(inst, config, greedy, archive, rng); break;
        case Algorithm::aco: solve_aco(inst, config, greedy, archive, rng); break;
        case Algorithm::sa: solve_sa(inst, config, greedy, archive, rng); break;
        case Algorithm::mopso: solve_mopso(inst, config, greedy, archive, rng); break;
        default: break;
    }

    SolveResult result{archive, knee_point(archive).mask};
    if (config.trace) {
        *config.trace << "{\"chosen\":[";
        for (int i = 0; i < result.chosen.clients; ++i) {
            *config.trace << (i ? ",[" : "[");
            for (int l = 0; l < result.chosen.layers; ++l)
                *config.trace << (l ? "," : "") << static_cast<int>(result.chosen.get(i, l));
            *config.trace << "]";
        }
        *config.trace << "]}\n";
    }
    return result;
}

SelectionMask baseline_select(Algorithm kind, const BaselineSignals& signals,
                              const std::vector<int>& budgets, std::uint64_t seed) {
    const int N = static_cast<int>(signals.importance.rows());
    const int L = static_cast<int>(signals.importance.cols());
    const std::vector<int> clamped = clamp_budgets(budgets, L);

    auto top_by_row = [&](const Matrix& score) {
        return greedy_top_b(score, clamped);
    };

    switch (kind) {
        case Algorithm::lntk_only: return top_by_row(signals.importance);
        case Algorithm::grad_norm: return top_by_row(signals.gradient_norm);
        case Algorithm::magnitude: {
            Matrix score(N, L);
            for (int i = 0; i < N; ++i)
                for (int l = 0; l < L; ++l) score(i, l) = signals.weight_magnitude[l];
            return top_by_row(score);
        }
        case Algorithm::last_k: {
            SelectionMask mask(N, L, clamped);
            for (int i = 0; i < N; ++i)
                for (int l = L - mask.budgets[i]; l < L; ++l) mask.set(i, l, true);
            return mask;
        }
        case Algorithm::random_k: {
            SelectionMask mask(N, L, clamped);
            Rng rng(seed);
            for (int i = 0; i < N; ++i)
                for (std::size_t l : rng.sample_without_replacement(L, mask.budgets[i]))
                    mask.set(i, static_cast<int>(l), true);
            return mask;
        }
        default:
            throw ConfigError("baseline_select: " + to_string(kind) + " is not a baseline");
    }
}

}  // namespace fedsel::selector
