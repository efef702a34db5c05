// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0
//
// Derived metrics and report artifacts: selection histograms, rank
// heatmaps, exact 2-D hypervolume, CSV/JSON emission and deterministic
// SVG plots.

#pragma once

#include <string>
#include <vector>

#include "fedsel/fedsim/fedsim.hpp"
#include "fedsel/selector/selector.hpp"

namespace fedsel::report {

/// Exact two-objective hypervolume (importance maximized, variance
/// minimized) of the non-dominated subset of `points` against a reference
/// that every point must dominate. Throws ConfigError on an invalid
/// reference.
double hypervolume(const std::vector<selector::ObjectivePair>& points,
                   const selector::ObjectivePair& reference);

struct SelectionHistogram {
    int layers = 0;
    std::vector<long> cumulative;              // per-layer totals over all rounds
    std::vector<std::vector<int>> per_round;   // n_l per round
    std::vector<double> variance_series;       // s^2(t)

    explicit SelectionHistogram(int layer_count = 0)
        : layers(layer_count), cumulative(layer_count, 0) {}
    void add_round(const std::vector<int>& counts);
};

SelectionHistogram histogram_from_records(const std::vector<fed::RoundRecord>& records);

/// Dense ranking, descending: the largest value gets rank 1, ties share a
/// rank, and the next distinct value gets the next rank.
std::vector<int> dense_rank_desc(const std::vector<double>& values);

struct RankHeatmap {
    std::vector<std::vector<int>> ranks;  // rounds x layers
};

/// Aggregate layer ranks per round from the mean importance over clients.
RankHeatmap rank_heatmap_from_records(const std::vector<fed::RoundRecord>& records);

/// First round whose global eval loss is <= target; rounds+1 if never.
int rounds_to_target(const std::vector<fed::RoundRecord>& records, double target_loss);

double median(std::vector<double> values);

// --- emission ------------------------------------------------------------
// All text output is byte-stable for identical inputs.

void write_records_csv(const std::string& path, const std::vector<fed::RoundRecord>& records);
void write_records_json(const std::string& path, const std::vector<fed::RoundRecord>& records);
void write_histogram_csv(const std::string& path, const SelectionHistogram& histogram);
void write_importance_csv(const std::string& path, const std::vector<fed::RoundRecord>& records);
void write_archive_jsonl(const std::string& path, const std::vector<fed::RoundRecord>& records);

struct LossCurve {
    std::string label;
    std::vector<double> values;  // per round
};

void write_loss_curves_svg(const std::string& path, const std::vector<LossCurve>& curves);
void write_histogram_svg(const std::string& path, const SelectionHistogram& histogram);
void write_rank_heatmap_svg(const std::string& path, const RankHeatmap& heatmap);

/// Writes records.csv / records.json / histogram.csv / importance.csv /
/// archive.jsonl plus plots/*.svg under out_dir (created if needed).
void emit_reports(const std::string& out_dir, const std::vector<fed::RoundRecord>& records);

/// Re-render the SVG plots from records.csv / histogram.csv in `dir`.
void rerender_plots(const std::string& dir);

}  // namespace fedsel::report
