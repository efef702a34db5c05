// Copyright (c) 2026 fedsel authors
// SPDX-License-Identifier: Apache-2.0

#include "fedsel/report/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fedsel/errors.hpp"

#include "json.hpp"

namespace fedsel::report {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    return out;
}

}  // namespace

double hypervolume(const std::vector<selector::ObjectivePair>& points,
                   const selector::ObjectivePair& reference) {
    if (points.empty()) return 0.0;
    for (const auto& p : points)
        if (!selector::dominates(p, reference))
            throw ConfigError("hypervolume: reference must be dominated by every point");

    // keep the non-dominated subset only
    std::vector<selector::ObjectivePair> front;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points)
            if (selector::dominates(q, p)) {
                dominated = true;
                break;
            }
        if (!dominated) front.push_back(p);
    }
    std::sort(front.begin(), front.end(), [](const auto& a, const auto& b) {
        if (a.variance != b.variance) return a.variance < b.variance;
        return a.importance > b.importance;
    });
    front.erase(std::unique(front.begin(), front.end()), front.end());

    // staircase sweep from the lowest-variance point upward
    double area = 0.0;
    for (std::size_t i = 0; i < front.size(); ++i) {
        const double next_var = i + 1 < front.size() ? front[i + 1].variance : reference.variance;
        area += (front[i].importance - reference.importance) * (next_var - front[i].variance);
    }
    return area;
}

void SelectionHistogram::add_round(const std::vector<int>& counts) {
    if (layers == 0) {
        layers = static_cast<int>(counts.size());
        cumulative.assign(layers, 0);
    }
    if (static_cast<int>(counts.size()) != layers)
        throw ConfigError("histogram: inconsistent layer count");
    per_round.push_back(counts);
    for (int l = 0; l < layers; ++l) cumulative[l] += counts[l];
    variance_series.push_back(selector::selection_variance(counts));
}

SelectionHistogram histogram_from_records(const std::vector<fed::RoundRecord>& records) {
    SelectionHistogram histogram;
    for (const auto& r : records) histogram.add_round(r.selection_counts);
    return histogram;
}

std::vector<int> dense_rank_desc(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<int> ranks(values.size(), 0);
    int rank = 0;
    double previous = 0.0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        if (pos == 0 || values[order[pos]] != previous) ++rank;
        previous = values[order[pos]];
        ranks[order[pos]] = rank;
    }
    return ranks;
}

RankHeatmap rank_heatmap_from_records(const std::vector<fed::RoundRecord>& records) {
    RankHeatmap heatmap;
    for (const auto& r : records) {
        if (r.importance.empty()) continue;
        std::vector<double> mean(r.importance.cols(), 0.0);
        for (std::size_t i = 0; i < r.importance.rows(); ++i)
            for (std::size_t l = 0; l < r.importance.cols(); ++l)
                mean[l] += r.importance(i, l) / static_cast<double>(r.importance.rows());
        heatmap.ranks.push_back(dense_rank_desc(mean));
    }
    return heatmap;
}

int rounds_to_target(const std::vector<fed::RoundRecord>& records, double target_loss) {
    for (const auto& r : records)
        if (r.global_loss <= target_loss) return r.round;
    return static_cast<int>(records.size()) + 1;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ConfigError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

void write_records_csv(const std::string& path, const std::vector<fed::RoundRecord>& records) {
    const int L = records.empty() ? 0 : static_cast<int>(records.front().selection_counts.size());
    auto out = open_out(path);
    out << "round,entity,loss,accuracy,importance_obj,variance_obj";
    for (int l = 1; l <= L; ++l) out << ",n_" << l;
    out << "\n";
    for (const auto& r : records) {
        for (std::size_t c = 0; c < r.clients.size(); ++c) {
            const auto& m = r.clients[c];
            out << r.round << "," << m.client << "," << fmt(m.train_loss) << ","
                << fmt(m.eval_accuracy) << "," << fmt(r.objectives.importance) << ","
                << fmt(r.objectives.variance);
            // client rows carry the client's own mask bits
            for (int l = 0; l < L; ++l)
                out << "," << static_cast<int>(r.mask.get(static_cast<int>(c), l));
            out << "\n";
        }
        out << r.round << ",global," << fmt(r.global_loss) << "," << fmt(r.global_accuracy)
            << "," << fmt(r.objectives.importance) << "," << fmt(r.objectives.variance);
        for (int l = 0; l < L; ++l) out << "," << r.selection_counts[l];
        out << "\n";
    }
}

void write_records_json(const std::string& path, const std::vector<fed::RoundRecord>& records) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json round;
        round["round"] = r.round;
        round["global"] = {{"loss", r.global_loss}, {"accuracy", r.global_accuracy}};
        round["objectives"] = {{"importance", r.objectives.importance},
                               {"variance", r.objectives.variance}};
        round["selection_counts"] = r.selection_counts;
        round["wall_ms"] = r.wall_ms;
        round["clients"] = nlohmann::json::array();
        for (const auto& m : r.clients)
            round["clients"].push_back({{"id", m.client},
                                        {"train_loss", m.train_loss},
                                        {"eval_loss", m.eval_loss},
                                        {"eval_accuracy", m.eval_accuracy}});
        doc.push_back(std::move(round));
    }
    open_out(path) << doc.dump(2) << "\n";
}

void write_histogram_csv(const std::string& path, const SelectionHistogram& histogram) {
    auto out = open_out(path);
    out << "round";
    for (int l = 1; l <= histogram.layers; ++l) out << ",n_" << l;
    out << ",variance\n";
    for (std::size_t t = 0; t < histogram.per_round.size(); ++t) {
        out << (t + 1);
        for (int l = 0; l < histogram.layers; ++l) out << "," << histogram.per_round[t][l];
        out << "," << fmt(histogram.variance_series[t]) << "\n";
    }
    std::vector<int> totals(histogram.cumulative.begin(), histogram.cumulative.end());
    out << "total";
    for (int l = 0; l < histogram.layers; ++l) out << "," << histogram.cumulative[l];
    out << "," << fmt(selector::selection_variance(totals)) << "\n";
}

void write_importance_csv(const std::string& path,
                          const std::vector<fed::RoundRecord>& records) {
    const std::size_t L =
        records.empty() || records.front().importance.empty() ? 0
                                                              : records.front().importance.cols();
    auto out = open_out(path);
    out << "round,client";
    for (std::size_t l = 1; l <= L; ++l) out << ",s_" << l;
    out << "\n";
    for (const auto& r : records) {
        if (r.importance.empty()) continue;
        for (std::size_t i = 0; i < r.importance.rows(); ++i) {
            out << r.round << "," << i;
            for (std::size_t l = 0; l < r.importance.cols(); ++l)
                out << "," << fmt(r.importance(i, l));
            out << "\n";
        }
    }
}

void write_archive_jsonl(const std::string& path, const std::vector<fed::RoundRecord>& records) {
    auto out = open_out(path);
    for (const auto& r : records) {
        out << "{\"round\":" << r.round << ",\"archive\":[";
        for (std::size_t e = 0; e < r.archive_objectives.size(); ++e) {
            out << (e ? "," : "") << "[" << fmt(r.archive_objectives[e].importance) << ","
                << fmt(r.archive_objectives[e].variance) << "]";
        }
        out << "],\"objectives\":[" << fmt(r.objectives.importance) << ","
            << fmt(r.objectives.variance) << "],\"chosen\":[";
        for (int i = 0; i < r.mask.clients; ++i) {
            out << (i ? ",[" : "[");
            for (int l = 0; l < r.mask.layers; ++l)
                out << (l ? "," : "") << static_cast<int>(r.mask.get(i, l));
            out << "]";
        }
        out << "]}\n";
    }
}

// --- SVG -------------------------------------------------------------------

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 20.0;
constexpr double kMarginBottom = 40.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string svg_header() {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
       << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    return os.str();
}

void svg_axes(std::ostringstream& os) {
    os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
       << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
       << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";
}

}  // namespace

void write_loss_curves_svg(const std::string& path, const std::vector<LossCurve>& curves) {
    std::ostringstream os;
    os << svg_header();
    svg_axes(os);

    std::size_t max_len = 0;
    double lo = 0.0;
    double hi = 1.0;
    bool any = false;
    for (const auto& c : curves) {
        max_len = std::max(max_len, c.values.size());
        for (double v : c.values) {
            if (!any) {
                lo = hi = v;
                any = true;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!any) {
        os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
           << "\" text-anchor=\"middle\" font-size=\"14\">no data</text>\n</svg>\n";
        open_out(path) << os.str();
        return;
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& curve = curves[c];
        if (curve.values.empty()) continue;
        os << "<polyline fill=\"none\" stroke=\"" << kPalette[c % 8]
           << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t t = 0; t < curve.values.size(); ++t) {
            const double x =
                kMarginLeft +
                plot_w * (max_len <= 1 ? 0.0
                                       : static_cast<double>(t) / static_cast<double>(max_len - 1));
            const double y =
                kHeight - kMarginBottom - plot_h * (curve.values[t] - lo) / (hi - lo);
            os << fmt2(x) << "," << fmt2(y) << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << kMarginLeft + 8 << "\" y=\"" << kMarginTop + 14 + 16 * c
           << "\" font-size=\"12\" fill=\"" << kPalette[c % 8] << "\">" << curve.label
           << "</text>\n";
    }
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8
       << "\" text-anchor=\"middle\" font-size=\"12\">round</text>\n";
    os << "<text x=\"14\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
       << kHeight / 2 << ")\">loss</text>\n";
    os << "</svg>\n";
    open_out(path) << os.str();
}

void write_histogram_svg(const std::string& path, const SelectionHistogram& histogram) {
    std::ostringstream os;
    os << svg_header();
    svg_axes(os);
    if (histogram.layers == 0) {
        os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
           << "\" text-anchor=\"middle\" font-size=\"14\">no data</text>\n</svg>\n";
        open_out(path) << os.str();
        return;
    }
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const long max_count = std::max(
        1L, *std::max_element(histogram.cumulative.begin(), histogram.cumulative.end()));
    const double bar_w = plot_w / histogram.layers;
    for (int l = 0; l < histogram.layers; ++l) {
        const double h = plot_h * static_cast<double>(histogram.cumulative[l]) /
                         static_cast<double>(max_count);
        os << "<rect x=\"" << fmt2(kMarginLeft + l * bar_w + 2) << "\" y=\""
           << fmt2(kHeight - kMarginBottom - h) << "\" width=\"" << fmt2(bar_w - 4)
           << "\" height=\"" << fmt2(h) << "\" fill=\"#1f77b4\"/>\n";
        os << "<text x=\"" << fmt2(kMarginLeft + (l + 0.5) * bar_w) << "\" y=\""
           << kHeight - kMarginBottom + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
           << (l + 1) << "</text>\n";
    }
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8
       << "\" text-anchor=\"middle\" font-size=\"12\">layer</text>\n";
    os << "<text x=\"14\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
       << kHeight / 2 << ")\">selections</text>\n";
    os << "</svg>\n";
    open_out(path) << os.str();
}

void write_rank_heatmap_svg(const std::string& path, const RankHeatmap& heatmap) {
    std::ostringstream os;
    os << svg_header();
    if (heatmap.ranks.empty()) {
        os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
           << "\" text-anchor=\"middle\" font-size=\"14\">no data</text>\n</svg>\n";
        open_out(path) << os.str();
        return;
    }
    const std::size_t rounds = heatmap.ranks.size();
    const std::size_t layers = heatmap.ranks.front().size();
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const double cell_w = plot_w / static_cast<double>(rounds);
    const double cell_h = plot_h / static_cast<double>(layers);
    int max_rank = 1;
    for (const auto& row : heatmap.ranks)
        for (int r : row) max_rank = std::max(max_rank, r);
    for (std::size_t t = 0; t < rounds; ++t) {
        for (std::size_t l = 0; l < layers; ++l) {
            // rank 1 darkest
            const double shade =
                max_rank <= 1 ? 0.0
                              : static_cast<double>(heatmap.ranks[t][l] - 1) / (max_rank - 1);
            const int value = static_cast<int>(40 + 200 * shade);
            os << "<rect x=\"" << fmt2(kMarginLeft + t * cell_w) << "\" y=\""
               << fmt2(kMarginTop + l * cell_h) << "\" width=\"" << fmt2(cell_w) << "\" height=\""
               << fmt2(cell_h) << "\" fill=\"rgb(" << value << "," << value << ",255)\"/>\n";
        }
    }
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8
       << "\" text-anchor=\"middle\" font-size=\"12\">round</text>\n";
    os << "<text x=\"14\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
       << kHeight / 2 << ")\">layer</text>\n";
    os << "</svg>\n";
    open_out(path) << os.str();
}

void emit_reports(const std::string& out_dir, const std::vector<fed::RoundRecord>& records) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/plots");

    write_records_csv(out_dir + "/records.csv", records);
    write_records_json(out_dir + "/records.json", records);
    const SelectionHistogram histogram = histogram_from_records(records);
    write_histogram_csv(out_dir + "/histogram.csv", histogram);
    write_importance_csv(out_dir + "/importance.csv", records);
    write_archive_jsonl(out_dir + "/archive.jsonl", records);

    std::vector<LossCurve> curves;
    LossCurve global{"global eval loss", {}};
    for (const auto& r : records) global.values.push_back(r.global_loss);
    curves.push_back(std::move(global));
    write_loss_curves_svg(out_dir + "/plots/loss_curves.svg", curves);
    write_histogram_svg(out_dir + "/plots/selection_histogram.svg", histogram);
    write_rank_heatmap_svg(out_dir + "/plots/rank_heatmap.svg",
                           rank_heatmap_from_records(records));
}

// --- plot re-rendering from CSV --------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace

void rerender_plots(const std::string& dir) {
    namespace fs = std::filesystem;
    const std::string records_path = dir + "/records.csv";
    const std::string histogram_path = dir + "/histogram.csv";
    std::ifstream records_in(records_path);
    if (!records_in) throw ConfigError("cannot read " + records_path);
    fs::create_directories(dir + "/plots");

    std::string line;
    std::getline(records_in, line);  // header
    LossCurve global{"global eval loss", {}};
    while (std::getline(records_in, line)) {
        const auto cells = split_csv_line(line);
        if (cells.size() >= 3 && cells[1] == "global")
            global.values.push_back(std::stod(cells[2]));
    }
    write_loss_curves_svg(dir + "/plots/loss_curves.svg", {global});

    std::ifstream histogram_in(histogram_path);
    if (!histogram_in) throw ConfigError("cannot read " + histogram_path);
    std::getline(histogram_in, line);
    const int layers = static_cast<int>(split_csv_line(line).size()) - 2;
    SelectionHistogram histogram(std::max(layers, 0));
    while (std::getline(histogram_in, line)) {
        const auto cells = split_csv_line(line);
        if (cells.empty() || cells[0] == "total") continue;
        std::vector<int> counts;
        for (int l = 0; l < layers; ++l) counts.push_back(std::stoi(cells[l + 1]));
        histogram.add_round(counts);
    }
    write_histogram_svg(dir + "/plots/selection_histogram.svg", histogram);

    const std::string importance_path = dir + "/importance.csv";
    std::ifstream importance_in(importance_path);
    if (importance_in) {
        std::getline(importance_in, line);
        const int cols = static_cast<int>(split_csv_line(line).size()) - 2;
        std::vector<std::vector<double>> mean_rows;
        std::vector<int> row_counts;
        int last_round = -1;
        while (std::getline(importance_in, line)) {
            const auto cells = split_csv_line(line);
            if (static_cast<int>(cells.size()) != cols + 2) continue;
            const int round = std::stoi(cells[0]);
            if (round != last_round) {
                mean_rows.emplace_back(cols, 0.0);
                row_counts.push_back(0);
                last_round = round;
            }
            for (int l = 0; l < cols; ++l) mean_rows.back()[l] += std::stod(cells[l + 2]);
            ++row_counts.back();
        }
        RankHeatmap heatmap;
        for (std::size_t t = 0; t < mean_rows.size(); ++t) {
            for (double& v : mean_rows[t]) v /= std::max(row_counts[t], 1);
            heatmap.ranks.push_back(dense_rank_desc(mean_rows[t]));
        }
        write_rank_heatmap_svg(dir + "/plots/rank_heatmap.svg", heatmap);
    }
}

}  // namespace fedsel::report
