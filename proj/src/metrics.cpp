#include "exiffi/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "exiffi/errors.hpp"
#include "exiffi/forest.hpp"

namespace exiffi {

namespace {

void check_sizes(std::span<const double> scores,
                 std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw ShapeError("scores and labels differ in length");
    if (scores.empty()) throw ShapeError("empty score vector");
}

std::size_t count_positives(std::span<const std::uint8_t> labels) {
    std::size_t m = 0;
    for (auto v : labels) m += (v != 0);
    return m;
}

}  // namespace

double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels) {
    check_sizes(scores, labels);
    const std::size_t n = scores.size();
    const std::size_t n_pos = count_positives(labels);
    if (n_pos == 0 || n_pos == n)
        throw PartitionError("average precision needs both classes");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Tied scores form one threshold group, so tie order cannot matter.
    double ap = 0.0;
    double recall_prev = 0.0;
    std::size_t cum = 0, tp = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            tp += (labels[order[j]] != 0);
            ++j;
        }
        cum = j;
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision =
            static_cast<double>(tp) / static_cast<double>(cum);
        ap += (recall - recall_prev) * precision;
        recall_prev = recall;
        i = j;
    }
    return ap;
}

double roc_auc(std::span<const double> scores,
               std::span<const std::uint8_t> labels) {
    check_sizes(scores, labels);
    const std::size_t n = scores.size();
    const std::size_t n_pos = count_positives(labels);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw PartitionError("ROC AUC needs both classes");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Rank-sum with midranks for ties gives P(s+ > s-) + P(tie)/2.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        std::size_t pos_in_group = 0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            pos_in_group += (labels[order[j]] != 0);
            ++j;
        }
        const double mid_rank = 0.5 * (static_cast<double>(i + 1) +
                                       static_cast<double>(j));
        rank_sum_pos += mid_rank * static_cast<double>(pos_in_group);
        i = j;
    }
    const double m = static_cast<double>(n_pos);
    const double u = rank_sum_pos - m * (m + 1.0) / 2.0;
    return u / (m * static_cast<double>(n_neg));
}

PrecisionResult precision_at_contamination(std::span<const double> scores,
                                           std::span<const std::uint8_t> labels,
                                           double contamination) {
    check_sizes(scores, labels);
    if (!(contamination > 0.0 && contamination <= 0.5))
        throw DomainError("contamination must lie in (0, 0.5]");
    std::size_t n_pos = 0;
    for (auto v : labels) n_pos += (v != 0);
    if (n_pos == 0 || n_pos == labels.size())
        throw PartitionError("labels must contain both classes");
    std::vector<double> copy(scores.begin(), scores.end());
    const double tau = score_quantile(std::move(copy), 1.0 - contamination);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > tau) {
            if (labels[i] != 0)
                ++tp;
            else
                ++fp;
        }
    }
    if (tp + fp == 0) return {0.0, true};
    return {static_cast<double>(tp) / static_cast<double>(tp + fp), false};
}

namespace {

std::string sig3(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

std::string format_metric_table(
    const std::vector<std::pair<std::string, MetricReport>>& rows) {
    const std::vector<std::string> header = {"Model",        "Average Precision",
                                             "Precision",    "ROC AUC",
                                             "Fit Time [s]", "Predict Time [s]"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(header);
    for (const auto& [name, r] : rows) {
        std::string prec = sig3(r.precision);
        if (r.precision_warning) prec += " (no preds)";
        cells.push_back({name, sig3(r.average_precision), prec, sig3(r.roc_auc),
                         sig3(r.fit_time_s), sig3(r.predict_time_s)});
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].size());
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += "  ";
            out += row[c];
            out.append(width[c] - row[c].size(), ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out.push_back('\n');
    }
    return out;
}

}  // namespace exiffi
