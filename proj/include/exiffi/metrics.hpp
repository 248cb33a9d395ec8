#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace exiffi {

// Average precision over the descending-score ranking.  Tied scores are
// collapsed into one threshold group so the value does not depend on the
// order of ties.
double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels);

// Probability that a random positive outscores a random negative, ties
// counting one half (rank-sum form of the Mann-Whitney statistic).
double roc_auc(std::span<const double> scores,
               std::span<const std::uint8_t> labels);

struct PrecisionResult {
    double value = 0.0;
    // True when thresholding produced no positive predictions; value is 0.
    bool no_positive_predictions = false;
};

// Precision of the binary predictions obtained by thresholding the scores
// at their (1 - contamination) empirical quantile (strictly-greater rule).
PrecisionResult precision_at_contamination(std::span<const double> scores,
                                           std::span<const std::uint8_t> labels,
                                           double contamination);

struct MetricReport {
    double average_precision = 0.0;
    double precision = 0.0;
    bool precision_warning = false;
    double roc_auc = 0.0;
    double fit_time_s = 0.0;
    double predict_time_s = 0.0;
};

// Aligned text table, one row per model, three significant digits.
std::string format_metric_table(
    const std::vector<std::pair<std::string, MetricReport>>& rows);

}  // namespace exiffi
