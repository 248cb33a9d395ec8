#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace exiffi {

// Dense numeric table, row major.  Labels, when present, are binary with 1
// marking anomalies.
struct Dataset {
    std::vector<double> values;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::string> feature_names;
    std::optional<std::vector<std::uint8_t>> labels;
    std::string name;

    double at(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cols, n_cols};
    }
    bool has_labels() const { return labels.has_value(); }
    std::size_t n_anomalies() const;
    double anomaly_fraction() const;

    // Checks finiteness, shapes, unique non-empty names and binary labels;
    // throws on the first violation.
    void validate() const;

    Dataset select_features(const std::vector<std::size_t>& keep) const;
    Dataset select_rows(const std::vector<std::size_t>& rows) const;
};

// Strict CSV reader: UTF-8, comma separated, mandatory header, every cell a
// finite number.  label_column, when given, is removed from the feature
// matrix and parsed as binary labels.
Dataset load_csv(const std::string& path,
                 const std::optional<std::string>& label_column = std::nullopt,
                 const std::string& dataset_name = "");

// Writes header plus rows; labels are appended as a final column when
// present.  Doubles are written in shortest round-trip form.
void save_csv(const Dataset& d, const std::string& path,
              const std::string& label_name = "label");

enum class SplitScheme { Random, Sequential };

// Train/test split:  sequential cuts at floor(n * train_fraction); random
// cuts a seeded permutation at the same spot.  Both sides must be non-empty.
std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction,
                                  std::uint64_t seed, SplitScheme scheme);

// Pairwise dependency summary: Pearson correlation and a plug-in mutual
// information estimate from an equal-width histogram.  Constant columns are
// flagged, get zero rows in both matrices and are excluded from the fraction
// denominators.
struct DependencyProfile {
    std::size_t n_features = 0;
    std::vector<double> pearson;      // n_features * n_features
    std::vector<double> mutual_info;  // n_features * n_features, nats
    std::vector<std::size_t> constant_columns;
    double frac_low_corr = 0.0;   // pairs with |r| < corr_threshold
    double frac_nonlinear = 0.0;  // low-corr pairs with MI > mi_threshold
    double corr_threshold = 0.0;
    std::size_t mi_bins = 0;

    double pearson_at(std::size_t i, std::size_t j) const {
        return pearson[i * n_features + j];
    }
    double mi_at(std::size_t i, std::size_t j) const {
        return mutual_info[i * n_features + j];
    }
};

DependencyProfile profile_dependencies(const Dataset& d,
                                       double corr_threshold = 0.05,
                                       std::size_t mi_bins = 16,
                                       double mi_threshold = 0.0);

}  // namespace exiffi
