#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exiffi/dataset.hpp"

namespace exiffi {

// if:   axis-aligned splits (one-hot normals).
// eif:  oblique splits, intercept uniform in the node bounding box.
// eif+: oblique splits, intercept offset Gaussian around the projected node
//       mean with spread eta times the projected standard deviation.
enum class Mode { IF, EIF, EIFPlus };

const char* mode_name(Mode m);
Mode mode_from_name(const std::string& s);

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t sample_size = 256;
    // 0 selects the default cap ceil(log2(sample_size)).
    std::size_t max_depth = 0;
    Mode mode = Mode::EIFPlus;
    double eta = 1.5;
    // Expected anomaly fraction in (0, 0.5]; unset means "auto": resolved
    // from the labeled fraction at fit time when labels are available.
    std::optional<double> contamination;
    std::uint64_t seed = 1;

    void validate() const;
};

// Split node.  The hyperplane is {x : normal . x = normal . intercept}; a
// sample goes left when normal . x exceeds that threshold.  Counts are the
// training occupancies recorded at fit time.
struct Node {
    std::vector<double> normal;
    std::vector<double> intercept;
    double threshold = 0.0;  // normal . intercept, cached
    std::int32_t axis = -1;  // one-hot fast path; -1 for oblique normals
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t n_node = 0;
    std::uint32_t n_left = 0;
    std::uint32_t n_right = 0;

    bool is_leaf() const { return left < 0; }
    std::uint32_t leaf_size() const { return n_node; }
};

struct Tree {
    std::vector<Node> nodes;  // nodes[0] is the root
    // Training rows (into the fitted dataset) behind this tree's subsample.
    // Kept for diagnostics and verification; not serialized.
    std::vector<std::uint32_t> sample_rows;
};

struct Forest {
    ForestParams params;
    std::size_t n_features = 0;
    std::size_t sample_size_used = 0;  // after clamping to the row count
    std::size_t max_depth_used = 0;
    double c_psi = 0.0;  // expected path normalizer c(sample_size_used)
    std::optional<double> contamination_used;
    std::optional<double> threshold;  // anomaly-score cutoff from train scores
    std::vector<Tree> trees;
    std::vector<double> c_table;  // c(0..sample_size_used), rebuilt on load
};

// Exact harmonic number H(n) = sum_{k=1..n} 1/k.
double harmonic_number(std::size_t n);

// Average unsuccessful-search path length c(n) = 2 H(n-1) - 2 (n-1)/n for
// n >= 2; zero for n < 2.  Uses the exact harmonic sum.
double avg_path_length(std::size_t n);

// c(0..max_n) built incrementally.
std::vector<double> avg_path_table(std::size_t max_n);

Forest fit(const Dataset& d, const ForestParams& params, unsigned threads = 0);

// Mean over trees of (split depth + c(leaf occupancy)) along x's path.
double path_length(const Forest& f, std::span<const double> x);

// s(x) = 2^(-path_length(x) / c(sample_size)).
double anomaly_score(const Forest& f, std::span<const double> x);

std::vector<double> anomaly_scores(const Forest& f, const Dataset& d,
                                   unsigned threads = 0);

// Empirical quantile of the given scores at probability q, inverse-ECDF
// convention: the smallest value whose ECDF reaches q.
double score_quantile(std::vector<double> scores, double q);

// 1 where anomaly_score strictly exceeds the fitted threshold.
std::vector<std::uint8_t> predict(const Forest& f, const Dataset& d,
                                  unsigned threads = 0);

}  // namespace exiffi
