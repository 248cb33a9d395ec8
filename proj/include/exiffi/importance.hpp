#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "exiffi/dataset.hpp"
#include "exiffi/forest.hpp"

namespace exiffi {

// Per-feature importance of one sample.  raw accumulates, over every split
// node on the sample's path in every tree, the imbalance-weighted absolute
// normal (|X|/|side taken|) * |v|; normalizer accumulates plain |v| over the
// same nodes; lfi is their elementwise ratio (0 where the normalizer is 0).
struct ImportanceVector {
    std::vector<double> raw;
    std::vector<double> normalizer;
    std::vector<double> lfi;
};

// Single-node contribution (|X|/|side of x|) * |v|.  The node must be a
// split node with both training sides occupied.
std::vector<double> node_lambda(const Node& node, std::span<const double> x);

ImportanceVector local_importance(const Forest& f, std::span<const double> x);

std::vector<ImportanceVector> local_importance_batch(const Forest& f,
                                                     const Dataset& d,
                                                     unsigned threads = 0);

// Global importance: elementwise (mean raw / mean normalizer) over the
// outlier rows, divided by the same ratio over the inlier rows.  ranking
// sorts features by descending score, ties by ascending index.  runs holds
// one score vector per independent refit (seeds derived from params.seed)
// for box-plot style output.
struct GfiResult {
    std::vector<double> scores;
    std::vector<std::size_t> ranking;
    std::vector<std::vector<double>> runs;
};

GfiResult global_importance(const Forest& f, const Dataset& d,
                            const std::vector<std::uint8_t>& outlier_mask,
                            std::size_t n_runs = 0, unsigned threads = 0);

// Score vector only, from one fitted forest and one mask.
std::vector<double> gfi_scores(const Forest& f, const Dataset& d,
                               const std::vector<std::uint8_t>& outlier_mask,
                               unsigned threads = 0);

// Indices sorted by descending value, ties by ascending index.
std::vector<std::size_t> rank_descending(std::span<const double> values);

// 1 for the top floor(contamination * n) rows (at least one) by score,
// ties broken toward lower row index.
std::vector<std::uint8_t> top_fraction_mask(std::span<const double> scores,
                                            double contamination);

// LFI of two features evaluated on a grid spanning their bounding box, all
// other coordinates held at the column medians.  Entry (a, b) is the grid
// point with feature_i at step a and feature_j at step b.
struct Scoremap {
    std::size_t feature_i = 0;
    std::size_t feature_j = 0;
    std::size_t grid = 0;
    std::vector<double> coord_i;  // grid values along feature_i
    std::vector<double> coord_j;  // grid values along feature_j
    std::vector<double> lfi_i;    // grid * grid, row major over (a, b)
    std::vector<double> lfi_j;
};

Scoremap local_scoremap(const Forest& f, const Dataset& d, std::size_t feature_i,
                        std::size_t feature_j, std::size_t grid = 64,
                        unsigned threads = 0);

}  // namespace exiffi
