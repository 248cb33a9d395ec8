#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "exiffi/dataset.hpp"
#include "exiffi/forest.hpp"

namespace exiffi {

// Proxy task scoring a feature ranking by retraining on nested feature
// subsets.  Walking k = p..1 features retained:
//   direct  keeps the k most important features (drops least important
//           first), so a good ranking keeps performance up;
//   inverse keeps the k least important features (drops most important
//           first), so a good ranking collapses performance;
//   random  drops features in a seeded random order, redrawn per seed.
enum class FsStrategy { Direct = 0, Inverse = 1, Random = 2 };

const char* fs_strategy_name(FsStrategy s);

struct FsPoint {
    std::size_t n_retained = 0;
    double mean_ap = 0.0;
    double std_ap = 0.0;
};

struct FsCurve {
    FsStrategy strategy = FsStrategy::Direct;
    std::vector<FsPoint> points;  // ordered k = p down to 1
};

struct FsOptions {
    double train_fraction = 0.5;
    SplitScheme scheme = SplitScheme::Random;
    std::uint64_t split_seed = 1;
    unsigned threads = 0;
};

struct FsResult {
    FsCurve direct;
    FsCurve inverse;
    FsCurve random;
    double auc_fs = 0.0;  // direct over inverse; positive = informative ranking
    double auc_fs_direct_vs_random = 0.0;
    double auc_fs_random_vs_inverse = 0.0;
};

// ranking lists all feature indices by descending importance.  Each curve
// point aggregates n_seeds refits (forest seeds derived from params.seed;
// the split is fixed).  Retained features are always passed to the model in
// ascending index order, so a ranking and its reverse swap the direct and
// inverse curves exactly.
FsResult run_feature_selection(const Dataset& d, const ForestParams& params,
                               const std::vector<std::size_t>& ranking,
                               std::size_t n_seeds, const FsOptions& options);

// Normalized trapezoidal area between the curves: integral over k of
// (AP_direct - AP_inverse) divided by the k span.  Lives in [-1, 1], is
// antisymmetric in its arguments, 0 for single-point grids, and positive
// when the ranking put genuinely informative features first.
double auc_fs(const FsCurve& direct, const FsCurve& inverse);

}  // namespace exiffi
