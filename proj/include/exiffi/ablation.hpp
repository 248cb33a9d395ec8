#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "exiffi/dataset.hpp"
#include "exiffi/forest.hpp"

namespace exiffi {

// One hyperparameter sweep: per grid value, the mean and sample standard
// deviation of a metric over n_seeds refits.  Every sweep reuses one fixed
// train/test split and one seed list across grid values (paired design).
struct SweepResult {
    std::string parameter;
    std::string metric;
    std::vector<double> values;
    std::vector<double> mean;
    std::vector<double> stddev;
};

struct SweepOptions {
    double train_fraction = 0.5;
    SplitScheme scheme = SplitScheme::Random;
    std::uint64_t split_seed = 1;
    unsigned threads = 0;
};

// Test-set average precision as a function of the tree count.
SweepResult sweep_trees(const Dataset& d, const ForestParams& params,
                        const std::vector<std::size_t>& tree_counts,
                        std::size_t n_seeds, const SweepOptions& options);

// Test-set average precision as a function of the depth cap (0 = default).
SweepResult sweep_max_depth(const Dataset& d, const ForestParams& params,
                            const std::vector<std::size_t>& depth_caps,
                            std::size_t n_seeds, const SweepOptions& options);

// Test-set average precision as a function of the per-tree sample size.
SweepResult sweep_sample_size(const Dataset& d, const ForestParams& params,
                              const std::vector<std::size_t>& sample_sizes,
                              std::size_t n_seeds, const SweepOptions& options);

enum class ContaminationMetric { RocAuc, AucFs };

// Effect of the assumed contamination level.
//
// roc_auc: the contamination sets the score threshold learned on the train
// split; the metric is the ROC AUC of the resulting binary test predictions
// (equivalently, balanced accuracy), which peaks when the assumed level
// matches the true anomaly rate.
//
// auc_fs: per seed, the outlier set is the top assumed-contamination
// fraction of the train split by anomaly score; global importance computed
// from that set drives the feature-selection proxy task, and the metric is
// its area score.  Too small an assumed level leaves too few points to
// estimate importance from.
SweepResult sweep_contamination(const Dataset& d, const ForestParams& params,
                                const std::vector<double>& contaminations,
                                std::size_t n_seeds, ContaminationMetric metric,
                                const SweepOptions& options);

// Nine log-spaced points from true_contamination / 8 to 8 * true_contamination.
std::vector<double> default_contamination_grid(double true_contamination);

}  // namespace exiffi
