#include "exiffi/ablation.hpp"

#include <algorithm>
#include <cmath>

#include "exiffi/errors.hpp"
#include "exiffi/feature_selection.hpp"
#include "exiffi/importance.hpp"
#include "exiffi/metrics.hpp"
#include "exiffi/parallel.hpp"
#include "exiffi/rng.hpp"

namespace exiffi {

namespace {

constexpr std::uint64_t kSweepStream = 0x73777065ULL;

struct PairedData {
    Dataset train;
    Dataset test;
};

PairedData paired_split(const Dataset& d, const SweepOptions& options) {
    if (!d.has_labels()) throw LabelError("sweeps need labeled data");
    auto [train, test] =
        split(d, options.train_fraction, options.split_seed, options.scheme);
    return {std::move(train), std::move(test)};
}

void aggregate(SweepResult& res, const std::vector<double>& per_seed) {
    double mean = 0.0;
    for (double v : per_seed) mean += v;
    mean /= static_cast<double>(per_seed.size());
    double sd = 0.0;
    if (per_seed.size() > 1) {
        for (double v : per_seed) sd += (v - mean) * (v - mean);
        sd = std::sqrt(sd / static_cast<double>(per_seed.size() - 1));
    }
    res.mean.push_back(mean);
    res.stddev.push_back(sd);
}

// AP sweep over one size_t-valued parameter, identical split and seed list
// at every grid value.
SweepResult sweep_ap(const Dataset& d, const ForestParams& params,
                     const std::string& parameter,
                     const std::vector<std::size_t>& grid, std::size_t n_seeds,
                     const SweepOptions& options,
                     void (*apply)(ForestParams&, std::size_t)) {
    if (grid.empty()) throw DomainError("empty sweep grid");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw DomainError("sweep grid must be sorted ascending");
    if (n_seeds < 1) throw DomainError("n_seeds must be at least 1");
    PairedData data = paired_split(d, options);

    SweepResult res;
    res.parameter = parameter;
    res.metric = "average_precision";
    std::vector<double> ap(grid.size() * n_seeds, 0.0);
    parallel_for(grid.size() * n_seeds, options.threads,
                 [&](std::size_t begin, std::size_t end) {
                     for (std::size_t w = begin; w < end; ++w) {
                         const std::size_t gi = w / n_seeds;
                         const std::size_t s = w % n_seeds;
                         ForestParams ps = params;
                         apply(ps, grid[gi]);
                         ps.seed = derive_seed(params.seed, kSweepStream + s);
                         Forest f = fit(data.train, ps, 1);
                         std::vector<double> scores =
                             anomaly_scores(f, data.test, 1);
                         ap[w] = average_precision(scores, *data.test.labels);
                     }
                 });
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        res.values.push_back(static_cast<double>(grid[gi]));
        std::vector<double> per_seed(ap.begin() + static_cast<std::ptrdiff_t>(gi * n_seeds),
                                     ap.begin() + static_cast<std::ptrdiff_t>((gi + 1) * n_seeds));
        aggregate(res, per_seed);
    }
    return res;
}

}  // namespace

SweepResult sweep_trees(const Dataset& d, const ForestParams& params,
                        const std::vector<std::size_t>& tree_counts,
                        std::size_t n_seeds, const SweepOptions& options) {
    return sweep_ap(d, params, "n_trees", tree_counts, n_seeds, options,
                    [](ForestParams& p, std::size_t v) { p.n_trees = v; });
}

SweepResult sweep_max_depth(const Dataset& d, const ForestParams& params,
                            const std::vector<std::size_t>& depth_caps,
                            std::size_t n_seeds, const SweepOptions& options) {
    return sweep_ap(d, params, "max_depth", depth_caps, n_seeds, options,
                    [](ForestParams& p, std::size_t v) { p.max_depth = v; });
}

SweepResult sweep_sample_size(const Dataset& d, const ForestParams& params,
                              const std::vector<std::size_t>& sample_sizes,
                              std::size_t n_seeds, const SweepOptions& options) {
    return sweep_ap(d, params, "sample_size", sample_sizes, n_seeds, options,
                    [](ForestParams& p, std::size_t v) { p.sample_size = v; });
}

SweepResult sweep_contamination(const Dataset& d, const ForestParams& params,
                                const std::vector<double>& contaminations,
                                std::size_t n_seeds, ContaminationMetric metric,
                                const SweepOptions& options) {
    if (contaminations.empty()) throw DomainError("empty sweep grid");
    for (double c : contaminations) {
        if (!(c > 0.0 && c <= 0.5))
            throw DomainError("contamination values must lie in (0, 0.5]");
    }
    if (n_seeds < 1) throw DomainError("n_seeds must be at least 1");
    PairedData data = paired_split(d, options);
    const std::size_t n_grid = contaminations.size();

    SweepResult res;
    res.parameter = "contamination";
    res.metric = metric == ContaminationMetric::RocAuc ? "roc_auc" : "auc_fs";
    std::vector<double> vals(n_grid * n_seeds, 0.0);

    if (metric == ContaminationMetric::RocAuc) {
        // The trees do not depend on the assumed contamination, only the
        // threshold does, so fit once per seed and re-threshold per value.
        parallel_for(n_seeds, options.threads, [&](std::size_t begin,
                                                   std::size_t end) {
            for (std::size_t s = begin; s < end; ++s) {
                ForestParams ps = params;
                ps.contamination = contaminations[0];
                ps.seed = derive_seed(params.seed, kSweepStream + s);
                Forest f = fit(data.train, ps, 1);
                std::vector<double> train_scores =
                    anomaly_scores(f, data.train, 1);
                std::vector<double> test_scores = anomaly_scores(f, data.test, 1);
                for (std::size_t gi = 0; gi < n_grid; ++gi) {
                    const double tau = score_quantile(train_scores,
                                                      1.0 - contaminations[gi]);
                    std::vector<double> preds(test_scores.size(), 0.0);
                    for (std::size_t i = 0; i < test_scores.size(); ++i)
                        preds[i] = test_scores[i] > tau ? 1.0 : 0.0;
                    vals[gi * n_seeds + s] = roc_auc(preds, *data.test.labels);
                }
            }
        });
    } else {
        FsOptions fs_options;
        fs_options.train_fraction = options.train_fraction;
        fs_options.scheme = options.scheme;
        fs_options.split_seed = options.split_seed;
        fs_options.threads = 1;
        parallel_for(n_grid * n_seeds, options.threads,
                     [&](std::size_t begin, std::size_t end) {
                         for (std::size_t w = begin; w < end; ++w) {
                             const std::size_t gi = w / n_seeds;
                             const std::size_t s = w % n_seeds;
                             ForestParams ps = params;
                             ps.contamination = contaminations[gi];
                             ps.seed = derive_seed(params.seed, kSweepStream + s);
                             Forest f = fit(data.train, ps, 1);
                             std::vector<double> train_scores =
                                 anomaly_scores(f, data.train, 1);
                             std::vector<std::uint8_t> mask = top_fraction_mask(
                                 train_scores, contaminations[gi]);
                             std::vector<double> scores =
                                 gfi_scores(f, data.train, mask, 1);
                             std::vector<std::size_t> ranking =
                                 rank_descending(scores);
                             ForestParams fs_params = params;
                             fs_params.seed = ps.seed;
                             FsResult fs = run_feature_selection(
                                 d, fs_params, ranking, 1, fs_options);
                             vals[w] = fs.auc_fs;
                         }
                     });
    }
    for (std::size_t gi = 0; gi < n_grid; ++gi) {
        res.values.push_back(contaminations[gi]);
        std::vector<double> per_seed(vals.begin() + static_cast<std::ptrdiff_t>(gi * n_seeds),
                                     vals.begin() + static_cast<std::ptrdiff_t>((gi + 1) * n_seeds));
        aggregate(res, per_seed);
    }
    return res;
}

std::vector<double> default_contamination_grid(double true_contamination) {
    if (!(true_contamination > 0.0 && true_contamination <= 0.5))
        throw DomainError("true contamination must lie in (0, 0.5]");
    std::vector<double> grid;
    for (int i = 0; i <= 8; ++i) {
        const double e = -3.0 + 0.75 * static_cast<double>(i);
        grid.push_back(std::min(0.5, true_contamination * std::exp2(e)));
    }
    return grid;
}

}  // namespace exiffi
