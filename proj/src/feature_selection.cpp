#include "exiffi/feature_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "exiffi/errors.hpp"
#include "exiffi/metrics.hpp"
#include "exiffi/parallel.hpp"
#include "exiffi/rng.hpp"

namespace exiffi {

namespace {

constexpr std::uint64_t kFsFitStream = 0x66736674ULL;
constexpr std::uint64_t kFsRandomStream = 0x6673726eULL;

void check_ranking(const std::vector<std::size_t>& ranking, std::size_t p) {
    if (ranking.size() != p)
        throw RankError("ranking length does not match the feature count");
    std::vector<bool> seen(p, false);
    for (std::size_t j : ranking) {
        if (j >= p || seen[j])
            throw RankError("ranking is not a permutation of the features");
        seen[j] = true;
    }
}

// Features retained when k are kept under a fixed removal order (first
// element removed first), returned in ascending index order so identical
// retained sets always yield identical fits.
std::vector<std::size_t> retained(const std::vector<std::size_t>& removal_order,
                                  std::size_t k) {
    std::vector<std::size_t> keep(removal_order.end() - static_cast<std::ptrdiff_t>(k),
                                  removal_order.end());
    std::sort(keep.begin(), keep.end());
    return keep;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

const char* fs_strategy_name(FsStrategy s) {
    switch (s) {
        case FsStrategy::Direct: return "direct";
        case FsStrategy::Inverse: return "inverse";
        case FsStrategy::Random: return "random";
    }
    return "?";
}

FsResult run_feature_selection(const Dataset& d, const ForestParams& params,
                               const std::vector<std::size_t>& ranking,
                               std::size_t n_seeds, const FsOptions& options) {
    if (!d.has_labels())
        throw LabelError("feature selection needs labeled data");
    if (n_seeds < 1) throw DomainError("n_seeds must be at least 1");
    const std::size_t p = d.n_cols;
    check_ranking(ranking, p);

    auto [train, test] = split(d, options.train_fraction, options.split_seed,
                               options.scheme);

    // direct drops the least important feature first; inverse drops the most
    // important first.
    std::vector<std::size_t> direct_order(ranking.rbegin(), ranking.rend());
    const std::vector<std::size_t>& inverse_order = ranking;
    std::vector<std::vector<std::size_t>> random_orders(n_seeds);
    for (std::size_t s = 0; s < n_seeds; ++s) {
        std::vector<std::size_t>& ord = random_orders[s];
        ord.resize(p);
        std::iota(ord.begin(), ord.end(), std::size_t{0});
        SplitRng rng(derive_seed(params.seed, kFsRandomStream + s));
        for (std::size_t i = p - 1; i > 0; --i)
            std::swap(ord[i], ord[rng.index(i + 1)]);
    }

    struct Job {
        FsStrategy strategy;
        std::size_t k;
        std::size_t seed_idx;
    };
    std::vector<Job> jobs;
    for (std::size_t k = p; k >= 1; --k)
        for (FsStrategy st :
             {FsStrategy::Direct, FsStrategy::Inverse, FsStrategy::Random})
            for (std::size_t s = 0; s < n_seeds; ++s) jobs.push_back({st, k, s});

    std::vector<double> ap(jobs.size(), 0.0);
    parallel_for(jobs.size(), options.threads, [&](std::size_t begin,
                                                   std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) {
            const Job& job = jobs[w];
            const std::vector<std::size_t>* order = nullptr;
            switch (job.strategy) {
                case FsStrategy::Direct: order = &direct_order; break;
                case FsStrategy::Inverse: order = &inverse_order; break;
                case FsStrategy::Random: order = &random_orders[job.seed_idx]; break;
            }
            const std::vector<std::size_t> keep = retained(*order, job.k);
            Dataset tr = train.select_features(keep);
            Dataset te = test.select_features(keep);
            ForestParams ps = params;
            ps.seed = derive_seed(params.seed, kFsFitStream + job.seed_idx);
            Forest forest = fit(tr, ps, 1);
            std::vector<double> scores = anomaly_scores(forest, te, 1);
            ap[w] = average_precision(scores, *te.labels);
        }
    });

    FsResult res;
    res.direct.strategy = FsStrategy::Direct;
    res.inverse.strategy = FsStrategy::Inverse;
    res.random.strategy = FsStrategy::Random;
    std::size_t w = 0;
    for (std::size_t k = p; k >= 1; --k) {
        for (FsStrategy st :
             {FsStrategy::Direct, FsStrategy::Inverse, FsStrategy::Random}) {
            std::vector<double> vals(ap.begin() + static_cast<std::ptrdiff_t>(w),
                                     ap.begin() + static_cast<std::ptrdiff_t>(w + n_seeds));
            w += n_seeds;
            FsPoint pt;
            pt.n_retained = k;
            pt.mean_ap = mean_of(vals);
            pt.std_ap = sample_std(vals, pt.mean_ap);
            switch (st) {
                case FsStrategy::Direct: res.direct.points.push_back(pt); break;
                case FsStrategy::Inverse: res.inverse.points.push_back(pt); break;
                case FsStrategy::Random: res.random.points.push_back(pt); break;
            }
        }
    }
    res.auc_fs = auc_fs(res.direct, res.inverse);
    res.auc_fs_direct_vs_random = auc_fs(res.direct, res.random);
    res.auc_fs_random_vs_inverse = auc_fs(res.random, res.inverse);
    return res;
}

double auc_fs(const FsCurve& direct, const FsCurve& inverse) {
    if (direct.points.size() != inverse.points.size())
        throw GridError("curves have different grid sizes");
    const std::size_t m = direct.points.size();
    if (m == 0) throw GridError("empty curves");
    for (std::size_t i = 0; i < m; ++i) {
        if (direct.points[i].n_retained != inverse.points[i].n_retained)
            throw GridError("curves evaluated on different k grids");
    }
    if (m == 1) return 0.0;
    double area = 0.0;
    double span = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double g0 = direct.points[i].mean_ap - inverse.points[i].mean_ap;
        const double g1 =
            direct.points[i + 1].mean_ap - inverse.points[i + 1].mean_ap;
        const double dk =
            std::abs(static_cast<double>(direct.points[i].n_retained) -
                     static_cast<double>(direct.points[i + 1].n_retained));
        area += 0.5 * (g0 + g1) * dk;
        span += dk;
    }
    if (span == 0.0) return 0.0;
    return area / span;
}

}  // namespace exiffi
