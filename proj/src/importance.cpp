#include "exiffi/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "exiffi/errors.hpp"
#include "exiffi/parallel.hpp"
#include "exiffi/rng.hpp"

namespace exiffi {

namespace {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double node_projection(const Node& nd, std::span<const double> x) {
    if (nd.axis >= 0) return x[static_cast<std::size_t>(nd.axis)];
    return dot(nd.normal, x);
}

inline double ratio_or_zero(double num, double den) {
    return den > 0.0 ? num / den : 0.0;
}

// Seed sub-stream tag for global-importance refits.
constexpr std::uint64_t kGfiStream = 0x67666921ULL;

}  // namespace

std::vector<double> node_lambda(const Node& node, std::span<const double> x) {
    if (node.is_leaf()) throw DomainError("node_lambda needs a split node");
    if (x.size() != node.normal.size())
        throw ShapeError("sample dimension does not match the node");
    const bool left = node_projection(node, x) > node.threshold;
    const std::uint32_t side = left ? node.n_left : node.n_right;
    if (side == 0)
        throw DegenerateError("split node with an empty training side");
    const double m = static_cast<double>(node.n_node) / static_cast<double>(side);
    std::vector<double> lam(x.size(), 0.0);
    if (node.axis >= 0) {
        const auto a = static_cast<std::size_t>(node.axis);
        lam[a] = m * std::abs(node.normal[a]);
    } else {
        for (std::size_t j = 0; j < lam.size(); ++j)
            lam[j] = m * std::abs(node.normal[j]);
    }
    return lam;
}

ImportanceVector local_importance(const Forest& f, std::span<const double> x) {
    if (x.size() != f.n_features)
        throw ShapeError("sample dimension does not match the forest");
    if (f.trees.empty()) throw StateError("forest has no trees");
    ImportanceVector iv;
    iv.raw.assign(f.n_features, 0.0);
    iv.normalizer.assign(f.n_features, 0.0);
    for (const Tree& tree : f.trees) {
        std::size_t node = 0;
        while (!tree.nodes[node].is_leaf()) {
            const Node& nd = tree.nodes[node];
            const bool left = node_projection(nd, x) > nd.threshold;
            const std::uint32_t side = left ? nd.n_left : nd.n_right;
            if (side == 0)
                throw DegenerateError("split node with an empty training side");
            const double m =
                static_cast<double>(nd.n_node) / static_cast<double>(side);
            if (nd.axis >= 0) {
                const auto a = static_cast<std::size_t>(nd.axis);
                const double v = std::abs(nd.normal[a]);
                iv.raw[a] += m * v;
                iv.normalizer[a] += v;
            } else {
                for (std::size_t j = 0; j < f.n_features; ++j) {
                    const double v = std::abs(nd.normal[j]);
                    iv.raw[j] += m * v;
                    iv.normalizer[j] += v;
                }
            }
            node = static_cast<std::size_t>(left ? nd.left : nd.right);
        }
    }
    iv.lfi.resize(f.n_features);
    for (std::size_t j = 0; j < f.n_features; ++j)
        iv.lfi[j] = ratio_or_zero(iv.raw[j], iv.normalizer[j]);
    return iv;
}

std::vector<ImportanceVector> local_importance_batch(const Forest& f,
                                                     const Dataset& d,
                                                     unsigned threads) {
    if (d.n_cols != f.n_features)
        throw ShapeError("dataset feature count does not match the forest");
    std::vector<ImportanceVector> out(d.n_rows);
    parallel_for(d.n_rows, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = local_importance(f, d.row(i));
    });
    return out;
}

std::vector<std::size_t> rank_descending(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    });
    return order;
}

std::vector<double> gfi_scores(const Forest& f, const Dataset& d,
                               const std::vector<std::uint8_t>& outlier_mask,
                               unsigned threads) {
    if (outlier_mask.size() != d.n_rows)
        throw ShapeError("outlier mask length does not match the dataset");
    const std::size_t n_out =
        static_cast<std::size_t>(std::count(outlier_mask.begin(),
                                            outlier_mask.end(), std::uint8_t{1}));
    if (n_out == 0 || n_out == d.n_rows)
        throw PartitionError("outlier mask needs both classes non-empty");

    const std::size_t p = f.n_features;
    // Fixed-size blocks with an in-order fold keep the accumulation
    // independent of the thread count.
    constexpr std::size_t kBlock = 2048;
    const std::size_t n_blocks = (d.n_rows + kBlock - 1) / kBlock;
    struct Sums {
        std::vector<double> raw_out, norm_out, raw_in, norm_in;
    };
    std::vector<Sums> partial(n_blocks);
    parallel_for(n_blocks, threads, [&](std::size_t bb, std::size_t be) {
        for (std::size_t b = bb; b < be; ++b) {
            Sums& s = partial[b];
            s.raw_out.assign(p, 0.0);
            s.norm_out.assign(p, 0.0);
            s.raw_in.assign(p, 0.0);
            s.norm_in.assign(p, 0.0);
            const std::size_t lo = b * kBlock;
            const std::size_t hi = std::min(d.n_rows, lo + kBlock);
            for (std::size_t i = lo; i < hi; ++i) {
                ImportanceVector iv = local_importance(f, d.row(i));
                std::vector<double>& raw = outlier_mask[i] ? s.raw_out : s.raw_in;
                std::vector<double>& nrm = outlier_mask[i] ? s.norm_out : s.norm_in;
                for (std::size_t j = 0; j < p; ++j) {
                    raw[j] += iv.raw[j];
                    nrm[j] += iv.normalizer[j];
                }
            }
        }
    });
    std::vector<double> raw_out(p, 0.0), norm_out(p, 0.0), raw_in(p, 0.0),
        norm_in(p, 0.0);
    for (const Sums& s : partial) {
        for (std::size_t j = 0; j < p; ++j) {
            raw_out[j] += s.raw_out[j];
            norm_out[j] += s.norm_out[j];
            raw_in[j] += s.raw_in[j];
            norm_in[j] += s.norm_in[j];
        }
    }
    // Ratio of means per class; the sample counts cancel inside each class.
    std::vector<double> scores(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        const double imp_out = ratio_or_zero(raw_out[j], norm_out[j]);
        const double imp_in = ratio_or_zero(raw_in[j], norm_in[j]);
        scores[j] = ratio_or_zero(imp_out, imp_in);
    }
    return scores;
}

GfiResult global_importance(const Forest& f, const Dataset& d,
                            const std::vector<std::uint8_t>& outlier_mask,
                            std::size_t n_runs, unsigned threads) {
    GfiResult res;
    res.scores = gfi_scores(f, d, outlier_mask, threads);
    res.ranking = rank_descending(res.scores);
    if (n_runs == 0) {
        // No refits requested: the single run is the given forest itself.
        res.runs.push_back(res.scores);
        return res;
    }
    res.runs.resize(n_runs);
    parallel_for(n_runs, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            ForestParams ps = f.params;
            ps.seed = derive_seed(f.params.seed, kGfiStream + s);
            Forest refit = fit(d, ps, 1);
            res.runs[s] = gfi_scores(refit, d, outlier_mask, 1);
        }
    });
    return res;
}

std::vector<std::uint8_t> top_fraction_mask(std::span<const double> scores,
                                            double contamination) {
    if (!(contamination > 0.0 && contamination <= 0.5))
        throw DomainError("contamination must lie in (0, 0.5]");
    if (scores.size() < 2)
        throw DomainError("need at least two scores to split into classes");
    std::size_t k = static_cast<std::size_t>(
        std::floor(contamination * static_cast<double>(scores.size())));
    if (k < 1) k = 1;
    std::vector<std::size_t> order = rank_descending(scores);
    std::vector<std::uint8_t> mask(scores.size(), 0);
    for (std::size_t i = 0; i < k; ++i) mask[order[i]] = 1;
    return mask;
}

namespace {

double column_median(const Dataset& d, std::size_t j) {
    std::vector<double> col(d.n_rows);
    for (std::size_t i = 0; i < d.n_rows; ++i) col[i] = d.at(i, j);
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    if (n % 2 == 1) return col[n / 2];
    return 0.5 * (col[n / 2 - 1] + col[n / 2]);
}

}  // namespace

Scoremap local_scoremap(const Forest& f, const Dataset& d, std::size_t feature_i,
                        std::size_t feature_j, std::size_t grid,
                        unsigned threads) {
    if (feature_i >= f.n_features || feature_j >= f.n_features)
        throw IndexError("feature index out of range");
    if (feature_i == feature_j)
        throw IndexError("scoremap needs two distinct features");
    if (d.n_cols != f.n_features)
        throw ShapeError("dataset feature count does not match the forest");
    if (d.n_rows == 0) throw DomainError("scoremap needs a non-empty dataset");
    if (grid < 2) throw DomainError("grid must be at least 2");

    Scoremap map;
    map.feature_i = feature_i;
    map.feature_j = feature_j;
    map.grid = grid;

    std::vector<double> base(f.n_features);
    for (std::size_t j = 0; j < f.n_features; ++j) base[j] = column_median(d, j);

    auto axis_coords = [&](std::size_t feat) {
        double lo = d.at(0, feat), hi = lo;
        for (std::size_t i = 1; i < d.n_rows; ++i) {
            lo = std::min(lo, d.at(i, feat));
            hi = std::max(hi, d.at(i, feat));
        }
        std::vector<double> coords(grid);
        coords.front() = lo;
        coords.back() = hi;
        for (std::size_t g = 1; g + 1 < grid; ++g)
            coords[g] = lo + (hi - lo) * static_cast<double>(g) /
                                 static_cast<double>(grid - 1);
        return coords;
    };
    map.coord_i = axis_coords(feature_i);
    map.coord_j = axis_coords(feature_j);

    map.lfi_i.assign(grid * grid, 0.0);
    map.lfi_j.assign(grid * grid, 0.0);
    parallel_for(grid * grid, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> x = base;
        for (std::size_t cell = begin; cell < end; ++cell) {
            const std::size_t a = cell / grid;
            const std::size_t b = cell % grid;
            x[feature_i] = map.coord_i[a];
            x[feature_j] = map.coord_j[b];
            ImportanceVector iv = local_importance(f, x);
            map.lfi_i[cell] = iv.lfi[feature_i];
            map.lfi_j[cell] = iv.lfi[feature_j];
        }
    });
    return map;
}

}  // namespace exiffi
