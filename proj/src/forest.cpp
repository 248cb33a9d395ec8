#include "exiffi/forest.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

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

}  // namespace

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::IF: return "if";
        case Mode::EIF: return "eif";
        case Mode::EIFPlus: return "eif+";
    }
    return "?";
}

Mode mode_from_name(const std::string& s) {
    if (s == "if") return Mode::IF;
    if (s == "eif") return Mode::EIF;
    if (s == "eif+" || s == "eifplus" || s == "eif_plus") return Mode::EIFPlus;
    throw DomainError("unknown mode '" + s + "' (expected if, eif or eif+)");
}

void ForestParams::validate() const {
    if (n_trees < 1) throw DomainError("n_trees must be at least 1");
    if (sample_size < 2) throw DomainError("sample_size must be at least 2");
    if (!(eta > 0.0)) throw DomainError("eta must be positive");
    if (contamination) {
        double c = *contamination;
        if (!(c > 0.0 && c <= 0.5))
            throw DomainError("contamination must lie in (0, 0.5]");
    }
}

double harmonic_number(std::size_t n) {
    double h = 0.0;
    for (std::size_t k = 1; k <= n; ++k) h += 1.0 / static_cast<double>(k);
    return h;
}

double avg_path_length(std::size_t n) {
    if (n < 2) return 0.0;
    double nn = static_cast<double>(n);
    return 2.0 * harmonic_number(n - 1) - 2.0 * (nn - 1.0) / nn;
}

std::vector<double> avg_path_table(std::size_t max_n) {
    std::vector<double> table(max_n + 1, 0.0);
    double h = 0.0;  // H(n - 1), built incrementally
    for (std::size_t n = 2; n <= max_n; ++n) {
        h += 1.0 / static_cast<double>(n - 1);
        double nn = static_cast<double>(n);
        table[n] = 2.0 * h - 2.0 * (nn - 1.0) / nn;
    }
    return table;
}

namespace {

constexpr int kInterceptDraws = 16;

struct TreeBuilder {
    std::span<const double> buf;  // subsample, psi rows by p columns
    std::size_t p = 0;
    std::size_t depth_cap = 0;
    Mode mode = Mode::EIFPlus;
    double eta = 1.5;
    SplitRng* rng = nullptr;
    std::vector<Node>* nodes = nullptr;

    std::span<const double> sample(std::size_t i) const {
        return buf.subspan(i * p, p);
    }

    std::int32_t make_leaf(std::size_t n) {
        Node nd;
        nd.n_node = static_cast<std::uint32_t>(n);
        nodes->push_back(std::move(nd));
        return static_cast<std::int32_t>(nodes->size() - 1);
    }

    std::int32_t build(const std::vector<std::uint32_t>& idx, std::size_t depth) {
        const std::size_t n = idx.size();
        if (depth >= depth_cap || n <= 1) return make_leaf(n);

        std::vector<double> normal(p, 0.0);
        std::vector<double> intercept(p, 0.0);
        std::int32_t axis = -1;
        std::vector<double> z(n);

        if (mode == Mode::IF) {
            axis = static_cast<std::int32_t>(rng->index(p));
            const auto a = static_cast<std::size_t>(axis);
            double lo = sample(idx[0])[a], hi = lo;
            for (std::size_t i = 1; i < n; ++i) {
                double v = sample(idx[i])[a];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo == hi) return make_leaf(n);
            normal[a] = 1.0;
            intercept[a] = rng->uniform(lo, hi);
            for (std::size_t i = 0; i < n; ++i) z[i] = sample(idx[i])[a];
        } else {
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (std::size_t j = 0; j < p; ++j) {
                    normal[j] = rng->normal();
                    norm2 += normal[j] * normal[j];
                }
            } while (norm2 == 0.0);
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t j = 0; j < p; ++j) normal[j] *= inv;

            double zmin = 0.0, zmax = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = dot(normal, sample(idx[i]));
                if (i == 0) {
                    zmin = zmax = z[i];
                } else {
                    zmin = std::min(zmin, z[i]);
                    zmax = std::max(zmax, z[i]);
                }
            }
            if (zmin == zmax) return make_leaf(n);

            std::vector<double> blo, bhi;
            double mu = 0.0, sd = 0.0;
            if (mode == Mode::EIF) {
                blo.assign(p, 0.0);
                bhi.assign(p, 0.0);
                for (std::size_t j = 0; j < p; ++j) {
                    double lo = sample(idx[0])[j], hi = lo;
                    for (std::size_t i = 1; i < n; ++i) {
                        double v = sample(idx[i])[j];
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                    blo[j] = lo;
                    bhi[j] = hi;
                }
            } else {
                for (std::size_t i = 0; i < n; ++i) mu += z[i];
                mu /= static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i) {
                    double c = z[i] - mu;
                    sd += c * c;
                }
                sd = std::sqrt(sd / static_cast<double>(n));
            }

            // A drawn hyperplane may miss the node's projected range and
            // leave one side empty; such draws are retried a bounded number
            // of times, then the offset falls back to uniform over the
            // projected range, which always separates when the spread is
            // nonzero.
            bool ok = false;
            for (int attempt = 0; attempt < kInterceptDraws && !ok; ++attempt) {
                if (mode == Mode::EIF) {
                    for (std::size_t j = 0; j < p; ++j)
                        intercept[j] =
                            (blo[j] == bhi[j]) ? blo[j] : rng->uniform(blo[j], bhi[j]);
                } else {
                    double tau = mu + rng->normal() * eta * sd;
                    for (std::size_t j = 0; j < p; ++j) intercept[j] = tau * normal[j];
                }
                double th = dot(normal, intercept);
                std::size_t nl = 0;
                for (std::size_t i = 0; i < n; ++i) nl += (z[i] > th) ? 1 : 0;
                ok = (nl > 0 && nl < n);
            }
            if (!ok) {
                double tau = rng->uniform(zmin, zmax);
                for (std::size_t j = 0; j < p; ++j) intercept[j] = tau * normal[j];
            }
        }

        const double threshold = dot(normal, intercept);
        std::vector<std::uint32_t> left_idx, right_idx;
        left_idx.reserve(n);
        right_idx.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (z[i] > threshold)
                left_idx.push_back(idx[i]);
            else
                right_idx.push_back(idx[i]);
        }
        if (left_idx.empty() || right_idx.empty()) return make_leaf(n);

        Node nd;
        nd.normal = std::move(normal);
        nd.intercept = std::move(intercept);
        nd.threshold = threshold;
        nd.axis = axis;
        nd.n_node = static_cast<std::uint32_t>(n);
        nd.n_left = static_cast<std::uint32_t>(left_idx.size());
        nd.n_right = static_cast<std::uint32_t>(right_idx.size());
        nodes->push_back(std::move(nd));
        const auto self = static_cast<std::int32_t>(nodes->size() - 1);
        const std::int32_t l = build(left_idx, depth + 1);
        const std::int32_t r = build(right_idx, depth + 1);
        (*nodes)[static_cast<std::size_t>(self)].left = l;
        (*nodes)[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

std::vector<std::uint32_t> draw_subsample(std::size_t n, std::size_t psi,
                                          SplitRng& rng) {
    std::vector<std::uint32_t> rows;
    rows.reserve(psi);
    if (psi >= n) {
        for (std::size_t i = 0; i < n; ++i)
            rows.push_back(static_cast<std::uint32_t>(i));
        return rows;
    }
    std::unordered_set<std::uint32_t> chosen;
    chosen.reserve(psi * 2);
    for (std::size_t j = n - psi; j < n; ++j) {
        auto t = static_cast<std::uint32_t>(rng.index(j + 1));
        if (!chosen.insert(t).second)
            chosen.insert(static_cast<std::uint32_t>(j));
    }
    rows.assign(chosen.begin(), chosen.end());
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace

Forest fit(const Dataset& d, const ForestParams& params, unsigned threads) {
    params.validate();
    if (d.n_rows < 2) throw DomainError("fit needs at least two rows");
    if (d.n_cols < 1) throw DomainError("fit needs at least one feature");
    for (double v : d.values) {
        if (!std::isfinite(v)) throw DomainError("fit input has non-finite values");
    }

    Forest f;
    f.params = params;
    f.n_features = d.n_cols;
    f.sample_size_used = std::min(params.sample_size, d.n_rows);
    f.max_depth_used =
        params.max_depth > 0
            ? params.max_depth
            : static_cast<std::size_t>(
                  std::ceil(std::log2(static_cast<double>(f.sample_size_used))));
    f.c_table = avg_path_table(f.sample_size_used);
    f.c_psi = f.c_table[f.sample_size_used];
    f.trees.resize(params.n_trees);

    const std::size_t p = d.n_cols;
    parallel_for(params.n_trees, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> buf(f.sample_size_used * p);
        for (std::size_t t = begin; t < end; ++t) {
            SplitRng rng(derive_seed(params.seed, t));
            Tree& tree = f.trees[t];
            tree.sample_rows = draw_subsample(d.n_rows, f.sample_size_used, rng);
            for (std::size_t i = 0; i < tree.sample_rows.size(); ++i)
                std::copy_n(d.values.data() + tree.sample_rows[i] * p, p,
                            buf.data() + i * p);
            tree.nodes.clear();
            tree.nodes.reserve(2 * f.sample_size_used);
            TreeBuilder builder{std::span<const double>(buf.data(), buf.size()),
                                p,
                                f.max_depth_used,
                                params.mode,
                                params.eta,
                                &rng,
                                &tree.nodes};
            std::vector<std::uint32_t> idx(tree.sample_rows.size());
            for (std::size_t i = 0; i < idx.size(); ++i)
                idx[i] = static_cast<std::uint32_t>(i);
            builder.build(idx, 0);
        }
    });

    if (params.contamination) {
        f.contamination_used = *params.contamination;
    } else if (d.has_labels()) {
        f.contamination_used = d.anomaly_fraction();
    }
    if (f.contamination_used) {
        std::vector<double> train_scores = anomaly_scores(f, d, threads);
        f.threshold = score_quantile(std::move(train_scores),
                                     1.0 - *f.contamination_used);
    }
    return f;
}

double path_length(const Forest& f, std::span<const double> x) {
    if (x.size() != f.n_features)
        throw ShapeError("sample has " + std::to_string(x.size()) +
                         " features, forest expects " +
                         std::to_string(f.n_features));
    if (f.trees.empty()) throw StateError("forest has no trees");
    double total = 0.0;
    for (const Tree& tree : f.trees) {
        std::size_t node = 0;
        double depth = 0.0;
        while (!tree.nodes[node].is_leaf()) {
            const Node& nd = tree.nodes[node];
            node = static_cast<std::size_t>(
                node_projection(nd, x) > nd.threshold ? nd.left : nd.right);
            depth += 1.0;
        }
        total += depth + f.c_table[tree.nodes[node].leaf_size()];
    }
    return total / static_cast<double>(f.trees.size());
}

double anomaly_score(const Forest& f, std::span<const double> x) {
    return std::exp2(-path_length(f, x) / f.c_psi);
}

std::vector<double> anomaly_scores(const Forest& f, const Dataset& d,
                                   unsigned threads) {
    if (d.n_cols != f.n_features)
        throw ShapeError("dataset feature count does not match the forest");
    std::vector<double> out(d.n_rows, 0.0);
    parallel_for(d.n_rows, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = anomaly_score(f, d.row(i));
    });
    return out;
}

double score_quantile(std::vector<double> scores, double q) {
    if (scores.empty()) throw DomainError("quantile of an empty score vector");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level outside [0, 1]");
    std::sort(scores.begin(), scores.end());
    const auto n = static_cast<double>(scores.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n));
    if (rank < 1) rank = 1;
    if (rank > scores.size()) rank = scores.size();
    return scores[rank - 1];
}

std::vector<std::uint8_t> predict(const Forest& f, const Dataset& d,
                                  unsigned threads) {
    if (!f.threshold)
        throw StateError(
            "no decision threshold: contamination was 'auto' and the training "
            "data had no labels");
    std::vector<double> s = anomaly_scores(f, d, threads);
    std::vector<std::uint8_t> preds(s.size(), 0);
    for (std::size_t i = 0; i < s.size(); ++i)
        preds[i] = s[i] > *f.threshold ? 1 : 0;
    return preds;
}

}  // namespace exiffi
