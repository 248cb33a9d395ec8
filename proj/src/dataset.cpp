#include "exiffi/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "exiffi/errors.hpp"
#include "exiffi/rng.hpp"

namespace exiffi {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || cell.empty()) {
        throw ParseError("row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": cell '" + cell +
                             "' is not a number",
                         row, col);
    }
    if (!std::isfinite(v)) {
        throw ParseError("row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": cell '" + cell +
                             "' is not finite",
                         row, col);
    }
    return v;
}

void format_double(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

std::size_t Dataset::n_anomalies() const {
    if (!labels) return 0;
    return static_cast<std::size_t>(
        std::count(labels->begin(), labels->end(), std::uint8_t{1}));
}

double Dataset::anomaly_fraction() const {
    if (!labels || n_rows == 0) return 0.0;
    return static_cast<double>(n_anomalies()) / static_cast<double>(n_rows);
}

void Dataset::validate() const {
    if (values.size() != n_rows * n_cols)
        throw ShapeError("value buffer does not match n_rows * n_cols");
    if (feature_names.size() != n_cols)
        throw ShapeError("feature_names does not match n_cols");
    std::set<std::string> seen;
    for (const auto& name : feature_names) {
        if (name.empty()) throw SchemaError("empty feature name");
        if (!seen.insert(name).second)
            throw SchemaError("duplicate feature name '" + name + "'");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw DomainError("non-finite value at flat index " + std::to_string(i));
    }
    if (labels) {
        if (labels->size() != n_rows)
            throw ShapeError("label vector does not match n_rows");
        for (auto v : *labels) {
            if (v != 0 && v != 1) throw SchemaError("labels must be 0 or 1");
        }
    }
}

Dataset Dataset::select_features(const std::vector<std::size_t>& keep) const {
    if (keep.empty()) throw DomainError("cannot select zero features");
    Dataset out;
    out.n_rows = n_rows;
    out.n_cols = keep.size();
    out.name = name;
    out.labels = labels;
    out.values.resize(n_rows * keep.size());
    for (std::size_t j : keep) {
        if (j >= n_cols) throw IndexError("feature index out of range");
        out.feature_names.push_back(feature_names[j]);
    }
    for (std::size_t i = 0; i < n_rows; ++i) {
        for (std::size_t k = 0; k < keep.size(); ++k) {
            out.values[i * keep.size() + k] = at(i, keep[k]);
        }
    }
    return out;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.n_rows = rows.size();
    out.n_cols = n_cols;
    out.feature_names = feature_names;
    out.name = name;
    out.values.resize(rows.size() * n_cols);
    if (labels) out.labels.emplace();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        std::size_t i = rows[k];
        if (i >= n_rows) throw IndexError("row index out of range");
        std::copy_n(values.data() + i * n_cols, n_cols, out.values.data() + k * n_cols);
        if (labels) out.labels->push_back((*labels)[i]);
    }
    return out;
}

Dataset load_csv(const std::string& path,
                 const std::optional<std::string>& label_column,
                 const std::string& dataset_name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();

    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) {
        if (cur.back() == '\r') cur.pop_back();
        lines.push_back(cur);
    }
    if (lines.empty()) throw SchemaError("'" + path + "' has no header row");

    std::vector<std::string> header = split_line(lines[0]);
    std::set<std::string> seen;
    for (const auto& h : header) {
        if (h.empty()) throw SchemaError("empty column name in header");
        if (!seen.insert(h).second)
            throw SchemaError("duplicate column name '" + h + "'");
    }

    std::size_t label_idx = header.size();
    if (label_column) {
        auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end())
            throw SchemaError("label column '" + *label_column + "' not found");
        label_idx = static_cast<std::size_t>(it - header.begin());
    }

    Dataset d;
    d.n_cols = header.size() - (label_column ? 1 : 0);
    if (d.n_cols == 0) throw SchemaError("no feature columns besides the label");
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label_idx) d.feature_names.push_back(header[j]);
    }
    if (label_column) d.labels.emplace();
    d.name = dataset_name.empty()
                 ? std::filesystem::path(path).stem().string()
                 : dataset_name;

    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty() && li + 1 == lines.size()) break;
        std::vector<std::string> cells = split_line(lines[li]);
        std::size_t row = li;  // 1-based data row
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                                 std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()),
                             row, 0);
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double v = parse_cell(cells[j], row, j + 1);
            if (j == label_idx) {
                if (v != 0.0 && v != 1.0)
                    throw SchemaError("row " + std::to_string(row) +
                                      ": label must be 0 or 1, got '" + cells[j] +
                                      "'");
                d.labels->push_back(static_cast<std::uint8_t>(v));
            } else {
                d.values.push_back(v);
            }
        }
        ++d.n_rows;
    }
    return d;
}

void save_csv(const Dataset& d, const std::string& path,
              const std::string& label_name) {
    std::string out;
    for (std::size_t j = 0; j < d.n_cols; ++j) {
        if (j) out.push_back(',');
        out += d.feature_names[j];
    }
    if (d.labels) {
        out.push_back(',');
        out += label_name;
    }
    out.push_back('\n');
    for (std::size_t i = 0; i < d.n_rows; ++i) {
        for (std::size_t j = 0; j < d.n_cols; ++j) {
            if (j) out.push_back(',');
            format_double(out, d.at(i, j));
        }
        if (d.labels) {
            out.push_back(',');
            out.push_back((*d.labels)[i] ? '1' : '0');
        }
        out.push_back('\n');
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("failed writing '" + path + "'");
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction,
                                  std::uint64_t seed, SplitScheme scheme) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DomainError("train_fraction must lie in (0, 1)");
    if (d.n_rows < 2) throw DomainError("need at least two rows to split");
    std::size_t cut = static_cast<std::size_t>(
        std::floor(static_cast<double>(d.n_rows) * train_fraction));
    if (cut == 0 || cut == d.n_rows)
        throw DomainError("split leaves one side empty");

    std::vector<std::size_t> order(d.n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (scheme == SplitScheme::Random) {
        SplitRng rng(seed);
        for (std::size_t i = d.n_rows - 1; i > 0; --i) {
            std::size_t j = rng.index(i + 1);
            std::swap(order[i], order[j]);
        }
    }
    std::vector<std::size_t> train_rows(order.begin(), order.begin() + cut);
    std::vector<std::size_t> test_rows(order.begin() + cut, order.end());
    Dataset train = d.select_rows(train_rows);
    Dataset test = d.select_rows(test_rows);
    train.name = d.name;
    test.name = d.name;
    return {std::move(train), std::move(test)};
}

namespace {

// Bin index in [0, bins); the top edge folds into the last bin.  The
// operation order keeps assignments invariant under exact power-of-two
// column scalings.
std::size_t bin_of(double v, double lo, double hi, std::size_t bins) {
    if (hi <= lo) return 0;
    double t = (v - lo) * static_cast<double>(bins) / (hi - lo);
    auto b = static_cast<std::ptrdiff_t>(t);
    if (b < 0) b = 0;
    if (b >= static_cast<std::ptrdiff_t>(bins))
        b = static_cast<std::ptrdiff_t>(bins) - 1;
    return static_cast<std::size_t>(b);
}

}  // namespace

DependencyProfile profile_dependencies(const Dataset& d, double corr_threshold,
                                       std::size_t mi_bins,
                                       double mi_threshold) {
    if (d.n_rows < 3) throw DomainError("need at least three rows to profile");
    if (d.n_cols < 1) throw DomainError("need at least one column to profile");
    if (mi_bins < 2) throw DomainError("mi_bins must be at least 2");
    if (!(corr_threshold > 0.0))
        throw DomainError("corr_threshold must be positive");

    const std::size_t p = d.n_cols;
    const std::size_t n = d.n_rows;
    DependencyProfile prof;
    prof.n_features = p;
    prof.corr_threshold = corr_threshold;
    prof.mi_bins = mi_bins;
    prof.pearson.assign(p * p, 0.0);
    prof.mutual_info.assign(p * p, 0.0);

    std::vector<double> mean(p, 0.0), sd(p, 0.0), lo(p, 0.0), hi(p, 0.0);
    std::vector<bool> constant(p, false);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0, mn = d.at(0, j), mx = d.at(0, j);
        for (std::size_t i = 0; i < n; ++i) {
            double v = d.at(i, j);
            s += v;
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        mean[j] = s / static_cast<double>(n);
        lo[j] = mn;
        hi[j] = mx;
        constant[j] = (mn == mx);
        if (constant[j]) prof.constant_columns.push_back(j);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double c = d.at(i, j) - mean[j];
            ss += c * c;
        }
        sd[j] = std::sqrt(ss);
    }

    std::vector<std::uint32_t> bins(n * p, 0);
    for (std::size_t j = 0; j < p; ++j) {
        if (constant[j]) continue;
        for (std::size_t i = 0; i < n; ++i)
            bins[i * p + j] =
                static_cast<std::uint32_t>(bin_of(d.at(i, j), lo[j], hi[j], mi_bins));
    }

    const std::size_t K = mi_bins;
    std::vector<double> joint(K * K, 0.0);
    auto mi_pair = [&](std::size_t a, std::size_t b) {
        std::fill(joint.begin(), joint.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            joint[bins[i * p + a] * K + bins[i * p + b]] += 1.0;
        std::vector<double> ra(K, 0.0), cb(K, 0.0);
        for (std::size_t x = 0; x < K; ++x)
            for (std::size_t y = 0; y < K; ++y) {
                ra[x] += joint[x * K + y];
                cb[y] += joint[x * K + y];
            }
        double nn = static_cast<double>(n);
        double mi = 0.0;
        for (std::size_t x = 0; x < K; ++x)
            for (std::size_t y = 0; y < K; ++y) {
                double c = joint[x * K + y];
                if (c > 0.0) mi += (c / nn) * std::log(c * nn / (ra[x] * cb[y]));
            }
        return std::max(mi, 0.0);
    };

    for (std::size_t a = 0; a < p; ++a) {
        if (constant[a]) continue;
        prof.pearson[a * p + a] = 1.0;
        prof.mutual_info[a * p + a] = mi_pair(a, a);  // equals the bin entropy
        for (std::size_t b = a + 1; b < p; ++b) {
            if (constant[b]) continue;
            double cov = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                cov += (d.at(i, a) - mean[a]) * (d.at(i, b) - mean[b]);
            double r = cov / (sd[a] * sd[b]);
            prof.pearson[a * p + b] = r;
            prof.pearson[b * p + a] = r;
            double mi = mi_pair(a, b);
            prof.mutual_info[a * p + b] = mi;
            prof.mutual_info[b * p + a] = mi;
        }
    }

    std::size_t denom = 0, low = 0, nonlinear = 0;
    for (std::size_t a = 0; a < p; ++a) {
        if (constant[a]) continue;
        for (std::size_t b = a + 1; b < p; ++b) {
            if (constant[b]) continue;
            ++denom;
            if (std::abs(prof.pearson[a * p + b]) < corr_threshold) {
                ++low;
                if (prof.mutual_info[a * p + b] > mi_threshold) ++nonlinear;
            }
        }
    }
    if (denom > 0) {
        prof.frac_low_corr = static_cast<double>(low) / static_cast<double>(denom);
        prof.frac_nonlinear =
            static_cast<double>(nonlinear) / static_cast<double>(denom);
    }
    return prof;
}

}  // namespace exiffi
