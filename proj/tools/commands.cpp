#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "exiffi/ablation.hpp"
#include "exiffi/dataset.hpp"
#include "exiffi/errors.hpp"
#include "exiffi/feature_selection.hpp"
#include "exiffi/forest.hpp"
#include "exiffi/importance.hpp"
#include "exiffi/metrics.hpp"
#include "exiffi/model_io.hpp"
#include "exiffi/rng.hpp"
#include "exiffi/synth.hpp"
#include "exiffi/version.hpp"

namespace exiffi::cli {
namespace {

namespace stdfs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shortest round-trip decimal form, so identical doubles always print as
// identical text and re-parse to the same bits.
std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string utc_now() {
    const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input for hashing: " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i)
            h = (h ^ static_cast<unsigned char>(buf[i])) * 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const stdfs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

// Per-invocation bookkeeping: output files, input digests and phase timings,
// flushed into timing.json and manifest.json at the end of the run.
struct RunContext {
    std::string subcommand;
    Json cfg;
    stdfs::path out_dir;
    Json inputs = Json::object();
    Json timings = Json::object();
    std::vector<std::string> outputs;
    Clock::time_point started = Clock::now();

    stdfs::path path_of(const std::string& name) const { return out_dir / name; }

    void note_input(const std::string& p) { inputs[p] = hex64(fnv1a64_file(p)); }

    void emit(const std::string& name, const std::string& text) {
        write_text(out_dir / name, text);
        outputs.push_back(name);
    }

    void emit_json(const std::string& name, Json j) {
        j["manifest"] = "manifest.json";
        emit(name, j.dump(2) + "\n");
    }

    void finish() {
        timings["total"] = seconds_since(started);
        emit_json("timing.json", Json{{"timings_s", timings}});
        Json seeds = Json::object();
        for (const char* k : {"seed", "split_seed", "data_seed"})
            if (cfg.contains(k)) seeds[k] = cfg.at(k);
        const Json manifest{
            {"manifest_version", 1},
            {"tool", kToolName},
            {"tool_version", kToolVersion},
            {"subcommand", subcommand},
            {"config", cfg},
            {"seeds", seeds},
            {"inputs", inputs},
            {"outputs", outputs},
            {"timings_s", timings},
            {"created_utc", utc_now()},
        };
        write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    }
};

ForestParams params_from(const Json& cfg) {
    ForestParams p;
    p.n_trees = cfg.at("trees").get<std::size_t>();
    p.sample_size = cfg.at("sample_size").get<std::size_t>();
    p.max_depth = cfg.at("max_depth").get<std::size_t>();
    p.mode = mode_from_name(cfg.at("mode").get<std::string>());
    p.eta = cfg.at("eta").get<double>();
    if (!cfg.at("contamination").is_null())
        p.contamination = cfg.at("contamination").get<double>();
    p.seed = cfg.at("seed").get<std::uint64_t>();
    p.validate();
    return p;
}

unsigned threads_of(const Json& cfg) { return cfg.at("threads").get<unsigned>(); }

SplitScheme scheme_from(const std::string& s) {
    if (s == "random") return SplitScheme::Random;
    if (s == "sequential") return SplitScheme::Sequential;
    throw DomainError("unknown split scheme: " + s);
}

std::optional<std::string> label_col_of(const Json& cfg) {
    if (!cfg.contains("label_col") || cfg.at("label_col").is_null()) return std::nullopt;
    return cfg.at("label_col").get<std::string>();
}

Dataset load_input(RunContext& ctx) {
    const std::string path = ctx.cfg.at("input").get<std::string>();
    ctx.note_input(path);
    return load_csv(path, label_col_of(ctx.cfg));
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ',';
        out += names[i];
    }
    return out;
}

// ---------------------------------------------------------------- fit

void run_fit(RunContext& ctx) {
    auto t = Clock::now();
    const Dataset d = load_input(ctx);
    ctx.timings["load"] = seconds_since(t);

    const double tf = ctx.cfg.at("train_fraction").get<double>();
    if (!(tf > 0.0) || tf > 1.0)
        throw DomainError("train fraction must be in (0, 1]");
    const bool split_used = tf < 1.0;
    Dataset train, test;
    if (split_used) {
        auto parts = split(d, tf, ctx.cfg.at("split_seed").get<std::uint64_t>(),
                           scheme_from(ctx.cfg.at("split").get<std::string>()));
        train = std::move(parts.first);
        test = std::move(parts.second);
    } else {
        train = d;
        test = d;
    }

    const ForestParams params = params_from(ctx.cfg);
    const unsigned threads = threads_of(ctx.cfg);

    t = Clock::now();
    const Forest f = fit(train, params, threads);
    const double fit_s = seconds_since(t);
    ctx.timings["fit"] = fit_s;

    save_model(f, ctx.path_of("model.bin").string());
    ctx.outputs.push_back("model.bin");

    Json metrics{{"evaluated", false},
                 {"split_used", split_used},
                 {"n_train", train.n_rows},
                 {"n_test", test.n_rows},
                 {"mode", mode_name(params.mode)},
                 {"contamination_used",
                  f.contamination_used ? Json(*f.contamination_used) : Json()},
                 {"score_threshold", f.threshold ? Json(*f.threshold) : Json()}};

    if (test.has_labels()) {
        t = Clock::now();
        const std::vector<double> scores = anomaly_scores(f, test, threads);
        const double predict_s = seconds_since(t);
        ctx.timings["predict"] = predict_s;

        MetricReport rep;
        rep.average_precision = average_precision(scores, *test.labels);
        rep.roc_auc = roc_auc(scores, *test.labels);
        const double level =
            f.contamination_used ? *f.contamination_used : test.anomaly_fraction();
        const PrecisionResult prec =
            precision_at_contamination(scores, *test.labels, level);
        rep.precision = prec.value;
        rep.precision_warning = prec.no_positive_predictions;
        rep.fit_time_s = fit_s;
        rep.predict_time_s = predict_s;

        metrics["evaluated"] = true;
        metrics["average_precision"] = rep.average_precision;
        metrics["roc_auc"] = rep.roc_auc;
        metrics["precision_at_contamination"] = rep.precision;
        metrics["precision_no_positive_predictions"] = rep.precision_warning;
        metrics["contamination_for_precision"] = level;

        std::fputs(format_metric_table({{mode_name(params.mode), rep}}).c_str(),
                   stdout);
    }
    ctx.emit_json("metrics.json", metrics);
}

// ---------------------------------------------------------------- explain

void explain_local(RunContext& ctx, const Forest& f, const Dataset& d,
                   unsigned threads) {
    std::vector<std::size_t> rows;
    std::vector<ImportanceVector> vecs;
    if (!ctx.cfg.at("row").is_null()) {
        const std::size_t r = ctx.cfg.at("row").get<std::size_t>();
        if (r >= d.n_rows)
            throw IndexError("row " + std::to_string(r) + " out of range for " +
                             std::to_string(d.n_rows) + " rows");
        rows.push_back(r);
        vecs.push_back(local_importance(f, d.row(r)));
    } else {
        rows.resize(d.n_rows);
        for (std::size_t i = 0; i < d.n_rows; ++i) rows[i] = i;
        vecs = local_importance_batch(f, d, threads);
    }
    Json raw = Json::array(), norm = Json::array(), lfi = Json::array();
    for (const ImportanceVector& v : vecs) {
        raw.push_back(v.raw);
        norm.push_back(v.normalizer);
        lfi.push_back(v.lfi);
    }
    ctx.emit_json("lfi.json", Json{{"feature_names", d.feature_names},
                                   {"rows", rows},
                                   {"raw", raw},
                                   {"normalizer", norm},
                                   {"lfi", lfi}});
}

void explain_global(RunContext& ctx, const Forest& f, const Dataset& d,
                    unsigned threads) {
    std::vector<std::uint8_t> mask;
    std::string mask_source;
    if (d.has_labels()) {
        mask = *d.labels;
        mask_source = "labels";
    } else {
        mask = predict(f, d, threads);
        mask_source = "predicted";
    }
    const std::size_t n_flagged =
        static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));

    const std::size_t n_runs = ctx.cfg.at("runs").get<std::size_t>();
    const GfiResult g = global_importance(f, d, mask, n_runs, threads);

    ctx.emit_json("gfi.json", Json{{"feature_names", d.feature_names},
                                   {"scores", g.scores},
                                   {"ranking", g.ranking},
                                   {"mask_source", mask_source},
                                   {"n_flagged", n_flagged},
                                   {"n_runs", g.runs.size()}});

    std::string runs_csv = join_names(d.feature_names) + "\n";
    for (const std::vector<double>& run : g.runs) {
        for (std::size_t j = 0; j < run.size(); ++j) {
            if (j) runs_csv += ',';
            runs_csv += fmt_double(run[j]);
        }
        runs_csv += '\n';
    }
    ctx.emit("gfi_runs.csv", runs_csv);

    std::size_t top_k = ctx.cfg.at("top_k").get<std::size_t>();
    if (top_k == 0 || top_k > d.n_cols) top_k = d.n_cols;
    std::string plot_csv = "rank,feature,score\n";
    for (std::size_t r = 0; r < top_k; ++r) {
        const std::size_t feature = g.ranking[r];
        plot_csv += std::to_string(r) + ',' + std::to_string(feature) + ',' +
                    fmt_double(g.scores[feature]) + '\n';
    }
    ctx.emit("score_plot.csv", plot_csv);
}

void explain_scoremap(RunContext& ctx, const Forest& f, const Dataset& d,
                      unsigned threads) {
    const std::size_t fi = ctx.cfg.at("feat_i").get<std::size_t>();
    const std::size_t fj = ctx.cfg.at("feat_j").get<std::size_t>();
    const std::size_t grid = ctx.cfg.at("grid").get<std::size_t>();
    const Scoremap m = local_scoremap(f, d, fi, fj, grid, threads);

    std::string csv = "a,b,coord_i,coord_j,lfi_i,lfi_j\n";
    for (std::size_t a = 0; a < m.grid; ++a)
        for (std::size_t b = 0; b < m.grid; ++b) {
            const std::size_t idx = a * m.grid + b;
            csv += std::to_string(a) + ',' + std::to_string(b) + ',' +
                   fmt_double(m.coord_i[a]) + ',' + fmt_double(m.coord_j[b]) +
                   ',' + fmt_double(m.lfi_i[idx]) + ',' +
                   fmt_double(m.lfi_j[idx]) + '\n';
        }
    ctx.emit("scoremap.csv", csv);
}

void run_explain(RunContext& ctx) {
    auto t = Clock::now();
    const std::string model_path = ctx.cfg.at("model").get<std::string>();
    ctx.note_input(model_path);
    const Forest f = load_model(model_path);
    const Dataset d = load_input(ctx);
    ctx.timings["load"] = seconds_since(t);

    if (f.n_features != d.n_cols)
        throw ShapeError("model expects " + std::to_string(f.n_features) +
                         " features but the data has " +
                         std::to_string(d.n_cols));
    const unsigned threads = threads_of(ctx.cfg);

    t = Clock::now();
    const std::string target = ctx.cfg.at("target").get<std::string>();
    if (target == "local")
        explain_local(ctx, f, d, threads);
    else if (target == "global")
        explain_global(ctx, f, d, threads);
    else if (target == "scoremap")
        explain_scoremap(ctx, f, d, threads);
    else
        throw DomainError("unknown explain target: " + target);
    ctx.timings["explain"] = seconds_since(t);
}

// ---------------------------------------------------------------- fs

std::vector<std::size_t> ranking_from_csv(RunContext& ctx,
                                          const std::string& path,
                                          std::size_t n_features) {
    ctx.note_input(path);
    const Dataset r = load_csv(path);
    if (r.n_cols != 1)
        throw SchemaError("ranking CSV must have exactly one column, got " +
                          std::to_string(r.n_cols));
    std::vector<std::size_t> ranking;
    ranking.reserve(r.n_rows);
    for (std::size_t i = 0; i < r.n_rows; ++i) {
        const double v = r.at(i, 0);
        const double rounded = std::nearbyint(v);
        if (v < 0.0 || std::fabs(v - rounded) > 1e-9)
            throw DomainError("ranking entries must be nonnegative integers");
        ranking.push_back(static_cast<std::size_t>(rounded));
    }
    if (ranking.size() != n_features)
        throw RankError("ranking lists " + std::to_string(ranking.size()) +
                        " features but the data has " +
                        std::to_string(n_features));
    return ranking;
}

void run_fs(RunContext& ctx) {
    auto t = Clock::now();
    const Dataset d = load_input(ctx);
    ctx.timings["load"] = seconds_since(t);
    if (!d.has_labels())
        throw LabelError("feature selection needs labels; pass --label-col");

    const ForestParams params = params_from(ctx.cfg);
    const unsigned threads = threads_of(ctx.cfg);
    FsOptions options;
    options.train_fraction = ctx.cfg.at("train_fraction").get<double>();
    options.scheme = scheme_from(ctx.cfg.at("split").get<std::string>());
    options.split_seed = ctx.cfg.at("split_seed").get<std::uint64_t>();
    options.threads = threads;

    std::vector<std::size_t> ranking;
    std::string ranking_source;
    if (!ctx.cfg.at("ranking_csv").is_null()) {
        ranking = ranking_from_csv(
            ctx, ctx.cfg.at("ranking_csv").get<std::string>(), d.n_cols);
        ranking_source = "file";
    } else {
        // Rank features by global importance of a forest fitted on the same
        // train split the proxy task will use, with the labeled outliers as
        // the importance mask.
        t = Clock::now();
        auto parts =
            split(d, options.train_fraction, options.split_seed, options.scheme);
        const Dataset& train = parts.first;
        const Forest f = fit(train, params, threads);
        ranking = rank_descending(gfi_scores(f, train, *train.labels, threads));
        ranking_source = "gfi";
        ctx.timings["ranking"] = seconds_since(t);
    }

    const std::size_t n_seeds = ctx.cfg.at("seeds").get<std::size_t>();
    t = Clock::now();
    const FsResult res = run_feature_selection(d, params, ranking, n_seeds, options);
    ctx.timings["selection"] = seconds_since(t);

    std::string csv = "n_retained,strategy,mean_ap,std_ap\n";
    for (const FsCurve* curve : {&res.direct, &res.inverse, &res.random})
        for (const FsPoint& pt : curve->points)
            csv += std::to_string(pt.n_retained) + ',' +
                   std::to_string(static_cast<int>(curve->strategy)) + ',' +
                   fmt_double(pt.mean_ap) + ',' + fmt_double(pt.std_ap) + '\n';
    ctx.emit("fs_curves.csv", csv);

    ctx.emit_json("fs_summary.json",
                  Json{{"feature_names", d.feature_names},
                       {"ranking", ranking},
                       {"ranking_source", ranking_source},
                       {"n_seeds", n_seeds},
                       {"auc_fs", res.auc_fs},
                       {"auc_fs_direct_vs_random", res.auc_fs_direct_vs_random},
                       {"auc_fs_random_vs_inverse", res.auc_fs_random_vs_inverse}});
}

// ---------------------------------------------------------------- ablate

std::vector<std::size_t> size_grid_from(const Json& grid) {
    std::vector<std::size_t> out;
    for (const Json& g : grid) {
        const double v = g.get<double>();
        const double rounded = std::nearbyint(v);
        if (v < 0.0 || std::fabs(v - rounded) > 1e-9)
            throw DomainError("grid entries for this parameter must be "
                              "nonnegative integers");
        out.push_back(static_cast<std::size_t>(rounded));
    }
    return out;
}

void run_ablate(RunContext& ctx) {
    auto t = Clock::now();
    const Dataset d = load_input(ctx);
    ctx.timings["load"] = seconds_since(t);

    const ForestParams params = params_from(ctx.cfg);
    SweepOptions options;
    options.train_fraction = ctx.cfg.at("train_fraction").get<double>();
    options.scheme = scheme_from(ctx.cfg.at("split").get<std::string>());
    options.split_seed = ctx.cfg.at("split_seed").get<std::uint64_t>();
    options.threads = threads_of(ctx.cfg);

    const std::string param = ctx.cfg.at("param").get<std::string>();
    const std::size_t n_seeds = ctx.cfg.at("seeds").get<std::size_t>();
    const Json& grid_cfg = ctx.cfg.at("grid");

    t = Clock::now();
    SweepResult res;
    if (param == "contamination") {
        std::vector<double> grid;
        if (grid_cfg.is_null()) {
            if (!d.has_labels())
                throw LabelError("the default contamination grid is centred on "
                                 "the labeled anomaly rate; pass --label-col "
                                 "or give --grid explicitly");
            grid = default_contamination_grid(d.anomaly_fraction());
        } else {
            grid = grid_cfg.get<std::vector<double>>();
        }
        const std::string metric = ctx.cfg.at("metric").get<std::string>();
        ContaminationMetric m;
        if (metric == "roc_auc")
            m = ContaminationMetric::RocAuc;
        else if (metric == "auc_fs")
            m = ContaminationMetric::AucFs;
        else
            throw DomainError("unknown contamination metric: " + metric);
        ctx.cfg["grid"] = grid;
        res = sweep_contamination(d, params, grid, n_seeds, m, options);
    } else {
        std::vector<std::size_t> grid;
        if (!grid_cfg.is_null())
            grid = size_grid_from(grid_cfg);
        if (param == "trees") {
            if (grid.empty()) grid = {10, 30, 50, 100, 300};
            ctx.cfg["grid"] = grid;
            res = sweep_trees(d, params, grid, n_seeds, options);
        } else if (param == "depth") {
            if (grid.empty()) grid = {0, 2, 4, 6, 8};
            ctx.cfg["grid"] = grid;
            res = sweep_max_depth(d, params, grid, n_seeds, options);
        } else if (param == "sample-size") {
            if (grid.empty()) grid = {64, 128, 256, 512};
            ctx.cfg["grid"] = grid;
            res = sweep_sample_size(d, params, grid, n_seeds, options);
        } else {
            throw DomainError("unknown sweep parameter: " + param);
        }
    }
    ctx.timings["sweep"] = seconds_since(t);

    std::string csv = "value,mean,std\n";
    for (std::size_t i = 0; i < res.values.size(); ++i)
        csv += fmt_double(res.values[i]) + ',' + fmt_double(res.mean[i]) + ',' +
               fmt_double(res.stddev[i]) + '\n';
    ctx.emit("sweep.csv", csv);
}

// ---------------------------------------------------------------- synth

void run_synth(RunContext& ctx) {
    SynthSpec s;
    s.kind = synth_kind_from_name(ctx.cfg.at("kind").get<std::string>());
    s.n_inliers = ctx.cfg.at("n_inliers").get<std::size_t>();
    s.n_outliers = ctx.cfg.at("n_outliers").get<std::size_t>();
    s.n_noise_features = ctx.cfg.at("noise_features").get<std::size_t>();
    s.seed = ctx.cfg.at("seed").get<std::uint64_t>();
    s.offset = ctx.cfg.at("offset").get<double>();
    s.noise_scale = ctx.cfg.at("noise_scale").get<double>();
    s.moon_radius = ctx.cfg.at("moon_radius").get<double>();
    s.moon_width = ctx.cfg.at("moon_width").get<double>();
    s.blob_std = ctx.cfg.at("blob_std").get<double>();
    s.validate();

    auto t = Clock::now();
    const Dataset d = generate_synthetic(s);
    ctx.timings["generate"] = seconds_since(t);

    t = Clock::now();
    save_csv(d, ctx.path_of("data.csv").string());
    ctx.outputs.push_back("data.csv");
    ctx.timings["write"] = seconds_since(t);
}

// ---------------------------------------------------------------- profile

void run_profile(RunContext& ctx) {
    auto t = Clock::now();
    const Dataset d = load_input(ctx);
    ctx.timings["load"] = seconds_since(t);

    t = Clock::now();
    const DependencyProfile prof = profile_dependencies(
        d, ctx.cfg.at("corr_threshold").get<double>(),
        ctx.cfg.at("mi_bins").get<std::size_t>(),
        ctx.cfg.at("mi_threshold").get<double>());
    ctx.timings["profile"] = seconds_since(t);

    Json pearson = Json::array(), mi = Json::array();
    for (std::size_t i = 0; i < prof.n_features; ++i) {
        Json prow = Json::array(), mrow = Json::array();
        for (std::size_t j = 0; j < prof.n_features; ++j) {
            prow.push_back(prof.pearson_at(i, j));
            mrow.push_back(prof.mi_at(i, j));
        }
        pearson.push_back(std::move(prow));
        mi.push_back(std::move(mrow));
    }
    ctx.emit_json("profile.json",
                  Json{{"n_features", prof.n_features},
                       {"feature_names", d.feature_names},
                       {"constant_columns", prof.constant_columns},
                       {"frac_low_corr", prof.frac_low_corr},
                       {"frac_nonlinear", prof.frac_nonlinear},
                       {"corr_threshold", prof.corr_threshold},
                       {"mi_bins", prof.mi_bins},
                       {"pearson", pearson},
                       {"mutual_info", mi}});
}

// ---------------------------------------------------------------- bench

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double p95_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    std::size_t idx = static_cast<std::size_t>(std::ceil(0.95 * n));
    if (idx > 0) --idx;
    if (idx >= n) idx = n - 1;
    return v[idx];
}

Json phase_json(const std::vector<double>& samples) {
    return Json{{"samples_s", samples},
                {"median_s", median_of(samples)},
                {"p95_s", p95_of(samples)}};
}

void run_bench(RunContext& ctx) {
    const unsigned threads = threads_of(ctx.cfg);
    const std::size_t repeats = ctx.cfg.at("repeats").get<std::size_t>();
    if (repeats == 0) throw DomainError("repeats must be at least 1");

    Dataset d;
    if (!ctx.cfg.at("input").is_null()) {
        d = load_input(ctx);
    } else {
        d.n_rows = ctx.cfg.at("rows").get<std::size_t>();
        d.n_cols = ctx.cfg.at("cols").get<std::size_t>();
        if (d.n_rows == 0 || d.n_cols == 0)
            throw DomainError("benchmark data needs at least one row and column");
        SplitRng rng(ctx.cfg.at("data_seed").get<std::uint64_t>());
        d.values.resize(d.n_rows * d.n_cols);
        for (double& v : d.values) v = rng.normal();
        d.feature_names.resize(d.n_cols);
        for (std::size_t j = 0; j < d.n_cols; ++j)
            d.feature_names[j] = "f_" + std::to_string(j);
        d.name = "bench_random";
    }

    const ForestParams params = params_from(ctx.cfg);
    Json phases = Json::object();

    Forest f;
    if (!ctx.cfg.at("model").is_null()) {
        const std::string model_path = ctx.cfg.at("model").get<std::string>();
        ctx.note_input(model_path);
        f = load_model(model_path);
        if (f.n_features != d.n_cols)
            throw ShapeError("model expects " + std::to_string(f.n_features) +
                             " features but the data has " +
                             std::to_string(d.n_cols));
    } else {
        std::vector<double> samples;
        samples.reserve(repeats);
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto t = Clock::now();
            f = fit(d, params, threads);
            samples.push_back(seconds_since(t));
        }
        phases["fit"] = phase_json(samples);
    }

    std::vector<double> scores;
    {
        std::vector<double> samples;
        samples.reserve(repeats);
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto t = Clock::now();
            scores = anomaly_scores(f, d, threads);
            samples.push_back(seconds_since(t));
        }
        phases["predict"] = phase_json(samples);
    }

    const std::size_t target = static_cast<std::size_t>(
        std::max_element(scores.begin(), scores.end()) - scores.begin());
    {
        std::vector<double> samples;
        samples.reserve(repeats);
        double sink = 0.0;
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto t = Clock::now();
            const ImportanceVector iv = local_importance(f, d.row(target));
            samples.push_back(seconds_since(t));
            sink += iv.lfi.empty() ? 0.0 : iv.lfi[0];
        }
        (void)sink;
        phases["lfi"] = phase_json(samples);
    }

    ctx.emit_json("bench.json", Json{{"n_rows", d.n_rows},
                                     {"n_cols", d.n_cols},
                                     {"repeats", repeats},
                                     {"mode", mode_name(params.mode)},
                                     {"trees", params.n_trees},
                                     {"sample_size", params.sample_size},
                                     {"target_row", target},
                                     {"phases", phases}});
}

}  // namespace

void run(const std::string& subcommand, const Json& cfg) {
    RunContext ctx;
    ctx.subcommand = subcommand;
    ctx.cfg = cfg;
    ctx.out_dir = cfg.at("out_dir").get<std::string>();
    std::error_code ec;
    stdfs::create_directories(ctx.out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory: " + ctx.out_dir.string());

    if (subcommand == "fit")
        run_fit(ctx);
    else if (subcommand == "explain")
        run_explain(ctx);
    else if (subcommand == "fs")
        run_fs(ctx);
    else if (subcommand == "ablate")
        run_ablate(ctx);
    else if (subcommand == "synth")
        run_synth(ctx);
    else if (subcommand == "profile")
        run_profile(ctx);
    else if (subcommand == "bench")
        run_bench(ctx);
    else
        throw DomainError("unknown subcommand: " + subcommand);

    ctx.finish();
    std::printf("%s: wrote %zu files to %s\n", subcommand.c_str(),
                ctx.outputs.size() + 1, ctx.out_dir.string().c_str());
}

void replay(const std::string& manifest_path, std::string out_dir,
            std::optional<unsigned> threads) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest: " + manifest_path);
    Json manifest;
    try {
        manifest = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!manifest.contains("manifest_version") ||
        manifest.at("manifest_version") != 1)
        throw VersionError("unsupported manifest version");

    const std::string subcommand = manifest.at("subcommand").get<std::string>();
    Json cfg = manifest.at("config");

    for (const auto& [path, digest] : manifest.at("inputs").items())
        if (hex64(fnv1a64_file(path)) != digest.get<std::string>())
            throw StateError("input changed since the manifest was written: " +
                             path);

    if (out_dir.empty())
        out_dir =
            (stdfs::path(manifest_path).parent_path() / "replay").string();
    cfg["out_dir"] = out_dir;
    if (threads) cfg["threads"] = *threads;
    run(subcommand, cfg);
}

}  // namespace exiffi::cli
