#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "exiffi/errors.hpp"
#include "exiffi/version.hpp"

namespace {

using exiffi::cli::Json;

struct IoFlags {
    std::string input;
    std::optional<std::string> label_col;
    unsigned threads = 0;
    std::string out_dir = "exiffi_out";
};

struct ModelFlags {
    std::string mode = "eif+";
    std::size_t trees = 100;
    std::size_t sample_size = 256;
    std::size_t max_depth = 0;
    double eta = 1.5;
    std::string contamination = "auto";
    std::uint64_t seed = 1;
};

struct SplitFlags {
    double train_fraction = 0.5;
    std::string scheme = "random";
    std::uint64_t split_seed = 1;
};

void add_io_flags(CLI::App* c, IoFlags& f, bool input_required) {
    auto* in = c->add_option("--input", f.input, "Input CSV path")
                   ->envname("EXIFFI_INPUT");
    if (input_required) in->required();
    c->add_option("--label-col", f.label_col,
                  "Name of the binary label column (1 = anomaly)")
        ->envname("EXIFFI_LABEL_COL");
    c->add_option("--threads", f.threads,
                  "Worker threads (0 = hardware concurrency)")
        ->envname("EXIFFI_THREADS");
    c->add_option("--out-dir", f.out_dir, "Output directory")
        ->envname("EXIFFI_OUT_DIR");
}

void add_model_flags(CLI::App* c, ModelFlags& f) {
    c->add_option("--mode", f.mode, "Forest variant")
        ->check(CLI::IsMember({"if", "eif", "eif+"}))
        ->envname("EXIFFI_MODE");
    c->add_option("--trees", f.trees, "Number of trees")->envname("EXIFFI_TREES");
    c->add_option("--sample-size", f.sample_size, "Per-tree subsample size")
        ->envname("EXIFFI_SAMPLE_SIZE");
    c->add_option("--max-depth", f.max_depth,
                  "Depth cap (0 = ceil(log2(sample size)))")
        ->envname("EXIFFI_MAX_DEPTH");
    c->add_option("--eta", f.eta, "eif+ intercept spread multiplier")
        ->envname("EXIFFI_ETA");
    c->add_option("--contamination", f.contamination,
                  "Expected anomaly fraction in (0, 0.5], or 'auto' to take "
                  "it from the labels")
        ->envname("EXIFFI_CONTAMINATION");
    c->add_option("--seed", f.seed, "Root RNG seed")->envname("EXIFFI_SEED");
}

void add_split_flags(CLI::App* c, SplitFlags& f) {
    c->add_option("--train-fraction", f.train_fraction,
                  "Fraction of rows used for training");
    c->add_option("--split", f.scheme, "Train/test split scheme")
        ->check(CLI::IsMember({"random", "sequential"}));
    c->add_option("--split-seed", f.split_seed, "Split permutation seed");
}

Json contamination_json(const std::string& s) {
    if (s == "auto") return Json();
    std::size_t pos = 0;
    double v = 0.0;
    bool ok = true;
    try {
        v = std::stod(s, &pos);
    } catch (...) {
        ok = false;
    }
    if (!ok || pos != s.size())
        throw exiffi::DomainError("contamination must be a number or 'auto', got '" +
                                  s + "'");
    return Json(v);
}

Json opt_str(const std::optional<std::string>& s) {
    return s ? Json(*s) : Json();
}

void put_io(Json& cfg, const IoFlags& f) {
    cfg["input"] = f.input;
    cfg["label_col"] = opt_str(f.label_col);
    cfg["threads"] = f.threads;
    cfg["out_dir"] = f.out_dir;
}

void put_model(Json& cfg, const ModelFlags& f) {
    cfg["mode"] = f.mode;
    cfg["trees"] = f.trees;
    cfg["sample_size"] = f.sample_size;
    cfg["max_depth"] = f.max_depth;
    cfg["eta"] = f.eta;
    cfg["contamination"] = contamination_json(f.contamination);
    cfg["seed"] = f.seed;
}

void put_split(Json& cfg, const SplitFlags& f) {
    cfg["train_fraction"] = f.train_fraction;
    cfg["split"] = f.scheme;
    cfg["split_seed"] = f.split_seed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Isolation-forest anomaly detection with feature-importance "
                 "explanations"};
    app.set_version_flag("--version", std::string(exiffi::kToolVersion));
    app.require_subcommand(1);
    app.footer("Most flags can also be set through EXIFFI_* environment "
               "variables (EXIFFI_THREADS, EXIFFI_SEED, ...); explicit flags "
               "win over the environment.");

    // fit
    IoFlags fit_io;
    ModelFlags fit_model;
    SplitFlags fit_split;
    fit_split.train_fraction = 0.7;
    CLI::App* c_fit = app.add_subcommand(
        "fit", "Train a forest, evaluate it on the test split when labels "
               "exist, and save the model");
    c_fit->option_defaults()->always_capture_default();
    add_io_flags(c_fit, fit_io, true);
    add_model_flags(c_fit, fit_model);
    add_split_flags(c_fit, fit_split);

    // explain
    IoFlags ex_io;
    std::string ex_model_path;
    std::optional<std::uint64_t> ex_row;
    std::size_t ex_runs = 0;
    std::size_t ex_top_k = 0;
    std::size_t ex_feat_i = 0;
    std::size_t ex_feat_j = 1;
    std::size_t ex_grid = 64;
    CLI::App* c_explain = app.add_subcommand(
        "explain", "Compute feature-importance explanations from a saved model");
    c_explain->option_defaults()->always_capture_default();
    c_explain->require_subcommand(1);
    c_explain->fallthrough();
    add_io_flags(c_explain, ex_io, true);
    c_explain->add_option("--model", ex_model_path, "Saved model path")
        ->required();
    CLI::App* c_ex_local = c_explain->add_subcommand(
        "local", "Per-sample local importance vectors");
    c_ex_local->fallthrough();
    c_ex_local->add_option("--row", ex_row,
                           "Explain this row only (default: all rows)");
    CLI::App* c_ex_global = c_explain->add_subcommand(
        "global", "Global importance scores, ranking and score-plot data");
    c_ex_global->fallthrough();
    c_ex_global->option_defaults()->always_capture_default();
    c_ex_global->add_option("--runs", ex_runs,
                            "Independent refits aggregated in gfi_runs.csv "
                            "(0 = score the loaded model only)");
    c_ex_global->add_option("--top-k", ex_top_k,
                            "Rows in score_plot.csv (0 = all features)");
    CLI::App* c_ex_map = c_explain->add_subcommand(
        "scoremap", "Local importance of two features over a grid");
    c_ex_map->fallthrough();
    c_ex_map->option_defaults()->always_capture_default();
    c_ex_map->add_option("--feat-i", ex_feat_i, "First feature index")
        ->required();
    c_ex_map->add_option("--feat-j", ex_feat_j, "Second feature index")
        ->required();
    c_ex_map->add_option("--grid", ex_grid, "Grid resolution per axis");

    // fs
    IoFlags fs_io;
    ModelFlags fs_model;
    SplitFlags fs_split;
    std::size_t fs_seeds = 10;
    std::optional<std::string> fs_ranking;
    CLI::App* c_fs = app.add_subcommand(
        "fs", "Score a feature ranking by retraining on nested feature subsets");
    c_fs->option_defaults()->always_capture_default();
    add_io_flags(c_fs, fs_io, true);
    add_model_flags(c_fs, fs_model);
    add_split_flags(c_fs, fs_split);
    c_fs->add_option("--seeds", fs_seeds, "Refits aggregated per curve point");
    c_fs->add_option("--ranking", fs_ranking,
                     "One-column CSV of feature indices, most important "
                     "first (default: rank by global importance)");

    // ablate
    IoFlags ab_io;
    ModelFlags ab_model;
    SplitFlags ab_split;
    std::string ab_param;
    std::vector<double> ab_grid;
    std::string ab_metric = "roc_auc";
    std::size_t ab_seeds = 5;
    CLI::App* c_ablate = app.add_subcommand(
        "ablate", "Sweep one hyperparameter and report mean/std of a metric");
    c_ablate->option_defaults()->always_capture_default();
    add_io_flags(c_ablate, ab_io, true);
    add_model_flags(c_ablate, ab_model);
    add_split_flags(c_ablate, ab_split);
    c_ablate->add_option("--param", ab_param, "Parameter to sweep")
        ->check(CLI::IsMember({"trees", "depth", "sample-size", "contamination"}))
        ->required();
    c_ablate->add_option("--grid", ab_grid,
                         "Comma-separated grid values (default depends on "
                         "--param)")
        ->delimiter(',');
    c_ablate->add_option("--metric", ab_metric,
                         "Metric for the contamination sweep")
        ->check(CLI::IsMember({"roc_auc", "auc_fs"}));
    c_ablate->add_option("--seeds", ab_seeds, "Refits per grid value");

    // synth
    std::string sy_kind = "xy_axis";
    std::size_t sy_inliers = 1000;
    std::size_t sy_outliers = 50;
    std::size_t sy_noise = 4;
    std::uint64_t sy_seed = 1;
    double sy_offset = 8.0;
    double sy_noise_scale = 1.0;
    double sy_moon_radius = 5.5;
    double sy_moon_width = 0.5;
    double sy_blob_std = 0.5;
    std::string sy_out = "exiffi_out";
    CLI::App* c_synth = app.add_subcommand(
        "synth", "Generate a labeled synthetic benchmark CSV");
    c_synth->option_defaults()->always_capture_default();
    c_synth->add_option("--kind", sy_kind, "Benchmark family")
        ->check(CLI::IsMember({"xy_axis", "half_moon"}));
    c_synth->add_option("--n-inliers", sy_inliers, "Inlier rows");
    c_synth->add_option("--n-outliers", sy_outliers, "Outlier rows");
    c_synth->add_option("--noise-features", sy_noise,
                        "Standard-normal distractor columns");
    c_synth->add_option("--seed", sy_seed, "Generator seed")
        ->envname("EXIFFI_SEED");
    c_synth->add_option("--offset", sy_offset,
                        "xy_axis anomaly displacement along each axis");
    c_synth->add_option("--noise-scale", sy_noise_scale,
                        "xy_axis anomaly cluster spread");
    c_synth->add_option("--moon-radius", sy_moon_radius, "half_moon arc radius");
    c_synth->add_option("--moon-width", sy_moon_width, "half_moon arc thickness");
    c_synth->add_option("--blob-std", sy_blob_std,
                        "half_moon anomaly blob spread");
    c_synth->add_option("--out-dir", sy_out, "Output directory")
        ->envname("EXIFFI_OUT_DIR");

    // profile
    IoFlags pr_io;
    double pr_corr = 0.05;
    std::size_t pr_bins = 16;
    double pr_mi = 0.0;
    CLI::App* c_profile = app.add_subcommand(
        "profile", "Pairwise dependency profile of a dataset");
    c_profile->option_defaults()->always_capture_default();
    add_io_flags(c_profile, pr_io, true);
    c_profile->add_option("--corr-threshold", pr_corr,
                          "|r| below this counts as low correlation");
    c_profile->add_option("--mi-bins", pr_bins,
                          "Histogram bins per axis for mutual information");
    c_profile->add_option("--mi-threshold", pr_mi,
                          "MI above this flags a low-corr pair as nonlinear");

    // bench
    IoFlags be_io;
    ModelFlags be_model;
    std::size_t be_rows = 36000;
    std::size_t be_cols = 52;
    std::uint64_t be_data_seed = 1;
    std::optional<std::string> be_model_path;
    std::size_t be_repeats = 5;
    CLI::App* c_bench = app.add_subcommand(
        "bench", "Time fitting, batch scoring and single-sample explanation");
    c_bench->option_defaults()->always_capture_default();
    add_io_flags(c_bench, be_io, false);
    add_model_flags(c_bench, be_model);
    c_bench->add_option("--rows", be_rows,
                        "Rows of generated data when --input is absent");
    c_bench->add_option("--cols", be_cols,
                        "Columns of generated data when --input is absent");
    c_bench->add_option("--data-seed", be_data_seed, "Generated-data seed");
    c_bench->add_option("--model", be_model_path,
                        "Saved model to benchmark (default: fit inline and "
                        "time that too)");
    c_bench->add_option("--repeats", be_repeats, "Repetitions per phase");

    // replay
    std::string rp_manifest;
    std::string rp_out;
    std::optional<unsigned> rp_threads;
    CLI::App* c_replay = app.add_subcommand(
        "replay", "Re-run a recorded invocation from its manifest");
    c_replay->add_option("--manifest", rp_manifest, "Path to manifest.json")
        ->required();
    c_replay->add_option("--out-dir", rp_out,
                         "Output directory (default: 'replay' next to the "
                         "manifest)");
    c_replay->add_option("--threads", rp_threads,
                         "Override the recorded worker-thread count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Json cfg;
        if (app.got_subcommand(c_fit)) {
            put_io(cfg, fit_io);
            put_model(cfg, fit_model);
            put_split(cfg, fit_split);
            exiffi::cli::run("fit", cfg);
        } else if (app.got_subcommand(c_explain)) {
            put_io(cfg, ex_io);
            cfg["model"] = ex_model_path;
            if (c_explain->got_subcommand(c_ex_local)) {
                cfg["target"] = "local";
                cfg["row"] = ex_row ? Json(*ex_row) : Json();
            } else if (c_explain->got_subcommand(c_ex_global)) {
                cfg["target"] = "global";
                cfg["runs"] = ex_runs;
                cfg["top_k"] = ex_top_k;
            } else {
                cfg["target"] = "scoremap";
                cfg["feat_i"] = ex_feat_i;
                cfg["feat_j"] = ex_feat_j;
                cfg["grid"] = ex_grid;
            }
            exiffi::cli::run("explain", cfg);
        } else if (app.got_subcommand(c_fs)) {
            put_io(cfg, fs_io);
            put_model(cfg, fs_model);
            put_split(cfg, fs_split);
            cfg["seeds"] = fs_seeds;
            cfg["ranking_csv"] = opt_str(fs_ranking);
            exiffi::cli::run("fs", cfg);
        } else if (app.got_subcommand(c_ablate)) {
            put_io(cfg, ab_io);
            put_model(cfg, ab_model);
            put_split(cfg, ab_split);
            cfg["param"] = ab_param;
            cfg["grid"] = ab_grid.empty() ? Json() : Json(ab_grid);
            cfg["metric"] = ab_metric;
            cfg["seeds"] = ab_seeds;
            exiffi::cli::run("ablate", cfg);
        } else if (app.got_subcommand(c_synth)) {
            cfg["kind"] = sy_kind;
            cfg["n_inliers"] = sy_inliers;
            cfg["n_outliers"] = sy_outliers;
            cfg["noise_features"] = sy_noise;
            cfg["seed"] = sy_seed;
            cfg["offset"] = sy_offset;
            cfg["noise_scale"] = sy_noise_scale;
            cfg["moon_radius"] = sy_moon_radius;
            cfg["moon_width"] = sy_moon_width;
            cfg["blob_std"] = sy_blob_std;
            cfg["out_dir"] = sy_out;
            exiffi::cli::run("synth", cfg);
        } else if (app.got_subcommand(c_profile)) {
            put_io(cfg, pr_io);
            cfg["corr_threshold"] = pr_corr;
            cfg["mi_bins"] = pr_bins;
            cfg["mi_threshold"] = pr_mi;
            exiffi::cli::run("profile", cfg);
        } else if (app.got_subcommand(c_bench)) {
            put_io(cfg, be_io);
            cfg["input"] = be_io.input.empty() ? Json() : Json(be_io.input);
            put_model(cfg, be_model);
            cfg["rows"] = be_rows;
            cfg["cols"] = be_cols;
            cfg["data_seed"] = be_data_seed;
            cfg["model"] = opt_str(be_model_path);
            cfg["repeats"] = be_repeats;
            exiffi::cli::run("bench", cfg);
        } else if (app.got_subcommand(c_replay)) {
            exiffi::cli::replay(rp_manifest, rp_out, rp_threads);
        }
        return 0;
    } catch (const exiffi::DomainError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const exiffi::IndexError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const exiffi::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    } catch (...) {
        std::fprintf(stderr, "internal error\n");
        return 3;
    }
}
