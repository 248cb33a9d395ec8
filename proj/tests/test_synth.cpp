#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "exiffi/errors.hpp"
#include "exiffi/forest.hpp"
#include "exiffi/metrics.hpp"
#include "exiffi/synth.hpp"
#include "testkit.hpp"

using namespace exiffi;
using namespace exiffi::testkit;

TEST_CASE("synthetic datasets have the advertised layout") {
    SynthSpec spec;
    spec.n_inliers = 120;
    spec.n_outliers = 12;
    spec.n_noise_features = 3;
    for (SynthKind kind : {SynthKind::XyAxis, SynthKind::HalfMoon}) {
        spec.kind = kind;
        Dataset d = generate_synthetic(spec);
        CHECK(d.n_rows == 132);
        CHECK(d.n_cols == 5);
        CHECK(d.name == synth_kind_name(kind));
        REQUIRE(d.has_labels());
        CHECK(d.n_anomalies() == 12);
        // Inliers first, outliers last.
        for (std::size_t i = 0; i < 120; ++i) CHECK((*d.labels)[i] == 0);
        for (std::size_t i = 120; i < 132; ++i) CHECK((*d.labels)[i] == 1);
        CHECK(d.feature_names[0] == "feature_0");
        CHECK(d.feature_names[1] == "feature_1");
        CHECK(d.feature_names[2] == "noise_0");
        CHECK(d.feature_names[4] == "noise_2");
        d.validate();
    }
}

TEST_CASE("generation is a pure function of its parameters") {
    SynthSpec spec;
    spec.kind = SynthKind::HalfMoon;
    spec.seed = 77;
    Dataset a = generate_synthetic(spec);
    Dataset b = generate_synthetic(spec);
    CHECK(a.values == b.values);
    CHECK(*a.labels == *b.labels);
    spec.seed = 78;
    Dataset c = generate_synthetic(spec);
    CHECK(a.values != c.values);
}

TEST_CASE("axis dataset splits its anomalies across the two features") {
    SynthSpec spec;
    spec.kind = SynthKind::XyAxis;
    spec.n_inliers = 500;
    spec.n_outliers = 40;
    spec.seed = 3;
    Dataset d = generate_synthetic(spec);

    // Half the outliers stand out on feature 0 alone, half on feature 1
    // alone, and each is separable from every inlier on its own feature.
    double max_in_0 = -1e300, max_in_1 = -1e300;
    for (std::size_t i = 0; i < 500; ++i) {
        max_in_0 = std::max(max_in_0, d.at(i, 0));
        max_in_1 = std::max(max_in_1, d.at(i, 1));
    }
    std::size_t on_0 = 0, on_1 = 0;
    for (std::size_t i = 500; i < 540; ++i) {
        const bool above_0 = d.at(i, 0) > max_in_0;
        const bool above_1 = d.at(i, 1) > max_in_1;
        CHECK(above_0 != above_1);
        on_0 += above_0;
        on_1 += above_1;
    }
    CHECK(on_0 == 20);
    CHECK(on_1 == 20);
}

TEST_CASE("half moon anomalies hide inside both marginal ranges") {
    SynthSpec spec;
    spec.kind = SynthKind::HalfMoon;
    spec.n_inliers = 800;
    spec.n_outliers = 40;
    spec.seed = 5;
    Dataset d = generate_synthetic(spec);

    for (std::size_t j = 0; j < 2; ++j) {
        double lo_in = 1e300, hi_in = -1e300;
        for (std::size_t i = 0; i < 800; ++i) {
            lo_in = std::min(lo_in, d.at(i, j));
            hi_in = std::max(hi_in, d.at(i, j));
        }
        // Every outlier coordinate lies inside the inlier span of that
        // feature: no single axis separates the blob.
        for (std::size_t i = 800; i < 840; ++i) {
            CHECK(d.at(i, j) > lo_in);
            CHECK(d.at(i, j) < hi_in);
        }
    }

    // Yet the blob is geometrically isolated: in the plane of the two signal
    // features it keeps clear distance from every inlier.
    double min_gap = 1e300;
    for (std::size_t o = 800; o < 840; ++o) {
        for (std::size_t i = 0; i < 800; ++i) {
            const double dx = d.at(o, 0) - d.at(i, 0);
            const double dy = d.at(o, 1) - d.at(i, 1);
            min_gap = std::min(min_gap, std::hypot(dx, dy));
        }
    }
    CHECK(min_gap > 0.5);
}

TEST_CASE("oblique forests rank the hidden blob above chance") {
    // The blob hides in every 1-D marginal (including the distractors), so
    // absolute precision is modest; the forest must still enrich outliers
    // well above the prevalence baseline, with outliers scoring higher than
    // the inlier background on average.
    double ap_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SynthSpec spec;
        spec.kind = SynthKind::HalfMoon;
        spec.seed = seed;
        Dataset d = generate_synthetic(spec);
        ForestParams params;
        params.mode = Mode::EIFPlus;
        params.n_trees = 100;
        params.seed = seed * 7 + 1;
        Forest f = fit(d, params);
        std::vector<double> scores = anomaly_scores(f, d);
        const double ap = average_precision(scores, *d.labels);
        CHECK(ap > d.anomaly_fraction());
        ap_sum += ap;

        double mean_out = 0.0, mean_in = 0.0;
        for (std::size_t i = 0; i < d.n_rows; ++i)
            ((*d.labels)[i] ? mean_out : mean_in) += scores[i];
        mean_out /= double(d.n_anomalies());
        mean_in /= double(d.n_rows - d.n_anomalies());
        CHECK(mean_out > mean_in);
    }
    CHECK(ap_sum / 10.0 > 1.5 * (50.0 / 1050.0));
}

TEST_CASE("spec validation rejects empty or negative geometry") {
    SynthSpec spec;
    spec.n_inliers = 0;
    CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
    spec.n_inliers = 10;
    spec.n_outliers = 0;
    CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
    spec.n_outliers = 2;
    spec.offset = 0.0;
    CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
    spec.offset = 8.0;
    spec.moon_width = -1.0;
    CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
    spec.moon_width = 0.5;
    spec.blob_std = 0.0;
    CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
}

TEST_CASE("kind names round trip and reject junk") {
    CHECK(synth_kind_from_name("xy_axis") == SynthKind::XyAxis);
    CHECK(synth_kind_from_name("half_moon") == SynthKind::HalfMoon);
    CHECK_THROWS_AS(synth_kind_from_name("full_moon"), DomainError);
}
