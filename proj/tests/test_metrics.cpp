#include <doctest.h>

#include <cmath>

#include "exiffi/errors.hpp"
#include "exiffi/metrics.hpp"
#include "testkit.hpp"

using namespace exiffi;
using namespace exiffi::testkit;

TEST_CASE("average precision on small hand-checked rankings") {
    // Positives at ranks 1 and 3: (1/1 + 2/3) / 2.
    std::vector<double> s{0.9, 0.8, 0.7};
    std::vector<std::uint8_t> y{1, 0, 1};
    CHECK(average_precision(s, y) == doctest::Approx(5.0 / 6.0).epsilon(1e-14));

    // Perfect separation.
    std::vector<double> sp{0.9, 0.8, 0.2, 0.1};
    std::vector<std::uint8_t> yp{1, 1, 0, 0};
    CHECK(average_precision(sp, yp) == 1.0);

    // Fully inverted ranking: positives at the bottom.
    std::vector<std::uint8_t> yi{0, 0, 1, 1};
    CHECK(average_precision(sp, yi) ==
          doctest::Approx((1.0 / 3.0 + 2.0 / 4.0) / 2.0).epsilon(1e-14));

    // One tie group collapses to the prevalence.
    std::vector<double> st{0.5, 0.5, 0.5, 0.5};
    std::vector<std::uint8_t> yt{0, 1, 0, 0};
    CHECK(average_precision(st, yt) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("average precision is independent of the order within ties") {
    std::vector<double> s{0.7, 0.7, 0.7, 0.2, 0.2};
    std::vector<std::uint8_t> a{1, 0, 0, 1, 0};
    std::vector<std::uint8_t> b{0, 0, 1, 0, 1};
    CHECK(average_precision(s, a) == average_precision(s, b));
}

TEST_CASE("average precision matches the exhaustive oracle") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        SplitRng rng(seed * 101);
        const std::size_t n = 50 + 30 * (seed % 4);
        std::vector<double> s(n);
        std::vector<std::uint8_t> y(n);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // Quantized scores force plenty of ties.
            s[i] = std::floor(rng.uniform01() * 12.0) / 12.0;
            y[i] = rng.uniform01() < 0.3 ? 1 : 0;
            (y[i] ? has_pos : has_neg) = true;
        }
        if (!has_pos) y[0] = 1;
        if (!has_neg) y[1] = 0;
        CHECK(average_precision(s, y) ==
              doctest::Approx(oracle_ap(s, y)).epsilon(1e-12));
        CHECK(roc_auc(s, y) == doctest::Approx(oracle_auc(s, y)).epsilon(1e-12));
    }
}

TEST_CASE("rank metrics are invariant to monotone score transforms") {
    SplitRng rng(7);
    std::vector<double> s(200);
    std::vector<std::uint8_t> y(200);
    for (std::size_t i = 0; i < 200; ++i) {
        s[i] = rng.normal();
        y[i] = i % 5 == 0;
    }
    std::vector<double> t(200);
    for (std::size_t i = 0; i < 200; ++i) t[i] = 3.0 * s[i] + 11.0;
    CHECK(average_precision(s, y) == average_precision(t, y));
    CHECK(roc_auc(s, y) == roc_auc(t, y));
}

TEST_CASE("roc auc on hand-checked cases") {
    std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    std::vector<std::uint8_t> y{0, 0, 1, 1};
    CHECK(roc_auc(s, y) == doctest::Approx(0.75).epsilon(1e-14));

    std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
    CHECK(roc_auc(flat, y) == doctest::Approx(0.5).epsilon(1e-14));

    std::vector<double> perfect{0.1, 0.2, 0.8, 0.9};
    CHECK(roc_auc(perfect, y) == 1.0);
    std::vector<std::uint8_t> inverted{1, 1, 0, 0};
    CHECK(roc_auc(perfect, inverted) == 0.0);
}

TEST_CASE("random scores sit near one half auc") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SplitRng rng(seed * 977);
        std::vector<double> s(2000);
        std::vector<std::uint8_t> y(2000);
        for (std::size_t i = 0; i < 2000; ++i) {
            s[i] = rng.normal();
            y[i] = rng.uniform01() < 0.2 ? 1 : 0;
        }
        y[0] = 1;
        y[1] = 0;
        double auc = roc_auc(s, y);
        CHECK(auc > 0.45);
        CHECK(auc < 0.55);
    }
}

TEST_CASE("metrics validate their inputs") {
    std::vector<double> s{0.1, 0.2};
    std::vector<std::uint8_t> ones{1, 1};
    std::vector<std::uint8_t> zeros{0, 0};
    std::vector<std::uint8_t> shorter{1};
    CHECK_THROWS_AS(average_precision(s, ones), PartitionError);
    CHECK_THROWS_AS(average_precision(s, zeros), PartitionError);
    CHECK_THROWS_AS(average_precision(s, shorter), ShapeError);
    CHECK_THROWS_AS(roc_auc(s, ones), PartitionError);
    CHECK_THROWS_AS(roc_auc(s, shorter), ShapeError);
    std::vector<double> empty;
    std::vector<std::uint8_t> no_labels;
    CHECK_THROWS_AS(average_precision(empty, no_labels), ShapeError);
    CHECK_THROWS_AS(precision_at_contamination(s, ones, 0.5), PartitionError);
    CHECK_THROWS_AS(precision_at_contamination(s, shorter, 0.5), ShapeError);
    std::vector<std::uint8_t> ok{1, 0};
    CHECK_THROWS_AS(precision_at_contamination(s, ok, 0.0), DomainError);
    CHECK_THROWS_AS(precision_at_contamination(s, ok, 1.5), DomainError);
}

TEST_CASE("precision at the contamination threshold") {
    std::vector<double> s{0.9, 0.8, 0.2, 0.1};
    std::vector<std::uint8_t> y{1, 0, 1, 0};
    PrecisionResult r = precision_at_contamination(s, y, 0.5);
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_FALSE(r.no_positive_predictions);

    std::vector<std::uint8_t> yb{1, 1, 0, 0};
    r = precision_at_contamination(s, yb, 0.5);
    CHECK(r.value == 1.0);

    // All scores tie: the strictly-greater rule yields no predictions.
    std::vector<double> flat{0.3, 0.3, 0.3, 0.3};
    r = precision_at_contamination(flat, y, 0.5);
    CHECK(r.value == 0.0);
    CHECK(r.no_positive_predictions);
}

TEST_CASE("metric tables stay aligned and annotate empty predictions") {
    MetricReport a;
    a.average_precision = 0.912345;
    a.precision = 0.5;
    a.roc_auc = 0.987654;
    a.fit_time_s = 1.234;
    a.predict_time_s = 0.00456;
    MetricReport b;
    b.average_precision = 0.25;
    b.precision = 0.0;
    b.precision_warning = true;
    b.roc_auc = 0.5;
    b.fit_time_s = 10.0;
    b.predict_time_s = 0.1;
    std::string table = format_metric_table({{"eif+", a}, {"if", b}});

    CHECK(table.find("Model") != std::string::npos);
    CHECK(table.find("Average Precision") != std::string::npos);
    CHECK(table.find("ROC AUC") != std::string::npos);
    CHECK(table.find("eif+") != std::string::npos);
    CHECK(table.find("0.912") != std::string::npos);
    CHECK(table.find("0.988") != std::string::npos);
    CHECK(table.find("(no preds)") != std::string::npos);

    // Values line up under their headers.
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < table.size()) {
        std::size_t eol = table.find('\n', pos);
        if (eol == std::string::npos) break;
        lines.push_back(table.substr(pos, eol - pos));
        pos = eol + 1;
    }
    REQUIRE(lines.size() == 3);
    std::size_t ap_col = lines[0].find("Average Precision");
    REQUIRE(ap_col != std::string::npos);
    CHECK(lines[1].substr(ap_col, 5) == "0.912");
    CHECK(lines[2].substr(ap_col, 4) == "0.25");
    std::size_t auc_col = lines[0].find("ROC AUC");
    REQUIRE(auc_col != std::string::npos);
    CHECK(lines[1].substr(auc_col, 5) == "0.988");
    CHECK(lines[2].substr(auc_col, 3) == "0.5");
}
