#include "exiffi/synth.hpp"

#include <cmath>
#include <numbers>

#include "exiffi/errors.hpp"
#include "exiffi/rng.hpp"

namespace exiffi {

const char* synth_kind_name(SynthKind k) {
    switch (k) {
        case SynthKind::XyAxis: return "xy_axis";
        case SynthKind::HalfMoon: return "half_moon";
    }
    return "?";
}

SynthKind synth_kind_from_name(const std::string& s) {
    if (s == "xy_axis") return SynthKind::XyAxis;
    if (s == "half_moon") return SynthKind::HalfMoon;
    throw DomainError("unknown synthetic kind '" + s +
                      "' (expected xy_axis or half_moon)");
}

void SynthSpec::validate() const {
    if (n_inliers < 1) throw DomainError("n_inliers must be at least 1");
    if (n_outliers < 1) throw DomainError("n_outliers must be at least 1");
    if (!(offset > 0.0)) throw DomainError("offset must be positive");
    if (!(noise_scale > 0.0)) throw DomainError("noise_scale must be positive");
    if (!(moon_radius > 0.0)) throw DomainError("moon_radius must be positive");
    if (!(moon_width > 0.0)) throw DomainError("moon_width must be positive");
    if (!(blob_std > 0.0)) throw DomainError("blob_std must be positive");
}

Dataset generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    SplitRng rng(spec.seed);

    const std::size_t n = spec.n_inliers + spec.n_outliers;
    const std::size_t p = 2 + spec.n_noise_features;
    Dataset d;
    d.n_rows = n;
    d.n_cols = p;
    d.name = synth_kind_name(spec.kind);
    d.values.assign(n * p, 0.0);
    d.labels.emplace(n, 0);
    d.feature_names = {"feature_0", "feature_1"};
    for (std::size_t j = 0; j < spec.n_noise_features; ++j)
        d.feature_names.push_back("noise_" + std::to_string(j));

    auto set_xy = [&](std::size_t row, double x, double y) {
        d.values[row * p + 0] = x;
        d.values[row * p + 1] = y;
    };

    if (spec.kind == SynthKind::XyAxis) {
        for (std::size_t i = 0; i < spec.n_inliers; ++i)
            set_xy(i, rng.normal(), rng.normal());
        // Two equal anomaly clusters, one displaced along each feature, so a
        // single feature exposes exactly half of them.
        const std::size_t n_a = (spec.n_outliers + 1) / 2;
        for (std::size_t k = 0; k < spec.n_outliers; ++k) {
            const std::size_t row = spec.n_inliers + k;
            const double u = rng.normal() * spec.noise_scale;
            const double v = rng.normal() * spec.noise_scale;
            if (k < n_a)
                set_xy(row, spec.offset + u, v);
            else
                set_xy(row, u, spec.offset + v);
            (*d.labels)[row] = 1;
        }
    } else {
        // Crescent: a noisy arc of the given radius covering 1.4*pi radians,
        // apex pointing up, so the two tips dip below the horizontal axis and
        // the arc wraps around a concave pocket.  The anomaly blob sits at the
        // arc centroid reflected through the circle centre — inside the pocket,
        // well clear of the arc in the plane, yet interior to the inlier range
        // on each single feature.  Either feature alone therefore hides the
        // blob; only the two jointly expose it.
        const double span = 1.4 * std::numbers::pi;
        const double theta_lo = std::numbers::pi / 2.0 - span / 2.0;
        for (std::size_t i = 0; i < spec.n_inliers; ++i) {
            const double theta = theta_lo + rng.uniform(0.0, span);
            const double x =
                spec.moon_radius * std::cos(theta) + rng.normal() * spec.moon_width;
            const double y =
                spec.moon_radius * std::sin(theta) + rng.normal() * spec.moon_width;
            set_xy(i, x, y);
        }
        const double cx = 0.0;
        const double cy = -spec.moon_radius * 2.0 * std::sin(span / 2.0) / span;
        for (std::size_t k = 0; k < spec.n_outliers; ++k) {
            const std::size_t row = spec.n_inliers + k;
            set_xy(row, cx + rng.normal() * spec.blob_std,
                   cy + rng.normal() * spec.blob_std);
            (*d.labels)[row] = 1;
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 2; j < p; ++j) d.values[i * p + j] = rng.normal();

    return d;
}

}  // namespace exiffi
