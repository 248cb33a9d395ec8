#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "exiffi/dataset.hpp"

namespace exiffi {

enum class SynthKind { XyAxis, HalfMoon };

const char* synth_kind_name(SynthKind k);
SynthKind synth_kind_from_name(const std::string& s);

// Labeled synthetic anomaly benchmarks over features 0 and 1 plus
// independent standard-normal distractor columns.
//
// xy_axis:   inliers are a standard-Gaussian blob at the origin; outliers
//            form two equal clusters displaced by `offset` along feature 0
//            and along feature 1, each with spread noise_scale.  Either
//            anomaly cluster is visible through a single feature.
//
// half_moon: inliers sit on a crescent of radius moon_radius and thickness
//            moon_width (a noisy arc covering 1.4*pi radians, apex up, so its
//            tips curl below the horizontal axis); outliers are a compact
//            blob of spread blob_std placed at the arc centroid reflected
//            through the circle centre, inside the concave pocket.  The blob
//            stays interior to the inlier range on each feature alone, so
//            flagging it needs both features jointly.
struct SynthSpec {
    SynthKind kind = SynthKind::XyAxis;
    std::size_t n_inliers = 1000;
    std::size_t n_outliers = 50;
    std::size_t n_noise_features = 4;
    std::uint64_t seed = 1;
    double offset = 8.0;
    double noise_scale = 1.0;
    double moon_radius = 5.5;
    double moon_width = 0.5;
    double blob_std = 0.5;

    void validate() const;
};

// Rows are inliers first, then outliers; labels mark outliers with 1.
// Columns are feature_0, feature_1, then noise_0..; the label column is
// named "label" when written to CSV.
Dataset generate_synthetic(const SynthSpec& spec);

}  // namespace exiffi
