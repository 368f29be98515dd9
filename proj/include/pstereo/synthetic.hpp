#pragma once

#include <cstdint>
#include <random>

#include "pstereo/core_types.hpp"

namespace pstereo::synthetic {

// Deterministic uniform source that produces the same stream on every
// platform: mt19937_64 output mapped to [0, 1) through the top 53 bits.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

    double next() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double range(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 engine_;
};

// Feature map with every element drawn uniformly from [lo, hi).
FeatureMap uniform_features(int width, int height, int channels, UniformRng& rng,
                            double lo = 0.0, double hi = 1.0);

// Fully valid disparity map with values drawn uniformly from [lo, hi).
DisparityMap uniform_disparity(int width, int height, UniformRng& rng, double lo,
                               double hi);

// Fully valid depth map: background plane at z_far with a centered
// foreground rectangle (half the extent in each dimension) at z_near.
DepthMap two_plane_depth(int width, int height, double z_near, double z_far);

// Fully valid constant-depth plane.
DepthMap constant_depth(int width, int height, double z);

// Image whose pixels all carry distinct intensities in (0, 1), so a warped
// output pixel identifies its source uniquely.
RasterImage distinct_pixel_image(int width, int height, int channels);

// Calibration used by the synthetic pipelines: focal 320 px, baseline 0.2 m
// (focal * baseline = 64), stride 4, depths 2.0 m to 5.5 m over 8 levels.
StereoCalib default_calib();

}  // namespace pstereo::synthetic
