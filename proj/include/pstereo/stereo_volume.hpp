#pragma once

#include <cstddef>

#include "pstereo/core_types.hpp"

namespace pstereo {

// Pre-softmax scores over candidate depth levels, W x H x N_d, row-major
// (row, column, level). Stands in for the filtered stereo volume a learned
// aggregation network would produce.
struct ScoreVolume {
    int width = 0;
    int height = 0;
    int levels = 0;
    std::vector<double> scores;

    ScoreVolume() = default;
    ScoreVolume(int w, int h, int nd, double fill = 0.0);

    std::size_t index(int y, int x, int w_) const {
        return (static_cast<std::size_t>(y) * width + x) * levels + w_;
    }
    double& at(int y, int x, int w_) { return scores[index(y, x, w_)]; }
    double at(int y, int x, int w_) const { return scores[index(y, x, w_)]; }
};

// Per-pixel probability distribution over candidate depth levels; every
// pixel's probabilities are nonnegative and sum to 1.
struct DepthDistribution {
    int width = 0;
    int height = 0;
    int levels = 0;
    std::vector<double> p;

    std::size_t index(int y, int x, int w_) const {
        return (static_cast<std::size_t>(y) * width + x) * levels + w_;
    }
    double at(int y, int x, int w_) const { return p[index(y, x, w_)]; }
};

// Horizontal resampling of the right features under depth hypothesis w:
// out(u, v) = right(u - reprojection_offset(w), v), fractional columns
// linearly interpolated, columns outside [0, W-1] contributing 0.
FeatureMap reproject_right(const FeatureMap& right, const StereoCalib& calib, int w);

// Same resampling at an explicit offset; reproject_right composes
// reprojection_offset with this. Offset 0 is the identity.
FeatureMap reproject_right_at(const FeatureMap& right, double offset);

// Plane-sweep volume: at every level w, channels [0, C) hold the left features
// unchanged and channels [C, 2C) hold the re-projected right features.
// zero_offset forces offset 0 at every level (the degenerate clone volume).
CostVolume build_stereo_volume(const FeatureMap& left, const FeatureMap& right,
                               const StereoCalib& calib, bool zero_offset = false);

// Softmax over the depth axis, stabilized by max subtraction.
DepthDistribution depth_distribution(const ScoreVolume& scores);

// Expected depth under the distribution: z(u,v) = sum_w p(u,v,w) * depth_level(w).
// Always within [z_min, depth_level(N_d - 1)].
DepthMap soft_depth_regression(const DepthDistribution& dist, const StereoCalib& calib);

// Mean smooth-L1 (beta = 1) over pixels valid in both maps. Returns 0 when no
// pixel is jointly valid; n_valid reports the count so callers can warn.
double depth_loss(const DepthMap& pred, const DepthMap& gt,
                  std::size_t* n_valid = nullptr);

// L = lambda_d * l_d + lambda_dep * l_depth + lambda_kd * l_kd.
// strict_ablation additionally requires lambda_dep to be exactly 0 or 1.
double combined_loss(double l_d, double l_depth, double l_kd, double lambda_d,
                     double lambda_dep, double lambda_kd,
                     bool strict_ablation = false);

}  // namespace pstereo
