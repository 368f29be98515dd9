#pragma once

#include <cstdint>
#include <vector>

#include "pstereo/core_types.hpp"

namespace pstereo {

enum class CollisionRule { foreground_wins };
enum class HoleFill { mask_only, zero_fill };

struct WarpConfig {
    double sobel_threshold = 3.0;
    CollisionRule collision_rule = CollisionRule::foreground_wins;
    // mask_only: holes carry intensity 0 and are marked in hole_mask.
    // zero_fill: holes carry intensity 0 and the mask is cleared, declaring
    // the image complete.
    HoleFill hole_fill = HoleFill::mask_only;
    int max_sharpen_passes = 8;
};

// Gradient magnitude sqrt(gx^2 + gy^2) of the disparity values under the
// standard 3x3 Sobel kernel pair, replicate padding at the borders. Output is
// a single-channel map. Throws DimensionError for maps smaller than 3x3.
FeatureMap sobel_magnitude(const DisparityMap& disp);

// Per-pixel mask: sobel_magnitude > config.sobel_threshold.
std::vector<std::uint8_t> detect_flying_pixels(const DisparityMap& disp,
                                               const WarpConfig& config);

struct SharpenResult {
    DisparityMap disp;
    int passes = 0;            // replacement passes actually run
    int stuck_rows = 0;        // rows left unchanged because every pixel was flying
    std::size_t flying_before = 0;
    std::size_t flying_after = 0;  // flagged pixels remaining at exit
};

// Replaces each flagged pixel with the disparity of the nearest non-flagged
// pixel in its row, ties broken toward the larger disparity. Re-detects at
// config.sobel_threshold and repeats while the flagged set strictly shrinks,
// up to config.max_sharpen_passes. Maps smaller than 3x3 skip re-detection and
// stop after one pass. Rows that are entirely flagged are left unchanged and
// counted in stuck_rows.
SharpenResult sharpen_disparity(const DisparityMap& disp,
                                const std::vector<std::uint8_t>& flying_mask,
                                const WarpConfig& config);

// Forward warp: each source pixel (x, y) with valid disparity d writes its
// intensity to (round(x - d), y) when in bounds. Collisions resolve to the
// larger disparity (nearer surface); equal disparities resolve to the larger
// source column so the result is independent of traversal order. Targets no
// source wrote are holes.
RasterImage forward_warp(const RasterImage& left, const DisparityMap& disp,
                         const WarpConfig& config);

// Image-level pipeline: depth -> disparity, flying-pixel sharpening, forward
// warp. Bit-identical to composing the individual operations.
RasterImage synthesize_right_view(const RasterImage& left, const DepthMap& depth,
                                  const StereoCalib& calib, const WarpConfig& config);

}  // namespace pstereo
