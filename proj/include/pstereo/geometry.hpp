#pragma once

#include "pstereo/core_types.hpp"

namespace pstereo {

// d = f * b / z. Throws DomainError unless z > 0.
double depth_to_disparity(double z, const StereoCalib& calib);

// z = f * b / d. Throws DomainError unless d > 0.
double disparity_to_depth(double d, const StereoCalib& calib);

// Candidate depth for level w: z = w * v_d + z_min. Throws IndexError unless
// 0 <= w < num_depth_levels.
double depth_level(int w, const StereoCalib& calib);

// Horizontal re-projection offset in feature pixels for candidate level w:
// f * b / (depth_level(w) * S). Strictly decreasing in w.
double reprojection_offset(int w, const StereoCalib& calib);

// Per-pixel map conversions. The validity mask propagates unchanged; invalid
// pixels carry value 0.
DisparityMap depth_map_to_disparity(const DepthMap& depth, const StereoCalib& calib);
DepthMap disparity_map_to_depth(const DisparityMap& disp, const StereoCalib& calib);

}  // namespace pstereo
