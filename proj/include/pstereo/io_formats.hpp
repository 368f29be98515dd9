#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "pstereo/core_types.hpp"

namespace pstereo {

// On-disk scalar width for PSFM payloads. Internal arithmetic is always f64.
enum class ScalarType : std::uint8_t { f32 = 0, f64 = 1 };

// ---- PSFM: feature-map container ----
// Layout: magic "PSFM", version u16, W/H/C u32 each, dtype u8 (0 = f32,
// 1 = f64), then W*H*C little-endian scalars in (row, column, channel) order.

FeatureMap read_feature_map(std::istream& in);
FeatureMap read_feature_map(const std::string& path);
void write_feature_map(const FeatureMap& map, std::ostream& out,
                       ScalarType dtype = ScalarType::f64);
void write_feature_map(const FeatureMap& map, const std::string& path,
                       ScalarType dtype = ScalarType::f64);

// Serializes a cost volume as a PSFM with channels = levels * channels, so the
// depth-level count is visible in the header.
void write_cost_volume(const CostVolume& vol, const std::string& path,
                       ScalarType dtype = ScalarType::f64);

// ---- PFM: grayscale float maps ("Pf"), bottom-up rows, scale sign encodes
// endianness (negative = little-endian). Stored values that are not finite and
// positive become invalid-mask pixels; invalid pixels are written as 0.

DepthMap read_depth_pfm(std::istream& in);
DepthMap read_depth_pfm(const std::string& path);
void write_depth_pfm(const DepthMap& map, std::ostream& out);
void write_depth_pfm(const DepthMap& map, const std::string& path);

DisparityMap read_disparity_pfm(std::istream& in);
DisparityMap read_disparity_pfm(const std::string& path);
void write_disparity_pfm(const DisparityMap& map, std::ostream& out);
void write_disparity_pfm(const DisparityMap& map, const std::string& path);

// ---- PGM (P5) / PPM (P6), maxval 255, intensities mapped to [0,1] by /255.

RasterImage read_image(std::istream& in);
RasterImage read_image(const std::string& path);
void write_image(const RasterImage& img, std::ostream& out);
void write_image(const RasterImage& img, const std::string& path);

// Hole mask as a P5 image: 255 where the mask is set, 0 elsewhere.
void write_mask_pgm(const std::vector<std::uint8_t>& mask, int width, int height,
                    const std::string& path);

// ---- Calibration: text file, one "key = value" per line, '#' comments.
// Required keys: focal_px, baseline_m, stride, z_min_m, depth_interval_m,
// num_depth_levels.

StereoCalib read_calib(std::istream& in);
StereoCalib read_calib(const std::string& path);
void write_calib(const StereoCalib& calib, std::ostream& out);
void write_calib(const StereoCalib& calib, const std::string& path);

}  // namespace pstereo
