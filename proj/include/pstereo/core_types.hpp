#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pstereo/errors.hpp"

namespace pstereo {

// Dense W x H x C grid of real values, row-major (row, column, channel).
// All arithmetic in this library runs on 64-bit reals; file formats may
// narrow to 32-bit on disk.
struct FeatureMap {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int w, int h, int c, double fill = 0.0);

    std::size_t index(int y, int x, int ch) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + ch;
    }
    double& at(int y, int x, int ch) { return data[index(y, x, ch)]; }
    double at(int y, int x, int ch) const { return data[index(y, x, ch)]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const FeatureMap& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// W x H depth grid in meters with an explicit validity mask.
// Valid pixels carry z > 0; invalid pixels carry 0.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> z;
    std::vector<std::uint8_t> valid;

    DepthMap() = default;
    DepthMap(int w, int h);

    std::size_t index(int y, int x) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    void set(int y, int x, double depth) {
        z[index(y, x)] = depth;
        valid[index(y, x)] = 1;
    }
    bool same_shape(const DepthMap& o) const {
        return width == o.width && height == o.height;
    }
};

// W x H disparity grid in pixels with an explicit validity mask.
// Valid pixels carry d > 0; invalid pixels carry 0.
struct DisparityMap {
    int width = 0;
    int height = 0;
    std::vector<double> d;
    std::vector<std::uint8_t> valid;

    DisparityMap() = default;
    DisparityMap(int w, int h);

    std::size_t index(int y, int x) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    void set(int y, int x, double disp) {
        d[index(y, x)] = disp;
        valid[index(y, x)] = 1;
    }
    bool same_shape(const DisparityMap& o) const {
        return width == o.width && height == o.height;
    }
};

// Rectified stereo rig parameters plus the candidate-depth discretization.
struct StereoCalib {
    double focal_px = 0.0;        // f, pixels
    double baseline_m = 0.0;      // b, meters
    int stride = 1;               // S, feature stride relative to full resolution
    double z_min_m = 0.0;         // first candidate depth, meters
    double depth_interval_m = 0.0;  // v_d, meters between candidate depths
    int num_depth_levels = 0;     // N_d

    double fb() const { return focal_px * baseline_m; }

    // Throws DomainError unless f > 0, b > 0, S >= 1, z_min > 0, v_d > 0, N_d >= 1.
    void validate() const;
};

// W x H image, 1 or 3 channels, intensities in [0,1].
// hole_mask is true where no source pixel wrote during warping.
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> intensity;        // (row, column, channel)
    std::vector<std::uint8_t> hole_mask;  // per pixel

    RasterImage() = default;
    RasterImage(int w, int h, int c, double fill = 0.0);

    std::size_t pixel(int y, int x) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    std::size_t index(int y, int x, int ch) const {
        return pixel(y, x) * channels + ch;
    }
    double& at(int y, int x, int ch) { return intensity[index(y, x, ch)]; }
    double at(int y, int x, int ch) const { return intensity[index(y, x, ch)]; }
    bool same_shape(const RasterImage& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Plane-sweep stereo volume, W x H x N_d x 2C, row-major
// (row, column, depth level, channel).
struct CostVolume {
    int width = 0;
    int height = 0;
    int levels = 0;     // N_d
    int channels = 0;   // 2C
    std::vector<double> data;

    CostVolume() = default;
    CostVolume(int w, int h, int nd, int c2);

    std::size_t index(int y, int x, int w_, int ch) const {
        return ((static_cast<std::size_t>(y) * width + x) * levels + w_) * channels + ch;
    }
    double& at(int y, int x, int w_, int ch) { return data[index(y, x, w_, ch)]; }
    double at(int y, int x, int w_, int ch) const { return data[index(y, x, w_, ch)]; }
};

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

// Mean and population standard deviation over all entries.
Stats elementwise_stats(const FeatureMap& map);

// Mean and population standard deviation over valid pixels only.
// Throws EmptyStatsError if no pixel is valid.
Stats elementwise_stats(const DisparityMap& map);

// True if every entry is finite (no NaN/Inf).
bool all_finite(const std::vector<double>& values);

}  // namespace pstereo
