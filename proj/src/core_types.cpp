#include "pstereo/core_types.hpp"

#include <cmath>
#include <string>

#include "pstereo/kernels.hpp"

namespace pstereo {
namespace {

void require_positive_dims(int w, int h, int c, const char* what) {
    if (w < 1 || h < 1 || c < 1)
        throw DimensionError(std::string(what) + ": dimensions must be >= 1, got " +
                             std::to_string(w) + "x" + std::to_string(h) + "x" +
                             std::to_string(c));
}

}  // namespace

FeatureMap::FeatureMap(int w, int h, int c, double fill)
    : width(w), height(h), channels(c) {
    require_positive_dims(w, h, c, "FeatureMap");
    if (!std::isfinite(fill))
        throw DomainError("FeatureMap: fill value must be finite");
    data.assign(static_cast<std::size_t>(w) * h * c, fill);
}

DepthMap::DepthMap(int w, int h) : width(w), height(h) {
    require_positive_dims(w, h, 1, "DepthMap");
    z.assign(static_cast<std::size_t>(w) * h, 0.0);
    valid.assign(static_cast<std::size_t>(w) * h, 0);
}

DisparityMap::DisparityMap(int w, int h) : width(w), height(h) {
    require_positive_dims(w, h, 1, "DisparityMap");
    d.assign(static_cast<std::size_t>(w) * h, 0.0);
    valid.assign(static_cast<std::size_t>(w) * h, 0);
}

RasterImage::RasterImage(int w, int h, int c, double fill)
    : width(w), height(h), channels(c) {
    require_positive_dims(w, h, c, "RasterImage");
    if (c != 1 && c != 3)
        throw DimensionError("RasterImage: channels must be 1 or 3, got " +
                             std::to_string(c));
    intensity.assign(static_cast<std::size_t>(w) * h * c, fill);
    hole_mask.assign(static_cast<std::size_t>(w) * h, 0);
}

CostVolume::CostVolume(int w, int h, int nd, int c2)
    : width(w), height(h), levels(nd), channels(c2) {
    require_positive_dims(w, h, 1, "CostVolume");
    if (nd < 1 || c2 < 1)
        throw DimensionError("CostVolume: levels and channels must be >= 1");
    data.assign(static_cast<std::size_t>(w) * h * nd * c2, 0.0);
}

void StereoCalib::validate() const {
    if (!(focal_px > 0.0))
        throw DomainError("StereoCalib: focal_px must be > 0");
    if (!(baseline_m > 0.0))
        throw DomainError("StereoCalib: baseline_m must be > 0");
    if (stride < 1)
        throw DomainError("StereoCalib: stride must be >= 1");
    if (!(z_min_m > 0.0))
        throw DomainError("StereoCalib: z_min_m must be > 0");
    if (!(depth_interval_m > 0.0))
        throw DomainError("StereoCalib: depth_interval_m must be > 0");
    if (num_depth_levels < 1)
        throw DomainError("StereoCalib: num_depth_levels must be >= 1");
}

namespace {

Stats stats_over(const double* v, std::size_t n) {
    const auto& k = kernels::active();
    Stats s;
    s.mean = k.reduce_sum(v, n) / static_cast<double>(n);
    s.stddev = std::sqrt(k.reduce_sq_dev(v, s.mean, n) / static_cast<double>(n));
    return s;
}

}  // namespace

Stats elementwise_stats(const FeatureMap& map) {
    if (map.data.empty())
        throw EmptyStatsError("elementwise_stats: empty feature map");
    return stats_over(map.data.data(), map.data.size());
}

Stats elementwise_stats(const DisparityMap& map) {
    std::vector<double> valid_values;
    valid_values.reserve(map.d.size());
    for (std::size_t i = 0; i < map.d.size(); ++i)
        if (map.valid[i])
            valid_values.push_back(map.d[i]);
    if (valid_values.empty())
        throw EmptyStatsError("elementwise_stats: disparity map has no valid pixel");
    return stats_over(valid_values.data(), valid_values.size());
}

bool all_finite(const std::vector<double>& values) {
    for (double v : values)
        if (!std::isfinite(v))
            return false;
    return true;
}

}  // namespace pstereo
