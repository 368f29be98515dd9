#include "pstereo/synthetic.hpp"

namespace pstereo::synthetic {

FeatureMap uniform_features(int width, int height, int channels, UniformRng& rng,
                            double lo, double hi) {
    FeatureMap map(width, height, channels, 0.0);
    for (double& v : map.data)
        v = rng.range(lo, hi);
    return map;
}

DisparityMap uniform_disparity(int width, int height, UniformRng& rng, double lo,
                               double hi) {
    DisparityMap map(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            map.set(y, x, rng.range(lo, hi));
    return map;
}

DepthMap two_plane_depth(int width, int height, double z_near, double z_far) {
    if (!(z_near > 0.0) || !(z_far > 0.0))
        throw DomainError("two_plane_depth: depths must be positive");
    DepthMap map(width, height);
    const int x0 = width / 4, x1 = x0 + width / 2;
    const int y0 = height / 4, y1 = y0 + height / 2;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const bool near = x >= x0 && x < x1 && y >= y0 && y < y1;
            map.set(y, x, near ? z_near : z_far);
        }
    return map;
}

DepthMap constant_depth(int width, int height, double z) {
    if (!(z > 0.0))
        throw DomainError("constant_depth: depth must be positive");
    DepthMap map(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            map.set(y, x, z);
    return map;
}

RasterImage distinct_pixel_image(int width, int height, int channels) {
    RasterImage img(width, height, channels, 0.0);
    const double denom = static_cast<double>(img.intensity.size()) + 1.0;
    for (std::size_t i = 0; i < img.intensity.size(); ++i)
        img.intensity[i] = static_cast<double>(i + 1) / denom;
    return img;
}

StereoCalib default_calib() {
    StereoCalib calib;
    calib.focal_px = 320.0;
    calib.baseline_m = 0.2;
    calib.stride = 4;
    calib.z_min_m = 2.0;
    calib.depth_interval_m = 0.5;
    calib.num_depth_levels = 8;
    return calib;
}

}  // namespace pstereo::synthetic
