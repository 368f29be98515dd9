#include "pstereo/geometry.hpp"

#include <string>

namespace pstereo {

double depth_to_disparity(double z, const StereoCalib& calib) {
    calib.validate();
    if (!(z > 0.0))
        throw DomainError("depth_to_disparity: depth must be > 0, got " +
                          std::to_string(z));
    return calib.fb() / z;
}

double disparity_to_depth(double d, const StereoCalib& calib) {
    calib.validate();
    if (!(d > 0.0))
        throw DomainError("disparity_to_depth: disparity must be > 0, got " +
                          std::to_string(d));
    return calib.fb() / d;
}

double depth_level(int w, const StereoCalib& calib) {
    calib.validate();
    if (w < 0 || w >= calib.num_depth_levels)
        throw IndexError("depth_level: level " + std::to_string(w) +
                         " outside [0, " + std::to_string(calib.num_depth_levels) + ")");
    return static_cast<double>(w) * calib.depth_interval_m + calib.z_min_m;
}

double reprojection_offset(int w, const StereoCalib& calib) {
    return calib.fb() / (depth_level(w, calib) * calib.stride);
}

DisparityMap depth_map_to_disparity(const DepthMap& depth, const StereoCalib& calib) {
    calib.validate();
    DisparityMap out(depth.width, depth.height);
    for (std::size_t i = 0; i < depth.z.size(); ++i) {
        if (depth.valid[i]) {
            out.d[i] = calib.fb() / depth.z[i];
            out.valid[i] = 1;
        }
    }
    return out;
}

DepthMap disparity_map_to_depth(const DisparityMap& disp, const StereoCalib& calib) {
    calib.validate();
    DepthMap out(disp.width, disp.height);
    for (std::size_t i = 0; i < disp.d.size(); ++i) {
        if (disp.valid[i]) {
            out.z[i] = calib.fb() / disp.d[i];
            out.valid[i] = 1;
        }
    }
    return out;
}

}  // namespace pstereo
