#include "pstereo/selfcheck.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>

#include "pstereo/ddc.hpp"
#include "pstereo/errors.hpp"
#include "pstereo/feature_clone.hpp"
#include "pstereo/geometry.hpp"
#include "pstereo/gradcheck.hpp"
#include "pstereo/io_formats.hpp"
#include "pstereo/kernels.hpp"
#include "pstereo/stereo_volume.hpp"
#include "pstereo/synthetic.hpp"
#include "pstereo/view_synthesis.hpp"

namespace pstereo::selfcheck {
namespace {

using synthetic::UniformRng;

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

CheckResult make_result(std::string name, double max_error, double tolerance,
                        std::string detail = {}) {
    CheckResult r;
    r.name = std::move(name);
    r.max_error = max_error;
    r.tolerance = tolerance;
    r.passed = max_error <= tolerance;
    r.detail = std::move(detail);
    return r;
}

struct BackendGuard {
    ~BackendGuard() { kernels::select(kernels::Backend::auto_detect); }
};

UniformRng seeded(const Options& opt, std::uint64_t salt) {
    return UniformRng(opt.seed * 1000003ULL + salt);
}

// The two convolution paths (sliding window vs. nine shifted Hadamard
// products) must agree to the bit.
CheckResult check_ddc_paths(const Options& opt) {
    UniformRng rng = seeded(opt, 1);
    const FeatureMap left = synthetic::uniform_features(17, 13, 5, rng, -1.0, 1.0);
    const FeatureMap disp = synthetic::uniform_features(17, 13, 5, rng, -2.0, 2.0);
    const FeatureMap a = ddc_forward_naive(left, disp);
    const FeatureMap b = ddc_forward_gridshift(left, disp);
    return make_result("ddc-window-vs-gridshift", max_abs_diff(a.data, b.data), 0.0);
}

// Scalar and vector backends must agree: element-wise kernels to the bit,
// reduction-based softmax to 1e-12.
CheckResult check_backends(const Options& opt) {
    if (!kernels::avx2_supported())
        return make_result("kernel-backends", 0.0, 0.0, "avx2 unavailable, scalar only");

    UniformRng rng = seeded(opt, 2);
    const FeatureMap left = synthetic::uniform_features(33, 9, 6, rng, -1.0, 1.0);
    const FeatureMap disp = synthetic::uniform_features(33, 9, 6, rng, -2.0, 2.0);
    const FeatureMap grad = synthetic::uniform_features(33, 9, 6, rng, -1.0, 1.0);
    ScoreVolume scores(21, 5, 8);
    for (double& s : scores.scores)
        s = rng.range(-10.0, 10.0);

    BackendGuard guard;
    kernels::select(kernels::Backend::scalar);
    const FeatureMap fwd_s = ddc_forward_gridshift(left, disp);
    const DdcGradients grad_s = ddc_backward(grad, left, disp);
    const FeatureMap rep_s = reproject_right_at(left, 3.37);
    const DepthDistribution dist_s = depth_distribution(scores);

    kernels::select(kernels::Backend::avx2);
    const FeatureMap fwd_v = ddc_forward_gridshift(left, disp);
    const DdcGradients grad_v = ddc_backward(grad, left, disp);
    const FeatureMap rep_v = reproject_right_at(left, 3.37);
    const DepthDistribution dist_v = depth_distribution(scores);

    const double exact = std::max(
        {max_abs_diff(fwd_s.data, fwd_v.data),
         max_abs_diff(grad_s.grad_left.data, grad_v.grad_left.data),
         max_abs_diff(grad_s.grad_disp_feat.data, grad_v.grad_disp_feat.data),
         max_abs_diff(rep_s.data, rep_v.data)});
    if (exact > 0.0)
        return make_result("kernel-backends", exact, 0.0,
                           "element-wise kernels diverged between backends");
    return make_result("kernel-backends", max_abs_diff(dist_s.p, dist_v.p), 1e-12);
}

// Analytic gradients of the convolution against central differences.
CheckResult check_gradients(const Options& opt) {
    UniformRng rng = seeded(opt, 3);
    FeatureMap left = synthetic::uniform_features(7, 6, 3, rng, -1.0, 1.0);
    FeatureMap disp = synthetic::uniform_features(7, 6, 3, rng, -2.0, 2.0);
    const FeatureMap weights = synthetic::uniform_features(7, 6, 3, rng, -1.0, 1.0);

    const auto objective = [&]() {
        const FeatureMap out = ddc_forward_gridshift(left, disp);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.data.size(); ++i)
            acc += weights.data[i] * out.data[i];
        return acc;
    };
    const DdcGradients grads = ddc_backward(weights, left, disp);

    const GradCheckResult wrt_left =
        check_gradient(left.data, objective, grads.grad_left.data, 1e-5, 1e-6);
    const GradCheckResult wrt_disp =
        check_gradient(disp.data, objective, grads.grad_disp_feat.data, 1e-5, 1e-6);
    return make_result("ddc-gradients",
                       std::max(wrt_left.max_rel_error, wrt_disp.max_rel_error),
                       1e-6);
}

// Constant integer disparity k must shift every row left by exactly k columns
// and leave exactly the k rightmost columns as holes.
CheckResult check_warp_shift(const Options&) {
    const int w = 16, h = 5, k = 3;
    const RasterImage left = synthetic::distinct_pixel_image(w, h, 1);
    DisparityMap disp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            disp.set(y, x, static_cast<double>(k));

    const RasterImage out = forward_warp(left, disp, WarpConfig{});
    double err = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool hole = x >= w - k;
            if (out.hole_mask[out.pixel(y, x)] != (hole ? 1 : 0))
                return make_result("warp-shift-holes", 1.0, 0.0,
                                   "hole set differs from the predicted columns");
            const double want = hole ? 0.0 : left.at(y, x + k, 0);
            err = std::max(err, std::abs(out.at(y, x, 0) - want));
        }
    return make_result("warp-shift-holes", err, 0.0);
}

// Every non-hole output pixel must equal the input pixel a per-target
// simulation of the collision rule selects; holes must have no candidate.
CheckResult check_warp_conservation(const Options& opt) {
    UniformRng rng = seeded(opt, 4);
    const int w = 24, h = 7;
    const RasterImage left = synthetic::distinct_pixel_image(w, h, 1);
    DisparityMap disp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            disp.set(y, x, std::floor(rng.range(0.0, 7.0)));

    const RasterImage out = forward_warp(left, disp, WarpConfig{});
    double err = 0.0;
    for (int y = 0; y < h; ++y)
        for (int t = 0; t < w; ++t) {
            int best_x = -1;
            double best_d = -1.0;
            for (int x = 0; x < w; ++x) {
                const double d = disp.d[disp.index(y, x)];
                if (static_cast<int>(std::lround(x - d)) != t)
                    continue;
                if (d > best_d || (d == best_d && x > best_x)) {
                    best_d = d;
                    best_x = x;
                }
            }
            const bool hole = out.hole_mask[out.pixel(y, t)] != 0;
            if (hole != (best_x < 0))
                return make_result("warp-conservation", 1.0, 0.0,
                                   "hole/source disagreement with the simulation");
            if (best_x >= 0)
                err = std::max(err, std::abs(out.at(y, t, 0) - left.at(y, best_x, 0)));
        }
    return make_result("warp-conservation", err, 0.0);
}

// Once sharpening has converged, running it again must not move any value.
CheckResult check_sharpen_stability(const Options&) {
    const StereoCalib calib = synthetic::default_calib();
    const DepthMap depth = synthetic::two_plane_depth(32, 20, 2.0, 4.0);
    const DisparityMap disp = depth_map_to_disparity(depth, calib);
    const WarpConfig config;

    const SharpenResult first =
        sharpen_disparity(disp, detect_flying_pixels(disp, config), config);
    const SharpenResult second = sharpen_disparity(
        first.disp, detect_flying_pixels(first.disp, config), config);
    return make_result("sharpen-stability",
                       max_abs_diff(first.disp.d, second.disp.d), 0.0);
}

// Volume layout: left half is a verbatim copy at every level, the zero-offset
// override reduces the right half to a verbatim copy, and the reprojected
// right half matches a per-index interpolation oracle.
CheckResult check_volume_structure(const Options& opt) {
    UniformRng rng = seeded(opt, 5);
    const StereoCalib calib = synthetic::default_calib();
    const int w = 12, h = 9, c = 4;
    const FeatureMap left = synthetic::uniform_features(w, h, c, rng, -1.0, 1.0);
    const FeatureMap right = synthetic::uniform_features(w, h, c, rng, -1.0, 1.0);

    const CostVolume vol = build_stereo_volume(left, right, calib);
    const CostVolume clone_vol = build_stereo_volume(left, right, calib, true);

    double exact = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int lvl = 0; lvl < calib.num_depth_levels; ++lvl)
                for (int ch = 0; ch < c; ++ch) {
                    exact = std::max(exact, std::abs(vol.data[vol.index(y, x, lvl, ch)] -
                                                     left.at(y, x, ch)));
                    exact = std::max(
                        exact, std::abs(clone_vol.data[clone_vol.index(y, x, lvl, c + ch)] -
                                        right.at(y, x, ch)));
                }
    if (exact > 0.0)
        return make_result("volume-structure", exact, 0.0,
                           "copied halves are not verbatim");

    double err = 0.0;
    for (int lvl = 0; lvl < calib.num_depth_levels; ++lvl) {
        const double offset = reprojection_offset(lvl, calib);
        const double shift = -offset;
        const double fs = std::floor(shift);
        const double frac = shift - fs;
        const int ifs = static_cast<int>(fs);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int ch = 0; ch < c; ++ch) {
                    const int x0 = x + ifs;
                    double want = 0.0;
                    if (x0 >= 0 && x0 < w)
                        want += (1.0 - frac) * right.at(y, x0, ch);
                    if (x0 + 1 >= 0 && x0 + 1 < w)
                        want += frac * right.at(y, x0 + 1, ch);
                    err = std::max(
                        err, std::abs(vol.data[vol.index(y, x, lvl, c + ch)] - want));
                }
    }
    return make_result("volume-structure", err, 1e-12);
}

// Softmax outputs must be true distributions and the regressed depth must stay
// inside the sampled depth range.
CheckResult check_depth_distribution(const Options& opt) {
    UniformRng rng = seeded(opt, 6);
    const StereoCalib calib = synthetic::default_calib();
    ScoreVolume scores(9, 6, calib.num_depth_levels);
    for (double& s : scores.scores)
        s = rng.range(-10.0, 10.0);

    const DepthDistribution dist = depth_distribution(scores);
    double err = 0.0;
    for (int y = 0; y < dist.height; ++y)
        for (int x = 0; x < dist.width; ++x) {
            double sum = 0.0;
            for (int lvl = 0; lvl < dist.levels; ++lvl) {
                const double p = dist.at(y, x, lvl);
                if (p < 0.0)
                    return make_result("depth-distribution", 1.0, 1e-12,
                                       "negative probability");
                sum += p;
            }
            err = std::max(err, std::abs(sum - 1.0));
        }

    const DepthMap depth = soft_depth_regression(dist, calib);
    const double z_lo = depth_level(0, calib);
    const double z_hi = depth_level(calib.num_depth_levels - 1, calib);
    for (const double z : depth.z)
        if (z < z_lo - 1e-12 || z > z_hi + 1e-12)
            return make_result("depth-distribution", std::abs(z), 1e-12,
                               "regressed depth left the sampled range");
    return make_result("depth-distribution", err, 1e-12);
}

// Round-trips that must be lossless: f64 feature maps, f32 feature maps (after
// the documented float cast), disparity maps with an invalid pixel, and
// calibration text.
CheckResult check_io_roundtrip(const Options& opt) {
    namespace fs = std::filesystem;
    UniformRng rng = seeded(opt, 7);
    const fs::path dir = fs::temp_directory_path() /
                         ("pstereo-selfcheck-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    double err = 0.0;
    std::string detail;
    try {
        const FeatureMap map = synthetic::uniform_features(11, 7, 3, rng, -5.0, 5.0);
        const std::string f64_path = (dir / "map64.psfm").string();
        write_feature_map(map, f64_path, ScalarType::f64);
        err = std::max(err, max_abs_diff(read_feature_map(f64_path).data, map.data));

        const std::string f32_path = (dir / "map32.psfm").string();
        write_feature_map(map, f32_path, ScalarType::f32);
        const FeatureMap back32 = read_feature_map(f32_path);
        for (std::size_t i = 0; i < map.data.size(); ++i)
            err = std::max(err, std::abs(back32.data[i] -
                                         static_cast<double>(static_cast<float>(
                                             map.data[i]))));

        UniformRng drng = seeded(opt, 8);
        DisparityMap disp = synthetic::uniform_disparity(9, 5, drng, 0.5, 40.0);
        disp.valid[disp.index(2, 3)] = 0;
        disp.d[disp.index(2, 3)] = 0.0;
        const std::string pfm_path = (dir / "disp.pfm").string();
        write_disparity_pfm(disp, pfm_path);
        const DisparityMap disp_back = read_disparity_pfm(pfm_path);
        for (std::size_t i = 0; i < disp.d.size(); ++i) {
            if (disp_back.valid[i] != disp.valid[i]) {
                err = std::max(err, 1.0);
                detail = "disparity validity mask changed in round-trip";
            } else if (disp.valid[i]) {
                err = std::max(err, std::abs(disp_back.d[i] -
                                             static_cast<double>(static_cast<float>(
                                                 disp.d[i]))));
            }
        }

        const StereoCalib calib = synthetic::default_calib();
        const std::string calib_path = (dir / "calib.txt").string();
        write_calib(calib, calib_path);
        const StereoCalib calib_back = read_calib(calib_path);
        err = std::max({err, std::abs(calib_back.focal_px - calib.focal_px),
                        std::abs(calib_back.baseline_m - calib.baseline_m),
                        std::abs(calib_back.z_min_m - calib.z_min_m),
                        std::abs(calib_back.depth_interval_m - calib.depth_interval_m),
                        static_cast<double>(calib_back.stride != calib.stride),
                        static_cast<double>(calib_back.num_depth_levels !=
                                            calib.num_depth_levels)});
    } catch (const Error& e) {
        fs::remove_all(dir);
        return make_result("io-roundtrip", 1.0, 0.0, e.what());
    }
    fs::remove_all(dir);
    return make_result("io-roundtrip", err, 0.0, std::move(detail));
}

// 8-bit image round-trip may move an intensity by at most half a
// quantization step.
CheckResult check_image_quantization(const Options& opt) {
    namespace fs = std::filesystem;
    UniformRng rng = seeded(opt, 9);
    const fs::path dir = fs::temp_directory_path() /
                         ("pstereo-selfcheck-img-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    RasterImage img(10, 6, 3, 0.0);
    for (double& v : img.intensity)
        v = rng.next();
    const std::string path = (dir / "img.ppm").string();
    double err = 0.0;
    try {
        write_image(img, path);
        const RasterImage back = read_image(path);
        err = max_abs_diff(back.intensity, img.intensity);
    } catch (const Error& e) {
        fs::remove_all(dir);
        return make_result("image-quantization", 1.0, 0.5 / 255.0, e.what());
    }
    fs::remove_all(dir);
    return make_result("image-quantization", err, 0.5 / 255.0 + 1e-12);
}

// Loss composition: exact weighted sum, and lambda_dep = 0 removes any
// dependence on the depth term.
CheckResult check_loss(const Options& opt) {
    UniformRng rng = seeded(opt, 10);
    double err = std::abs(combined_loss(1.0, 2.0, 3.0, 1.0, 1.0, 1.0, true) - 6.0);
    const double base = combined_loss(0.7, 0.0, 1.3, 2.0, 0.0, 0.5);
    for (int i = 0; i < 5; ++i)
        err = std::max(err, std::abs(combined_loss(0.7, rng.range(-100.0, 100.0), 1.3,
                                                   2.0, 0.0, 0.5) -
                                     base));
    const double weighted =
        combined_loss(1.0, 1.0, 1.0, opt.lambda_d, opt.lambda_dep, opt.lambda_kd);
    err = std::max(err, std::abs(weighted - (opt.lambda_d + opt.lambda_dep +
                                             opt.lambda_kd)));
    return make_result("loss-composition", err, 0.0);
}

// A disparity map equal to mu must normalize to zero and annihilate the
// virtual-feature output; mu + sigma must normalize to 1.
CheckResult check_normalization(const Options& opt) {
    UniformRng rng = seeded(opt, 11);
    const DisparityNormalization norm;
    const int w = 8, h = 6, c = 4;
    const FeatureMap left = synthetic::uniform_features(w, h, c, rng, -1.0, 1.0);
    DisparityMap disp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            disp.set(y, x, norm.mu);

    const FeatureMap out = generate_virtual_right_features(left, disp, norm);
    double err = 0.0;
    for (const double v : out.data)
        err = std::max(err, std::abs(v));

    DisparityMap one(1, 1);
    one.set(0, 0, norm.mu + norm.sigma);
    err = std::max(err, std::abs(normalize_disparity(one, norm).data[0] - 1.0));
    return make_result("normalization", err, 1e-12);
}

}  // namespace

std::vector<CheckResult> run_all(const Options& opt) {
    std::vector<CheckResult> results;
    results.push_back(check_ddc_paths(opt));
    results.push_back(check_backends(opt));
    results.push_back(check_gradients(opt));
    results.push_back(check_warp_shift(opt));
    results.push_back(check_warp_conservation(opt));
    results.push_back(check_sharpen_stability(opt));
    results.push_back(check_volume_structure(opt));
    results.push_back(check_depth_distribution(opt));
    results.push_back(check_io_roundtrip(opt));
    results.push_back(check_image_quantization(opt));
    results.push_back(check_loss(opt));
    results.push_back(check_normalization(opt));
    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const CheckResult& r : results)
        if (!r.passed)
            return false;
    return true;
}

}  // namespace pstereo::selfcheck
