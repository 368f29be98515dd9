#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pstereo/ddc.hpp"
#include "pstereo/errors.hpp"
#include "pstereo/geometry.hpp"
#include "pstereo/io_formats.hpp"
#include "pstereo/selfcheck.hpp"
#include "pstereo/stereo_volume.hpp"
#include "pstereo/synthetic.hpp"
#include "pstereo/view_synthesis.hpp"

namespace {

using namespace pstereo;

struct SyntheticFlags {
    bool enabled = false;
    int width = 64;
    int height = 48;
    int channels = 8;
    std::uint64_t seed = 0;
};

void add_synthetic_flags(CLI::App* cmd, SyntheticFlags& flags) {
    cmd->add_flag("--synthetic", flags.enabled,
                  "generate seeded inputs instead of reading files");
    cmd->add_option("--width", flags.width, "synthetic width")->capture_default_str();
    cmd->add_option("--height", flags.height, "synthetic height")
        ->capture_default_str();
    cmd->add_option("--channels", flags.channels, "synthetic channel count")
        ->capture_default_str();
    cmd->add_option("--seed", flags.seed, "synthetic data seed")
        ->capture_default_str();
}

void require_path(const std::string& value, const char* flag) {
    if (value.empty())
        throw DomainError(std::string(flag) + " is required unless --synthetic is set");
}

StereoCalib load_calib(const std::string& path, bool synthetic) {
    if (!path.empty())
        return read_calib(path);
    if (synthetic)
        return synthetic::default_calib();
    throw DomainError("--calib is required unless --synthetic is set");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// ---- warp ----

struct WarpArgs {
    std::string left, depth, calib, out, holes;
    bool sharpen = true;
    double threshold = 3.0;
    SyntheticFlags synth;
};

int run_warp(const WarpArgs& a) {
    RasterImage left;
    DepthMap depth;
    if (a.synth.enabled) {
        left = synthetic::distinct_pixel_image(a.synth.width, a.synth.height, 3);
        depth = synthetic::two_plane_depth(a.synth.width, a.synth.height, 2.5, 4.5);
    } else {
        require_path(a.left, "--left");
        require_path(a.depth, "--depth");
        left = read_image(a.left);
        depth = read_depth_pfm(a.depth);
    }
    const StereoCalib calib = load_calib(a.calib, a.synth.enabled);

    WarpConfig config;
    config.sobel_threshold = a.threshold;
    RasterImage right;
    if (a.sharpen) {
        right = synthesize_right_view(left, depth, calib, config);
    } else {
        right = forward_warp(left, depth_map_to_disparity(depth, calib), config);
    }
    write_image(right, a.out);
    if (!a.holes.empty())
        write_mask_pgm(right.hole_mask, right.width, right.height, a.holes);
    return 0;
}

// ---- ddc ----

struct DdcArgs {
    std::string features, disparity, calib, out;
    double mu = 33.20;
    double sigma = 15.91;
    SyntheticFlags synth;
};

int run_ddc(const DdcArgs& a) {
    const StereoCalib calib = load_calib(a.calib, a.synth.enabled);
    FeatureMap features;
    DisparityMap disparity;
    if (a.synth.enabled) {
        synthetic::UniformRng rng(a.synth.seed);
        features = synthetic::uniform_features(a.synth.width, a.synth.height,
                                               a.synth.channels, rng, -1.0, 1.0);
        disparity = synthetic::uniform_disparity(a.synth.width * calib.stride,
                                                 a.synth.height * calib.stride, rng,
                                                 5.0, 60.0);
    } else {
        require_path(a.features, "--features");
        require_path(a.disparity, "--disparity");
        features = read_feature_map(a.features);
        disparity = read_disparity_pfm(a.disparity);
    }
    const DisparityMap at_feature_res = downsample_disparity(disparity, calib.stride);
    const FeatureMap out = generate_virtual_right_features(
        features, at_feature_res, DisparityNormalization{a.mu, a.sigma});
    write_feature_map(out, a.out, ScalarType::f64);
    return 0;
}

// ---- volume ----

struct VolumeArgs {
    std::string left, right, calib, out;
    bool zero_offset = false;
    SyntheticFlags synth;
};

void print_half_stats(const char* label, const CostVolume& vol, int first_channel) {
    const int c = vol.channels / 2;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < vol.height; ++y)
        for (int x = 0; x < vol.width; ++x)
            for (int lvl = 0; lvl < vol.levels; ++lvl)
                for (int ch = first_channel; ch < first_channel + c; ++ch) {
                    const double v = vol.data[vol.index(y, x, lvl, ch)];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                    sum += v;
                    ++n;
                }
    std::cout << label << "\t" << fmt(lo) << "\t" << fmt(hi) << "\t"
              << fmt(sum / static_cast<double>(n)) << "\n";
}

int run_volume(const VolumeArgs& a) {
    const StereoCalib calib = load_calib(a.calib, a.synth.enabled);
    FeatureMap left, right;
    if (a.synth.enabled) {
        synthetic::UniformRng rng(a.synth.seed);
        left = synthetic::uniform_features(a.synth.width, a.synth.height,
                                           a.synth.channels, rng, -1.0, 1.0);
        right = synthetic::uniform_features(a.synth.width, a.synth.height,
                                            a.synth.channels, rng, -1.0, 1.0);
    } else {
        require_path(a.left, "--left");
        require_path(a.right, "--right");
        left = read_feature_map(a.left);
        right = read_feature_map(a.right);
    }
    const CostVolume vol = build_stereo_volume(left, right, calib, a.zero_offset);
    if (!a.out.empty())
        write_cost_volume(vol, a.out, ScalarType::f64);
    std::cout << "shape\t" << vol.width << "\t" << vol.height << "\t" << vol.levels
              << "\t" << vol.channels << "\n";
    print_half_stats("left", vol, 0);
    print_half_stats("right", vol, vol.channels / 2);
    return 0;
}

// ---- selfcheck ----

struct SelfcheckArgs {
    selfcheck::Options opt;
};

int run_selfcheck(const SelfcheckArgs& a) {
    const std::vector<selfcheck::CheckResult> results = selfcheck::run_all(a.opt);
    int failed = 0;
    for (const selfcheck::CheckResult& r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << "\t" << r.name
                  << "\tmax_err=" << fmt(r.max_error) << "\ttol=" << fmt(r.tolerance);
        if (!r.detail.empty())
            std::cout << "\t" << r.detail;
        std::cout << "\n";
        if (!r.passed)
            ++failed;
    }
    if (failed != 0) {
        std::cout << "FAILED\t" << failed << " of " << results.size() << " checks\n";
        return 1;
    }
    std::cout << "OK\t" << results.size() << " checks\n";
    return 0;
}

// ---- bench ----

struct BenchArgs {
    std::vector<std::string> sizes;
    int runs = 10;
    int warmups = 3;
};

struct Timing {
    double mean_ms = 0.0;
    double stddev_ms = 0.0;
};

template <typename F>
Timing time_op(F&& op, int warmups, int runs) {
    for (int i = 0; i < warmups; ++i)
        op();
    std::vector<double> ms(static_cast<std::size_t>(runs));
    for (int i = 0; i < runs; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        op();
        const auto t1 = std::chrono::steady_clock::now();
        ms[static_cast<std::size_t>(i)] =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    Timing t;
    for (const double v : ms)
        t.mean_ms += v;
    t.mean_ms /= static_cast<double>(runs);
    double acc = 0.0;
    for (const double v : ms)
        acc += (v - t.mean_ms) * (v - t.mean_ms);
    t.stddev_ms = std::sqrt(acc / static_cast<double>(runs));
    return t;
}

void parse_size(const std::string& token, int& w, int& h, int& c) {
    int fields[3] = {0, 0, 0};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        std::size_t used = 0;
        try {
            fields[i] = std::stoi(token.substr(pos), &used);
        } catch (const std::exception&) {
            throw DomainError("--sizes entry '" + token + "' is not WxHxC");
        }
        pos += used;
        if (i < 2) {
            if (pos >= token.size() || token[pos] != 'x')
                throw DomainError("--sizes entry '" + token + "' is not WxHxC");
            ++pos;
        }
    }
    if (pos != token.size() || fields[0] < 1 || fields[1] < 1 || fields[2] < 1)
        throw DomainError("--sizes entry '" + token + "' is not WxHxC");
    w = fields[0];
    h = fields[1];
    c = fields[2];
}

int run_bench(const BenchArgs& a) {
    if (a.runs < 1 || a.warmups < 0)
        throw DomainError("--runs must be >= 1 and --warmups >= 0");
    if (a.sizes.empty())
        throw DomainError("--sizes requires at least one WxHxC entry");
    std::cout << "size\top\tmean_ms\tstddev_ms\tnote\n";
    for (const std::string& token : a.sizes) {
        int w = 0, h = 0, c = 0;
        parse_size(token, w, h, c);
        synthetic::UniformRng rng(0);
        const FeatureMap left = synthetic::uniform_features(w, h, c, rng, -1.0, 1.0);
        const FeatureMap disp_feat =
            synthetic::uniform_features(w, h, c, rng, -2.0, 2.0);

        FeatureMap naive_out, grid_out;
        const Timing naive = time_op(
            [&]() { naive_out = ddc_forward_naive(left, disp_feat); }, a.warmups,
            a.runs);
        const Timing grid = time_op(
            [&]() { grid_out = ddc_forward_gridshift(left, disp_feat); }, a.warmups,
            a.runs);
        const bool equal = naive_out.data == grid_out.data;

        const RasterImage image = synthetic::distinct_pixel_image(w, h, 1);
        DisparityMap disp(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                disp.set(y, x, std::floor(rng.range(0.0, std::max(2.0, w / 4.0))));
        RasterImage warped;
        const Timing warp = time_op(
            [&]() { warped = forward_warp(image, disp, WarpConfig{}); }, a.warmups,
            a.runs);

        std::ostringstream ms;
        ms.setf(std::ios::fixed);
        ms.precision(4);
        ms << token << "\tddc-window\t" << naive.mean_ms << "\t" << naive.stddev_ms
           << "\t\n"
           << token << "\tddc-gridshift\t" << grid.mean_ms << "\t" << grid.stddev_ms
           << "\toutputs_equal=" << (equal ? 1 : 0) << "\n"
           << token << "\timage-warp\t" << warp.mean_ms << "\t" << warp.stddev_ms
           << "\t\n";
        std::cout << ms.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"virtual stereo view synthesis toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    WarpArgs warp_args;
    CLI::App* warp = app.add_subcommand(
        "warp", "forward-warp a left image into the virtual right view");
    warp->add_option("--left", warp_args.left, "left image (PGM/PPM)");
    warp->add_option("--depth", warp_args.depth, "depth map (PFM)");
    warp->add_option("--calib", warp_args.calib, "calibration text file");
    warp->add_option("--out", warp_args.out, "output right image")->required();
    warp->add_option("--holes", warp_args.holes, "output hole mask (PGM)");
    warp->add_flag("--sharpen,!--no-sharpen", warp_args.sharpen,
                   "sharpen flying pixels before warping");
    warp->add_option("--threshold", warp_args.threshold,
                     "gradient-magnitude threshold for flying pixels")
        ->capture_default_str();
    add_synthetic_flags(warp, warp_args.synth);
    warp->callback([&]() { rc = run_warp(warp_args); });

    DdcArgs ddc_args;
    CLI::App* ddc = app.add_subcommand(
        "ddc", "convert left features into virtual right features");
    ddc->add_option("--features", ddc_args.features, "left features (PSFM)");
    ddc->add_option("--disparity", ddc_args.disparity,
                    "full-resolution disparity (PFM)");
    ddc->add_option("--calib", ddc_args.calib, "calibration text file");
    ddc->add_option("--out", ddc_args.out, "output features (PSFM)")->required();
    ddc->add_option("--mu", ddc_args.mu, "disparity normalization mean")
        ->capture_default_str();
    ddc->add_option("--sigma", ddc_args.sigma, "disparity normalization stddev")
        ->capture_default_str();
    add_synthetic_flags(ddc, ddc_args.synth);
    ddc->callback([&]() { rc = run_ddc(ddc_args); });

    VolumeArgs vol_args;
    CLI::App* volume = app.add_subcommand(
        "volume", "build the concatenated plane-sweep volume and print stats");
    volume->add_option("--left", vol_args.left, "left features (PSFM)");
    volume->add_option("--right", vol_args.right, "right features (PSFM)");
    volume->add_option("--calib", vol_args.calib, "calibration text file");
    volume->add_option("--out", vol_args.out, "output volume (PSFM)");
    volume->add_flag("--zero-offset", vol_args.zero_offset,
                     "force offset 0 at every level (clone volume)");
    add_synthetic_flags(volume, vol_args.synth);
    volume->callback([&]() { rc = run_volume(vol_args); });

    SelfcheckArgs check_args;
    CLI::App* selfcheck_cmd = app.add_subcommand(
        "selfcheck", "run the seeded invariant suite; exit 0 iff all checks pass");
    selfcheck_cmd->add_option("--seed", check_args.opt.seed, "suite seed")
        ->capture_default_str();
    selfcheck_cmd->add_option("--lambda-d", check_args.opt.lambda_d,
                              "detection-loss weight")
        ->capture_default_str();
    selfcheck_cmd->add_option("--lambda-dep", check_args.opt.lambda_dep,
                              "depth-loss weight")
        ->capture_default_str();
    selfcheck_cmd->add_option("--lambda-kd", check_args.opt.lambda_kd,
                              "distillation-loss weight")
        ->capture_default_str();
    selfcheck_cmd->callback([&]() { rc = run_selfcheck(check_args); });

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand(
        "bench", "time the convolution paths and the image warp");
    bench->add_option("--sizes", bench_args.sizes, "comma-separated WxHxC list")
        ->required()
        ->delimiter(',');
    bench->add_option("--runs", bench_args.runs, "timed runs per op")
        ->capture_default_str();
    bench->add_option("--warmups", bench_args.warmups, "warmup runs per op")
        ->capture_default_str();
    bench->callback([&]() { rc = run_bench(bench_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
