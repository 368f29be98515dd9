// Acceptance gate: ten independently verified behavior contracts, one line
// each, with the tolerances pinned in the line. Exits 0 only if all pass.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pstereo/core_types.hpp"
#include "pstereo/ddc.hpp"
#include "pstereo/errors.hpp"
#include "pstereo/geometry.hpp"
#include "pstereo/gradcheck.hpp"
#include "pstereo/io_formats.hpp"
#include "pstereo/stereo_volume.hpp"
#include "pstereo/synthetic.hpp"
#include "pstereo/view_synthesis.hpp"

using namespace pstereo;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

// ---- criterion 1: the sliding-window and grid-shifting DDC paths agree ----

Outcome check_ddc_equivalence() {
    const auto start = Clock::now();
    double max_rel = 0.0;
    bool bit_exact = true;
    int instances = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        synthetic::UniformRng rng(seed);
        const int w = 1 + static_cast<int>(rng.range(0.0, 16.0));
        const int h = 1 + static_cast<int>(rng.range(0.0, 16.0));
        const int c = 1 + static_cast<int>(rng.range(0.0, 8.0));
        const FeatureMap left = synthetic::uniform_features(w, h, c, rng, -2.0, 2.0);
        const FeatureMap disp = synthetic::uniform_features(w, h, c, rng, -2.0, 2.0);
        const FeatureMap a = ddc_forward_naive(left, disp);
        const FeatureMap b = ddc_forward_gridshift(left, disp);
        bit_exact = bit_exact && a.data == b.data;
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            const double denom =
                std::max({std::abs(a.data[i]), std::abs(b.data[i]), 1.0});
            max_rel = std::max(max_rel, std::abs(a.data[i] - b.data[i]) / denom);
        }
        ++instances;
    }
    const double elapsed = seconds_since(start);
    Outcome out;
    out.passed = bit_exact && max_rel <= 1e-12 && elapsed < 10.0;
    out.detail = std::string(bit_exact ? "bit-exact" : "NOT bit-exact") +
                 ", max_rel=" + fmt(max_rel) + " (tol 1e-12), " +
                 std::to_string(instances) + " instances, sizes up to 16x16x8, " +
                 fmt(elapsed) + "s (limit 10s)";
    return out;
}

// ---- criterion 2: analytic gradients match central differences ----

Outcome check_ddc_gradients() {
    const auto start = Clock::now();
    double max_rel = 0.0;
    bool all_passed = true;
    const int instances = 20;
    for (int inst = 0; inst < instances; ++inst) {
        synthetic::UniformRng rng(9000 + static_cast<std::uint64_t>(inst));
        FeatureMap left = synthetic::uniform_features(5, 5, 2, rng, -1.0, 1.0);
        FeatureMap disp = synthetic::uniform_features(5, 5, 2, rng, -1.0, 1.0);
        const FeatureMap weights =
            synthetic::uniform_features(5, 5, 2, rng, -1.0, 1.0);
        const std::size_t n = left.data.size();

        std::vector<double> params(2 * n);
        std::copy(left.data.begin(), left.data.end(), params.begin());
        std::copy(disp.data.begin(), disp.data.end(), params.begin() + n);
        const auto eval = [&]() {
            std::copy(params.begin(), params.begin() + n, left.data.begin());
            std::copy(params.begin() + n, params.end(), disp.data.begin());
            const FeatureMap out = ddc_forward_naive(left, disp);
            double loss = 0.0;
            for (std::size_t i = 0; i < out.data.size(); ++i)
                loss += out.data[i] * weights.data[i];
            return loss;
        };
        eval();  // sync maps with params
        const DdcGradients grads = ddc_backward(weights, left, disp);
        std::vector<double> analytic(2 * n);
        std::copy(grads.grad_left.data.begin(), grads.grad_left.data.end(),
                  analytic.begin());
        std::copy(grads.grad_disp_feat.data.begin(), grads.grad_disp_feat.data.end(),
                  analytic.begin() + n);

        const GradCheckResult r =
            check_gradient(params, eval, analytic, 1e-5, 1e-6);
        all_passed = all_passed && r.passed;
        max_rel = std::max(max_rel, r.max_rel_error);
    }
    const double elapsed = seconds_since(start);
    Outcome out;
    out.passed = all_passed && elapsed < 10.0;
    out.detail = "max_rel=" + fmt(max_rel) + " (tol 1e-6, h=1e-5), both gradients, " +
                 std::to_string(instances) + " instances of 5x5x2, " + fmt(elapsed) +
                 "s (limit 10s)";
    return out;
}

// ---- criterion 3: forward-warp invariants ----

Outcome check_warp_invariants() {
    bool ok = true;
    std::string note;

    // (a) constant integer disparity shifts exactly and leaves predicted holes
    {
        const RasterImage in = synthetic::distinct_pixel_image(16, 5, 1);
        DisparityMap disp(16, 5);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 16; ++x)
                disp.set(y, x, 3.0);
        const RasterImage out = forward_warp(in, disp, WarpConfig{});
        for (int y = 0; y < 5 && ok; ++y)
            for (int x = 0; x < 16; ++x) {
                const bool hole = out.hole_mask[out.pixel(y, x)] != 0;
                if (x < 13) {
                    if (hole || out.at(y, x, 0) != in.at(y, x + 3, 0)) {
                        ok = false;
                        note = "constant-shift mismatch";
                        break;
                    }
                } else if (!hole || out.at(y, x, 0) != 0.0) {
                    ok = false;
                    note = "hole prediction mismatch";
                    break;
                }
            }
    }

    // (b) every non-hole output pixel is an exact copy of some input pixel
    if (ok) {
        const RasterImage in = synthetic::distinct_pixel_image(20, 6, 3);
        synthetic::UniformRng rng(77);
        DisparityMap disp(20, 6);
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 20; ++x)
                if (rng.next() > 0.1)
                    disp.set(y, x, rng.range(0.0, 8.0));
        const RasterImage out = forward_warp(in, disp, WarpConfig{});
        for (int y = 0; y < 6 && ok; ++y)
            for (int t = 0; t < 20 && ok; ++t) {
                if (out.hole_mask[out.pixel(y, t)] != 0)
                    continue;
                bool found = false;
                for (int x = 0; x < 20 && !found; ++x) {
                    bool equal = true;
                    for (int ch = 0; ch < 3; ++ch)
                        equal = equal && out.at(y, t, ch) == in.at(y, x, ch);
                    found = equal;
                }
                if (!found) {
                    ok = false;
                    note = "non-hole pixel has no exact source";
                }
            }
    }

    // (c) colliding sources resolve to the larger disparity (foreground)
    if (ok) {
        RasterImage in(3, 1, 1, 0.0);
        in.intensity = {0.25, 0.5, 0.75};
        DisparityMap disp(3, 1);
        disp.set(0, 1, 1.0);
        disp.set(0, 2, 2.0);  // both land on column 0; disparity 2 must win
        const RasterImage out = forward_warp(in, disp, WarpConfig{});
        if (out.at(0, 0, 0) != 0.75 || out.hole_mask[out.pixel(0, 1)] == 0 ||
            out.hole_mask[out.pixel(0, 2)] == 0) {
            ok = false;
            note = "collision rule violated";
        }
    }

    Outcome out;
    out.passed = ok;
    out.detail = ok ? "exact shift+holes, non-hole provenance, larger-disparity "
                      "collision rule"
                    : note;
    return out;
}

// ---- criterion 4: flying-pixel detection and sharpening ----

Outcome check_sharpening() {
    bool ok = true;
    std::string note;
    WarpConfig config;  // threshold 3

    // constant disparity: nothing may be flagged
    {
        DisparityMap flat(9, 7);
        for (int y = 0; y < 7; ++y)
            for (int x = 0; x < 9; ++x)
                flat.set(y, x, 5.0);
        for (const std::uint8_t f : detect_flying_pixels(flat, config))
            if (f) {
                ok = false;
                note = "constant map produced flags";
            }
    }

    // unit step: flags land exactly on the two columns beside the edge
    if (ok) {
        DisparityMap step(12, 4);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 12; ++x)
                step.set(y, x, x < 6 ? 1.0 : 2.0);
        // Horizontal gradient is 4*|d(x+1)-d(x-1)|: magnitude 4 at columns 5
        // and 6, zero elsewhere; threshold 3 selects exactly those columns.
        const std::vector<std::uint8_t> flags = detect_flying_pixels(step, config);
        for (int y = 0; y < 4 && ok; ++y)
            for (int x = 0; x < 12; ++x) {
                const bool expect = x == 5 || x == 6;
                if ((flags[step.index(y, x)] != 0) != expect) {
                    ok = false;
                    note = "step flags differ from derived columns";
                    break;
                }
            }
    }

    // sharpening is idempotent bit-exactly
    if (ok) {
        const DepthMap depth = synthetic::two_plane_depth(24, 16, 2.5, 4.5);
        const DisparityMap disp =
            depth_map_to_disparity(depth, synthetic::default_calib());
        const SharpenResult once =
            sharpen_disparity(disp, detect_flying_pixels(disp, config), config);
        const SharpenResult twice = sharpen_disparity(
            once.disp, detect_flying_pixels(once.disp, config), config);
        if (twice.disp.d != once.disp.d || twice.disp.valid != once.disp.valid) {
            ok = false;
            note = "second sharpening pass changed the map";
        }
    }

    Outcome out;
    out.passed = ok;
    out.detail = ok ? "zero flags on constant, step columns exact (thr 3), "
                      "idempotent bit-exact"
                    : note;
    return out;
}

// ---- criterion 5: stereo volume vs an independent scalar oracle ----

Outcome check_volume_oracle() {
    StereoCalib calib = synthetic::default_calib();
    calib.num_depth_levels = 5;
    synthetic::UniformRng rng(500);
    const FeatureMap left = synthetic::uniform_features(6, 4, 2, rng, -1.0, 1.0);
    const FeatureMap right = synthetic::uniform_features(6, 4, 2, rng, -1.0, 1.0);
    const CostVolume vol = build_stereo_volume(left, right, calib, false);

    bool left_bits = true;
    double max_abs = 0.0;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x)
            for (int w = 0; w < 5; ++w)
                for (int ch = 0; ch < 2; ++ch) {
                    const double l = vol.at(y, x, w, ch);
                    if (l != left.at(y, x, ch))
                        left_bits = false;
                    const double z =
                        w * calib.depth_interval_m + calib.z_min_m;
                    const double offset = calib.fb() / (z * calib.stride);
                    const double pos = x - offset;
                    const double x0 = std::floor(pos);
                    const double frac = pos - x0;
                    double expect = 0.0;
                    const int xi = static_cast<int>(x0);
                    if (xi >= 0 && xi < 6)
                        expect += (1.0 - frac) * right.at(y, xi, ch);
                    if (xi + 1 >= 0 && xi + 1 < 6)
                        expect += frac * right.at(y, xi + 1, ch);
                    max_abs = std::max(
                        max_abs, std::abs(vol.at(y, x, w, ch + 2) - expect));
                }

    Outcome out;
    out.passed = left_bits && max_abs <= 1e-12;
    out.detail = std::string(left_bits ? "left half bit-equal" : "left half DIFFERS") +
                 ", reprojected max_abs=" + fmt(max_abs) +
                 " (tol 1e-12), 6x4x2 with 5 levels, every index";
    return out;
}

// ---- criterion 6: depth distribution and regression ----

Outcome check_depth_distribution() {
    StereoCalib calib = synthetic::default_calib();
    bool ok = true;
    std::string note;
    double max_sum_err = 0.0;

    synthetic::UniformRng rng(600);
    ScoreVolume scores(7, 5, calib.num_depth_levels, 0.0);
    for (double& s : scores.scores)
        s = rng.range(-4.0, 4.0);
    const DepthDistribution dist = depth_distribution(scores);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x) {
            double sum = 0.0;
            for (int w = 0; w < dist.levels; ++w) {
                const double p = dist.at(y, x, w);
                if (p < 0.0) {
                    ok = false;
                    note = "negative probability";
                }
                sum += p;
            }
            max_sum_err = std::max(max_sum_err, std::abs(sum - 1.0));
        }
    if (max_sum_err > 1e-9) {
        ok = false;
        note = "probabilities do not sum to 1";
    }

    // one-hot distributions regress to the exact depth level
    if (ok) {
        DepthDistribution onehot;
        onehot.width = 3;
        onehot.height = 2;
        onehot.levels = calib.num_depth_levels;
        onehot.p.assign(static_cast<std::size_t>(3) * 2 * onehot.levels, 0.0);
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 3; ++x) {
                const int w = (y * 3 + x) % onehot.levels;
                onehot.p[onehot.index(y, x, w)] = 1.0;
            }
        const DepthMap reg = soft_depth_regression(onehot, calib);
        for (int y = 0; y < 2 && ok; ++y)
            for (int x = 0; x < 3; ++x) {
                const int w = (y * 3 + x) % onehot.levels;
                if (reg.z[reg.index(y, x)] != depth_level(w, calib)) {
                    ok = false;
                    note = "one-hot regression not exact";
                    break;
                }
            }
    }

    // regressed depth stays inside the candidate range
    if (ok) {
        const DepthMap reg = soft_depth_regression(dist, calib);
        const double z_max = depth_level(calib.num_depth_levels - 1, calib);
        for (std::size_t i = 0; i < reg.z.size(); ++i)
            if (reg.valid[i] &&
                (reg.z[i] < calib.z_min_m || reg.z[i] > z_max)) {
                ok = false;
                note = "regressed depth escapes candidate range";
            }
        std::size_t n_valid = 0;
        if (depth_loss(reg, reg, &n_valid) != 0.0 || n_valid != reg.z.size()) {
            ok = false;
            note = "self depth loss not zero";
        }
    }

    Outcome out;
    out.passed = ok;
    out.detail = ok ? "max|sum-1|=" + fmt(max_sum_err) +
                          " (tol 1e-9), one-hot exact, range respected, "
                          "zero self-loss"
                    : note;
    return out;
}

// ---- criterion 7: geometry round trips and normalization anchors ----

Outcome check_geometry() {
    const StereoCalib calib = synthetic::default_calib();
    double max_rel = 0.0;
    for (double z = 1.0; z <= 100.0; z += 0.25) {
        const double back = disparity_to_depth(depth_to_disparity(z, calib), calib);
        max_rel = std::max(max_rel, std::abs(back - z) / z);
    }

    bool decreasing = true;
    for (int w = 1; w < calib.num_depth_levels; ++w)
        if (reprojection_offset(w, calib) >= reprojection_offset(w - 1, calib))
            decreasing = false;

    DisparityMap anchors(2, 1);
    anchors.set(0, 0, 33.20);
    anchors.set(0, 1, 49.11);
    const FeatureMap norm = normalize_disparity(anchors, DisparityNormalization{});
    const bool zero_exact = norm.data[0] == 0.0;
    const double one_err = std::abs(norm.data[1] - 1.0);

    Outcome out;
    out.passed = max_rel <= 1e-12 && decreasing && zero_exact && one_err <= 1e-12;
    out.detail = "roundtrip max_rel=" + fmt(max_rel) +
                 " (tol 1e-12, z in [1,100]), offsets " +
                 (decreasing ? "strictly decreasing" : "NOT decreasing") +
                 ", norm(33.20)=" + (zero_exact ? "0 exact" : "NONZERO") +
                 ", |norm(49.11)-1|=" + fmt(one_err) + " (tol 1e-12)";
    return out;
}

// ---- criterion 8: loss composition and ablation invariance ----

Outcome check_loss_composition() {
    const bool six = combined_loss(1.0, 2.0, 3.0, 1.0, 1.0, 1.0) == 6.0;
    bool invariant = true;
    const double base = combined_loss(1.5, 0.0, 2.5, 1.0, 0.0, 1.0);
    synthetic::UniformRng rng(800);
    for (int i = 0; i < 50; ++i) {
        const double ldep = rng.range(-1e6, 1e6);
        if (combined_loss(1.5, ldep, 2.5, 1.0, 0.0, 1.0) != base)
            invariant = false;
    }
    Outcome out;
    out.passed = six && invariant;
    out.detail = std::string(six ? "(1,2,3)x(1,1,1)=6 exact" : "weighted sum WRONG") +
                 ", depth-term weight 0 invariant over 50 draws (exact)";
    return out;
}

// ---- criterion 9: reader fuzzing and bit-exact round trips ----

Outcome check_reader_fuzz() {
    synthetic::UniformRng rng(900);
    FeatureMap map(5, 4, 2, 0.0);
    for (double& v : map.data)
        v = rng.range(-3.0, 3.0);
    DepthMap depth(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            depth.set(y, x, rng.range(0.5, 9.0));
    depth.valid[depth.index(2, 1)] = 0;
    depth.z[depth.index(2, 1)] = 0.0;

    // bit-exact round trips of well-formed files
    bool roundtrip = true;
    {
        std::stringstream a, b;
        write_feature_map(map, a, ScalarType::f64);
        write_feature_map(read_feature_map(a), b, ScalarType::f64);
        roundtrip = roundtrip && a.str() == b.str();
    }
    {
        std::stringstream a, b;
        write_feature_map(map, a, ScalarType::f32);
        write_feature_map(read_feature_map(a), b, ScalarType::f32);
        roundtrip = roundtrip && a.str() == b.str();
    }
    {
        std::stringstream a, b;
        write_depth_pfm(depth, a);
        write_depth_pfm(read_depth_pfm(a), b);
        roundtrip = roundtrip && a.str() == b.str();
    }
    {
        std::stringstream a, b;
        write_calib(synthetic::default_calib(), a);
        write_calib(read_calib(a), b);
        roundtrip = roundtrip && a.str() == b.str();
    }

    std::stringstream psfm, pfm, calib;
    write_feature_map(map, psfm, ScalarType::f32);
    write_depth_pfm(depth, pfm);
    write_calib(synthetic::default_calib(), calib);
    const std::string bases[3] = {psfm.str(), pfm.str(), calib.str()};

    int structured_errors = 0;
    int clean_reads = 0;
    int foreign_failures = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        std::string bytes = bases[iter % 3];
        const int edits = 1 + static_cast<int>(rng.range(0.0, 5.0));
        for (int e = 0; e < edits; ++e) {
            const auto pos =
                static_cast<std::size_t>(rng.range(0.0, double(bytes.size())));
            const auto byte = static_cast<char>(
                static_cast<unsigned char>(static_cast<int>(rng.range(0.0, 256.0))));
            switch (static_cast<int>(rng.range(0.0, 3.0))) {
            case 0:
                bytes[pos] = byte;
                break;
            case 1:
                bytes = bytes.substr(0, pos);
                break;
            default:
                bytes.insert(pos, 1, byte);
                break;
            }
            if (bytes.empty())
                bytes = "\n";
        }
        std::istringstream in(bytes);
        try {
            switch (iter % 3) {
            case 0:
                (void)read_feature_map(in);
                break;
            case 1:
                (void)read_depth_pfm(in);
                break;
            default:
                (void)read_calib(in);
                break;
            }
            ++clean_reads;  // mutation happened to stay well-formed
        } catch (const Error&) {
            ++structured_errors;
        } catch (...) {
            ++foreign_failures;
        }
    }

    Outcome out;
    out.passed = roundtrip && foreign_failures == 0;
    out.detail = "1000 iterations: " + std::to_string(structured_errors) +
                 " structured errors, " + std::to_string(clean_reads) +
                 " clean reads, " + std::to_string(foreign_failures) +
                 " foreign failures; round trips " +
                 (roundtrip ? "bit-exact" : "NOT bit-exact");
    return out;
}

// ---- criterion 10: the CLI self test passes end to end ----

Outcome check_cli_selfcheck(const std::string& cli) {
    Outcome out;
    if (cli.empty()) {
        out.detail = "no CLI path given (pass --cli <path>)";
        return out;
    }
    const auto start = Clock::now();
    const std::string cmd = "\"" + cli + "\" selfcheck --seed 0 >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const double elapsed = seconds_since(start);
    const bool exited_zero =
        status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    out.passed = exited_zero && elapsed < 60.0;
    out.detail = std::string(exited_zero ? "exit 0" : "nonzero exit") + " in " +
                 fmt(elapsed) + "s (limit 60s)";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
#ifdef PSTEREO_CLI_PATH
    cli = PSTEREO_CLI_PATH;
#endif
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--cli" && i + 1 < argc)
            cli = argv[++i];
    }

    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"ddc-equivalence", check_ddc_equivalence},
        {"ddc-gradcheck", check_ddc_gradients},
        {"warp-invariants", check_warp_invariants},
        {"sharpen-behavior", check_sharpening},
        {"volume-oracle", check_volume_oracle},
        {"depth-distribution", check_depth_distribution},
        {"geometry-roundtrip", check_geometry},
        {"loss-composition", check_loss_composition},
        {"reader-fuzz", check_reader_fuzz},
        {"cli-selfcheck", [&cli]() { return check_cli_selfcheck(cli); }},
    };

    int failed = 0;
    int idx = 0;
    for (const Criterion& c : criteria) {
        ++idx;
        Outcome result;
        try {
            result = c.run();
        } catch (const std::exception& e) {
            result.passed = false;
            result.detail = std::string("unexpected exception: ") + e.what();
        }
        if (!result.passed)
            ++failed;
        std::printf("%s %2d %-20s %s\n", result.passed ? "PASS" : "FAIL", idx,
                    c.name, result.detail.c_str());
    }

    const int total = static_cast<int>(std::size(criteria));
    if (failed == 0) {
        std::printf("acceptance: %d of %d criteria passed\n", total, total);
        return 0;
    }
    std::printf("acceptance: %d of %d criteria FAILED\n", failed, total);
    return 1;
}
