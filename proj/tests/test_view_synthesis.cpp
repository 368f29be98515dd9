#include <doctest.h>

#include <cmath>
#include <vector>

#include "pstereo/errors.hpp"
#include "pstereo/geometry.hpp"
#include "pstereo/synthetic.hpp"
#include "pstereo/view_synthesis.hpp"

using namespace pstereo;

namespace {

DisparityMap constant_disparity(int w, int h, double d) {
    DisparityMap disp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            disp.set(y, x, d);
    return disp;
}

// Disparity whose rows are all [0,...,0,step,...,step] with the jump between
// columns 2 and 3.
DisparityMap column_step(int w, int h, double step) {
    DisparityMap disp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            disp.set(y, x, x < 3 ? 1.0 : 1.0 + step);
    return disp;
}

// Reference warp: for every target, scan all sources and apply the collision
// rule directly.
void simulate_warp(const RasterImage& left, const DisparityMap& disp, int y, int t,
                   int* src_x) {
    *src_x = -1;
    double best_d = -1.0;
    for (int x = 0; x < left.width; ++x) {
        if (!disp.valid[disp.index(y, x)])
            continue;
        const double d = disp.d[disp.index(y, x)];
        if (std::lround(static_cast<double>(x) - d) != t)
            continue;
        if (d > best_d || (d == best_d && x > *src_x)) {
            best_d = d;
            *src_x = x;
        }
    }
}

}  // namespace

TEST_CASE("sobel magnitude of a constant map is zero") {
    const DisparityMap disp = constant_disparity(6, 5, 12.5);
    for (double v : sobel_magnitude(disp).data)
        CHECK(v == 0.0);
    CHECK_THROWS_AS(sobel_magnitude(constant_disparity(2, 5, 1.0)), DimensionError);
    CHECK_THROWS_AS(sobel_magnitude(constant_disparity(5, 2, 1.0)), DimensionError);
}

TEST_CASE("a column step of height h responds with magnitude 4h at the step") {
    // Columns 0..2 hold 0, columns 3..4 hold h; replicate padding makes every
    // row identical, so gy = 0 and gx = 4h exactly at columns 2 and 3.
    const double h = 2.5;
    DisparityMap disp(5, 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
            disp.set(y, x, x < 3 ? 1.0 : 1.0 + h);

    const FeatureMap mag = sobel_magnitude(disp);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) {
            const double want = (x == 2 || x == 3) ? 4.0 * h : 0.0;
            CHECK(mag.at(y, x, 0) == want);
        }
}

TEST_CASE("transposing the input transposes the sobel output") {
    synthetic::UniformRng rng(31);
    DisparityMap disp(6, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x)
            disp.set(y, x, rng.range(1.0, 50.0));
    DisparityMap transposed(4, 6);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x)
            transposed.set(x, y, disp.d[disp.index(y, x)]);

    const FeatureMap mag = sobel_magnitude(disp);
    const FeatureMap mag_t = sobel_magnitude(transposed);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x)
            CHECK(mag.at(y, x, 0) == doctest::Approx(mag_t.at(x, y, 0)).epsilon(1e-13));
}

TEST_CASE("flying-pixel detection compares against the threshold") {
    const WarpConfig config;  // threshold 3
    for (auto m : detect_flying_pixels(constant_disparity(5, 5, 7.0), config))
        CHECK(m == 0);

    // Unit step: magnitude 4 > 3 flags the two columns adjacent to the jump.
    const auto flagged = detect_flying_pixels(column_step(5, 5, 1.0), config);
    DisparityMap probe = column_step(5, 5, 1.0);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
            CHECK(flagged[probe.index(y, x)] == ((x == 2 || x == 3) ? 1 : 0));

    // Half step: magnitude 2 < 3 flags nothing.
    for (auto m : detect_flying_pixels(column_step(5, 5, 0.5), config))
        CHECK(m == 0);

    WarpConfig bad;
    bad.sobel_threshold = 0.0;
    CHECK_THROWS_AS(detect_flying_pixels(constant_disparity(5, 5, 1.0), bad),
                    DomainError);
}

TEST_CASE("sharpening with an empty mask is a bit-exact no-op") {
    synthetic::UniformRng rng(32);
    DisparityMap disp(7, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 7; ++x)
            disp.set(y, x, rng.range(1.0, 30.0));
    const std::vector<std::uint8_t> empty(disp.d.size(), 0);
    const SharpenResult result = sharpen_disparity(disp, empty, WarpConfig{});
    CHECK(result.disp.d == disp.d);
    CHECK(result.passes == 0);
    CHECK(result.flying_before == 0);
    CHECK(result.flying_after == 0);
}

TEST_CASE("nearest-donor tie resolves toward the larger disparity") {
    DisparityMap disp(5, 1);
    const double values[5] = {10.0, 10.0, 6.0, 2.0, 2.0};
    for (int x = 0; x < 5; ++x)
        disp.set(0, x, values[x]);
    std::vector<std::uint8_t> mask(5, 0);
    mask[2] = 1;

    const SharpenResult result = sharpen_disparity(disp, mask, WarpConfig{});
    CHECK(result.disp.d[2] == 10.0);  // nearest tie, foreground wins
    for (int x : {0, 1, 3, 4})
        CHECK(result.disp.d[x] == values[x]);
}

TEST_CASE("sharpening is idempotent once converged") {
    const StereoCalib calib = synthetic::default_calib();
    const DisparityMap disp =
        depth_map_to_disparity(synthetic::two_plane_depth(24, 16, 2.0, 4.0), calib);
    const WarpConfig config;

    const SharpenResult once =
        sharpen_disparity(disp, detect_flying_pixels(disp, config), config);
    const SharpenResult twice = sharpen_disparity(
        once.disp, detect_flying_pixels(once.disp, config), config);
    CHECK(once.disp.d == twice.disp.d);
    CHECK(once.disp.valid == twice.disp.valid);
}

TEST_CASE("a fully flying row is left unchanged and counted") {
    DisparityMap disp = constant_disparity(5, 3, 4.0);
    std::vector<std::uint8_t> mask(disp.d.size(), 0);
    for (int x = 0; x < 5; ++x)
        mask[disp.index(1, x)] = 1;
    const SharpenResult result = sharpen_disparity(disp, mask, WarpConfig{});
    CHECK(result.stuck_rows == 1);
    CHECK(result.disp.d == disp.d);
}

TEST_CASE("sharpening never changes pixels outside the flying mask") {
    synthetic::UniformRng rng(33);
    DisparityMap disp(9, 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 9; ++x)
            disp.set(y, x, std::floor(rng.range(1.0, 30.0)));
    const std::vector<std::uint8_t> mask = detect_flying_pixels(disp, WarpConfig{});
    WarpConfig one_pass;
    one_pass.max_sharpen_passes = 1;
    const SharpenResult result = sharpen_disparity(disp, mask, one_pass);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (!mask[i])
            CHECK(result.disp.d[i] == disp.d[i]);
}

TEST_CASE("constant integer disparity shifts columns and leaves edge holes") {
    const int w = 10, h = 3, k = 4;
    const RasterImage left = synthetic::distinct_pixel_image(w, h, 3);
    const RasterImage out =
        forward_warp(left, constant_disparity(w, h, k), WarpConfig{});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x >= w - k) {
                CHECK(out.hole_mask[out.pixel(y, x)] == 1);
                for (int c = 0; c < 3; ++c)
                    CHECK(out.at(y, x, c) == 0.0);
            } else {
                CHECK(out.hole_mask[out.pixel(y, x)] == 0);
                for (int c = 0; c < 3; ++c)
                    CHECK(out.at(y, x, c) == left.at(y, x + k, c));
            }
        }
}

TEST_CASE("zero disparity is an identity copy with no holes") {
    const RasterImage left = synthetic::distinct_pixel_image(6, 4, 1);
    const RasterImage out =
        forward_warp(left, constant_disparity(6, 4, 0.0), WarpConfig{});
    CHECK(out.intensity == left.intensity);
    for (auto m : out.hole_mask)
        CHECK(m == 0);
}

TEST_CASE("two sources colliding on one target resolve to the larger disparity") {
    RasterImage left(3, 1, 1, 0.0);
    left.intensity = {0.1, 0.2, 0.3};
    DisparityMap disp(3, 1);
    disp.set(0, 1, 1.0);
    disp.set(0, 2, 2.0);
    // x=0 has no valid disparity and writes nothing.
    const RasterImage out = forward_warp(left, disp, WarpConfig{});
    CHECK(out.at(0, 0, 0) == 0.3);
    CHECK(out.hole_mask[out.pixel(0, 0)] == 0);
    CHECK(out.hole_mask[out.pixel(0, 1)] == 1);
    CHECK(out.hole_mask[out.pixel(0, 2)] == 1);
}

TEST_CASE("warp output matches a per-target collision simulation") {
    synthetic::UniformRng rng(34);
    const int w = 20, h = 6;
    const RasterImage left = synthetic::distinct_pixel_image(w, h, 1);
    DisparityMap disp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (rng.next() < 0.1)
                continue;  // leave some pixels invalid
            disp.set(y, x, std::floor(rng.range(0.0, 6.0)) + 0.25 * rng.next());
        }

    const RasterImage out = forward_warp(left, disp, WarpConfig{});
    for (int y = 0; y < h; ++y)
        for (int t = 0; t < w; ++t) {
            int src = -1;
            simulate_warp(left, disp, y, t, &src);
            CHECK(out.hole_mask[out.pixel(y, t)] == (src < 0 ? 1 : 0));
            if (src >= 0)
                CHECK(out.at(y, t, 0) == left.at(y, src, 0));
        }
}

TEST_CASE("zero-fill mode clears the hole mask") {
    const RasterImage left = synthetic::distinct_pixel_image(6, 2, 1);
    WarpConfig config;
    config.hole_fill = HoleFill::zero_fill;
    const RasterImage out =
        forward_warp(left, constant_disparity(6, 2, 2.0), config);
    for (auto m : out.hole_mask)
        CHECK(m == 0);
    CHECK(out.at(0, 4, 0) == 0.0);
    CHECK(out.at(0, 5, 0) == 0.0);
}

TEST_CASE("warp rejects mismatched shapes") {
    const RasterImage left = synthetic::distinct_pixel_image(6, 4, 1);
    CHECK_THROWS_AS(forward_warp(left, DisparityMap(5, 4), WarpConfig{}),
                    DimensionError);
}

TEST_CASE("constant depth synthesizes a pure shift") {
    const StereoCalib calib = synthetic::default_calib();  // f*b = 64
    const int k = 16;
    const RasterImage left = synthetic::distinct_pixel_image(32, 4, 1);
    const DepthMap depth = synthetic::constant_depth(32, 4, 64.0 / k);
    const RasterImage out = synthesize_right_view(left, depth, calib, WarpConfig{});
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 32; ++x) {
            if (x >= 32 - k)
                CHECK(out.hole_mask[out.pixel(y, x)] == 1);
            else
                CHECK(out.at(y, x, 0) == left.at(y, x + k, 0));
        }
}

TEST_CASE("image-level pipeline equals its parts bit-exactly") {
    const StereoCalib calib = synthetic::default_calib();
    const RasterImage left = synthetic::distinct_pixel_image(24, 16, 3);
    const DepthMap depth = synthetic::two_plane_depth(24, 16, 2.0, 4.0);
    const WarpConfig config;

    const DisparityMap disp = depth_map_to_disparity(depth, calib);
    const SharpenResult sharpened =
        sharpen_disparity(disp, detect_flying_pixels(disp, config), config);
    const RasterImage composed = forward_warp(left, sharpened.disp, config);

    const RasterImage direct = synthesize_right_view(left, depth, calib, config);
    CHECK(direct.intensity == composed.intensity);
    CHECK(direct.hole_mask == composed.hole_mask);
}

TEST_CASE("a near strip over a far background opens a disocclusion band") {
    // One row: background disparity 4, a strip of disparity 8 in the middle.
    // Behind the strip's right edge the background is occluded on one side and
    // re-exposed on the other, leaving a hole band as wide as the disparity
    // difference.
    const int w = 32, h = 3;
    RasterImage left = synthetic::distinct_pixel_image(w, h, 1);
    DisparityMap disp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            disp.set(y, x, (x >= 12 && x < 20) ? 8.0 : 4.0);

    const RasterImage out = forward_warp(left, disp, WarpConfig{});
    // Strip sources x in [12,20) land on targets [4,12); background sources
    // x in [20,32) land on [16,28). Targets [12,16) have no source at all.
    for (int t = 12; t < 16; ++t)
        CHECK(out.hole_mask[out.pixel(1, t)] == 1);
    for (int t = 4; t < 12; ++t) {
        CHECK(out.hole_mask[out.pixel(1, t)] == 0);
        CHECK(out.at(1, t, 0) == left.at(1, t + 8, 0));
    }
    for (int t = 16; t < 28; ++t)
        CHECK(out.at(1, t, 0) == left.at(1, t + 4, 0));
}
