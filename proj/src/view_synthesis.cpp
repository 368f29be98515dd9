#include "pstereo/view_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pstereo/geometry.hpp"
#include "pstereo/kernels.hpp"

namespace pstereo {
namespace {

// Border pixel with replicate padding; same operation order as the row kernel.
double sobel_at_clamped(const DisparityMap& disp, int y, int x) {
    const int w = disp.width, h = disp.height;
    auto v = [&](int yy, int xx) {
        yy = std::clamp(yy, 0, h - 1);
        xx = std::clamp(xx, 0, w - 1);
        return disp.d[disp.index(yy, xx)];
    };
    const double gx = ((v(y - 1, x + 1) + 2.0 * v(y, x + 1)) + v(y + 1, x + 1)) -
                      ((v(y - 1, x - 1) + 2.0 * v(y, x - 1)) + v(y + 1, x - 1));
    const double gy = ((v(y + 1, x - 1) + 2.0 * v(y + 1, x)) + v(y + 1, x + 1)) -
                      ((v(y - 1, x - 1) + 2.0 * v(y - 1, x)) + v(y - 1, x + 1));
    return std::sqrt(gx * gx + gy * gy);
}

}  // namespace

FeatureMap sobel_magnitude(const DisparityMap& disp) {
    if (disp.width < 3 || disp.height < 3)
        throw DimensionError("sobel_magnitude: map must be at least 3x3, got " +
                             std::to_string(disp.width) + "x" +
                             std::to_string(disp.height));
    const int w = disp.width, h = disp.height;
    const auto& k = kernels::active();
    FeatureMap out(w, h, 1, 0.0);
    for (int y = 0; y < h; ++y) {
        const double* top = disp.d.data() + disp.index(std::max(y - 1, 0), 0);
        const double* mid = disp.d.data() + disp.index(y, 0);
        const double* bot = disp.d.data() + disp.index(std::min(y + 1, h - 1), 0);
        k.sobel_row_interior(out.data.data() + disp.index(y, 0), top, mid, bot,
                             static_cast<std::size_t>(w));
        out.data[disp.index(y, 0)] = sobel_at_clamped(disp, y, 0);
        out.data[disp.index(y, w - 1)] = sobel_at_clamped(disp, y, w - 1);
    }
    return out;
}

std::vector<std::uint8_t> detect_flying_pixels(const DisparityMap& disp,
                                               const WarpConfig& config) {
    if (!(config.sobel_threshold > 0.0))
        throw DomainError("detect_flying_pixels: sobel_threshold must be > 0");
    const FeatureMap mag = sobel_magnitude(disp);
    std::vector<std::uint8_t> mask(mag.data.size(), 0);
    for (std::size_t i = 0; i < mag.data.size(); ++i)
        mask[i] = mag.data[i] > config.sobel_threshold ? 1 : 0;
    return mask;
}

namespace {

// One replacement pass. Returns the number of pixels whose value changed.
std::size_t replace_flying(DisparityMap& disp, const std::vector<std::uint8_t>& mask,
                           int* stuck_rows) {
    const int w = disp.width, h = disp.height;
    const DisparityMap before = disp;
    std::size_t changed = 0;
    for (int y = 0; y < h; ++y) {
        const std::size_t row = before.index(y, 0);
        bool any_ok = false;
        for (int x = 0; x < w; ++x)
            if (!mask[row + x]) {
                any_ok = true;
                break;
            }
        if (!any_ok) {
            bool any_flying = false;
            for (int x = 0; x < w; ++x)
                if (mask[row + x])
                    any_flying = true;
            if (any_flying)
                ++(*stuck_rows);
            continue;
        }
        for (int x = 0; x < w; ++x) {
            if (!mask[row + x])
                continue;
            int left = -1, right = -1;
            for (int i = x - 1; i >= 0; --i)
                if (!mask[row + i]) {
                    left = i;
                    break;
                }
            for (int i = x + 1; i < w; ++i)
                if (!mask[row + i]) {
                    right = i;
                    break;
                }
            int donor;
            if (left < 0)
                donor = right;
            else if (right < 0)
                donor = left;
            else {
                const int dl = x - left, dr = right - x;
                if (dl < dr)
                    donor = left;
                else if (dr < dl)
                    donor = right;
                else
                    donor = before.d[row + left] >= before.d[row + right] ? left : right;
            }
            if (disp.d[row + x] != before.d[row + donor] ||
                disp.valid[row + x] != before.valid[row + donor])
                ++changed;
            disp.d[row + x] = before.d[row + donor];
            disp.valid[row + x] = before.valid[row + donor];
        }
    }
    return changed;
}

std::size_t count_set(const std::vector<std::uint8_t>& mask) {
    std::size_t n = 0;
    for (auto m : mask)
        n += m ? 1 : 0;
    return n;
}

}  // namespace

SharpenResult sharpen_disparity(const DisparityMap& disp,
                                const std::vector<std::uint8_t>& flying_mask,
                                const WarpConfig& config) {
    if (flying_mask.size() != disp.d.size())
        throw DimensionError("sharpen_disparity: mask size " +
                             std::to_string(flying_mask.size()) +
                             " does not match map size " +
                             std::to_string(disp.d.size()));
    SharpenResult result;
    result.disp = disp;
    result.flying_before = count_set(flying_mask);
    result.flying_after = result.flying_before;
    if (result.flying_before == 0)
        return result;

    const bool can_redetect = disp.width >= 3 && disp.height >= 3;
    std::vector<std::uint8_t> mask = flying_mask;
    std::size_t flying = result.flying_before;
    while (result.passes < config.max_sharpen_passes) {
        const std::size_t changed = replace_flying(result.disp, mask, &result.stuck_rows);
        ++result.passes;
        if (!can_redetect) {
            result.flying_after = 0;
            return result;
        }
        mask = detect_flying_pixels(result.disp, config);
        const std::size_t now_flying = count_set(mask);
        result.flying_after = now_flying;
        if (now_flying == 0 || changed == 0 || now_flying >= flying)
            return result;
        flying = now_flying;
    }
    return result;
}

RasterImage forward_warp(const RasterImage& left, const DisparityMap& disp,
                         const WarpConfig& config) {
    if (left.width != disp.width || left.height != disp.height)
        throw DimensionError("forward_warp: image " + std::to_string(left.width) +
                             "x" + std::to_string(left.height) +
                             " does not match disparity " +
                             std::to_string(disp.width) + "x" +
                             std::to_string(disp.height));
    const int w = left.width, h = left.height, c = left.channels;
    RasterImage out(w, h, c, 0.0);
    std::vector<double> best_d(w);
    std::vector<int> best_x(w);
    for (int y = 0; y < h; ++y) {
        std::fill(best_d.begin(), best_d.end(), -HUGE_VAL);
        std::fill(best_x.begin(), best_x.end(), -1);
        const std::size_t row = disp.index(y, 0);
        for (int x = 0; x < w; ++x) {
            if (!disp.valid[row + x])
                continue;
            const double d = disp.d[row + x];
            const long t = std::lround(static_cast<double>(x) - d);
            if (t < 0 || t >= w)
                continue;
            // Foreground wins; equal disparities resolve to the larger column.
            if (d > best_d[t] || (d == best_d[t] && x > best_x[t])) {
                best_d[t] = d;
                best_x[t] = x;
            }
        }
        for (int t = 0; t < w; ++t) {
            if (best_x[t] < 0) {
                out.hole_mask[out.pixel(y, t)] = 1;
                continue;
            }
            for (int ch = 0; ch < c; ++ch)
                out.at(y, t, ch) = left.at(y, best_x[t], ch);
        }
    }
    if (config.hole_fill == HoleFill::zero_fill)
        std::fill(out.hole_mask.begin(), out.hole_mask.end(), 0);
    return out;
}

RasterImage synthesize_right_view(const RasterImage& left, const DepthMap& depth,
                                  const StereoCalib& calib, const WarpConfig& config) {
    if (left.width != depth.width || left.height != depth.height)
        throw DimensionError("synthesize_right_view: image does not match depth map");
    const DisparityMap disp = depth_map_to_disparity(depth, calib);
    const std::vector<std::uint8_t> flying = detect_flying_pixels(disp, config);
    const SharpenResult sharpened = sharpen_disparity(disp, flying, config);
    return forward_warp(left, sharpened.disp, config);
}

}  // namespace pstereo
