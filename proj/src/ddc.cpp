#include "pstereo/ddc.hpp"

#include <algorithm>
#include <string>

#include "pstereo/kernels.hpp"

namespace pstereo {
namespace {

void require_same_shape(const FeatureMap& a, const FeatureMap& b, const char* op) {
    if (a.width < 1 || a.height < 1 || a.channels < 1)
        throw DimensionError(std::string(op) + ": empty feature map");
    if (!a.same_shape(b))
        throw DimensionError(std::string(op) + ": shape mismatch " +
                             std::to_string(a.width) + "x" + std::to_string(a.height) +
                             "x" + std::to_string(a.channels) + " vs " +
                             std::to_string(b.width) + "x" + std::to_string(b.height) +
                             "x" + std::to_string(b.channels));
}

// Applies fn(dst_span, src_span, n) for every row segment where the map
// shifted by (gy, gx) overlaps the unshifted map.
template <typename Fn>
void for_each_shift_span(const FeatureMap& shape, GridShift g, Fn&& fn) {
    const int w = shape.width, h = shape.height, c = shape.channels;
    const int y0 = std::max(0, -g.g_i), y1 = std::min(h, h - g.g_i);
    const int x0 = std::max(0, -g.g_j), x1 = std::min(w, w - g.g_j);
    if (x1 <= x0)
        return;
    const std::size_t n = static_cast<std::size_t>(x1 - x0) * c;
    for (int y = y0; y < y1; ++y) {
        const std::size_t dst = shape.index(y, x0, 0);
        const std::size_t src = shape.index(y + g.g_i, x0 + g.g_j, 0);
        fn(dst, src, n);
    }
}

}  // namespace

FeatureMap normalize_disparity(const DisparityMap& disp,
                               const DisparityNormalization& norm) {
    if (!(norm.sigma > 0.0))
        throw DomainError("normalize_disparity: sigma must be > 0");
    if (disp.width < 1 || disp.height < 1)
        throw DimensionError("normalize_disparity: empty disparity map");
    FeatureMap out(disp.width, disp.height, 1, 0.0);
    for (std::size_t i = 0; i < disp.d.size(); ++i)
        if (disp.valid[i])
            out.data[i] = (disp.d[i] - norm.mu) / norm.sigma;
    return out;
}

FeatureMap broadcast_channels(const FeatureMap& single, int channels) {
    if (single.channels != 1)
        throw DimensionError("broadcast_channels: input must have one channel");
    if (channels < 1)
        throw DimensionError("broadcast_channels: channel count must be >= 1");
    FeatureMap out(single.width, single.height, channels, 0.0);
    for (int y = 0; y < single.height; ++y)
        for (int x = 0; x < single.width; ++x) {
            const double v = single.at(y, x, 0);
            for (int c = 0; c < channels; ++c)
                out.at(y, x, c) = v;
        }
    return out;
}

DisparityMap downsample_disparity(const DisparityMap& disp, int stride) {
    if (stride < 1)
        throw DomainError("downsample_disparity: stride must be >= 1");
    if (disp.width < 1 || disp.height < 1)
        throw DimensionError("downsample_disparity: empty disparity map");
    const int ow = (disp.width + stride - 1) / stride;
    const int oh = (disp.height + stride - 1) / stride;
    DisparityMap out(ow, oh);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double sum = 0.0;
            int count = 0;
            const int yb = oy * stride, xb = ox * stride;
            const int ye = std::min(yb + stride, disp.height);
            const int xe = std::min(xb + stride, disp.width);
            for (int y = yb; y < ye; ++y)
                for (int x = xb; x < xe; ++x)
                    if (disp.valid[disp.index(y, x)]) {
                        sum += disp.d[disp.index(y, x)];
                        ++count;
                    }
            if (count > 0)
                out.set(oy, ox, sum / count);
        }
    }
    return out;
}

FeatureMap ddc_forward_naive(const FeatureMap& left, const FeatureMap& disp_feat) {
    require_same_shape(left, disp_feat, "ddc_forward_naive");
    const int w = left.width, h = left.height, c = left.channels;
    FeatureMap out(w, h, c, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (const GridShift& g : kGridShifts) {
                    const int u = y + g.g_i, v = x + g.g_j;
                    if (u < 0 || u >= h || v < 0 || v >= w)
                        continue;  // zero padding
                    acc += disp_feat.at(u, v, ch) * left.at(u, v, ch);
                }
                out.at(y, x, ch) = acc * (1.0 / 9.0);
            }
        }
    }
    return out;
}

FeatureMap ddc_forward_gridshift(const FeatureMap& left, const FeatureMap& disp_feat) {
    require_same_shape(left, disp_feat, "ddc_forward_gridshift");
    const auto& k = kernels::active();
    FeatureMap out(left.width, left.height, left.channels, 0.0);
    for (const GridShift& g : kGridShifts)
        for_each_shift_span(out, g, [&](std::size_t dst, std::size_t src, std::size_t n) {
            k.madd(out.data.data() + dst, disp_feat.data.data() + src,
                   left.data.data() + src, n);
        });
    k.scale(out.data.data(), out.data.data(), 1.0 / 9.0, out.data.size());
    return out;
}

DdcGradients ddc_backward(const FeatureMap& grad_out, const FeatureMap& left,
                          const FeatureMap& disp_feat) {
    require_same_shape(left, disp_feat, "ddc_backward");
    require_same_shape(grad_out, left, "ddc_backward");
    const auto& k = kernels::active();

    // 3x3 box sum of grad_out with zero padding, accumulated in grid order.
    FeatureMap box(grad_out.width, grad_out.height, grad_out.channels, 0.0);
    for (const GridShift& g : kGridShifts)
        for_each_shift_span(box, g, [&](std::size_t dst, std::size_t src, std::size_t n) {
            k.add(box.data.data() + dst, grad_out.data.data() + src, n);
        });

    DdcGradients grads;
    grads.grad_left = FeatureMap(left.width, left.height, left.channels, 0.0);
    grads.grad_disp_feat = FeatureMap(left.width, left.height, left.channels, 0.0);
    const std::size_t n = box.data.size();
    k.mul(grads.grad_left.data.data(), disp_feat.data.data(), box.data.data(), n);
    k.scale(grads.grad_left.data.data(), grads.grad_left.data.data(), 1.0 / 9.0, n);
    k.mul(grads.grad_disp_feat.data.data(), left.data.data(), box.data.data(), n);
    k.scale(grads.grad_disp_feat.data.data(), grads.grad_disp_feat.data.data(),
            1.0 / 9.0, n);
    return grads;
}

FeatureMap generate_virtual_right_features(const FeatureMap& left,
                                           const DisparityMap& disp,
                                           const DisparityNormalization& norm) {
    if (disp.width != left.width || disp.height != left.height)
        throw DimensionError(
            "generate_virtual_right_features: disparity resolution " +
            std::to_string(disp.width) + "x" + std::to_string(disp.height) +
            " does not match feature resolution " + std::to_string(left.width) +
            "x" + std::to_string(left.height));
    const FeatureMap disp_feat =
        broadcast_channels(normalize_disparity(disp, norm), left.channels);
    return ddc_forward_gridshift(left, disp_feat);
}

}  // namespace pstereo
