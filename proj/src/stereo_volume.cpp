#include "pstereo/stereo_volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "pstereo/geometry.hpp"
#include "pstereo/kernels.hpp"

namespace pstereo {

ScoreVolume::ScoreVolume(int w, int h, int nd, double fill)
    : width(w), height(h), levels(nd) {
    if (w < 1 || h < 1 || nd < 1)
        throw DimensionError("ScoreVolume: dimensions must be >= 1");
    scores.assign(static_cast<std::size_t>(w) * h * nd, fill);
}

FeatureMap reproject_right_at(const FeatureMap& right, double offset) {
    if (right.width < 1 || right.height < 1 || right.channels < 1)
        throw DimensionError("reproject_right: empty feature map");
    if (!std::isfinite(offset))
        throw DomainError("reproject_right: offset must be finite");
    const int w = right.width, h = right.height, c = right.channels;
    const auto& k = kernels::active();
    FeatureMap out(w, h, c, 0.0);

    // Source column u - offset sits between integer columns u + fs and
    // u + fs + 1 with a constant fractional weight.
    const double shift = -offset;
    const double fs_d = std::floor(shift);
    const long fs = static_cast<long>(fs_d);
    const double frac = shift - fs_d;
    const double wa = 1.0 - frac, wb = frac;

    const long both0 = std::max(0L, -fs);
    const long both1 = std::min<long>(w, w - 1 - fs);  // tap B stays in bounds
    const long only_a = w - 1 - fs;                    // tap B falls off the right edge
    const long only_b = -fs - 1;                       // tap A falls off the left edge

    for (int y = 0; y < h; ++y) {
        const double* src = right.data.data() + right.index(y, 0, 0);
        double* dst = out.data.data() + out.index(y, 0, 0);
        if (both1 > both0)
            k.lerp2(dst + both0 * c, src + (both0 + fs) * c, src + (both0 + fs + 1) * c,
                    wa, wb, static_cast<std::size_t>(both1 - both0) * c);
        if (only_a >= 0 && only_a < w)
            k.scale(dst + only_a * c, src + (only_a + fs) * c, wa,
                    static_cast<std::size_t>(c));
        if (only_b >= 0 && only_b < w)
            k.scale(dst + only_b * c, src + (only_b + fs + 1) * c, wb,
                    static_cast<std::size_t>(c));
    }
    return out;
}

FeatureMap reproject_right(const FeatureMap& right, const StereoCalib& calib, int w) {
    return reproject_right_at(right, reprojection_offset(w, calib));
}

CostVolume build_stereo_volume(const FeatureMap& left, const FeatureMap& right,
                               const StereoCalib& calib, bool zero_offset) {
    calib.validate();
    if (!left.same_shape(right))
        throw DimensionError("build_stereo_volume: feature shapes differ");
    if (left.width < 1)
        throw DimensionError("build_stereo_volume: empty feature maps");
    const int w = left.width, h = left.height, c = left.channels;
    const int nd = calib.num_depth_levels;
    CostVolume vol(w, h, nd, 2 * c);
    for (int lvl = 0; lvl < nd; ++lvl) {
        const FeatureMap reproj =
            zero_offset ? reproject_right_at(right, 0.0)
                        : reproject_right(right, calib, lvl);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double* cell = vol.data.data() + vol.index(y, x, lvl, 0);
                std::memcpy(cell, left.data.data() + left.index(y, x, 0),
                            sizeof(double) * c);
                std::memcpy(cell + c, reproj.data.data() + reproj.index(y, x, 0),
                            sizeof(double) * c);
            }
        }
    }
    return vol;
}

DepthDistribution depth_distribution(const ScoreVolume& scores) {
    if (scores.width < 1 || scores.height < 1 || scores.levels < 1)
        throw DimensionError("depth_distribution: empty score volume");
    if (!all_finite(scores.scores))
        throw DomainError("depth_distribution: scores must be finite");
    const auto& k = kernels::active();
    DepthDistribution dist;
    dist.width = scores.width;
    dist.height = scores.height;
    dist.levels = scores.levels;
    dist.p.resize(scores.scores.size());
    const std::size_t nd = static_cast<std::size_t>(scores.levels);
    const std::size_t pixels = scores.scores.size() / nd;
    for (std::size_t px = 0; px < pixels; ++px) {
        const double* s = scores.scores.data() + px * nd;
        double* p = dist.p.data() + px * nd;
        const double m = k.reduce_max(s, nd);
        for (std::size_t i = 0; i < nd; ++i)
            p[i] = std::exp(s[i] - m);
        const double inv = 1.0 / k.reduce_sum(p, nd);
        k.scale(p, p, inv, nd);
    }
    return dist;
}

DepthMap soft_depth_regression(const DepthDistribution& dist, const StereoCalib& calib) {
    calib.validate();
    if (dist.levels != calib.num_depth_levels)
        throw DimensionError("soft_depth_regression: distribution has " +
                             std::to_string(dist.levels) + " levels, calib expects " +
                             std::to_string(calib.num_depth_levels));
    std::vector<double> level_depth(dist.levels);
    for (int w = 0; w < dist.levels; ++w)
        level_depth[w] = depth_level(w, calib);
    DepthMap out(dist.width, dist.height);
    const std::size_t nd = static_cast<std::size_t>(dist.levels);
    const std::size_t pixels = dist.p.size() / nd;
    for (std::size_t px = 0; px < pixels; ++px) {
        const double* p = dist.p.data() + px * nd;
        double z = 0.0;
        for (std::size_t i = 0; i < nd; ++i)
            z += p[i] * level_depth[i];
        out.z[px] = z;
        out.valid[px] = 1;
    }
    return out;
}

namespace {

double smooth_l1(double r) {
    const double a = std::fabs(r);
    return a <= 1.0 ? 0.5 * r * r : a - 0.5;
}

}  // namespace

double depth_loss(const DepthMap& pred, const DepthMap& gt, std::size_t* n_valid) {
    if (!pred.same_shape(gt))
        throw DimensionError("depth_loss: map shapes differ");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.z.size(); ++i) {
        if (pred.valid[i] && gt.valid[i]) {
            sum += smooth_l1(pred.z[i] - gt.z[i]);
            ++n;
        }
    }
    if (n_valid != nullptr)
        *n_valid = n;
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double combined_loss(double l_d, double l_depth, double l_kd, double lambda_d,
                     double lambda_dep, double lambda_kd, bool strict_ablation) {
    const double vals[] = {l_d, l_depth, l_kd, lambda_d, lambda_dep, lambda_kd};
    for (double v : vals)
        if (!std::isfinite(v))
            throw DomainError("combined_loss: all inputs must be finite");
    if (strict_ablation && lambda_dep != 0.0 && lambda_dep != 1.0)
        throw DomainError("combined_loss: lambda_dep must be 0 or 1 in strict mode");
    return lambda_d * l_d + lambda_dep * l_depth + lambda_kd * l_kd;
}

}  // namespace pstereo
