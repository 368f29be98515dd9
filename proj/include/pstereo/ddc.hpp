#pragma once

#include <array>

#include "pstereo/core_types.hpp"

namespace pstereo {

// Affine normalization applied to raw disparities before they drive the
// dynamic convolution. Defaults are training-set statistics.
struct DisparityNormalization {
    double mu = 33.20;
    double sigma = 15.91;
};

// One whole-map window shift: g_i rows, g_j columns, each in {-1, 0, 1}.
struct GridShift {
    int g_i;
    int g_j;
};

// The nine shifts in the fixed per-output-element summation order
// (-1,-1), (-1,0), ..., (1,1). Both forward paths accumulate in this order so
// they can be compared bit-exactly.
inline constexpr std::array<GridShift, 9> kGridShifts = {{
    {-1, -1}, {-1, 0}, {-1, 1},
    {0, -1},  {0, 0},  {0, 1},
    {1, -1},  {1, 0},  {1, 1},
}};

// (d - mu) / sigma per valid pixel; invalid pixels map to 0. Output is a
// single-channel feature map. Throws DomainError unless sigma > 0.
FeatureMap normalize_disparity(const DisparityMap& disp,
                               const DisparityNormalization& norm);

// Replicates a single-channel map across `channels` channels.
FeatureMap broadcast_channels(const FeatureMap& single, int channels);

// Reduces a disparity map to feature resolution by averaging the valid pixels
// of each stride x stride cell (output dims are ceil(in/stride)). Cells with
// no valid pixel stay invalid.
DisparityMap downsample_disparity(const DisparityMap& disp, int stride);

// Disparity-wise dynamic convolution, sliding-window form: each output element
// is 1/9 times the sum over its 3x3 neighborhood of the per-channel product of
// the two maps, with zero padding at the borders. This is the reference path.
FeatureMap ddc_forward_naive(const FeatureMap& left, const FeatureMap& disp_feat);

// Same operation as nine whole-map shifted Hadamard products accumulated in
// kGridShifts order. Bit-identical to ddc_forward_naive; this is the fast path
// the dispatch kernels accelerate.
FeatureMap ddc_forward_gridshift(const FeatureMap& left, const FeatureMap& disp_feat);

struct DdcGradients {
    FeatureMap grad_left;       // dL/d(left)
    FeatureMap grad_disp_feat;  // dL/d(disp_feat)
};

// Analytic adjoint of the forward pass for the scalar loss
// L = sum(grad_out * forward(left, disp_feat)). The op is bilinear, so each
// gradient is 1/9 times the 3x3 box sum of grad_out scaled element-wise by the
// other input.
DdcGradients ddc_backward(const FeatureMap& grad_out, const FeatureMap& left,
                          const FeatureMap& disp_feat);

// Full feature-level pipeline: normalize the disparity map (already at feature
// resolution), replicate it across the left map's channels, and run the
// grid-shifting convolution.
FeatureMap generate_virtual_right_features(const FeatureMap& left,
                                           const DisparityMap& disp,
                                           const DisparityNormalization& norm);

}  // namespace pstereo
