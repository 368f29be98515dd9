#include <cmath>

#include "pstereo/kernels.hpp"

// Scalar reference kernels. These define the semantics the SIMD variants must
// reproduce: element-wise ops round each multiply and add separately (builds
// use -ffp-contract=off, so no FMA contraction), reductions fold left to right.

namespace pstereo::kernels {
namespace {

void madd_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] += a[i] * b[i];
}

void mul_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = a[i] * b[i];
}

void add_scalar(double* dst, const double* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] += src[i];
}

void scale_scalar(double* dst, const double* src, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = s * src[i];
}

void lerp2_scalar(double* dst, const double* a, const double* b, double wa,
                  double wb, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = (wa * a[i]) + (wb * b[i]);
}

double reduce_sum_scalar(const double* v, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += v[i];
    return s;
}

double reduce_max_scalar(const double* v, std::size_t n) {
    if (n == 0)
        return -HUGE_VAL;
    double m = v[0];
    for (std::size_t i = 1; i < n; ++i)
        m = v[i] > m ? v[i] : m;
    return m;
}

double reduce_sq_dev_scalar(const double* v, double mean, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = v[i] - mean;
        s += d * d;
    }
    return s;
}

void sobel_row_interior_scalar(double* dst, const double* top, const double* mid,
                               const double* bot, std::size_t w) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
        const double gx = ((top[x + 1] + 2.0 * mid[x + 1]) + bot[x + 1]) -
                          ((top[x - 1] + 2.0 * mid[x - 1]) + bot[x - 1]);
        const double gy = ((bot[x - 1] + 2.0 * bot[x]) + bot[x + 1]) -
                          ((top[x - 1] + 2.0 * top[x]) + top[x + 1]);
        dst[x] = std::sqrt(gx * gx + gy * gy);
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table = {
        "scalar",
        madd_scalar,
        mul_scalar,
        add_scalar,
        scale_scalar,
        lerp2_scalar,
        reduce_sum_scalar,
        reduce_max_scalar,
        reduce_sq_dev_scalar,
        sobel_row_interior_scalar,
    };
    return table;
}

}  // namespace pstereo::kernels
