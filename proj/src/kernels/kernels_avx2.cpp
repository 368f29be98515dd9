#include "pstereo/kernels.hpp"

#ifdef PSTEREO_HAVE_AVX2

#include <immintrin.h>

#include <cmath>

// AVX2 kernels. Element-wise entries keep the scalar reference's per-element
// operation order (separate mul and add, no FMA) so results are bit-identical
// to the scalar table. Reductions use four lane accumulators and a fixed
// combine; they match the scalar fold only to rounding error.

namespace pstereo::kernels {
namespace {

void madd_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        const __m256d vd = _mm256_loadu_pd(dst + i);
        _mm256_storeu_pd(dst + i, _mm256_add_pd(vd, _mm256_mul_pd(va, vb)));
    }
    for (; i < n; ++i)
        dst[i] += a[i] * b[i];
}

void mul_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(va, vb));
    }
    for (; i < n; ++i)
        dst[i] = a[i] * b[i];
}

void add_avx2(double* dst, const double* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vs = _mm256_loadu_pd(src + i);
        const __m256d vd = _mm256_loadu_pd(dst + i);
        _mm256_storeu_pd(dst + i, _mm256_add_pd(vd, vs));
    }
    for (; i < n; ++i)
        dst[i] += src[i];
}

void scale_avx2(double* dst, const double* src, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(vs, _mm256_loadu_pd(src + i)));
    for (; i < n; ++i)
        dst[i] = s * src[i];
}

void lerp2_avx2(double* dst, const double* a, const double* b, double wa,
                double wb, std::size_t n) {
    const __m256d vwa = _mm256_set1_pd(wa);
    const __m256d vwb = _mm256_set1_pd(wb);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ta = _mm256_mul_pd(vwa, _mm256_loadu_pd(a + i));
        const __m256d tb = _mm256_mul_pd(vwb, _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(ta, tb));
    }
    for (; i < n; ++i)
        dst[i] = (wa * a[i]) + (wb * b[i]);
}

double hsum(__m256d v) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double reduce_sum_avx2(const double* v, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(v + i));
    double s = hsum(acc);
    for (; i < n; ++i)
        s += v[i];
    return s;
}

double reduce_max_avx2(const double* v, std::size_t n) {
    if (n == 0)
        return -HUGE_VAL;
    double m = v[0];
    std::size_t i = 0;
    if (n >= 4) {
        __m256d acc = _mm256_loadu_pd(v);
        for (i = 4; i + 4 <= n; i += 4)
            acc = _mm256_max_pd(acc, _mm256_loadu_pd(v + i));
        alignas(32) double lane[4];
        _mm256_store_pd(lane, acc);
        m = lane[0];
        for (int k = 1; k < 4; ++k)
            m = lane[k] > m ? lane[k] : m;
    }
    for (; i < n; ++i)
        m = v[i] > m ? v[i] : m;
    return m;
}

double reduce_sq_dev_avx2(const double* v, double mean, std::size_t n) {
    const __m256d vm = _mm256_set1_pd(mean);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v + i), vm);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = v[i] - mean;
        s += d * d;
    }
    return s;
}

void sobel_row_interior_avx2(double* dst, const double* top, const double* mid,
                             const double* bot, std::size_t w) {
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t x = 1;
    for (; x + 4 + 1 <= w; x += 4) {
        const __m256d tl = _mm256_loadu_pd(top + x - 1);
        const __m256d tc = _mm256_loadu_pd(top + x);
        const __m256d tr = _mm256_loadu_pd(top + x + 1);
        const __m256d ml = _mm256_loadu_pd(mid + x - 1);
        const __m256d mr = _mm256_loadu_pd(mid + x + 1);
        const __m256d bl = _mm256_loadu_pd(bot + x - 1);
        const __m256d bc = _mm256_loadu_pd(bot + x);
        const __m256d br = _mm256_loadu_pd(bot + x + 1);
        const __m256d right = _mm256_add_pd(_mm256_add_pd(tr, _mm256_mul_pd(two, mr)), br);
        const __m256d left = _mm256_add_pd(_mm256_add_pd(tl, _mm256_mul_pd(two, ml)), bl);
        const __m256d gx = _mm256_sub_pd(right, left);
        const __m256d down = _mm256_add_pd(_mm256_add_pd(bl, _mm256_mul_pd(two, bc)), br);
        const __m256d up = _mm256_add_pd(_mm256_add_pd(tl, _mm256_mul_pd(two, tc)), tr);
        const __m256d gy = _mm256_sub_pd(down, up);
        const __m256d mag = _mm256_sqrt_pd(
            _mm256_add_pd(_mm256_mul_pd(gx, gx), _mm256_mul_pd(gy, gy)));
        _mm256_storeu_pd(dst + x, mag);
    }
    for (; x + 1 < w; ++x) {
        const double gx = ((top[x + 1] + 2.0 * mid[x + 1]) + bot[x + 1]) -
                          ((top[x - 1] + 2.0 * mid[x - 1]) + bot[x - 1]);
        const double gy = ((bot[x - 1] + 2.0 * bot[x]) + bot[x + 1]) -
                          ((top[x - 1] + 2.0 * top[x]) + top[x + 1]);
        dst[x] = std::sqrt(gx * gx + gy * gy);
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops table = {
        "avx2",
        madd_avx2,
        mul_avx2,
        add_avx2,
        scale_avx2,
        lerp2_avx2,
        reduce_sum_avx2,
        reduce_max_avx2,
        reduce_sq_dev_avx2,
        sobel_row_interior_avx2,
    };
    return table;
}

}  // namespace pstereo::kernels

#endif  // PSTEREO_HAVE_AVX2
