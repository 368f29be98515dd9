#pragma once

#include <cstddef>

namespace pstereo::kernels {

// Dense inner-loop primitives behind the grid operations. Every entry has a
// scalar reference implementation and, on x86-64, an AVX2 variant selected at
// runtime. Element-wise kernels are bit-exact across variants (same per-element
// operation order, no FMA contraction); reductions may differ in association
// and agree only to rounding error.
struct Ops {
    const char* name;

    // dst[i] += a[i] * b[i]
    void (*madd)(double* dst, const double* a, const double* b, std::size_t n);
    // dst[i] = a[i] * b[i]
    void (*mul)(double* dst, const double* a, const double* b, std::size_t n);
    // dst[i] += src[i]
    void (*add)(double* dst, const double* src, std::size_t n);
    // dst[i] = s * src[i]
    void (*scale)(double* dst, const double* src, double s, std::size_t n);
    // dst[i] = wa * a[i] + wb * b[i]
    void (*lerp2)(double* dst, const double* a, const double* b, double wa,
                  double wb, std::size_t n);
    double (*reduce_sum)(const double* v, std::size_t n);
    double (*reduce_max)(const double* v, std::size_t n);
    // sum of (v[i] - mean)^2
    double (*reduce_sq_dev)(const double* v, double mean, std::size_t n);
    // Sobel gradient magnitude for interior columns x in [1, w-2] of one row.
    // top/mid/bot point at column 0 of rows y-1, y, y+1; dst at column 0 of the
    // output row. Border columns are the caller's business.
    void (*sobel_row_interior)(double* dst, const double* top, const double* mid,
                               const double* bot, std::size_t w);
};

const Ops& scalar_ops();

// True when the running CPU supports the AVX2 variant (and it was compiled in).
bool avx2_supported();

// AVX2 table. Only meaningful when avx2_supported(); calling the entries on an
// unsupported CPU is undefined.
const Ops& avx2_ops();

enum class Backend { auto_detect, scalar, avx2 };

// Selects the kernel table used by all grid operations. auto_detect picks the
// widest supported variant. Throws DomainError when forcing an unavailable
// backend.
void select(Backend b);

// Active table. The first call honors the PSTEREO_KERNELS environment variable
// ("scalar", "avx2", "auto") before falling back to auto-detection.
const Ops& active();

}  // namespace pstereo::kernels
