#include <cstdlib>
#include <cstring>

#include "pstereo/errors.hpp"
#include "pstereo/kernels.hpp"

namespace pstereo::kernels {
namespace {

const Ops* g_active = nullptr;

const Ops& detect() {
#ifdef PSTEREO_HAVE_AVX2
    if (avx2_supported())
        return avx2_ops();
#endif
    return scalar_ops();
}

const Ops& from_env() {
    const char* env = std::getenv("PSTEREO_KERNELS");
    if (env == nullptr || std::strcmp(env, "auto") == 0)
        return detect();
    if (std::strcmp(env, "scalar") == 0)
        return scalar_ops();
    if (std::strcmp(env, "avx2") == 0) {
        if (!avx2_supported())
            throw DomainError("PSTEREO_KERNELS=avx2 but AVX2 is not available on this CPU");
        return avx2_ops();
    }
    throw DomainError(std::string("unknown PSTEREO_KERNELS value: ") + env);
}

}  // namespace

bool avx2_supported() {
#ifdef PSTEREO_HAVE_AVX2
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

#ifndef PSTEREO_HAVE_AVX2
const Ops& avx2_ops() {
    throw DomainError("AVX2 kernels were not compiled into this build");
}
#endif

void select(Backend b) {
    switch (b) {
    case Backend::auto_detect:
        g_active = &from_env();
        break;
    case Backend::scalar:
        g_active = &scalar_ops();
        break;
    case Backend::avx2:
        if (!avx2_supported())
            throw DomainError("AVX2 backend requested but not available");
        g_active = &avx2_ops();
        break;
    }
}

const Ops& active() {
    if (g_active == nullptr)
        g_active = &from_env();
    return *g_active;
}

}  // namespace pstereo::kernels
