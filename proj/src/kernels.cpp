#include "fraccal/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <mutex>

namespace fraccal::kern {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
    // Four independent accumulators; the SIMD variants reduce in the same
    // order so results agree closely across paths.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += x[i] * y[i];
        s1 += x[i + 1] * y[i + 1];
        s2 += x[i + 2] * y[i + 2];
        s3 += x[i + 3] * y[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] * y[i];
    return ((s0 + s1) + (s2 + s3)) + tail;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void scale(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void gemv(std::size_t m, std::size_t n, const double* a, std::size_t lda,
          const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) y[i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) axpy(x[j], a + j * lda, y, m);
}

const Ops ops = {dot, axpy, mul, scale, gemv, "scalar"};

}  // namespace scalar

namespace {

const Ops* select() {
    const char* env = std::getenv("FRACCAL_KERNEL");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return &scalar::ops;
#if defined(__x86_64__)
        if (std::strcmp(env, "avx2") == 0 &&
            __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
            return &avx2::ops;
#endif
#if defined(__aarch64__)
        if (std::strcmp(env, "neon") == 0) return &neon::ops;
#endif
        return &scalar::ops;  // unknown or unsupported name: safe fallback
    }
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return &avx2::ops;
#endif
#if defined(__aarch64__)
    return &neon::ops;
#endif
    return &scalar::ops;
}

}  // namespace

const Ops& active() {
    static const Ops* chosen = select();
    return *chosen;
}

std::string active_name() { return active().name; }

}  // namespace fraccal::kern
