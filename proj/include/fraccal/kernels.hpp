#pragma once

#include <cstddef>
#include <string>

// Data-parallel arithmetic kernels used by the dense inner loops (inner
// products, vector updates, pointwise products, matrix-vector products).
// Each kernel has a scalar reference implementation and, where the build
// target supports it, an AVX2/FMA (x86-64) or NEON (aarch64) variant.
// The active variant is selected once at runtime from CPU capabilities;
// FRACCAL_KERNEL=scalar|avx2|neon overrides the choice (used by the
// equivalence tests).

namespace fraccal::kern {

struct Ops {
    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // out[i] = x[i] * y[i]
    void (*mul)(const double* x, const double* y, double* out, std::size_t n);
    // x[i] *= a
    void (*scale)(double a, double* x, std::size_t n);
    // y = A x for column-major A (m rows, n cols, leading dimension lda)
    void (*gemv)(std::size_t m, std::size_t n, const double* a, std::size_t lda,
                 const double* x, double* y);
    const char* name;
};

// Scalar reference kernels (always available; the baseline the SIMD
// variants are equivalence-tested against).
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void mul(const double* x, const double* y, double* out, std::size_t n);
void scale(double a, double* x, std::size_t n);
void gemv(std::size_t m, std::size_t n, const double* a, std::size_t lda,
          const double* x, double* y);
extern const Ops ops;
}  // namespace scalar

#if defined(__x86_64__)
namespace avx2 {
extern const Ops ops;  // compiled with -mavx2 -mfma; dispatch checks cpuid
}
#endif
#if defined(__aarch64__)
namespace neon {
extern const Ops ops;
}
#endif

// Active kernel set, chosen on first use.
const Ops& active();

// Names of all kernel sets usable on this machine (for tests/reporting).
std::string active_name();

// Convenience wrappers through the active dispatch table.
inline double dot(const double* x, const double* y, std::size_t n) {
    return active().dot(x, y, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
    active().axpy(a, x, y, n);
}
inline void mul(const double* x, const double* y, double* out, std::size_t n) {
    active().mul(x, y, out, n);
}
inline void scale(double a, double* x, std::size_t n) {
    active().scale(a, x, n);
}
inline void gemv(std::size_t m, std::size_t n, const double* a, std::size_t lda,
                 const double* x, double* y) {
    active().gemv(m, n, a, lda, x, y);
}

}  // namespace fraccal::kern
