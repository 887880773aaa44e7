#if defined(__aarch64__)

#include <arm_neon.h>

#include "fraccal/kernels.hpp"

// NEON kernels (baseline on aarch64). Two-lane float64x2 with two vector
// accumulators to mirror the scalar reference's reduction order.

namespace fraccal::kern::neon {

double dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc01 = vdupq_n_f64(0.0);
    float64x2_t acc23 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc01 = vfmaq_f64(acc01, vld1q_f64(x + i), vld1q_f64(y + i));
        acc23 = vfmaq_f64(acc23, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double head = (vgetq_lane_f64(acc01, 0) + vgetq_lane_f64(acc01, 1)) +
                  (vgetq_lane_f64(acc23, 0) + vgetq_lane_f64(acc23, 1));
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] * y[i];
    return head + tail;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    float64x2_t av = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t yv = vld1q_f64(y + i);
        vst1q_f64(y + i, vfmaq_f64(yv, av, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void scale(double a, double* x, std::size_t n) {
    float64x2_t av = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(x + i, vmulq_f64(av, vld1q_f64(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void gemv(std::size_t m, std::size_t n, const double* a, std::size_t lda,
          const double* x, double* y) {
    for (std::size_t i = 0; i < m; ++i) y[i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) axpy(x[j], a + j * lda, y, m);
}

const Ops ops = {dot, axpy, mul, scale, gemv, "neon"};

}  // namespace fraccal::kern::neon

#endif  // __aarch64__
