#pragma once

// Test-only quadrature oracle for the pointwise 1D fractional Laplacian.
// Independent of the library implementation: it integrates the singular
// kernel directly with tanh-sinh quadrature and derives the kernel
// normalization from the Fourier symbol |xi|^(2s) instead of reusing the
// library's Gamma-function constant.

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

// Tanh-sinh quadrature on (a, b). Handles integrable endpoint
// singularities; halves the step until successive levels agree to reltol.
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                        double reltol = 1e-13) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const double tmax = 6.5;  // abscissas beyond this collapse onto the endpoints

    auto node = [&](double t, double& x, double& w) {
        double st = std::sinh(t);
        double c = std::cosh(0.5 * M_PI * st);
        x = mid + half * std::tanh(0.5 * M_PI * st);
        w = half * 0.5 * M_PI * std::cosh(t) / (c * c);
    };

    double x, w;
    node(0.0, x, w);
    double sum = f(x) * w;
    for (double t = 1.0; t <= tmax; t += 1.0) {
        node(t, x, w);
        if (x > a && x < b) sum += f(x) * w;
        node(-t, x, w);
        if (x > a && x < b) sum += f(x) * w;
    }
    double dt = 1.0;
    double result = sum;
    for (int level = 0; level < 10; ++level) {
        double add = 0.0;
        for (double t = 0.5 * dt; t <= tmax; t += dt) {
            node(t, x, w);
            if (x > a && x < b) add += f(x) * w;
            node(-t, x, w);
            if (x > a && x < b) add += f(x) * w;
        }
        double prev = result * dt;
        sum += add;
        dt *= 0.5;
        result = sum;
        double cur = result * dt;
        if (level > 2 && std::abs(cur - prev) <= reltol * std::abs(cur) + 1e-300)
            return cur;
    }
    return result * dt;
}

// Kernel normalization from the symbol: c(s) = 1 / int_0^inf 2(1-cos t) t^(-1-2s) dt,
// so that c(s) * int (2u(x) - u(x+y) - u(x-y)) |y|^(-1-2s) dy has symbol |xi|^(2s).
inline double kernel_constant(double s) {
    auto g = [&](double t) {
        double half = std::sin(0.5 * t);  // 2(1 - cos t) = 4 sin^2(t/2), no cancellation
        return 4.0 * half * half * std::pow(t, -1.0 - 2.0 * s);
    };
    double total = tanh_sinh(g, 0.0, 1.0);
    const double T = 400.0 * M_PI;
    double a = 1.0;
    while (a < T) {
        double b = std::min(a + 16.0 * M_PI, T);
        total += tanh_sinh(g, a, b);
        a = b;
    }
    // Tail: 2 int_T^inf t^(-1-2s) dt minus 2 int_T^inf cos(t) t^(-1-2s) dt;
    // two integrations by parts leave a remainder below (1+2s)(2+2s) T^(-3-2s).
    double gT = std::pow(T, -1.0 - 2.0 * s);
    double gpT = -(1.0 + 2.0 * s) * std::pow(T, -2.0 - 2.0 * s);
    total += std::pow(T, -2.0 * s) / s - 2.0 * (-std::sin(T) * gT - std::cos(T) * gpT);
    return 1.0 / total;
}

// Cancellation-free evaluation of u(x0) - u(x0 + e) for u(x) = (1-x^2)_+^s.
// Written through expm1/log1p so the value stays accurate where it is
// O(e^2), which a direct difference of pow() calls is not.
inline double getoor_halfdiff(double s, double x0, double e) {
    double A = (1.0 - x0) * (1.0 + x0);  // 1 - x0^2 > 0 for interior x0
    double r = e * (2.0 * x0 + e) / A;   // u(x0+e) = A^s (1 - r)^s
    double As = std::pow(A, s);
    if (r >= 1.0) return As;             // x0 + e outside the support
    return -As * std::expm1(s * std::log1p(-r));
}

// (-Delta)^s (1-x^2)_+^s at an interior point x0, via the symmetrized
// principal-value integral: pieces split at the kink points of
// y -> 2u(x0) - u(x0+y) - u(x0-y), plus the exact power-law tail where u
// vanishes identically.
inline double getoor_reference(double s, double x0) {
    auto integrand = [&](double y) {
        double d = getoor_halfdiff(s, x0, y) + getoor_halfdiff(s, x0, -y);
        return d * std::pow(y, -1.0 - 2.0 * s);
    };
    double y1 = std::min(1.0 - x0, 1.0 + x0);
    double y2 = std::max(1.0 - x0, 1.0 + x0);
    double ux0 = std::pow((1.0 - x0) * (1.0 + x0), s);
    double total = tanh_sinh(integrand, 0.0, y1) + tanh_sinh(integrand, y1, y2);
    total += 2.0 * ux0 * std::pow(y2, -2.0 * s) / (2.0 * s);
    return kernel_constant(s) * total;
}

// Getoor's closed form: (-Delta)^s (1-|x|^2)_+^s is constant on (-1,1) in 1D.
inline double getoor_constant(double s) {
    return std::pow(4.0, s) * std::tgamma(0.5 + s) * std::tgamma(1.0 + s) /
           std::tgamma(0.5);
}

}  // namespace oracle
