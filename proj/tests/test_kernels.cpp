#include <doctest.h>

#include <Eigen/Core>
#include <cstdlib>
#include <random>

#include "fraccal/kernels.hpp"

using namespace fraccal;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
    return v;
}

}  // namespace

TEST_CASE("active kernel set is selected and reports a name") {
    CHECK(!kern::active_name().empty());
}

TEST_CASE("scalar and dispatched kernels agree on random data") {
    std::mt19937_64 rng(12345);
    // Sizes straddling the vector width, including ragged tails.
    for (std::size_t n : {0ul, 1ul, 3ul, 4ul, 7ul, 64ul, 129ul, 1000ul}) {
        auto x = random_vec(rng, n), y = random_vec(rng, n);

        double d_ref = kern::scalar::dot(x.data(), y.data(), n);
        double d_act = kern::dot(x.data(), y.data(), n);
        double mag = 0;
        for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
        CHECK(std::abs(d_ref - d_act) <= 1e-14 * (mag + 1.0));

        auto y1 = y, y2 = y;
        kern::scalar::axpy(0.7, x.data(), y1.data(), n);
        kern::axpy(0.7, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (std::abs(y1[i]) + 1.0));

        std::vector<double> m1(n), m2(n);
        kern::scalar::mul(x.data(), y.data(), m1.data(), n);
        kern::mul(x.data(), y.data(), m2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(m1[i] == m2[i]);

        auto s1 = x, s2 = x;
        kern::scalar::scale(-1.3, s1.data(), n);
        kern::scale(-1.3, s2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(s1[i] == s2[i]);
    }
}

TEST_CASE("gemv matches Eigen and the scalar reference") {
    std::mt19937_64 rng(99);
    for (int m : {1, 5, 17}) {
        for (int n : {1, 4, 23}) {
            Eigen::MatrixXd a(m, n);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < m; ++i)
                    a(i, j) = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
            Eigen::VectorXd x(n);
            for (int j = 0; j < n; ++j)
                x[j] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;

            Eigen::VectorXd y_ref(m), y_act(m);
            kern::scalar::gemv(m, n, a.data(), m, x.data(), y_ref.data());
            kern::gemv(m, n, a.data(), m, x.data(), y_act.data());
            Eigen::VectorXd y_eig = a * x;
            for (int i = 0; i < m; ++i) {
                CHECK(std::abs(y_ref[i] - y_eig[i]) <= 1e-12 * (1.0 + std::abs(y_eig[i])));
                CHECK(std::abs(y_act[i] - y_eig[i]) <= 1e-12 * (1.0 + std::abs(y_eig[i])));
            }
        }
    }
}

TEST_CASE("dot is bilinear") {
    std::mt19937_64 rng(7);
    auto x = random_vec(rng, 51), y = random_vec(rng, 51), z = random_vec(rng, 51);
    std::vector<double> yz(51);
    for (int i = 0; i < 51; ++i) yz[i] = 2.0 * y[i] - 3.0 * z[i];
    double lhs = kern::dot(x.data(), yz.data(), 51);
    double rhs = 2.0 * kern::dot(x.data(), y.data(), 51) - 3.0 * kern::dot(x.data(), z.data(), 51);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
}
