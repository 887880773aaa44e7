#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <map>

#include "fraccal/lattice.hpp"

namespace fraccal {

// Dense symmetric realization of the 1D fractional Laplacian of order s on
// lattice functions that vanish outside the active regions, together with
// the discrete L2, H^s and H^-s pairings used everywhere else.
//
// Construction: the symmetrized difference 2u(x) - u(x+y) - u(x-y) is
// interpolated in y piecewise-linearly on the grid (quadratically on the
// first cell, where the difference vanishes to second order) and integrated
// exactly against the kernel |y|^(-1-2s). Because admissible functions are
// identically zero outside the active nodes, the zero extension is exact and
// the infinite tail sums into a closed form on the diagonal. The resulting
// matrix entries depend only on |i - j|, s and h.
class FracOperator {
public:
    static FracOperator assemble(const Lattice& lat, double s);

    // The operator owns a copy of its lattice, so it can be moved and shared
    // without lifetime coupling to the caller's geometry object.
    const Lattice& lattice() const { return lat_; }
    double s() const { return s_; }
    double h() const { return lat_.h(); }
    // Normalization constant of the 1D kernel, 4^s Gamma(1/2+s) s / (sqrt(pi) Gamma(1-s)).
    double c1s() const { return c1s_; }

    // Toeplitz coefficients mu_0..mu_K: (L u)_i = mu_0 u_i - sum_{k>=1} mu_k (u_{i+k} + u_{i-k}).
    const Eigen::VectorXd& toeplitz_weights() const { return mu_; }

    // The operator on active nodes (symmetric, positive definite).
    const Eigen::MatrixXd& matrix() const { return L_; }

    // L u through the runtime-dispatched matvec kernel.
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

    // Block of L with rows/cols restricted to regions (union rows/cols are
    // concatenations of the window slices in window order).
    Eigen::MatrixXd block(Region rows, Region cols) const;

    // Discrete L2 pairing h * sum_{i in region} u_i v_i on active-length vectors.
    double l2_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v, Region r) const;
    double l2_norm(const Eigen::VectorXd& u, Region r) const;
    // Same pairing on region-local vectors.
    double l2_inner_local(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
    double l2_norm_local(const Eigen::VectorXd& u) const;

    // Gram matrix h (I + L_RR) of the discrete H^s(R) inner product, and its
    // Cholesky factorization. Precomputed for every region at assembly.
    const Eigen::MatrixXd& gram_hs(Region r) const;
    const Eigen::LLT<Eigen::MatrixXd>& gram_llt(Region r) const;

    // sqrt(f' G f) for f supported on region r (active-length; support checked).
    double hs_norm(const Eigen::VectorXd& f, Region r) const;
    // h * sqrt(g' G^{-1} g) for a functional-valued g on region r, so that
    // |l2_inner(g, f, r)| <= hminus_norm(g) * hs_norm(f).
    double hminus_norm(const Eigen::VectorXd& g, Region r) const;

    double hs_norm_local(const Eigen::VectorXd& f, Region r) const;
    double hminus_norm_local(const Eigen::VectorXd& g, Region r) const;

private:
    Lattice lat_;
    double s_ = 0.0;
    double c1s_ = 0.0;
    Eigen::VectorXd mu_;
    Eigen::MatrixXd L_;
    std::map<int, Eigen::MatrixXd> gram_;
    std::map<int, Eigen::LLT<Eigen::MatrixXd>> gram_llt_;
};

// (b^p - a^p) / p for 0 < a < b, continuous through p = 0 (where it equals
// log(b/a)). Shared by the weight construction and the quadrature oracle.
double powdiff(double a, double b, double p);

}  // namespace fraccal
