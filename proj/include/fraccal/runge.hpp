#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fraccal/forward.hpp"

namespace fraccal {

// The approximation operator A mapping exterior data on a window to the
// restriction of the corresponding solution to Omega. In the presence of a
// kernel the domain is the admissible-data subspace (represented by a
// G-orthonormal basis) and columns are the H2 representatives.
struct RungeOperator {
    Eigen::MatrixXd A;             // |omega| x p, columns in the domain basis
    Eigen::MatrixXd domain_basis;  // nW x p; empty in plain mode (nodal basis)
    Region window = Region::Window1;
    bool kernel_mode = false;
    const FracOperator* op = nullptr;
    Eigen::VectorXd q_values;
    Eigen::MatrixXd Z2;  // kernel basis (empty in plain mode)

    int domain_dim() const { return static_cast<int>(A.cols()); }
    // A f for a W-local datum (projected to the admissible space first in
    // kernel mode); returns an omega-local vector.
    Eigen::VectorXd apply(const Eigen::VectorXd& f_local) const;
    // Domain coordinates -> W-local datum.
    Eigen::VectorXd datum_from_coords(const Eigen::VectorXd& c) const;
};

RungeOperator assemble_A(const ForwardSolver& fs, const KernelSpaces& ks, Region window);

// Adjoint through the dual problem: solve ((-D)^s + q) w = v in Omega,
// w = 0 outside (H2 representative in kernel mode), and return the
// admissible part of -h G^{-1} (L w)|_W.
Eigen::VectorXd runge_adjoint_apply(const ForwardSolver& fs, const KernelSpaces& ks,
                                    Region window, const Eigen::VectorXd& v_omega);

// Weighted singular system of A: A phi_k = sigma_k psi_k with phi_k
// orthonormal in the H^s(W) Gram and psi_k in the L2_h inner product.
// Computed by Cholesky whitening of the Grams and a dense SVD; modes below
// 1e-12 sigma_1 are numerical noise and are not retained.
struct SVDData {
    Eigen::VectorXd sigmas;  // descending, positive
    Eigen::MatrixXd phis;    // nW x r (W-local columns)
    Eigen::MatrixXd psis;    // |omega| x r
    const RungeOperator* source = nullptr;

    int rank() const { return static_cast<int>(sigmas.size()); }
};

SVDData weighted_svd(const RungeOperator& R);

// Exterior control synthesized by the truncated singular expansion
// f = sum_{sigma_j >= alpha} (beta_j / sigma_j) phi_j for the H2 part of the
// target, plus the kernel component handled exactly.
struct ControlResult {
    Eigen::VectorXd f;  // active-length exterior datum
    Eigen::VectorXd z;  // omega-local kernel component
    double eps_achieved = 0.0;
    double cost = 0.0;
    double alpha_used = 0.0;
    int modes_used = 0;
};

struct ByAlpha {
    double alpha;
};
struct ByEps {
    double eps;
};

ControlResult runge_control(const SVDData& svd, const Eigen::VectorXd& target_omega,
                            ByAlpha mode);
ControlResult runge_control(const SVDData& svd, const Eigen::VectorXd& target_omega,
                            ByEps mode);

// One control summary per threshold, plus least-squares slopes of log(cost)
// against eps^(-mu) over a grid of candidate exponents.
struct CostCurvePoint {
    double alpha = 0.0;
    double eps = 0.0;
    double cost = 0.0;
    int modes = 0;
};

struct CostCurveFit {
    double mu = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

struct CostCurve {
    std::vector<CostCurvePoint> points;
    std::vector<CostCurveFit> fits;  // mu grid {0.5, 1, 2, 4}
};

CostCurve cost_curve(const SVDData& svd, const Eigen::VectorXd& target_omega,
                     const std::vector<double>& alphas);

// Numerical rank of the column stack [A | Z2] in the L2_h inner product;
// the finite-dimensional shadow of the density of the Runge set.
struct DensityReport {
    Eigen::VectorXd singular_values;
    int rank = 0;
    int n_omega = 0;
    int domain_dim = 0;
    int kernel_dim = 0;
};

DensityReport density_check(const RungeOperator& R);

}  // namespace fraccal
