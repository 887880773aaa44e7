#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>

#include "fraccal/fracop.hpp"

namespace fraccal {

struct PotentialSpan;  // defined in inverse.hpp

// Bounded potential q on the interior nodes of Omega, optionally remembering
// the finite-dimensional span it was drawn from.
struct Potential {
    Eigen::VectorXd values;  // length = |omega_idx|
    double sup_bound = 0.0;  // L-infinity bound C_0; >= max |values|
    const PotentialSpan* span_ref = nullptr;
    Eigen::VectorXd span_coeffs;

    static Potential zero(const Lattice& lat);
    static Potential constant(const Lattice& lat, double c);
    static Potential from_values(Eigen::VectorXd v);
};

// Eigendecomposition of L_OmegaOmega + diag(q), L2_h-orthonormal eigenvectors.
struct Spectrum {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // columns, h * V'V = I
    double zero_tol = 0.0;         // 1e-8 * ||S||_2
};

// Factorized Dirichlet problem for one potential; reused across right-hand
// sides and immutable after construction.
class ForwardSolver {
public:
    ForwardSolver(const FracOperator& op, const Potential& q);

    const FracOperator& op() const { return *op_; }
    const Potential& potential() const { return q_; }
    const Spectrum& spectrum() const { return spec_; }
    double zero_tol() const { return spec_.zero_tol; }
    double min_abs_eigenvalue() const;
    bool has_kernel() const { return kernel_dim() > 0; }
    int kernel_dim() const;

    // S x = rhs (Euclidean right-hand side). Throws NearSingular if zero is
    // a discrete Dirichlet eigenvalue within tolerance.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    Eigen::MatrixXd solve_multi(const Eigen::MatrixXd& rhs) const;

    // Least-squares solve dropping near-zero modes; the result is the
    // L2_h-orthogonal representative in the complement of the kernel.
    Eigen::VectorXd pseudo_solve(const Eigen::VectorXd& rhs) const;
    Eigen::MatrixXd pseudo_solve_multi(const Eigen::MatrixXd& rhs) const;

private:
    Eigen::MatrixXd apply_inverse(const Eigen::MatrixXd& rhs, bool pseudo) const;

    const FracOperator* op_;
    Potential q_;
    Spectrum spec_;
    Eigen::MatrixXd vecs_euclid_;  // Euclidean-orthonormal eigenvectors
};

Spectrum dirichlet_spectrum(const FracOperator& op, const Potential& q);

// Kernel space Z2 of the operator, the projector onto admissible exterior
// data (orthogonal in the H^s(W) Gram), and the L2_h projector onto the
// complement of Z2. Trivial when zero is not an eigenvalue.
struct KernelSpaces {
    Eigen::MatrixXd Z2;  // |omega| x d, L2_h-orthonormal
    Eigen::MatrixXd H2_proj;
    std::map<int, Eigen::MatrixXd> H1_proj;   // per region
    std::map<int, Eigen::MatrixXd> H1_basis;  // G-orthonormal basis of range(H1_proj)
    double zero_tol = 0.0;

    int dim() const { return static_cast<int>(Z2.cols()); }
    const Eigen::MatrixXd& h1_projector(Region r) const;
    const Eigen::MatrixXd& h1_basis(Region r) const;
    // L2_h projection of an omega-local vector onto Z2.
    Eigen::VectorXd project_kernel(const FracOperator& op, const Eigen::VectorXd& v) const;
    // Complement projection (the H2 representative).
    Eigen::VectorXd project_h2(const FracOperator& op, const Eigen::VectorXd& v) const;
};

KernelSpaces kernel_spaces(const FracOperator& op, const ForwardSolver& fs);

// Exterior-value problem ((-D)^s + q) u = 0 in Omega, u = f outside.
// f is an active-length exterior datum; the result equals f on the windows.
LatticeFunction solve_forward(const ForwardSolver& fs, const Eigen::VectorXd& f);

// Inhomogeneous/kernel variant: ((-D)^s + q) u = F in Omega with exterior
// datum f restricted to admissible data. F is omega-local. Solvability
// requires h z' (F - (L f)|_Omega) = 0 for every kernel vector z, i.e.
// (F, z)_Omega = (f, (-D)^s z)_W; the returned solution is the H2
// representative.
LatticeFunction solve_forward_kernel(const ForwardSolver& fs, const KernelSpaces& ks,
                                     const Eigen::VectorXd& f, const Eigen::VectorXd& F);

// Discrete DtN block: exterior data on `from` mapped to values of (-D)^s u
// on `to`. Assembled as L_{to,from} - L_{to,Omega} S^{-1} L_{Omega,from}.
struct DtNMatrix {
    Eigen::MatrixXd entries;
    Region from = Region::Window1;
    Region to = Region::Window1;
    Eigen::VectorXd q_values;
};

DtNMatrix dtn_matrix(const ForwardSolver& fs, Region from, Region to);

// Operator norm of a DtN difference as a map H^s(from) -> H^-s(to)
// (largest singular value after Gram whitening on both sides).
double dtn_star_norm(const FracOperator& op, const DtNMatrix& diff);

// Plain L2(W) -> L2(W) operator norm.
double dtn_l2_norm(const DtNMatrix& diff);

// Both sides of the discrete Alessandrini identity
//   ((q1-q2) u1, u2)_Omega = ((L_{q1} - L_{q2}) f1, f2)_{W_2},
// computed through independent code paths (solution values on Omega versus
// DtN matrices). f1 lives on Window1, f2 on Window2 (active-length).
struct AlessandriniGap {
    double lhs = 0.0;
    double rhs = 0.0;
};

AlessandriniGap alessandrini_gap(const FracOperator& op, const Potential& q1,
                                 const Potential& q2, const Eigen::VectorXd& f1,
                                 const Eigen::VectorXd& f2);

// H-orthonormal basis of the discrete Cauchy subspace over a region:
// columns stack (u|_W, (L u)|_W) for the admissible exterior nodal data,
// orthonormalized in the norm |w|_H^2 = |w_f|_{H^s(W)}^2 + |w_g|_{H^-s(W)}^2
// (sum of squares; an equivalent norm to the component sum, chosen so the
// Gram-based orthonormalization applies).
struct CauchyBasis {
    Eigen::MatrixXd columns;  // 2 nW x p
    Region region = Region::Window1;
    const FracOperator* op = nullptr;
    Eigen::VectorXd q_values;
};

CauchyBasis cauchy_basis(const ForwardSolver& fs, const KernelSpaces& ks, Region r);

// H inner product of two stacked Cauchy pairs over a region.
double cauchy_h_inner(const FracOperator& op, Region r, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b);

// Stacked Cauchy pair (u|_r, (L u)|_r) of an active-length function.
Eigen::VectorXd cauchy_pair(const FracOperator& op, const Eigen::VectorXd& u, Region r);

// H-orthogonal projection of a stacked pair onto the span of a basis.
Eigen::VectorXd cauchy_project(const CauchyBasis& basis, const Eigen::VectorXd& pair);

// Symmetric aperture between two Cauchy subspaces (maximum of the two
// directed gaps, computed from the singular values of the cross-Gram).
double cauchy_distance(const CauchyBasis& c1, const CauchyBasis& c2);

}  // namespace fraccal
