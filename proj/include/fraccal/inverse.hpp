#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "fraccal/runge.hpp"

namespace fraccal {

enum class BasisKind { PiecewiseConstant, PiecewiseAffine, Trigonometric };

// Finite-dimensional potential basis g_1..g_m on Omega, L2_h-orthonormal
// after the built-in Gram-Schmidt pass. Partition kinds split Omega into N
// equal cells whose boundaries must land on lattice nodes; a node on an
// interior cell boundary belongs to no cell, so cell indicators are exactly
// disjoint and equally sized.
struct PotentialSpan {
    BasisKind kind = BasisKind::PiecewiseConstant;
    int m = 0;
    int cells = 0;
    Eigen::MatrixXd g;     // |omega| x m, orthonormal columns
    Eigen::MatrixXd gram;  // identity after orthonormalization (kept for checks)
};

PotentialSpan make_basis(const FracOperator& op, BasisKind kind, int N);

// Unnormalized indicator of cell j (0-based) for partition bases.
Eigen::VectorXd cell_indicator(const FracOperator& op, int N, int cell);

// q = sum_j a_j g_j as a Potential carrying its span reference.
Potential make_potential(const PotentialSpan& span, const Eigen::VectorXd& a);

// Triangular smoothing pass(es) of width 2h on an omega-local vector,
// zero-padded at the ends of Omega.
Eigen::VectorXd triangular_smooth(const Eigen::VectorXd& v, int passes);

struct TestPairOptions {
    int mollifier_passes = 1;  // width knob for the s >= 1/2 smoothing
    // Optional regularization onto the numerically reachable span of the
    // leading singular modes of a reference Runge operator per window (the
    // "(regularized) approximation" route; required when the requested
    // control accuracy lies below the mollified-indicator floor).
    const SVDData* reach1 = nullptr;
    const SVDData* reach2 = nullptr;
    int reach_modes = 0;
    double cond_ceiling = 1e6;
};

// Dual test functions h_l^(1), h_l^(2) and the pairing matrix
// M_lj = (g_j, h_l^(1) h_l^(2))_Omega, with its conditioning and the norm
// products L0 (H^s) and L1 (L2) entering the stability constants.
struct TestPairs {
    Eigen::MatrixXd h1, h2;  // |omega| x m
    Eigen::MatrixXd M;
    double condM = 0.0;
    double L0 = 0.0;
    double L1 = 0.0;
};

TestPairs choose_test_pairs(const FracOperator& op, const PotentialSpan& span,
                            const TestPairOptions& opts = {});

struct ReconstructionResult {
    Eigen::VectorXd a_hat;
    Eigen::VectorXd rhs;
    std::vector<ControlResult> controls;  // per l: the W1 control then the W2 control
    double residual_bound = 0.0;          // condM * eps * L0
    std::vector<Eigen::VectorXd> trace;   // fixed-point iterates
    int iterations = 0;
    bool converged = true;
};

// Noiseless recovery with known potentials: Runge controls for the test
// functions under each potential, DtN-difference measurements paired on
// Window2, and the solve M a = b.
ReconstructionResult reconstruct_oracle(const FracOperator& op, const Potential& q1,
                                        const Potential& q2, const PotentialSpan& span,
                                        const TestPairs& pairs, double eps);

// DtN access to the hidden potential: maps an active-length exterior datum
// supported on Window1 to the values of (-D)^s u on Window2.
using DtNAccess = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Fixed-point recovery when q1 is only accessible through measurements:
// the W1 controls are re-synthesized from the current iterate.
ReconstructionResult reconstruct_fixed_point(const FracOperator& op, const DtNAccess& measure,
                                             const Potential& q2_ref, const PotentialSpan& span,
                                             const TestPairs& pairs, double eps, int max_iter);

// Cauchy-data recovery (zero Dirichlet eigenvalues permitted): solutions
// approximating the test functions under each potential, measurements from
// the pair identity
//   ((q1-q2) u1, u2)_Omega = ((L(u1-v2))|_W, u2)_W - ((L u2)|_W, u1-v2)_W
// over the window union, with v2 the H-closest q2 Cauchy pair.
ReconstructionResult reconstruct_cauchy(const FracOperator& op, const Potential& q1,
                                        const Potential& q2, const PotentialSpan& span,
                                        const TestPairs& pairs, double eps);

struct LipschitzReport {
    double C_emp = 0.0;      // max ||q1-q2||_inf / ||L1-L2||_* over sampled pairs
    double sigma_min = 0.0;  // smallest singular value of the measurement Jacobian
    int trials = 0;
};

LipschitzReport lipschitz_estimate(const FracOperator& op, const PotentialSpan& span,
                                   int trials, std::uint64_t seed);

struct InstabilityReport {
    std::vector<double> ratios;  // ||L1-L2||_{L2->L2} / ||q1-q2||_inf per sampled pair
    double min_ratio = 0.0;
    int pairs_sampled = 0;
    int distinct_potentials = 0;
};

// Potentials with cellwise values in {-delta, 0, delta} on an N-cell
// partition; reports the distinguishability ratio over sampled distinct
// pairs with the DtN maps taken on the window union.
InstabilityReport instability_experiment(const FracOperator& op, int N, double delta,
                                         int sample_pairs, std::uint64_t seed);

// Deterministic uniform double in [0, 1) from a 64-bit generator state
// (distribution-independent across standard libraries).
inline double uniform01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace fraccal
