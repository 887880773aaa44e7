#include "fraccal/forward.hpp"

#include <cmath>

#include "fraccal/kernels.hpp"

namespace fraccal {

Potential Potential::zero(const Lattice& lat) {
    Potential q;
    q.values = Eigen::VectorXd::Zero(lat.size(Region::Omega));
    q.sup_bound = 0.0;
    return q;
}

Potential Potential::constant(const Lattice& lat, double c) {
    Potential q;
    q.values = Eigen::VectorXd::Constant(lat.size(Region::Omega), c);
    q.sup_bound = std::abs(c);
    return q;
}

Potential Potential::from_values(Eigen::VectorXd v) {
    Potential q;
    q.sup_bound = v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0;
    q.values = std::move(v);
    return q;
}

ForwardSolver::ForwardSolver(const FracOperator& op, const Potential& q)
    : op_(&op), q_(q) {
    const Lattice& lat = op.lattice();
    const int n = lat.size(Region::Omega);
    if (q_.values.size() != n)
        throw Error(ErrorCode::ConfigError, "potential length does not match omega node count");
    Eigen::MatrixXd S = op.block(Region::Omega, Region::Omega);
    S.diagonal() += q_.values;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::ToleranceBreach, "symmetric eigendecomposition failed");
    vecs_euclid_ = es.eigenvectors();
    spec_.eigenvalues = es.eigenvalues();
    spec_.eigenvectors = vecs_euclid_ / std::sqrt(lat.h());
    spec_.zero_tol = 1e-8 * spec_.eigenvalues.cwiseAbs().maxCoeff();
}

double ForwardSolver::min_abs_eigenvalue() const {
    return spec_.eigenvalues.cwiseAbs().minCoeff();
}

int ForwardSolver::kernel_dim() const {
    int d = 0;
    for (int i = 0; i < spec_.eigenvalues.size(); ++i)
        if (std::abs(spec_.eigenvalues[i]) <= spec_.zero_tol) ++d;
    return d;
}

Eigen::MatrixXd ForwardSolver::apply_inverse(const Eigen::MatrixXd& rhs, bool pseudo) const {
    Eigen::MatrixXd y = vecs_euclid_.transpose() * rhs;
    for (int i = 0; i < spec_.eigenvalues.size(); ++i) {
        double lam = spec_.eigenvalues[i];
        if (pseudo && std::abs(lam) <= spec_.zero_tol)
            y.row(i).setZero();
        else
            y.row(i) /= lam;
    }
    return vecs_euclid_ * y;
}

Eigen::VectorXd ForwardSolver::solve(const Eigen::VectorXd& rhs) const {
    if (has_kernel())
        throw Error(ErrorCode::NearSingular,
                    "zero is a discrete Dirichlet eigenvalue within tolerance");
    return apply_inverse(rhs, false);
}

Eigen::MatrixXd ForwardSolver::solve_multi(const Eigen::MatrixXd& rhs) const {
    if (has_kernel())
        throw Error(ErrorCode::NearSingular,
                    "zero is a discrete Dirichlet eigenvalue within tolerance");
    return apply_inverse(rhs, false);
}

Eigen::VectorXd ForwardSolver::pseudo_solve(const Eigen::VectorXd& rhs) const {
    return apply_inverse(rhs, true);
}

Eigen::MatrixXd ForwardSolver::pseudo_solve_multi(const Eigen::MatrixXd& rhs) const {
    return apply_inverse(rhs, true);
}

Spectrum dirichlet_spectrum(const FracOperator& op, const Potential& q) {
    return ForwardSolver(op, q).spectrum();
}

const Eigen::MatrixXd& KernelSpaces::h1_projector(Region r) const {
    auto it = H1_proj.find(static_cast<int>(r));
    if (it == H1_proj.end())
        throw Error(ErrorCode::ConfigError, "no admissible-data projector for region");
    return it->second;
}

const Eigen::MatrixXd& KernelSpaces::h1_basis(Region r) const {
    auto it = H1_basis.find(static_cast<int>(r));
    if (it == H1_basis.end())
        throw Error(ErrorCode::ConfigError, "no admissible-data basis for region");
    return it->second;
}

Eigen::VectorXd KernelSpaces::project_kernel(const FracOperator& op,
                                             const Eigen::VectorXd& v) const {
    if (Z2.cols() == 0) return Eigen::VectorXd::Zero(v.size());
    Eigen::VectorXd coef = op.h() * (Z2.transpose() * v);
    return Z2 * coef;
}

Eigen::VectorXd KernelSpaces::project_h2(const FracOperator& op,
                                         const Eigen::VectorXd& v) const {
    return v - project_kernel(op, v);
}

namespace {

// Euclidean modified Gram-Schmidt with reorthogonalization, dropping columns
// that become numerically dependent. Weighted inner products are handled by
// whitening the columns first and unwhitening the result.
Eigen::MatrixXd mgs_orthonormalize(Eigen::MatrixXd cols, double drop_tol) {
    const int n = static_cast<int>(cols.rows());
    Eigen::MatrixXd out(n, cols.cols());
    int kept = 0;
    double scale = 0.0;
    for (int j = 0; j < cols.cols(); ++j) {
        Eigen::VectorXd v = cols.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < kept; ++i) {
                double c = kern::dot(out.col(i).data(), v.data(), static_cast<std::size_t>(n));
                kern::axpy(-c, out.col(i).data(), v.data(), static_cast<std::size_t>(n));
            }
        }
        double nrm = v.norm();
        if (j == 0) scale = std::max(nrm, 1e-300);
        if (nrm > drop_tol * scale) {
            out.col(kept) = v / nrm;
            ++kept;
        }
    }
    return out.leftCols(kept);
}

}  // namespace

KernelSpaces kernel_spaces(const FracOperator& op, const ForwardSolver& fs) {
    const Lattice& lat = op.lattice();
    KernelSpaces ks;
    ks.zero_tol = fs.zero_tol();

    const Spectrum& sp = fs.spectrum();
    std::vector<int> kernel_cols;
    for (int i = 0; i < sp.eigenvalues.size(); ++i)
        if (std::abs(sp.eigenvalues[i]) <= sp.zero_tol) kernel_cols.push_back(i);
    const int d = static_cast<int>(kernel_cols.size());
    const int nO = lat.size(Region::Omega);

    ks.Z2.resize(nO, d);
    for (int j = 0; j < d; ++j) ks.Z2.col(j) = sp.eigenvectors.col(kernel_cols[j]);

    ks.H2_proj = Eigen::MatrixXd::Identity(nO, nO) - op.h() * (ks.Z2 * ks.Z2.transpose());

    std::vector<Region> regions;
    for (int k = 1; k <= lat.num_windows(); ++k) regions.push_back(window(k));
    if (lat.num_windows() > 1) regions.push_back(Region::WindowUnion);

    for (Region r : regions) {
        const int nW = lat.size(r);
        Eigen::MatrixXd P;
        if (d == 0) {
            P = Eigen::MatrixXd::Identity(nW, nW);
        } else {
            // Constraint columns (L z_j)|_r; admissible data annihilate them
            // under the L2 pairing, and the projector is orthogonal in the
            // H^s(r) Gram.
            Eigen::MatrixXd B(nW, d);
            for (int j = 0; j < d; ++j) {
                Eigen::VectorXd Lz = op.apply(extend_from(lat, ks.Z2.col(j), Region::Omega));
                B.col(j) = restrict_to(lat, Lz, r);
            }
            Eigen::MatrixXd Ginv_B = op.gram_llt(r).solve(B);
            Eigen::MatrixXd small = B.transpose() * Ginv_B;
            P = Eigen::MatrixXd::Identity(nW, nW) -
                Ginv_B * small.ldlt().solve(B.transpose());
        }
        auto key = static_cast<int>(r);
        ks.H1_proj.emplace(key, P);
        if (d == 0) {
            // Every datum is admissible; the nodal basis spans the domain.
            ks.H1_basis.emplace(key, std::move(P));
        } else {
            // G-orthonormal basis of range(P): whiten with the Cholesky
            // factor, orthonormalize, unwhiten.
            const auto& llt = op.gram_llt(r);
            Eigen::MatrixXd white = llt.matrixU() * P;
            Eigen::MatrixXd q = mgs_orthonormalize(std::move(white), 1e-8);
            ks.H1_basis.emplace(key, llt.matrixU().solve(q));
        }
    }
    return ks;
}

LatticeFunction solve_forward(const ForwardSolver& fs, const Eigen::VectorXd& f) {
    const FracOperator& op = fs.op();
    const Lattice& lat = op.lattice();
    require_support(lat, f, Region::WindowUnion, "exterior datum");
    Eigen::VectorXd rhs = -restrict_to(lat, op.apply(f), Region::Omega);
    Eigen::VectorXd u_omega = fs.solve(rhs);
    LatticeFunction u;
    u.values = f + extend_from(lat, u_omega, Region::Omega);
    u.role = RoleTag::Solution;
    return u;
}

LatticeFunction solve_forward_kernel(const ForwardSolver& fs, const KernelSpaces& ks,
                                     const Eigen::VectorXd& f, const Eigen::VectorXd& F) {
    const FracOperator& op = fs.op();
    const Lattice& lat = op.lattice();
    require_support(lat, f, Region::WindowUnion, "exterior datum");
    Eigen::VectorXd rhs = F - restrict_to(lat, op.apply(f), Region::Omega);
    // Fredholm solvability: the right-hand side must annihilate the kernel,
    // i.e. (F, z)_Omega = (f, (L z)|_W)_W for every kernel vector z.
    double scale = 1.0 + rhs.norm();
    for (int j = 0; j < ks.dim(); ++j) {
        double c = op.h() * kern::dot(ks.Z2.col(j).data(), rhs.data(),
                                      static_cast<std::size_t>(rhs.size()));
        if (std::abs(c) > 1e-8 * scale)
            throw Error(ErrorCode::IncompatibleData,
                        "data violate the kernel compatibility condition");
    }
    Eigen::VectorXd u_omega = fs.pseudo_solve(rhs);
    LatticeFunction u;
    u.values = f + extend_from(lat, u_omega, Region::Omega);
    u.role = RoleTag::Solution;
    return u;
}

DtNMatrix dtn_matrix(const ForwardSolver& fs, Region from, Region to) {
    const FracOperator& op = fs.op();
    Eigen::MatrixXd L_to_from = op.block(to, from);
    Eigen::MatrixXd L_omega_from = op.block(Region::Omega, from);
    Eigen::MatrixXd L_to_omega = op.block(to, Region::Omega);
    Eigen::MatrixXd U = fs.solve_multi(L_omega_from);
    DtNMatrix out;
    out.entries = L_to_from - L_to_omega * U;
    out.from = from;
    out.to = to;
    out.q_values = fs.potential().values;
    return out;
}

double dtn_star_norm(const FracOperator& op, const DtNMatrix& diff) {
    // Whiten both sides: rows by the H^-s(to) norm, columns by the unit ball
    // of H^s(from).
    const auto& llt_to = op.gram_llt(diff.to);
    const auto& llt_from = op.gram_llt(diff.from);
    Eigen::MatrixXd X = llt_to.matrixL().solve(diff.entries);
    Eigen::MatrixXd Y =
        llt_from.matrixL().transpose().solve(X.transpose()).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y);
    return op.h() * svd.singularValues()[0];
}

double dtn_l2_norm(const DtNMatrix& diff) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff.entries);
    return svd.singularValues()[0];
}

AlessandriniGap alessandrini_gap(const FracOperator& op, const Potential& q1,
                                 const Potential& q2, const Eigen::VectorXd& f1,
                                 const Eigen::VectorXd& f2) {
    const Lattice& lat = op.lattice();
    require_support(lat, f1, Region::Window1, "Alessandrini datum f1");
    require_support(lat, f2, Region::Window2, "Alessandrini datum f2");
    ForwardSolver fs1(op, q1), fs2(op, q2);

    AlessandriniGap out;
    // Left side: potentials difference weighted against the two solutions.
    Eigen::VectorXd u1 = restrict_to(lat, solve_forward(fs1, f1).values, Region::Omega);
    Eigen::VectorXd u2 = restrict_to(lat, solve_forward(fs2, f2).values, Region::Omega);
    Eigen::VectorXd dq = q1.values - q2.values;
    Eigen::VectorXd prod(u1.size());
    kern::mul(u1.data(), u2.data(), prod.data(), static_cast<std::size_t>(u1.size()));
    Eigen::VectorXd weighted(prod.size());
    kern::mul(dq.data(), prod.data(), weighted.data(), static_cast<std::size_t>(prod.size()));
    out.lhs = op.h() * weighted.sum();

    // Right side: DtN difference paired on Window2.
    DtNMatrix l1 = dtn_matrix(fs1, Region::Window1, Region::Window2);
    DtNMatrix l2 = dtn_matrix(fs2, Region::Window1, Region::Window2);
    Eigen::VectorXd f1_loc = restrict_to(lat, f1, Region::Window1);
    Eigen::VectorXd f2_loc = restrict_to(lat, f2, Region::Window2);
    Eigen::VectorXd diff_f1 = (l1.entries - l2.entries) * f1_loc;
    out.rhs = op.h() * kern::dot(diff_f1.data(), f2_loc.data(),
                                 static_cast<std::size_t>(f2_loc.size()));
    return out;
}

Eigen::VectorXd cauchy_pair(const FracOperator& op, const Eigen::VectorXd& u, Region r) {
    const Lattice& lat = op.lattice();
    Eigen::VectorXd trace = restrict_to(lat, u, r);
    Eigen::VectorXd flux = restrict_to(lat, op.apply(u), r);
    Eigen::VectorXd out(2 * trace.size());
    out << trace, flux;
    return out;
}

double cauchy_h_inner(const FracOperator& op, Region r, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
    const int nW = static_cast<int>(a.size()) / 2;
    Eigen::VectorXd gb = op.gram_hs(r) * b.head(nW);
    double top = kern::dot(a.head(nW).data(), gb.data(), static_cast<std::size_t>(nW));
    Eigen::VectorXd sol = op.gram_llt(r).solve(b.tail(nW));
    double bottom = kern::dot(a.tail(nW).data(), sol.data(), static_cast<std::size_t>(nW));
    return top + op.h() * op.h() * bottom;
}

CauchyBasis cauchy_basis(const ForwardSolver& fs, const KernelSpaces& ks, Region r) {
    const FracOperator& op = fs.op();
    const Lattice& lat = op.lattice();
    const Eigen::MatrixXd& basis = ks.h1_basis(r);
    const bool kernel_mode = ks.dim() > 0;

    Eigen::MatrixXd cols(2 * lat.size(r), basis.cols());
    Eigen::VectorXd F0 = Eigen::VectorXd::Zero(lat.size(Region::Omega));
    for (int j = 0; j < basis.cols(); ++j) {
        Eigen::VectorXd f = extend_from(lat, basis.col(j), r);
        LatticeFunction u = kernel_mode ? solve_forward_kernel(fs, ks, f, F0)
                                        : solve_forward(fs, f);
        cols.col(j) = cauchy_pair(op, u.values, r);
    }
    // Orthonormalize in the H inner product: whiten the trace part with the
    // Cholesky factor of G and the flux part with h G^{-1/2}, then run plain
    // Gram-Schmidt and map back.
    const int nW = lat.size(r);
    const auto& llt = op.gram_llt(r);
    Eigen::MatrixXd white(2 * nW, cols.cols());
    white.topRows(nW) = llt.matrixU() * cols.topRows(nW);
    white.bottomRows(nW) = op.h() * llt.matrixL().solve(cols.bottomRows(nW));
    Eigen::MatrixXd q = mgs_orthonormalize(std::move(white), 1e-10);

    CauchyBasis out;
    out.columns.resize(2 * nW, q.cols());
    out.columns.topRows(nW) = llt.matrixU().solve(q.topRows(nW));
    out.columns.bottomRows(nW) = (llt.matrixL() * q.bottomRows(nW)) / op.h();
    out.region = r;
    out.op = &op;
    out.q_values = fs.potential().values;
    return out;
}

Eigen::VectorXd cauchy_project(const CauchyBasis& basis, const Eigen::VectorXd& pair) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(pair.size());
    for (int j = 0; j < basis.columns.cols(); ++j) {
        double c = cauchy_h_inner(*basis.op, basis.region, basis.columns.col(j), pair);
        out += c * basis.columns.col(j);
    }
    return out;
}

double cauchy_distance(const CauchyBasis& c1, const CauchyBasis& c2) {
    if (c1.op != c2.op || c1.region != c2.region ||
        c1.columns.rows() != c2.columns.rows())
        throw Error(ErrorCode::GramMismatch,
                    "Cauchy bases live over different regions or Gram matrices");
    const int p1 = static_cast<int>(c1.columns.cols());
    const int p2 = static_cast<int>(c2.columns.cols());
    if (p1 == 0 || p2 == 0) return (p1 == p2) ? 0.0 : 1.0;

    Eigen::MatrixXd cross(p1, p2);
    for (int i = 0; i < p1; ++i)
        for (int j = 0; j < p2; ++j)
            cross(i, j) = cauchy_h_inner(*c1.op, c1.region, c1.columns.col(i),
                                         c2.columns.col(j));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
    const Eigen::VectorXd& sig = svd.singularValues();
    auto directed = [&](int p_from) {
        // sup over unit vectors of the `from` space of the distance to the
        // other space: sqrt(1 - sigma_p^2) with sigma_p the p-th cosine
        // (zero when the from-space dimension exceeds the other).
        if (p_from > sig.size() || p_from > std::min(p1, p2)) return 1.0;
        double c = std::clamp(sig[p_from - 1], 0.0, 1.0);
        return std::sqrt(std::max(0.0, 1.0 - c * c));
    };
    double d21 = (p2 > p1) ? 1.0 : directed(p2);
    double d12 = (p1 > p2) ? 1.0 : directed(p1);
    return std::max(d21, d12);
}

}  // namespace fraccal
