#include "fraccal/runge.hpp"

#include <algorithm>
#include <cmath>

#include "fraccal/kernels.hpp"

namespace fraccal {

namespace {
constexpr double kRankFloor = 1e-12;  // numerical-rank threshold relative to sigma_1
}

Eigen::VectorXd RungeOperator::apply(const Eigen::VectorXd& f_local) const {
    Eigen::VectorXd coords;
    if (kernel_mode) {
        // Coordinates in the G-orthonormal admissible basis.
        coords = domain_basis.transpose() * (op->gram_hs(window) * f_local);
    } else {
        coords = f_local;
    }
    Eigen::VectorXd out(A.rows());
    kern::gemv(static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(A.cols()),
               A.data(), static_cast<std::size_t>(A.rows()), coords.data(), out.data());
    return out;
}

Eigen::VectorXd RungeOperator::datum_from_coords(const Eigen::VectorXd& c) const {
    if (kernel_mode) return domain_basis * c;
    return c;
}

RungeOperator assemble_A(const ForwardSolver& fs, const KernelSpaces& ks, Region window) {
    const FracOperator& op = fs.op();
    RungeOperator R;
    R.op = &op;
    R.window = window;
    R.kernel_mode = ks.dim() > 0;
    R.q_values = fs.potential().values;
    R.Z2 = ks.Z2;

    Eigen::MatrixXd L_omega_w = op.block(Region::Omega, window);
    if (!R.kernel_mode) {
        R.A = -fs.solve_multi(L_omega_w);
    } else {
        const Eigen::MatrixXd& basis = ks.h1_basis(window);
        R.domain_basis = basis;
        R.A = -fs.pseudo_solve_multi(L_omega_w * basis);
    }
    return R;
}

Eigen::VectorXd runge_adjoint_apply(const ForwardSolver& fs, const KernelSpaces& ks,
                                    Region window, const Eigen::VectorXd& v_omega) {
    const FracOperator& op = fs.op();
    const Lattice& lat = op.lattice();
    Eigen::VectorXd v = ks.dim() > 0 ? ks.project_h2(op, v_omega) : v_omega;
    Eigen::VectorXd w = ks.dim() > 0 ? fs.pseudo_solve(v) : fs.solve(v);
    Eigen::VectorXd flux = restrict_to(lat, op.apply(extend_from(lat, w, Region::Omega)), window);
    Eigen::VectorXd out = -op.h() * op.gram_llt(window).solve(flux);
    if (ks.dim() > 0) out = ks.h1_projector(window) * out;
    return out;
}

SVDData weighted_svd(const RungeOperator& R) {
    const FracOperator& op = *R.op;
    const double sqrt_h = std::sqrt(op.h());

    Eigen::MatrixXd whitened;
    if (R.kernel_mode) {
        // Domain basis already G-orthonormal; only the codomain needs the
        // L2_h weight.
        whitened = sqrt_h * R.A;
    } else {
        const auto& llt = op.gram_llt(R.window);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::GramNotSPD, "domain Gram is not positive definite");
        // A R_D^{-1} with G = R_D' R_D: solve along rows with the lower factor.
        Eigen::MatrixXd t = llt.matrixL().solve(R.A.transpose());
        whitened = sqrt_h * t.transpose();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitened, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sig = svd.singularValues();
    int r = 0;
    for (int i = 0; i < sig.size(); ++i)
        if (sig[i] > kRankFloor * sig[0]) ++r;

    SVDData out;
    out.sigmas = sig.head(r);
    out.psis = svd.matrixU().leftCols(r) / sqrt_h;
    if (R.kernel_mode) {
        out.phis = R.domain_basis * svd.matrixV().leftCols(r);
    } else {
        const auto& llt = op.gram_llt(R.window);
        out.phis = llt.matrixU().solve(svd.matrixV().leftCols(r));
    }
    out.source = &R;
    return out;
}

namespace {

struct Expansion {
    Eigen::VectorXd beta;      // codomain coefficients of the H2 part
    Eigen::VectorXd v_h2;      // omega-local H2 part of the target
    Eigen::VectorXd z;         // omega-local kernel part
    double target_norm = 0.0;  // |target|_{L2_h}
};

Expansion expand_target(const SVDData& svd, const Eigen::VectorXd& target) {
    const RungeOperator& R = *svd.source;
    const FracOperator& op = *R.op;
    Expansion e;
    if (R.Z2.cols() > 0) {
        Eigen::VectorXd coef = op.h() * (R.Z2.transpose() * target);
        e.z = R.Z2 * coef;
        e.v_h2 = target - e.z;
    } else {
        e.z = Eigen::VectorXd::Zero(target.size());
        e.v_h2 = target;
    }
    e.beta = op.h() * (svd.psis.transpose() * e.v_h2);
    e.target_norm = op.l2_norm_local(target);
    return e;
}

// Number of leading modes selected by a threshold alpha (includes ties).
int modes_for_alpha(const Eigen::VectorXd& sigmas, double alpha) {
    int k = 0;
    while (k < sigmas.size() && sigmas[k] >= alpha) ++k;
    return k;
}

ControlResult build_control(const SVDData& svd, const Expansion& e, int k, double alpha) {
    const RungeOperator& R = *svd.source;
    const FracOperator& op = *R.op;
    const Lattice& lat = op.lattice();

    Eigen::VectorXd f_local = Eigen::VectorXd::Zero(lat.size(R.window));
    for (int j = 0; j < k; ++j)
        kern::axpy(e.beta[j] / svd.sigmas[j], svd.phis.col(j).data(), f_local.data(),
                   static_cast<std::size_t>(f_local.size()));

    ControlResult out;
    out.f = extend_from(lat, f_local, R.window);
    out.z = e.z;
    out.alpha_used = alpha;
    out.modes_used = k;
    out.cost = op.hs_norm_local(f_local, R.window);
    // Achieved error recomputed from the assembled operator, not from the
    // singular expansion.
    Eigen::VectorXd residual = R.apply(f_local) + e.z - (e.v_h2 + e.z);
    out.eps_achieved = e.target_norm > 0.0 ? op.l2_norm_local(residual) / e.target_norm : 0.0;
    return out;
}

}  // namespace

ControlResult runge_control(const SVDData& svd, const Eigen::VectorXd& target_omega,
                            ByAlpha mode) {
    if (target_omega.size() == 0 || target_omega.cwiseAbs().maxCoeff() == 0.0)
        throw Error(ErrorCode::EmptyTarget, "Runge target is identically zero");
    Expansion e = expand_target(svd, target_omega);
    int k = modes_for_alpha(svd.sigmas, mode.alpha);
    return build_control(svd, e, k, mode.alpha);
}

ControlResult runge_control(const SVDData& svd, const Eigen::VectorXd& target_omega,
                            ByEps mode) {
    if (target_omega.size() == 0 || target_omega.cwiseAbs().maxCoeff() == 0.0)
        throw Error(ErrorCode::EmptyTarget, "Runge target is identically zero");
    Expansion e = expand_target(svd, target_omega);

    // Ladder residuals by the Pythagoras cascade; the final choice is
    // validated against the recomputed error and extended if roundoff makes
    // the algebraic estimate optimistic.
    const int r = svd.rank();
    double vnorm2 = e.v_h2.squaredNorm() * svd.source->op->h();
    std::vector<double> resid(static_cast<std::size_t>(r) + 1);
    resid[0] = vnorm2;
    for (int j = 0; j < r; ++j)
        resid[static_cast<std::size_t>(j) + 1] =
            std::max(0.0, resid[static_cast<std::size_t>(j)] - e.beta[j] * e.beta[j]);

    auto eps_at = [&](int k) {
        return e.target_norm > 0.0 ? std::sqrt(resid[static_cast<std::size_t>(k)]) / e.target_norm
                                   : 0.0;
    };
    int k = 0;
    while (k < r && eps_at(k) > mode.eps) ++k;
    if (eps_at(k) > mode.eps)
        throw Error(ErrorCode::TargetUnreachable,
                    "requested approximation error is below the floor at alpha = sigma_min");
    // Ties: a threshold at sigma_k picks up every equal singular value.
    while (k < r && k > 0 && svd.sigmas[k] == svd.sigmas[k - 1]) ++k;

    for (;;) {
        double alpha = (k == 0) ? svd.sigmas[0] * 2.0 : svd.sigmas[k - 1];
        ControlResult out = build_control(svd, e, k, alpha);
        if (out.eps_achieved <= mode.eps || k >= r) {
            if (out.eps_achieved > mode.eps)
                throw Error(ErrorCode::TargetUnreachable,
                            "achieved error exceeds the requested bound at full depth");
            return out;
        }
        ++k;
    }
}

CostCurve cost_curve(const SVDData& svd, const Eigen::VectorXd& target_omega,
                     const std::vector<double>& alphas) {
    CostCurve out;
    Expansion e = expand_target(svd, target_omega);
    for (double alpha : alphas) {
        int k = modes_for_alpha(svd.sigmas, alpha);
        ControlResult c = build_control(svd, e, k, alpha);
        out.points.push_back({alpha, c.eps_achieved, c.cost, c.modes_used});
    }

    // Fit log(cost) ~ slope * eps^(-mu) + intercept over the informative
    // points (positive cost, eps strictly inside (0, 1)).
    for (double mu : {0.5, 1.0, 2.0, 4.0}) {
        std::vector<double> xs, ys;
        for (const auto& p : out.points) {
            if (p.cost > 0.0 && p.eps > 0.0 && p.eps < 1.0) {
                xs.push_back(std::pow(p.eps, -mu));
                ys.push_back(std::log(p.cost));
            }
        }
        CostCurveFit fit;
        fit.mu = mu;
        if (xs.size() >= 2) {
            double n = static_cast<double>(xs.size());
            double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                sx += xs[i];
                sy += ys[i];
                sxx += xs[i] * xs[i];
                sxy += xs[i] * ys[i];
                syy += ys[i] * ys[i];
            }
            double denom = n * sxx - sx * sx;
            if (denom > 0) {
                fit.slope = (n * sxy - sx * sy) / denom;
                fit.intercept = (sy - fit.slope * sx) / n;
                double ss_tot = syy - sy * sy / n;
                double ss_res = 0;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    double d = ys[i] - (fit.slope * xs[i] + fit.intercept);
                    ss_res += d * d;
                }
                fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
            }
        }
        out.fits.push_back(fit);
    }
    return out;
}

DensityReport density_check(const RungeOperator& R) {
    const FracOperator& op = *R.op;
    const double sqrt_h = std::sqrt(op.h());

    Eigen::MatrixXd stack(R.A.rows(), R.A.cols() + R.Z2.cols());
    stack << R.A, R.Z2;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sqrt_h * stack);

    DensityReport rep;
    rep.singular_values = svd.singularValues();
    rep.n_omega = static_cast<int>(R.A.rows());
    rep.domain_dim = static_cast<int>(R.A.cols());
    rep.kernel_dim = static_cast<int>(R.Z2.cols());
    for (int i = 0; i < rep.singular_values.size(); ++i)
        if (rep.singular_values[i] > kRankFloor * rep.singular_values[0]) ++rep.rank;
    return rep;
}

}  // namespace fraccal
