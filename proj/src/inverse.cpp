#include "fraccal/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "fraccal/kernels.hpp"
#include "fraccal/parallel.hpp"

namespace fraccal {

namespace {

// Cell layout in omega-node offsets: with G = N * M lattice intervals, cell
// j holds the nodes strictly between its endpoints, so every cell has M - 1
// nodes and interior cell-boundary nodes stay unassigned.
struct CellLayout {
    int N = 0;
    int intervals_per_cell = 0;
};

CellLayout cell_layout(const FracOperator& op, int N) {
    const Lattice& lat = op.lattice();
    if (N < 1) throw Error(ErrorCode::ConfigError, "partition needs N >= 1");
    int G = lat.omega_intervals();
    if (G % N != 0)
        throw Error(ErrorCode::PartitionNotAligned,
                    "omega spans " + std::to_string(G) + " cells of width h; not divisible by N=" +
                        std::to_string(N));
    return {N, G / N};
}

}  // namespace

Eigen::VectorXd cell_indicator(const FracOperator& op, int N, int cell) {
    CellLayout lay = cell_layout(op, N);
    const int nO = op.lattice().size(Region::Omega);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(nO);
    // Node at omega offset i sits t = i + 1 intervals from the left endpoint.
    for (int i = 0; i < nO; ++i) {
        int t = i + 1;
        if (t > cell * lay.intervals_per_cell && t < (cell + 1) * lay.intervals_per_cell)
            v[i] = 1.0;
    }
    return v;
}

Eigen::VectorXd triangular_smooth(const Eigen::VectorXd& v, int passes) {
    Eigen::VectorXd cur = v;
    const int n = static_cast<int>(v.size());
    for (int p = 0; p < passes; ++p) {
        Eigen::VectorXd next(n);
        for (int i = 0; i < n; ++i) {
            double acc = 2.0 * cur[i];
            if (i > 0) acc += cur[i - 1];
            if (i + 1 < n) acc += cur[i + 1];
            next[i] = 0.25 * acc;
        }
        cur.swap(next);
    }
    return cur;
}

PotentialSpan make_basis(const FracOperator& op, BasisKind kind, int N) {
    const Lattice& lat = op.lattice();
    const int nO = lat.size(Region::Omega);

    PotentialSpan span;
    span.kind = kind;
    span.cells = (kind == BasisKind::Trigonometric) ? 0 : N;

    Eigen::MatrixXd raw;
    if (kind == BasisKind::PiecewiseConstant) {
        raw.resize(nO, N);
        for (int j = 0; j < N; ++j) raw.col(j) = cell_indicator(op, N, j);
    } else if (kind == BasisKind::PiecewiseAffine) {
        raw.resize(nO, 2 * N);
        for (int j = 0; j < N; ++j) {
            Eigen::VectorXd chi = cell_indicator(op, N, j);
            raw.col(j) = chi;
            Eigen::VectorXd xchi(nO);
            for (int i = 0; i < nO; ++i) xchi[i] = lat.region_x(Region::Omega, i) * chi[i];
            raw.col(N + j) = xchi;
        }
    } else {
        if (N < 1) throw Error(ErrorCode::ConfigError, "trigonometric basis needs N >= 1");
        raw.resize(nO, N);
        const double a = lat.omega().a, len = lat.omega().length();
        for (int j = 0; j < N; ++j) {
            for (int i = 0; i < nO; ++i) {
                double t = (lat.region_x(Region::Omega, i) - a) / len;  // in (0,1)
                int harmonic = (j + 1) / 2;
                if (j == 0)
                    raw(i, j) = 1.0;
                else if (j % 2 == 1)
                    raw(i, j) = std::cos(2.0 * M_PI * harmonic * t);
                else
                    raw(i, j) = std::sin(2.0 * M_PI * harmonic * t);
            }
        }
    }

    // Orthonormalize in L2_h (modified Gram-Schmidt; partition bases come
    // out block-diagonal because cell supports are disjoint).
    const double sqrt_h = std::sqrt(op.h());
    Eigen::MatrixXd cols = raw;
    int kept = 0;
    for (int j = 0; j < cols.cols(); ++j) {
        Eigen::VectorXd v = cols.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < kept; ++i) {
                double c = op.h() * kern::dot(cols.col(i).data(), v.data(),
                                              static_cast<std::size_t>(nO));
                kern::axpy(-c, cols.col(i).data(), v.data(), static_cast<std::size_t>(nO));
            }
        double nrm = sqrt_h * v.norm();
        if (nrm < 1e-12)
            throw Error(ErrorCode::ConfigError, "potential basis is numerically dependent");
        cols.col(kept) = v / nrm;
        ++kept;
    }
    span.g = cols.leftCols(kept);
    span.m = kept;
    span.gram = op.h() * (span.g.transpose() * span.g);
    return span;
}

Potential make_potential(const PotentialSpan& span, const Eigen::VectorXd& a) {
    if (a.size() != span.m)
        throw Error(ErrorCode::ConfigError, "coefficient count does not match basis dimension");
    Potential q = Potential::from_values(span.g * a);
    q.span_ref = &span;
    q.span_coeffs = a;
    return q;
}

TestPairs choose_test_pairs(const FracOperator& op, const PotentialSpan& span,
                            const TestPairOptions& opts) {
    const Lattice& lat = op.lattice();
    const int nO = lat.size(Region::Omega);
    const int m = span.m;
    const bool smooth = op.s() >= 0.5;

    TestPairs out;
    out.h1.resize(nO, m);
    out.h2.resize(nO, m);

    auto normalize = [&](Eigen::VectorXd v) {
        double nrm = op.l2_norm_local(v);
        if (!(nrm > 0.0))
            throw Error(ErrorCode::IllConditionedM, "degenerate test function");
        return Eigen::VectorXd(v / nrm);
    };
    auto reach_project = [&](const SVDData* svd, const Eigen::VectorXd& v) {
        if (svd == nullptr || opts.reach_modes <= 0) return v;
        int k = std::min(opts.reach_modes, svd->rank());
        Eigen::VectorXd coef = op.h() * (svd->psis.leftCols(k).transpose() * v);
        return Eigen::VectorXd(svd->psis.leftCols(k) * coef);
    };

    for (int l = 0; l < m; ++l) {
        Eigen::VectorXd base;
        if (span.kind == BasisKind::Trigonometric) {
            // Constant paired against the basis function reproduces g_l.
            base = Eigen::VectorXd::Ones(nO);
            out.h1.col(l) = normalize(reach_project(opts.reach1, base));
            out.h2.col(l) = normalize(reach_project(opts.reach2, span.g.col(l)));
            continue;
        }
        int cell = (span.kind == BasisKind::PiecewiseAffine) ? l % span.cells : l;
        base = cell_indicator(op, span.cells, cell);
        if (smooth) base = triangular_smooth(base, std::max(1, opts.mollifier_passes));
        if (span.kind == BasisKind::PiecewiseAffine && l >= span.cells) {
            // Second half of the affine family: pair the cell bump against
            // the orthonormalized slope function itself.
            out.h1.col(l) = normalize(reach_project(opts.reach1, base));
            out.h2.col(l) = normalize(reach_project(opts.reach2, span.g.col(l)));
        } else {
            out.h1.col(l) = normalize(reach_project(opts.reach1, base));
            out.h2.col(l) = normalize(reach_project(opts.reach2, base));
        }
    }

    out.M.resize(m, m);
    Eigen::VectorXd prod(nO);
    for (int l = 0; l < m; ++l) {
        kern::mul(out.h1.col(l).data(), out.h2.col(l).data(), prod.data(),
                  static_cast<std::size_t>(nO));
        for (int j = 0; j < m; ++j)
            out.M(l, j) = op.h() * kern::dot(span.g.col(j).data(), prod.data(),
                                             static_cast<std::size_t>(nO));
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.M);
    double smin = svd.singularValues()[m - 1];
    out.condM = smin > 0.0 ? svd.singularValues()[0] / smin
                           : std::numeric_limits<double>::infinity();
    if (!(out.condM < opts.cond_ceiling))
        throw Error(ErrorCode::IllConditionedM,
                    "pairing matrix condition " + std::to_string(out.condM) +
                        " exceeds the ceiling; adjust the mollifier");

    out.L0 = 0.0;
    out.L1 = 0.0;
    for (int l = 0; l < m; ++l) {
        Eigen::VectorXd a1 = extend_from(lat, out.h1.col(l), Region::Omega);
        Eigen::VectorXd a2 = extend_from(lat, out.h2.col(l), Region::Omega);
        out.L0 = std::max(out.L0, op.hs_norm(a1, Region::Omega) * op.hs_norm(a2, Region::Omega));
        out.L1 = std::max(out.L1, op.l2_norm_local(out.h1.col(l)) * op.l2_norm_local(out.h2.col(l)));
    }
    return out;
}

namespace {

void check_absorption(const TestPairs& pairs, double eps) {
    double bound = 0.5 / (pairs.condM * pairs.L0);
    if (eps > bound)
        throw Error(ErrorCode::AbsorptionViolated,
                    "eps " + std::to_string(eps) + " exceeds the absorption bound " +
                        std::to_string(bound));
}

Eigen::VectorXd solve_pairing_system(const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
    Eigen::VectorXd a = M.fullPivLu().solve(b);
    double rel = (M * a - b).norm() / std::max(1e-300, b.norm());
    if (rel > 1e-12 && b.norm() > 1e-13)
        throw Error(ErrorCode::ToleranceBreach, "pairing system solved only to " + std::to_string(rel));
    return a;
}

}  // namespace

ReconstructionResult reconstruct_oracle(const FracOperator& op, const Potential& q1,
                                        const Potential& q2, const PotentialSpan& span,
                                        const TestPairs& pairs, double eps) {
    check_absorption(pairs, eps);
    const Lattice& lat = op.lattice();
    const int m = span.m;

    ForwardSolver fs1(op, q1), fs2(op, q2);
    KernelSpaces ks1 = kernel_spaces(op, fs1), ks2 = kernel_spaces(op, fs2);
    RungeOperator A1 = assemble_A(fs1, ks1, Region::Window1);
    RungeOperator A2 = assemble_A(fs2, ks2, Region::Window2);
    SVDData svd1 = weighted_svd(A1), svd2 = weighted_svd(A2);

    DtNMatrix l1 = dtn_matrix(fs1, Region::Window1, Region::Window2);
    DtNMatrix l2 = dtn_matrix(fs2, Region::Window1, Region::Window2);
    Eigen::MatrixXd diff = l1.entries - l2.entries;

    ReconstructionResult out;
    out.rhs.resize(m);
    for (int l = 0; l < m; ++l) {
        ControlResult c1 = runge_control(svd1, pairs.h1.col(l), ByEps{eps});
        ControlResult c2 = runge_control(svd2, pairs.h2.col(l), ByEps{eps});
        Eigen::VectorXd f1 = restrict_to(lat, c1.f, Region::Window1);
        Eigen::VectorXd f2 = restrict_to(lat, c2.f, Region::Window2);
        Eigen::VectorXd df1 = diff * f1;
        out.rhs[l] = op.h() * kern::dot(df1.data(), f2.data(), static_cast<std::size_t>(f2.size()));
        out.controls.push_back(std::move(c1));
        out.controls.push_back(std::move(c2));
    }
    out.a_hat = solve_pairing_system(pairs.M, out.rhs);
    out.residual_bound = pairs.condM * eps * pairs.L0;
    out.iterations = 1;
    return out;
}

ReconstructionResult reconstruct_fixed_point(const FracOperator& op, const DtNAccess& measure,
                                             const Potential& q2_ref, const PotentialSpan& span,
                                             const TestPairs& pairs, double eps, int max_iter) {
    check_absorption(pairs, eps);
    const Lattice& lat = op.lattice();
    const int m = span.m;

    ForwardSolver fs2(op, q2_ref);
    KernelSpaces ks2 = kernel_spaces(op, fs2);
    RungeOperator A2 = assemble_A(fs2, ks2, Region::Window2);
    SVDData svd2 = weighted_svd(A2);
    // The W2 controls target the reference potential and stay fixed.
    std::vector<ControlResult> c2(static_cast<std::size_t>(m));
    std::vector<Eigen::VectorXd> f2(static_cast<std::size_t>(m));
    for (int l = 0; l < m; ++l) {
        c2[static_cast<std::size_t>(l)] = runge_control(svd2, pairs.h2.col(l), ByEps{eps});
        f2[static_cast<std::size_t>(l)] =
            restrict_to(lat, c2[static_cast<std::size_t>(l)].f, Region::Window2);
    }
    DtNMatrix l_ref = dtn_matrix(fs2, Region::Window1, Region::Window2);

    ReconstructionResult out;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
    out.converged = false;
    for (int it = 0; it < max_iter; ++it) {
        Potential q_t = make_potential(span, a);
        q_t.values += q2_ref.values;
        q_t.sup_bound = q_t.values.size() ? q_t.values.cwiseAbs().maxCoeff() : 0.0;
        ForwardSolver fs_t(op, q_t);
        KernelSpaces ks_t = kernel_spaces(op, fs_t);
        RungeOperator A_t = assemble_A(fs_t, ks_t, Region::Window1);
        SVDData svd_t = weighted_svd(A_t);

        Eigen::VectorXd b(m);
        out.controls.clear();
        bool feasible = true;
        for (int l = 0; l < m; ++l) {
            ControlResult c1;
            try {
                c1 = runge_control(svd_t, pairs.h1.col(l), ByEps{eps});
            } catch (const Error& e) {
                if (e.code() != ErrorCode::TargetUnreachable) throw;
                feasible = false;
                break;
            }
            Eigen::VectorXd f1_loc = restrict_to(lat, c1.f, Region::Window1);
            Eigen::VectorXd measured = measure(c1.f);
            Eigen::VectorXd reference = l_ref.entries * f1_loc;
            b[l] = op.h() *
                   kern::dot((measured - reference).eval().data(),
                             f2[static_cast<std::size_t>(l)].data(),
                             static_cast<std::size_t>(f2[static_cast<std::size_t>(l)].size()));
            out.controls.push_back(std::move(c1));
            out.controls.push_back(c2[static_cast<std::size_t>(l)]);
        }
        if (!feasible) break;  // iterate drifted outside the reachable regime

        Eigen::VectorXd a_next = solve_pairing_system(pairs.M, b);
        out.trace.push_back(a_next);
        out.rhs = b;
        ++out.iterations;
        if ((a_next - a).cwiseAbs().maxCoeff() <= 1e-8) {
            a = a_next;
            out.converged = true;
            break;
        }
        a = a_next;
    }
    out.a_hat = a;
    out.residual_bound = pairs.condM * eps * pairs.L0;
    return out;
}

ReconstructionResult reconstruct_cauchy(const FracOperator& op, const Potential& q1,
                                        const Potential& q2, const PotentialSpan& span,
                                        const TestPairs& pairs, double eps) {
    check_absorption(pairs, eps);
    const Lattice& lat = op.lattice();
    const int m = span.m;
    const Region WU = Region::WindowUnion;

    ForwardSolver fs1(op, q1), fs2(op, q2);
    KernelSpaces ks1 = kernel_spaces(op, fs1), ks2 = kernel_spaces(op, fs2);
    RungeOperator A1 = assemble_A(fs1, ks1, Region::Window1);
    RungeOperator A2 = assemble_A(fs2, ks2, Region::Window2);
    SVDData svd1 = weighted_svd(A1), svd2 = weighted_svd(A2);
    CauchyBasis c2_basis = cauchy_basis(fs2, ks2, WU);

    ReconstructionResult out;
    out.rhs.resize(m);
    Eigen::VectorXd F0 = Eigen::VectorXd::Zero(lat.size(Region::Omega));
    for (int l = 0; l < m; ++l) {
        ControlResult ctl1 = runge_control(svd1, pairs.h1.col(l), ByEps{eps});
        ControlResult ctl2 = runge_control(svd2, pairs.h2.col(l), ByEps{eps});

        // Solutions realizing the approximations: exterior control plus the
        // kernel component (itself a solution with zero exterior datum).
        LatticeFunction u1f = ks1.dim() > 0 ? solve_forward_kernel(fs1, ks1, ctl1.f, F0)
                                            : solve_forward(fs1, ctl1.f);
        LatticeFunction u2f = ks2.dim() > 0 ? solve_forward_kernel(fs2, ks2, ctl2.f, F0)
                                            : solve_forward(fs2, ctl2.f);
        Eigen::VectorXd u1 = u1f.values + extend_from(lat, ctl1.z, Region::Omega);
        Eigen::VectorXd u2 = u2f.values + extend_from(lat, ctl2.z, Region::Omega);

        Eigen::VectorXd p1 = cauchy_pair(op, u1, WU);
        Eigen::VectorXd p2 = cauchy_pair(op, u2, WU);
        Eigen::VectorXd v2 = cauchy_project(c2_basis, p1);
        Eigen::VectorXd d = p1 - v2;

        const int nW = static_cast<int>(p1.size()) / 2;
        double term1 = op.h() * kern::dot(d.tail(nW).data(), p2.head(nW).data(),
                                          static_cast<std::size_t>(nW));
        double term2 = op.h() * kern::dot(p2.tail(nW).data(), d.head(nW).data(),
                                          static_cast<std::size_t>(nW));
        out.rhs[l] = term1 - term2;
        out.controls.push_back(std::move(ctl1));
        out.controls.push_back(std::move(ctl2));
    }
    out.a_hat = solve_pairing_system(pairs.M, out.rhs);
    out.residual_bound = pairs.condM * eps * pairs.L0;
    out.iterations = 1;
    return out;
}

LipschitzReport lipschitz_estimate(const FracOperator& op, const PotentialSpan& span,
                                   int trials, std::uint64_t seed) {
    const int m = span.m;
    std::mt19937_64 rng(seed);

    Potential q_zero = Potential::zero(op.lattice());
    ForwardSolver fs0(op, q_zero);
    const double lambda1 = fs0.spectrum().eigenvalues[0];
    const double amp = 0.5 * lambda1 / std::sqrt(static_cast<double>(m));

    auto draw_coeffs = [&]() {
        Eigen::VectorXd a(m);
        for (int j = 0; j < m; ++j) a[j] = amp * (2.0 * uniform01(rng()) - 1.0);
        return a;
    };

    LipschitzReport rep;
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
        Potential qa = make_potential(span, draw_coeffs());
        Potential qb = make_potential(span, draw_coeffs());
        ForwardSolver fsa(op, qa), fsb(op, qb);
        DtNMatrix la = dtn_matrix(fsa, Region::Window1, Region::Window2);
        DtNMatrix lb = dtn_matrix(fsb, Region::Window1, Region::Window2);
        DtNMatrix d;
        d.entries = la.entries - lb.entries;
        d.from = Region::Window1;
        d.to = Region::Window2;
        double denom = dtn_star_norm(op, d);
        double num = (qa.values - qb.values).cwiseAbs().maxCoeff();
        if (denom > 0.0) rep.C_emp = std::max(rep.C_emp, num / denom);
    }

    // Central-difference Jacobian of a -> vec(DtN) at a = 0.
    const double step = 1e-4;
    const int rows = op.lattice().size(Region::Window2) * op.lattice().size(Region::Window1);
    Eigen::MatrixXd jac(rows, m);
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        e[j] = step;
        ForwardSolver fp(op, make_potential(span, e));
        ForwardSolver fm(op, make_potential(span, -e));
        Eigen::MatrixXd dp = dtn_matrix(fp, Region::Window1, Region::Window2).entries;
        Eigen::MatrixXd dm = dtn_matrix(fm, Region::Window1, Region::Window2).entries;
        Eigen::MatrixXd diff = (dp - dm) / (2.0 * step);
        jac.col(j) = Eigen::Map<Eigen::VectorXd>(diff.data(), rows);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    rep.sigma_min = svd.singularValues()[m - 1];
    return rep;
}

InstabilityReport instability_experiment(const FracOperator& op, int N, double delta,
                                         int sample_pairs, std::uint64_t seed) {
    const Lattice& lat = op.lattice();
    Potential q_zero = Potential::zero(lat);
    ForwardSolver fs0(op, q_zero);
    const double lambda1 = fs0.spectrum().eigenvalues[0];
    if (!(delta > 0.0) || delta > std::min(0.5 * lambda1, 1.0))
        throw Error(ErrorCode::DeltaTooLarge,
                    "delta must lie in (0, min(lambda_1/2, 1)) = (0, " +
                        std::to_string(std::min(0.5 * lambda1, 1.0)) + ")");

    std::vector<Eigen::VectorXd> cells;
    for (int j = 0; j < N; ++j) cells.push_back(cell_indicator(op, N, j));

    std::mt19937_64 rng(seed);
    auto draw_values = [&]() {
        std::vector<int> v(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j) v[static_cast<std::size_t>(j)] = static_cast<int>(rng() % 3) - 1;
        return v;
    };

    std::vector<std::pair<std::vector<int>, std::vector<int>>> sampled;
    std::map<std::vector<int>, int> potential_ids;
    std::vector<std::vector<int>> distinct;
    auto intern = [&](const std::vector<int>& v) {
        auto it = potential_ids.find(v);
        if (it != potential_ids.end()) return it->second;
        int id = static_cast<int>(distinct.size());
        potential_ids.emplace(v, id);
        distinct.push_back(v);
        return id;
    };
    std::vector<std::pair<int, int>> pair_ids;
    for (int t = 0; t < sample_pairs; ++t) {
        std::vector<int> v1 = draw_values();
        std::vector<int> v2 = draw_values();
        while (v2 == v1) v2 = draw_values();
        pair_ids.emplace_back(intern(v1), intern(v2));
    }

    // One DtN map per distinct potential, on the window union.
    std::vector<Eigen::MatrixXd> dtn(distinct.size());
    parallel_for(distinct.size(), [&](std::size_t i) {
        Eigen::VectorXd vals = Eigen::VectorXd::Zero(lat.size(Region::Omega));
        for (int j = 0; j < N; ++j)
            vals += delta * static_cast<double>(distinct[i][static_cast<std::size_t>(j)]) * cells[static_cast<std::size_t>(j)];
        ForwardSolver fs(op, Potential::from_values(vals));
        dtn[i] = dtn_matrix(fs, Region::WindowUnion, Region::WindowUnion).entries;
    });

    InstabilityReport rep;
    rep.pairs_sampled = sample_pairs;
    rep.distinct_potentials = static_cast<int>(distinct.size());
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& [i1, i2] : pair_ids) {
        int maxdiff = 0;
        for (int j = 0; j < N; ++j)
            maxdiff = std::max(maxdiff, std::abs(distinct[static_cast<std::size_t>(i1)][static_cast<std::size_t>(j)] -
                                                 distinct[static_cast<std::size_t>(i2)][static_cast<std::size_t>(j)]));
        double qdiff = delta * static_cast<double>(maxdiff);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(dtn[static_cast<std::size_t>(i1)] - dtn[static_cast<std::size_t>(i2)]);
        double ratio = svd.singularValues()[0] / qdiff;
        rep.ratios.push_back(ratio);
        rep.min_ratio = std::min(rep.min_ratio, ratio);
    }
    return rep;
}

}  // namespace fraccal
