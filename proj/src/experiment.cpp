#include "fraccal/experiment.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "fraccal/csvio.hpp"
#include "fraccal/inverse.hpp"
#include "fraccal/parallel.hpp"

namespace fraccal {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "fraccal 0.1.0";

const std::set<std::string> kSubcommands = {
    "spectrum",  "forward",    "dtn",       "runge-curve", "density",
    "reconstruct", "lipschitz", "instability", "validate"};

// ---------------------------------------------------------------------------
// Config schema

json common_defaults() {
    return json{{"s", 0.5},
                {"h", 0.02},
                {"omega", json::array({-1.0, 1.0})},
                {"windows", json::array({json::array({2.0, 3.0}), json::array({-3.0, -2.0})})},
                {"seed", 0}};
}

json wide_windows() {
    return json::array({json::array({1.02, 3.5}), json::array({-3.5, -1.02})});
}

}  // namespace

json default_config(const std::string& subcommand) {
    json cfg = common_defaults();
    if (subcommand == "spectrum") {
        cfg["n_eigs"] = 10;
        cfg["q_const"] = 0.0;
    } else if (subcommand == "forward") {
        cfg["q_const"] = 0.0;
        cfg["datum_window"] = 1;
        cfg["datum_node"] = -1;  // -1: center node of the window
    } else if (subcommand == "dtn") {
        cfg["q_const"] = 0.0;
        cfg["from_window"] = 1;
        cfg["to_window"] = 1;
    } else if (subcommand == "runge-curve") {
        cfg["windows"] = wide_windows();
        cfg["q_const"] = 0.0;
        cfg["window"] = 1;
        cfg["target_interval"] = json::array({-0.5, 0.1});
        cfg["alphas"] = json::array();  // empty: use the singular-value ladder
    } else if (subcommand == "density") {
        cfg["h"] = 0.05;
        cfg["omega"] = json::array({-0.5, 0.5});
        cfg["windows"] = json::array({json::array({0.55, 1.75}), json::array({-1.75, -0.55})});
        cfg["window"] = 1;
        cfg["q2"] = "zero";
    } else if (subcommand == "reconstruct") {
        cfg["windows"] = wide_windows();
        cfg["mode"] = "oracle";
        cfg["basis"] = "piecewise_constant";
        cfg["N"] = 4;
        cfg["a_true"] = json::array({0.3, -0.2, 0.1, 0.0});
        cfg["epsilon"] = 0.0;  // 0: mode-dependent default
        cfg["q2"] = "zero";
        cfg["mollifier_passes"] = 100;
        cfg["reach_modes"] = 9;
        cfg["cond_ceiling"] = 1e6;
        cfg["max_iter"] = 25;
    } else if (subcommand == "lipschitz") {
        cfg["h"] = 1.0 / 60.0;
        cfg["basis"] = "piecewise_constant";
        cfg["n_values"] = json::array({2, 4, 6, 8, 10});
        cfg["trials"] = 20;
    } else if (subcommand == "instability") {
        cfg["h"] = 1.0 / 60.0;
        cfg["n_values"] = json::array({2, 4, 6, 8, 10});
        cfg["delta"] = 0.1;
        cfg["pairs"] = 500;
    } else if (subcommand == "validate") {
        cfg["subcommand"] = "spectrum";
    } else {
        throw Error(ErrorCode::ConfigError, "unknown subcommand '" + subcommand + "'");
    }
    return cfg;
}

json resolve_config(const std::string& subcommand, const json& user) {
    if (kSubcommands.find(subcommand) == kSubcommands.end())
        throw Error(ErrorCode::ConfigError, "unknown subcommand '" + subcommand + "'");
    json cfg = default_config(subcommand);
    if (subcommand == "validate" && user.contains("subcommand")) {
        // The target's keys become admissible for the validated config.
        std::string target = user.at("subcommand").get<std::string>();
        json target_defaults = default_config(target);
        for (auto it = target_defaults.begin(); it != target_defaults.end(); ++it)
            if (!cfg.contains(it.key())) cfg[it.key()] = it.value();
        cfg["subcommand"] = target;
    }
    if (!user.is_object())
        throw Error(ErrorCode::ConfigError, "config must be a single JSON object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (!cfg.contains(it.key()))
            throw Error(ErrorCode::ConfigError,
                        "unknown config key '" + it.key() + "' for subcommand " + subcommand);
        cfg[it.key()] = it.value();
    }
    return cfg;
}

namespace {

Interval parse_interval(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2)
        throw Error(ErrorCode::ConfigError, std::string(what) + " must be a [a, b] pair");
    Interval iv{j.at(0).get<double>(), j.at(1).get<double>()};
    if (!(iv.a < iv.b))
        throw Error(ErrorCode::ConfigError, std::string(what) + " must satisfy a < b");
    return iv;
}

struct Problem {
    FracOperator op;
    const Lattice& lat() const { return op.lattice(); }
};

Problem build_problem(const json& cfg) {
    Interval omega = parse_interval(cfg.at("omega"), "omega");
    std::vector<Interval> ws;
    for (const auto& w : cfg.at("windows")) ws.push_back(parse_interval(w, "window"));
    double h = cfg.at("h").get<double>();
    double s = cfg.at("s").get<double>();
    return Problem{FracOperator::assemble(Lattice::build(omega, ws, h), s)};
}

BasisKind parse_basis(const std::string& name) {
    if (name == "piecewise_constant") return BasisKind::PiecewiseConstant;
    if (name == "piecewise_affine") return BasisKind::PiecewiseAffine;
    if (name == "trigonometric") return BasisKind::Trigonometric;
    throw Error(ErrorCode::ConfigError, "unknown basis kind '" + name + "'");
}

Region parse_window_index(const json& cfg, const char* key, const Lattice& lat) {
    int k = cfg.at(key).get<int>();
    if (k < 1 || k > lat.num_windows())
        throw Error(ErrorCode::ConfigError, std::string(key) + " out of range");
    return window(k);
}

double mode_default_eps(const std::string& mode, double requested) {
    if (requested > 0.0) return requested;
    return mode == "fixed_point" ? 3e-3 : 1e-3;
}

// Reference potential named by the q2 config key: "zero" or "kernel" (the
// constant shift -lambda_1 placing a zero Dirichlet eigenvalue).
Potential reference_potential(const Problem& pb, const std::string& kind) {
    if (kind == "zero") return Potential::zero(pb.lat());
    if (kind == "kernel") {
        ForwardSolver fs(pb.op, Potential::zero(pb.lat()));
        return Potential::constant(pb.lat(), -fs.spectrum().eigenvalues[0]);
    }
    throw Error(ErrorCode::ConfigError, "q2 must be 'zero' or 'kernel'");
}

struct Emitter {
    std::string outdir;
    bool plot = false;
    json record;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    Emitter(const std::string& subcommand, const json& cfg, const std::string& out, bool p)
        : outdir(out), plot(p) {
        record["artifact"] = kVersion;
        record["subcommand"] = subcommand;
        record["config"] = cfg;
        record["metrics"] = json::array();
        record["provenance"] = json::array();
    }

    void table(const std::string& name, const CsvTable& t) {
        write_file_atomic(outdir + "/" + name + ".csv", t.to_string());
        record["metrics"].push_back(name);
    }

    void chart(const std::string& name, const SvgChart& c, const std::vector<double>& xs,
               const std::vector<double>& ys) {
        if (!plot) return;
        write_file_atomic(outdir + "/" + name + ".svg", c.render(xs, ys));
    }

    void note(const std::string& text) { record["provenance"].push_back(text); }

    void finish() {
        auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
        record["wall_clock_seconds"] = elapsed.count();
        write_file_atomic(outdir + "/record.json", record.dump(2) + "\n");
    }
};

// Least-squares line fit helper for the trend metrics.
struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit f;
    const double n = static_cast<double>(xs.size());
    if (xs.size() < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom <= 0) return f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double d = ys[i] - (f.slope * xs[i] + f.intercept);
        ss_res += d * d;
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

// ---------------------------------------------------------------------------
// Subcommand runners

void run_spectrum(const json& cfg, Emitter& em) {
    Problem pb = build_problem(cfg);
    Potential q = Potential::constant(pb.lat(), cfg.at("q_const").get<double>());
    Spectrum sp = dirichlet_spectrum(pb.op, q);
    int n = std::min<int>(cfg.at("n_eigs").get<int>(), static_cast<int>(sp.eigenvalues.size()));
    CsvTable t;
    t.header = {"k", "lambda"};
    for (int k = 0; k < n; ++k)
        t.add_row({std::to_string(k + 1), format_double(sp.eigenvalues[k])});
    em.table("eigenvalues", t);
    em.note("eigenvalues: dirichlet_spectrum on L_OmegaOmega + diag(q)");
}

void run_forward(const json& cfg, Emitter& em) {
    Problem pb = build_problem(cfg);
    Potential q = Potential::constant(pb.lat(), cfg.at("q_const").get<double>());
    ForwardSolver fs(pb.op, q);
    Region w = parse_window_index(cfg, "datum_window", pb.lat());
    int node = cfg.at("datum_node").get<int>();
    int nW = pb.lat().size(w);
    if (node < 0) node = nW / 2;
    if (node >= nW) throw Error(ErrorCode::ConfigError, "datum_node out of range");
    Eigen::VectorXd f_loc = Eigen::VectorXd::Zero(nW);
    f_loc[node] = 1.0;
    LatticeFunction u = solve_forward(fs, extend_from(pb.lat(), f_loc, w));

    CsvTable t;
    t.header = {"x", "u"};
    for (int i = 0; i < pb.lat().num_active(); ++i)
        t.add_row({format_double(pb.lat().node_x(i)), format_double(u.values[i])});
    em.table("solution", t);

    Eigen::VectorXd res = restrict_to(pb.lat(), pb.op.apply(u.values), Region::Omega) +
                          q.values.cwiseProduct(restrict_to(pb.lat(), u.values, Region::Omega));
    em.record["residual_l2"] = pb.op.l2_norm_local(res);
    em.note("solution: forward solve for a nodal exterior datum");
}

void run_dtn(const json& cfg, Emitter& em) {
    Problem pb = build_problem(cfg);
    Potential q = Potential::constant(pb.lat(), cfg.at("q_const").get<double>());
    ForwardSolver fs(pb.op, q);
    Region from = parse_window_index(cfg, "from_window", pb.lat());
    Region to = parse_window_index(cfg, "to_window", pb.lat());
    DtNMatrix dtn = dtn_matrix(fs, from, to);

    CsvTable t;
    t.header = {"i", "j", "value"};
    for (int i = 0; i < dtn.entries.rows(); ++i)
        for (int j = 0; j < dtn.entries.cols(); ++j)
            t.add_row({std::to_string(i), std::to_string(j), format_double(dtn.entries(i, j))});
    em.table("dtn", t);
    if (from == to) {
        double asym = (dtn.entries - dtn.entries.transpose()).norm() / dtn.entries.norm();
        em.record["relative_asymmetry"] = asym;
    }
    em.note("dtn: block assembly L_to,from - L_to,Omega S^{-1} L_Omega,from");
}

void run_runge_curve(const json& cfg, Emitter& em) {
    Problem pb = build_problem(cfg);
    Potential q = Potential::constant(pb.lat(), cfg.at("q_const").get<double>());
    ForwardSolver fs(pb.op, q);
    KernelSpaces ks = kernel_spaces(pb.op, fs);
    Region w = parse_window_index(cfg, "window", pb.lat());
    RungeOperator A = assemble_A(fs, ks, w);
    SVDData svd = weighted_svd(A);

    CsvTable sig;
    sig.header = {"k", "sigma"};
    std::vector<double> ks_idx, sigs;
    for (int k = 0; k < svd.rank(); ++k) {
        sig.add_row({std::to_string(k + 1), format_double(svd.sigmas[k])});
        ks_idx.push_back(k + 1);
        sigs.push_back(svd.sigmas[k]);
    }
    em.table("sigma", sig);
    em.chart("sigma", SvgChart{"singular values of the Runge operator", "k", "sigma_k", false, true},
             ks_idx, sigs);

    Interval ti = parse_interval(cfg.at("target_interval"), "target_interval");
    int nO = pb.lat().size(Region::Omega);
    Eigen::VectorXd target = Eigen::VectorXd::Zero(nO);
    for (int i = 0; i < nO; ++i) {
        double x = pb.lat().region_x(Region::Omega, i);
        if (x > ti.a && x < ti.b) target[i] = 1.0;
    }
    if (target.cwiseAbs().maxCoeff() == 0.0)
        throw Error(ErrorCode::EmptyTarget, "target interval holds no interior node");
    target /= pb.op.l2_norm_local(target);

    std::vector<double> alphas;
    for (const auto& a : cfg.at("alphas")) alphas.push_back(a.get<double>());
    if (alphas.empty())
        for (int k = 0; k < svd.rank(); ++k) alphas.push_back(svd.sigmas[k]);

    CostCurve curve = cost_curve(svd, target, alphas);
    CsvTable ct;
    ct.header = {"alpha", "eps", "cost", "modes"};
    std::vector<double> inv_eps, costs;
    for (const auto& p : curve.points) {
        ct.add_row({format_double(p.alpha), format_double(p.eps), format_double(p.cost),
                    std::to_string(p.modes)});
        if (p.eps > 0 && p.cost > 0) {
            inv_eps.push_back(1.0 / p.eps);
            costs.push_back(p.cost);
        }
    }
    em.table("cost_curve", ct);
    em.chart("cost_curve",
             SvgChart{"control cost against accuracy", "1/eps", "cost", true, true}, inv_eps,
             costs);

    CsvTable ft;
    ft.header = {"mu", "slope", "intercept", "r2"};
    for (const auto& f : curve.fits)
        ft.add_row({format_double(f.mu), format_double(f.slope), format_double(f.intercept),
                    format_double(f.r2)});
    em.table("cost_fit", ft);
    em.note("cost_curve: truncated-SVD controls over the threshold ladder");
}

void run_density(const json& cfg, Emitter& em) {
    Problem pb = build_problem(cfg);
    Potential q2 = reference_potential(pb, cfg.at("q2").get<std::string>());
    ForwardSolver fs(pb.op, q2);
    KernelSpaces ks = kernel_spaces(pb.op, fs);
    Region w = parse_window_index(cfg, "window", pb.lat());
    RungeOperator A = assemble_A(fs, ks, w);
    DensityReport rep = density_check(A);

    CsvTable t;
    t.header = {"k", "sigma"};
    for (int k = 0; k < rep.singular_values.size(); ++k)
        t.add_row({std::to_string(k + 1), format_double(rep.singular_values[k])});
    em.table("density", t);
    em.record["rank"] = rep.rank;
    em.record["n_omega"] = rep.n_omega;
    em.record["domain_dim"] = rep.domain_dim;
    em.record["kernel_dim"] = rep.kernel_dim;
    em.note("density: singular values of the L2_h-whitened column stack [A | Z2]");
}

void run_reconstruct(const json& cfg, Emitter& em) {
    Problem pb = build_problem(cfg);
    std::string mode = cfg.at("mode").get<std::string>();
    if (mode != "oracle" && mode != "fixed_point" && mode != "cauchy")
        throw Error(ErrorCode::ConfigError, "mode must be oracle, fixed_point or cauchy");
    double eps = mode_default_eps(mode, cfg.at("epsilon").get<double>());

    PotentialSpan span = make_basis(pb.op, parse_basis(cfg.at("basis").get<std::string>()),
                                    cfg.at("N").get<int>());
    Eigen::VectorXd a_true(span.m);
    {
        const auto& arr = cfg.at("a_true");
        if (static_cast<int>(arr.size()) != span.m)
            throw Error(ErrorCode::ConfigError, "a_true must have m = " + std::to_string(span.m) +
                                                    " entries");
        for (int j = 0; j < span.m; ++j) a_true[j] = arr.at(j).get<double>();
    }
    Potential q2 = reference_potential(pb, cfg.at("q2").get<std::string>());
    Potential q1 = make_potential(span, a_true);
    q1.values += q2.values;
    q1.sup_bound = q1.values.size() ? q1.values.cwiseAbs().maxCoeff() : 0.0;

    // Test pairs: mollified cell bumps, regularized onto the reachable span
    // of each side's reference operator when requested.
    ForwardSolver fs1(pb.op, q1), fs2(pb.op, q2);
    KernelSpaces ks1 = kernel_spaces(pb.op, fs1), ks2 = kernel_spaces(pb.op, fs2);
    RungeOperator A1 = assemble_A(fs1, ks1, Region::Window1);
    RungeOperator A2 = assemble_A(fs2, ks2, Region::Window2);
    SVDData svd1 = weighted_svd(A1), svd2 = weighted_svd(A2);

    TestPairOptions opts;
    opts.mollifier_passes = cfg.at("mollifier_passes").get<int>();
    opts.cond_ceiling = cfg.at("cond_ceiling").get<double>();
    opts.reach_modes = cfg.at("reach_modes").get<int>();
    if (opts.reach_modes > 0) {
        opts.reach1 = &svd1;
        opts.reach2 = &svd2;
    }
    TestPairs pairs = choose_test_pairs(pb.op, span, opts);

    ReconstructionResult res;
    if (mode == "oracle") {
        res = reconstruct_oracle(pb.op, q1, q2, span, pairs, eps);
    } else if (mode == "cauchy") {
        res = reconstruct_cauchy(pb.op, q1, q2, span, pairs, eps);
    } else {
        ForwardSolver fs_hidden(pb.op, q1);
        DtNMatrix hidden = dtn_matrix(fs_hidden, Region::Window1, Region::Window2);
        DtNAccess measure = [&pb, &hidden](const Eigen::VectorXd& f) {
            return Eigen::VectorXd(hidden.entries * restrict_to(pb.lat(), f, Region::Window1));
        };
        res = reconstruct_fixed_point(pb.op, measure, q2, span, pairs, eps,
                                      cfg.at("max_iter").get<int>());
    }

    CsvTable t;
    t.header = {"j", "a_true", "a_hat", "abs_error"};
    for (int j = 0; j < span.m; ++j)
        t.add_row({std::to_string(j), format_double(a_true[j]), format_double(res.a_hat[j]),
                   format_double(std::abs(res.a_hat[j] - a_true[j]))});
    em.table("reconstruction", t);

    CsvTable c;
    c.header = {"l", "window", "eps_achieved", "cost", "alpha", "modes"};
    for (std::size_t i = 0; i < res.controls.size(); ++i) {
        const auto& ctl = res.controls[i];
        c.add_row({std::to_string(i / 2), std::to_string(i % 2 + 1),
                   format_double(ctl.eps_achieved), format_double(ctl.cost),
                   format_double(ctl.alpha_used), std::to_string(ctl.modes_used)});
    }
    em.table("controls", c);

    if (mode == "fixed_point") {
        CsvTable tr;
        tr.header = {"iter"};
        for (int j = 0; j < span.m; ++j) tr.header.push_back("a" + std::to_string(j));
        for (std::size_t it = 0; it < res.trace.size(); ++it) {
            std::vector<std::string> row = {std::to_string(it + 1)};
            for (int j = 0; j < span.m; ++j) row.push_back(format_double(res.trace[it][j]));
            tr.add_row(row);
        }
        em.table("trace", tr);
        em.record["converged"] = res.converged;
        em.record["iterations"] = res.iterations;
    }
    double denom = a_true.cwiseAbs().maxCoeff();
    if (denom > 0)
        em.record["relative_sup_error"] = (res.a_hat - a_true).cwiseAbs().maxCoeff() / denom;
    em.record["residual_bound"] = res.residual_bound;
    em.record["condM"] = pairs.condM;
    em.record["L0"] = pairs.L0;
    em.record["epsilon_used"] = eps;
    em.note("reconstruction: M a = b with b from DtN/Cauchy pairings of Runge controls");
}

void run_lipschitz(const json& cfg, Emitter& em) {
    Problem pb = build_problem(cfg);
    BasisKind kind = parse_basis(cfg.at("basis").get<std::string>());
    int trials = cfg.at("trials").get<int>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

    std::vector<int> ns;
    for (const auto& n : cfg.at("n_values")) ns.push_back(n.get<int>());

    CsvTable t;
    t.header = {"N", "C_emp", "sigma_min"};
    std::vector<double> xs, cs;
    for (int N : ns) {
        PotentialSpan span = make_basis(pb.op, kind, N);
        LipschitzReport rep = lipschitz_estimate(pb.op, span, trials, seed);
        t.add_row({std::to_string(N), format_double(rep.C_emp), format_double(rep.sigma_min)});
        xs.push_back(N);
        cs.push_back(rep.C_emp);
    }
    em.table("lipschitz", t);
    em.chart("lipschitz", SvgChart{"empirical Lipschitz constant", "N", "C_emp", false, true}, xs,
             cs);
    em.note("lipschitz: max ||q1-q2||_inf / ||DtN difference||_* over sampled pairs");
}

void run_instability(const json& cfg, Emitter& em) {
    Problem pb = build_problem(cfg);
    double delta = cfg.at("delta").get<double>();
    int pairs = cfg.at("pairs").get<int>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

    std::vector<int> ns;
    for (const auto& n : cfg.at("n_values")) ns.push_back(n.get<int>());

    CsvTable t;
    t.header = {"N", "min_ratio", "pairs", "distinct_potentials"};
    std::vector<double> xs, ys, logy;
    for (int N : ns) {
        InstabilityReport rep = instability_experiment(pb.op, N, delta, pairs, seed);
        t.add_row({std::to_string(N), format_double(rep.min_ratio), std::to_string(rep.pairs_sampled),
                   std::to_string(rep.distinct_potentials)});
        xs.push_back(N);
        ys.push_back(rep.min_ratio);
        logy.push_back(std::log(rep.min_ratio));
    }
    em.table("instability", t);
    em.chart("instability",
             SvgChart{"distinguishability of delta-discrete potentials", "N", "min ratio", false,
                      true},
             xs, ys);

    LineFit fit = fit_line(xs, logy);
    CsvTable ft;
    ft.header = {"slope", "intercept", "r2"};
    ft.add_row({format_double(fit.slope), format_double(fit.intercept), format_double(fit.r2)});
    em.table("instability_fit", ft);
    em.note("instability: min ||DtN diff||_{L2->L2} / ||q1-q2||_inf over sampled pairs");
}

}  // namespace

void run_experiment(const std::string& subcommand, const json& config, const std::string& outdir,
                    bool plot) {
    Emitter em(subcommand, config, outdir, plot);
    if (subcommand == "spectrum")
        run_spectrum(config, em);
    else if (subcommand == "forward")
        run_forward(config, em);
    else if (subcommand == "dtn")
        run_dtn(config, em);
    else if (subcommand == "runge-curve")
        run_runge_curve(config, em);
    else if (subcommand == "density")
        run_density(config, em);
    else if (subcommand == "reconstruct")
        run_reconstruct(config, em);
    else if (subcommand == "lipschitz")
        run_lipschitz(config, em);
    else if (subcommand == "instability")
        run_instability(config, em);
    else
        throw Error(ErrorCode::ConfigError, "unknown subcommand '" + subcommand + "'");
    em.finish();
}

int validate_config(const json& config, std::ostream& out) {
    int violations = 0;
    auto flag = [&](ErrorCode code, const std::string& msg) {
        out << error_code_name(code) << ": " << msg << "\n";
        ++violations;
    };

    std::string target = config.value("subcommand", std::string("spectrum"));
    json cfg;
    try {
        json user = config;
        user.erase("subcommand");
        cfg = resolve_config(target, user);
    } catch (const Error& e) {
        flag(e.code(), e.what());
        return violations;
    }

    double s = cfg.at("s").get<double>();
    if (!(s > 0.0 && s < 1.0)) flag(ErrorCode::InvalidOrder, "s must lie in (0,1)");

    // Geometry checks (alignment, separation, emptiness).
    std::optional<Problem> pb;
    try {
        pb.emplace(build_problem(cfg));
    } catch (const Error& e) {
        flag(e.code(), e.what());
    }

    if (pb && (s > 0.0 && s < 1.0)) {
        const Lattice& lat = pb->lat();
        const FracOperator& op = pb->op;
        ForwardSolver fs(op, Potential::zero(lat));
        double lambda1 = fs.spectrum().eigenvalues[0];
        out << "lambda_1 = " << lambda1 << "\n";

        if (cfg.contains("N") || cfg.contains("n_values")) {
            std::vector<int> ns;
            if (cfg.contains("n_values"))
                for (const auto& n : cfg.at("n_values")) ns.push_back(n.get<int>());
            if (cfg.contains("N")) ns.push_back(cfg.at("N").get<int>());
            for (int N : ns) {
                if (N >= 1 && lat.omega_intervals() % N != 0)
                    flag(ErrorCode::PartitionNotAligned,
                         "N=" + std::to_string(N) + " does not divide the " +
                             std::to_string(lat.omega_intervals()) + " lattice cells of omega");
            }
        }
        if (cfg.contains("delta")) {
            double delta = cfg.at("delta").get<double>();
            double bound = std::min(0.5 * lambda1, 1.0);
            if (!(delta > 0.0) || delta > bound)
                flag(ErrorCode::DeltaTooLarge,
                     "delta = " + std::to_string(delta) + " exceeds min(lambda_1/2, 1) = " +
                         std::to_string(bound));
        }
        if (target == "reconstruct" && violations == 0) {
            try {
                PotentialSpan span = make_basis(op, parse_basis(cfg.at("basis").get<std::string>()),
                                                cfg.at("N").get<int>());
                TestPairOptions opts;
                opts.mollifier_passes = cfg.at("mollifier_passes").get<int>();
                opts.cond_ceiling = cfg.at("cond_ceiling").get<double>();
                TestPairs pairs = choose_test_pairs(op, span, opts);
                double eps = mode_default_eps(cfg.at("mode").get<std::string>(),
                                              cfg.at("epsilon").get<double>());
                double bound = 0.5 / (pairs.condM * pairs.L0);
                out << "absorption bound = " << bound << " (eps = " << eps << ")\n";
                if (eps > bound)
                    flag(ErrorCode::AbsorptionViolated, "eps exceeds 1/2 (condM L0)^{-1}");
            } catch (const Error& e) {
                flag(e.code(), e.what());
            }
        }
    }

    if (violations == 0) out << "OK\n";
    return violations;
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::EndpointNotAligned:
        case ErrorCode::RegionsTouch:
        case ErrorCode::EmptyRegion:
        case ErrorCode::InvalidOrder:
        case ErrorCode::PartitionNotAligned:
        case ErrorCode::SupportViolation:
        case ErrorCode::GramMismatch:
            return 1;
        case ErrorCode::NearSingular:
        case ErrorCode::IncompatibleData:
        case ErrorCode::TargetUnreachable:
        case ErrorCode::EmptyTarget:
        case ErrorCode::IllConditionedM:
        case ErrorCode::AbsorptionViolated:
        case ErrorCode::InadmissibleControl:
        case ErrorCode::DeltaTooLarge:
            return 2;
        case ErrorCode::GramNotSPD:
        case ErrorCode::ToleranceBreach:
            return 3;
    }
    return 3;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"fraccal: a numerical laboratory for the fractional Schrodinger "
                 "inverse problem in one dimension"};
    app.require_subcommand(1);

    std::string config_path, outdir = "fraccal_out";
    bool plot = false;
    long long seed_override = -1;
    app.add_option("--config", config_path, "experiment config (flat JSON object)");
    app.add_option("--out", outdir, "output directory");
    app.add_flag("--plot", plot, "emit SVG charts of the primary curves");
    app.add_option("--seed", seed_override, "override the config seed");

    // Direct overrides for the most common sweep knobs.
    long long n_override = -1, pairs_override = -1;
    double delta_override = -1.0;
    std::string mode_override;
    app.add_option("--N", n_override, "partition size override");
    app.add_option("--delta", delta_override, "instability contrast override");
    app.add_option("--pairs", pairs_override, "sampled pair count override");
    app.add_option("--mode", mode_override, "reconstruction mode override");

    for (const auto& name : kSubcommands) app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    std::string subcommand;
    for (const auto& name : kSubcommands)
        if (app.got_subcommand(name)) subcommand = name;

    try {
        json user = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw Error(ErrorCode::ConfigError, "cannot read config file " + config_path);
            try {
                user = json::parse(in);
            } catch (const json::exception& e) {
                throw Error(ErrorCode::ConfigError, std::string("config parse error: ") + e.what());
            }
        }
        if (seed_override >= 0) user["seed"] = static_cast<std::uint64_t>(seed_override);
        if (n_override >= 0) {
            if (subcommand == "instability" || subcommand == "lipschitz")
                user["n_values"] = json::array({n_override});
            else
                user["N"] = n_override;
        }
        if (delta_override >= 0) user["delta"] = delta_override;
        if (pairs_override >= 0) user["pairs"] = pairs_override;
        if (!mode_override.empty()) user["mode"] = mode_override;

        if (subcommand == "validate") {
            json cfg = user;
            return validate_config(cfg, std::cout) == 0 ? 0 : 1;
        }
        json cfg = resolve_config(subcommand, user);
        run_experiment(subcommand, cfg, outdir, plot);
        return 0;
    } catch (const Error& e) {
        std::cerr << "fraccal: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "fraccal: internal: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace fraccal
