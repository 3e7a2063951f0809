#pragma once

// Command-line driver. `run` parses arguments, resolves settings, dispatches
// the subcommand and writes CSV, JSON, .dat and manifest.json into the output
// directory. Exit codes: 0 success, 1 a check failed, 2 usage or
// configuration error.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diraclab/clifford.hpp"
#include "diraclab/config.hpp"
#include "diraclab/error.hpp"
#include "diraclab/estimators.hpp"
#include "diraclab/graphdirac.hpp"
#include "diraclab/liealg.hpp"
#include "diraclab/manifold.hpp"
#include "diraclab/specfun.hpp"

namespace diraclab::cli {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"algebra-check",   "specfun",          "geometry-check",
                                            "dirac-converge",  "laplace-converge", "bound-report"};
    return s;
}

namespace fs = std::filesystem;
using config::KeyValues;
using config::Settings;

struct Context {
    std::string subcommand;
    Settings settings;
    KeyValues resolved;  // manifest config
    std::ostream& out;
    std::ostream& err;
};

inline std::string fmt(double x) { return estimators::format_double(x); }

inline void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write '" + p.string() + "'");
    f << text;
}

inline void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

inline void write_manifest(const Context& ctx) {
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : ctx.resolved) cfg[k] = v;
    write_json(fs::path(ctx.settings.out) / "manifest.json",
               {{"artifact", "diraclab"}, {"version", kVersion}, {"subcommand", ctx.subcommand}, {"config", cfg}});
}

struct CheckRow {
    std::string name;
    int instances = 0;
    double max_err = 0.0;
    double tolerance = 0.0;
    bool pass() const { return max_err <= tolerance; }
};

inline bool write_checks(const Context& ctx, const std::string& stem, const std::vector<CheckRow>& rows) {
    std::ostringstream csv;
    csv << "check,instances,max_err,tolerance,pass\n";
    nlohmann::json j = nlohmann::json::array();
    bool ok = true;
    for (const auto& r : rows) {
        csv << r.name << ',' << r.instances << ',' << fmt(r.max_err) << ',' << fmt(r.tolerance) << ','
            << (r.pass() ? "true" : "false") << '\n';
        j.push_back({{"check", r.name},
                     {"instances", r.instances},
                     {"max_err", r.max_err},
                     {"tolerance", r.tolerance},
                     {"pass", r.pass()}});
        ok = ok && r.pass();
        ctx.out << (r.pass() ? "ok   " : "FAIL ") << r.name << "  max_err=" << fmt(r.max_err) << '\n';
    }
    write_text(fs::path(ctx.settings.out) / (stem + ".csv"), csv.str());
    write_json(fs::path(ctx.settings.out) / (stem + ".json"), {{"checks", j}, {"pass", ok}});
    return ok;
}

// ---------------------------------------------------------------------------
// algebra-check

struct AlgebraInstance {
    int N = 1;
    int s = 2;
    double hbar = 1.0;
    liealg::WeightMap weights;
    std::vector<double> a;
};

inline AlgebraInstance random_algebra_instance(std::mt19937_64& rng, int max_n, int s) {
    using manifold::uniform01;
    AlgebraInstance in;
    in.N = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_n));
    in.s = s;
    in.hbar = 0.1 + 9.9 * uniform01(rng);
    const int n = 2 * in.N;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            if (uniform01(rng) < 0.4) in.weights[{i, j}] = 0.1 + 1.9 * uniform01(rng);
    if (in.weights.empty()) in.weights[{1, n}] = 0.1 + 1.9 * uniform01(rng);
    for (int k = 0; k < n; ++k) in.a.push_back(2.0 * uniform01(rng) - 1.0);
    return in;
}

/// max |closed form - dense commutator| over `count` random instances.
inline double commutator_suite(std::uint64_t seed, int count, int s) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < count; ++t) {
        const auto in = random_algebra_instance(rng, 8, s);
        const auto D = liealg::dirac_from_W(liealg::build_W(in.weights, in.s, in.N), in.hbar);
        const liealg::DiagonalObservable a(in.a);
        const auto sym = liealg::commutator_closed_form(D, a).realize();
        const auto dense = liealg::commutator_concrete(D.concrete, a.realize());
        worst = std::max(worst, (sym - dense).cwiseAbs().maxCoeff());
    }
    return worst;
}

/// Symbolic identity: the closed-form Laplacian against half the reduced
/// bi-commutator, compared word by word.
inline double laplacian_suite(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < count; ++t) {
        const auto in = random_algebra_instance(rng, 8, 2);
        const auto D = liealg::dirac_from_W(liealg::build_W(in.weights, 2, in.N), in.hbar);
        const liealg::DiagonalObservable a(in.a);
        auto half = liealg::psi_reduce(liealg::bi_commutator(D, a));
        half *= 0.5;
        const auto closed = liealg::laplacian_closed_form(D, a);
        auto diff = half - closed;
        double scale = std::max(1.0, closed.max_abs());
        worst = std::max(worst, diff.max_abs() / scale);
    }
    return worst;
}

/// Concrete realization: for every vertex i, half the (i,i) block of
/// [D, [D, a]] equals the closed-form Laplacian of the edges at i.
inline double laplacian_concrete_suite(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < count; ++t) {
        const auto in = random_algebra_instance(rng, 8, 2);
        const auto D = liealg::dirac_from_W(liealg::build_W(in.weights, 2, in.N), in.hbar);
        const liealg::DiagonalObservable a(in.a);
        const auto A = a.realize();
        const auto bi = liealg::commutator_concrete(D.concrete, liealg::commutator_concrete(D.concrete, A));
        for (int v = 1; v <= 2 * in.N; ++v) {
            liealg::WeightMap local;
            for (const auto& [ij, w] : in.weights)
                if (ij.first == v || ij.second == v) local[ij] = w;
            liealg::Mat2 expect = liealg::Mat2::Zero();
            if (!local.empty()) {
                auto Dv = D;
                Dv.weights = local;
                expect = liealg::laplacian_closed_form(Dv, a).coeff({});
            }
            const liealg::Mat2 got = 0.5 * bi.block<2, 2>(2 * (v - 1), 2 * (v - 1));
            worst = std::max(worst, (got - expect).cwiseAbs().maxCoeff() / std::max(1.0, expect.cwiseAbs().maxCoeff()));
        }
    }
    return worst;
}

inline clifford::Multivector random_multivector(std::mt19937_64& rng, int d) {
    clifford::Multivector m(d);
    for (std::uint32_t k = 0; k < m.size(); ++k) m[k] = 2.0 * manifold::uniform01(rng) - 1.0;
    return m;
}

inline std::vector<CheckRow> clifford_suite(std::uint64_t seed) {
    using clifford::Multivector;
    std::mt19937_64 rng(seed);
    CheckRow assoc{"clifford_associativity", 0, 0.0, 1e-12};
    CheckRow anti{"clifford_anticommutation", 0, 0.0, 1e-12};
    CheckRow square{"clifford_generator_square", 0, 0.0, 1e-12};
    CheckRow dims{"clifford_dimension", 0, 0.0, 0.0};
    for (int d = 1; d <= 5; ++d) {
        for (int t = 0; t < 20; ++t) {
            const auto u = random_multivector(rng, d), v = random_multivector(rng, d), w = random_multivector(rng, d);
            const auto lhs = clifford::mv_mul(clifford::mv_mul(u, v), w);
            const auto rhs = clifford::mv_mul(u, clifford::mv_mul(v, w));
            assoc.max_err = std::max(assoc.max_err, (lhs - rhs).max_abs());
            ++assoc.instances;

            std::vector<double> x(d), y(d);
            for (int k = 0; k < d; ++k) {
                x[k] = 2.0 * manifold::uniform01(rng) - 1.0;
                y[k] = 2.0 * manifold::uniform01(rng) - 1.0;
            }
            const auto ex = clifford::embed_vector(x), ey = clifford::embed_vector(y);
            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += x[k] * y[k];
            const auto sym = clifford::mv_mul(ex, ey) + clifford::mv_mul(ey, ex);
            anti.max_err = std::max(anti.max_err, (sym - Multivector::scalar(d, -2.0 * dot)).max_abs());
            ++anti.instances;
        }
        for (int k = 1; k <= d; ++k) {
            const auto e = Multivector::blade(clifford::Blade::generator(k, d));
            square.max_err = std::max(square.max_err, (clifford::mv_mul(e, e) - Multivector::scalar(d, -1.0)).max_abs());
            ++square.instances;
        }
        // 2^d blades, linearly independent: distinct basis coordinates
        Eigen::MatrixXd basis(1u << d, 1u << d);
        for (std::uint32_t m = 0; m < (1u << d); ++m) {
            const auto b = Multivector::blade(clifford::Blade(m, d));
            for (std::uint32_t k = 0; k < b.size(); ++k) basis(k, m) = b[k];
        }
        const auto rank = Eigen::FullPivLU<Eigen::MatrixXd>(basis).rank();
        dims.max_err = std::max(dims.max_err, std::abs(static_cast<double>(rank) - std::ldexp(1.0, d)));
        ++dims.instances;
    }
    return {assoc, anti, square, dims};
}

inline int cmd_algebra_check(Context& ctx) {
    const std::uint64_t seed = ctx.settings.seed;
    std::vector<CheckRow> rows;
    rows.push_back({"commutator_closed_form_s2", 200, commutator_suite(seed, 200, 2), 1e-12});
    double general = 0.0;
    for (int s = 1; s <= 4; ++s) general = std::max(general, commutator_suite(seed + s, 50, s));
    rows.push_back({"commutator_closed_form_all_s", 200, general, 1e-12});
    rows.push_back({"laplacian_symbolic_identity", 100, laplacian_suite(seed + 11, 100), 1e-12});
    rows.push_back({"laplacian_concrete_realization", 100, laplacian_concrete_suite(seed + 12, 100), 1e-12});
    for (auto& r : clifford_suite(seed + 13)) rows.push_back(r);
    return write_checks(ctx, "algebra", rows) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// specfun

inline int cmd_specfun(Context& ctx) {
    const int d = ctx.settings.dim.value_or(3);
    if (d < 3) throw ConfigError("specfun needs dim >= 3");
    Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
    s(0) = 1.0;
    std::ostringstream csv;
    csv << "t,A,B,C,m1_par_over_t,m2_norm_over_t\n";
    nlohmann::json rows = nlohmann::json::array();
    for (double t : ctx.settings.t_grid) {
        const auto abc = specfun::lemma_abc(d, t);
        const auto m = specfun::vmf_moments(d, s, t, {}, ctx.settings.sign);
        const double par = m.m1.dot(s) / t;
        const double perp = (m.m1 - m.m1.dot(s) * s).cwiseAbs().maxCoeff();
        const double m2n = m.m2.operatorNorm() / t;
        csv << fmt(t) << ',' << fmt(abc.A) << ',' << fmt(abc.B) << ',' << fmt(abc.C_coef) << ',' << fmt(par) << ','
            << fmt(m2n) << '\n';
        rows.push_back({{"t", t},
                        {"A", abc.A},
                        {"B", abc.B},
                        {"C", abc.C_coef},
                        {"m1_par_over_t", par},
                        {"m1_perp_max", perp},
                        {"m2_norm_over_t", m2n},
                        {"m2_par_over_t", s.dot(m.m2 * s) / t}});
    }
    const auto cal = estimators::calibrate_sign();
    write_text(fs::path(ctx.settings.out) / "specfun.csv", csv.str());
    write_json(fs::path(ctx.settings.out) / "specfun.json",
               {{"d", d},
                {"rows", rows},
                {"sign_calibration", {{"t", cal.t}, {"plus", cal.plus}, {"minus", cal.minus}, {"sign", cal.sign}}}});
    ctx.out << csv.str();
    return 0;
}

// ---------------------------------------------------------------------------
// geometry-check

/// Gram determinant of d exp_p at v by Richardson-extrapolated central
/// differences in the frame directions.
inline double fd_volume_density(const manifold::ManifoldModel& M, const manifold::FramedPoint& fp,
                                const Eigen::VectorXd& y) {
    const int d = fp.dim();
    auto column = [&](int k, double h) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(d, k) * h;
        return Eigen::VectorXd((M.exp_map(fp.p, fp.to_tangent(y + e)) - M.exp_map(fp.p, fp.to_tangent(y - e))) /
                               (2.0 * h));
    };
    Eigen::MatrixXd Jm(M.ambient_dim(), d);
    const double h = 1e-3;
    for (int k = 0; k < d; ++k) Jm.col(k) = (4.0 * column(k, h / 2) - column(k, h)) / 3.0;
    return std::sqrt((Jm.transpose() * Jm).determinant());
}

inline std::vector<CheckRow> geometry_suite(const std::string& kind, int d, std::uint64_t seed) {
    const auto M = manifold::make_manifold(kind, d);
    std::mt19937_64 rng(seed);
    std::vector<CheckRow> rows;
    const double reach = std::isfinite(M->injectivity_radius()) ? 0.9 * M->injectivity_radius() : 5.0;

    CheckRow inv{kind + "_exp_log_inversion", 1000, 0.0, 1e-10};
    for (int t = 0; t < 1000; ++t) {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(M->ambient_dim());
        for (int k = 0; k < p.size(); ++k) p(k) = 2.0 * manifold::uniform01(rng) - 1.0;
        if (kind == "sphere") p.normalize();
        Eigen::VectorXd v(M->ambient_dim());
        for (int k = 0; k < v.size(); ++k) v(k) = 2.0 * manifold::uniform01(rng) - 1.0;
        if (kind == "sphere") v -= v.dot(p) * p;
        v *= reach * manifold::uniform01(rng) / v.norm();
        inv.max_err = std::max(inv.max_err, (M->log_map(p, M->exp_map(p, v)) - v).cwiseAbs().maxCoeff());
    }
    rows.push_back(inv);

    const auto fp = manifold::default_framed_point(*M);
    CheckRow vol{kind + "_vol_density_vs_exp_differential", 200, 0.0, 1e-8};
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd y(d);
        for (int k = 0; k < d; ++k) y(k) = 2.0 * manifold::uniform01(rng) - 1.0;
        y *= (kind == "sphere" ? 0.9 * std::numbers::pi / 2 : 1.0) * manifold::uniform01(rng) / y.norm();
        const double g = M->vol_density(fp.p, fp.to_tangent(y));
        vol.max_err = std::max(vol.max_err, std::abs(g - fd_volume_density(*M, fp, y)));
    }
    rows.push_back(vol);

    rows.push_back({kind + "_vol_density_gradient_at_0", d,
                    manifold::vol_density_gradient_fd(*M, fp).cwiseAbs().maxCoeff(), 1e-6});

    const auto jac = manifold::jacobi_expansion_check(*M, fp, fp.frame[0], fp.frame[1], {0.2, 0.1, 0.05});
    double violation = 0.0;
    for (std::size_t i = 1; i < jac.size(); ++i)
        violation = std::max(violation, jac[i].residual_over_t2 - jac[i - 1].residual_over_t2);
    if (kind == "flat")
        for (const auto& r : jac) violation = std::max(violation, std::abs(r.residual) - 1e-12);
    rows.push_back({kind + "_jacobi_residual_decreasing", static_cast<int>(jac.size()), std::max(0.0, violation), 0.0});
    return rows;
}

inline int cmd_geometry_check(Context& ctx) {
    const int d = ctx.settings.dim.value_or(2);
    std::vector<CheckRow> rows;
    for (const std::string kind : {"flat", "sphere"})
        for (auto& r : geometry_suite(kind, d, ctx.settings.seed)) rows.push_back(r);

    const auto S = manifold::make_manifold("sphere", d);
    const auto fp = manifold::default_framed_point(*S);
    std::ostringstream jac;
    jac << "t,residual,residual_over_t2\n";
    for (const auto& r : manifold::jacobi_expansion_check(*S, fp, fp.frame[0], fp.frame[1], {0.2, 0.1, 0.05}))
        jac << fmt(r.t) << ',' << fmt(r.residual) << ',' << fmt(r.residual_over_t2) << '\n';
    write_text(fs::path(ctx.settings.out) / "jacobi.csv", jac.str());
    return write_checks(ctx, "geometry", rows) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// convergence runs

inline void dump_run_operators(const Context& ctx, const estimators::RunConfig& cfg) {
    const fs::path dir(ctx.settings.dump_operators);
    fs::create_directories(dir);
    const auto M = manifold::make_manifold(cfg.manifold, cfg.d);
    const auto fp = manifold::default_framed_point(*M, cfg.delta_u);
    const auto kind = cfg.mode == estimators::Mode::dirac ? graphdirac::WeightKind::dirac : graphdirac::WeightKind::laplace;
    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        auto rng = estimators::task_rng(cfg.seed, ni, 0);
        std::vector<Eigen::VectorXd> pts;
        for (int j = 0; j <= cfg.d; ++j)
            pts.push_back(M->exp_map(fp.p, fp.to_tangent(manifold::sample_log_coords(*M, fp, rng))));
        const auto g = graphdirac::make_star_graph(cfg.d, pts);
        const double hbar = estimators::hbar_schedule(cfg.n_grid[ni], cfg.alpha);
        const auto D = graphdirac::assemble_dirac(g, *M, fp, hbar, cfg.sigma, kind);
        std::ofstream f(dir / ("D_n" + std::to_string(cfg.n_grid[ni]) + "_copy0.mtx"));
        graphdirac::write_matrix_market(f, D.matrix());
    }
}

inline int cmd_converge(Context& ctx, estimators::Mode mode) {
    const auto cfg = config::run_config(ctx.settings, mode);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = estimators::convergence_run(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const fs::path out(ctx.settings.out);
    std::ostringstream csv, dat;
    estimators::write_csv(csv, rep);
    estimators::write_dat(dat, rep);
    write_text(out / "report.csv", csv.str());
    write_text(out / "report.dat", dat.str());
    write_json(out / "report.json", estimators::to_json(rep));
    write_text(out / "timing.txt", "wall_seconds " + fmt(secs) + "\n");
    if (!ctx.settings.dump_operators.empty()) dump_run_operators(ctx, cfg);
    ctx.out << csv.str();
    if (rep.partial) {
        ctx.err << "run aborted: " << rep.error << '\n';
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// bound-report

inline int cmd_bound_report(Context& ctx) {
    const int d = ctx.settings.dim.value_or(2);
    const auto M = manifold::make_manifold(ctx.settings.manifold, d);
    const auto fp = manifold::default_framed_point(*M, ctx.settings.delta_u);
    const std::string fname = ctx.settings.function.empty() ? "x1" : ctx.settings.function;
    const auto a = estimators::named_function(fname, M, fp);
    const auto rows =
        estimators::pf_sweep(*M, fp, a, ctx.settings.hbar_grid, ctx.settings.seed, ctx.settings.sign);
    std::ostringstream csv;
    csv << "hbar,rho,ratio\n";
    nlohmann::json j = nlohmann::json::array();
    bool finite = true;
    for (const auto& r : rows) {
        csv << fmt(r.hbar) << ',' << fmt(r.rho) << ',' << fmt(r.ratio) << '\n';
        j.push_back({{"hbar", r.hbar}, {"rho", r.rho}, {"ratio", r.ratio}});
        finite = finite && std::isfinite(r.rho) && std::isfinite(r.ratio);
    }
    const fs::path out(ctx.settings.out);
    write_text(out / "bound.csv", csv.str());
    write_json(out / "bound.json", {{"function", a.name}, {"grad_sup", a.grad.cwiseAbs().maxCoeff()}, {"rows", j}});
    if (!ctx.settings.dump_operators.empty()) {
        const fs::path dir(ctx.settings.dump_operators);
        fs::create_directories(dir);
        auto rng = estimators::task_rng(ctx.settings.seed, 0, 0);
        std::vector<Eigen::VectorXd> pts;
        for (int k = 0; k <= d; ++k)
            pts.push_back(M->exp_map(fp.p, fp.to_tangent(manifold::sample_log_coords(*M, fp, rng))));
        const auto g = graphdirac::make_star_graph(d, pts);
        for (std::size_t i = 0; i < ctx.settings.hbar_grid.size(); ++i) {
            const auto D = graphdirac::assemble_dirac(g, *M, fp, ctx.settings.hbar_grid[i], ctx.settings.sign);
            std::ofstream f(dir / ("D_hbar" + std::to_string(i) + ".mtx"));
            graphdirac::write_matrix_market(f, D.matrix());
        }
    }
    ctx.out << csv.str();
    return finite ? 0 : 1;
}

// ---------------------------------------------------------------------------

inline int dispatch(Context& ctx) {
    fs::create_directories(ctx.settings.out);
    write_manifest(ctx);
    if (ctx.subcommand == "algebra-check") return cmd_algebra_check(ctx);
    if (ctx.subcommand == "specfun") return cmd_specfun(ctx);
    if (ctx.subcommand == "geometry-check") return cmd_geometry_check(ctx);
    if (ctx.subcommand == "dirac-converge") return cmd_converge(ctx, estimators::Mode::dirac);
    if (ctx.subcommand == "laplace-converge") return cmd_converge(ctx, estimators::Mode::laplace);
    if (ctx.subcommand == "bound-report") return cmd_bound_report(ctx);
    throw ConfigError("unknown subcommand '" + ctx.subcommand + "'");
}

inline int default_dim(const std::string& sub) { return sub == "specfun" ? 3 : 2; }

inline std::string usage() {
    std::string u = "usage: diraclab <subcommand> [options]\n\nsubcommands:\n";
    for (const auto& s : subcommands()) u += "  " + s + "\n";
    u += "\nrun 'diraclab --help' for options\n";
    return u;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (args.empty()) {
        err << usage();
        return 2;
    }

    CLI::App app{"Discrete Dirac and Laplace operator experiments", "diraclab"};
    app.set_version_flag("--version", std::string(kVersion));
    std::string manifold, n_grid, out_dir, dump, cfg_path, manifest_path, function;
    int dim = 0, repeats = 0, sign = 0, threads = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    auto* o_manifold = app.add_option("--manifold", manifold, "flat or sphere");
    auto* o_dim = app.add_option("--dim", dim, "intrinsic dimension");
    auto* o_alpha = app.add_option("--alpha", alpha, "bandwidth exponent, hbar = n^-alpha");
    auto* o_grid = app.add_option("--n-grid", n_grid, "comma separated sample counts");
    auto* o_rep = app.add_option("--repeats", repeats, "independent repeats per n");
    auto* o_seed = app.add_option("--seed", seed, "master seed (falls back to DIRACLAB_SEED)");
    auto* o_sign = app.add_option("--sign", sign, "kernel sign, +1 or -1");
    auto* o_out = app.add_option("--out", out_dir, "output directory");
    auto* o_threads = app.add_option("--threads", threads, "worker threads");
    auto* o_dump = app.add_option("--dump-operators", dump, "write operator matrices to DIR");
    auto* o_fn = app.add_option("--function", function, "test function: x1, r2 or embed1");
    app.add_option("--config", cfg_path, "key = value config file");
    app.add_option("--manifest", manifest_path, "re-run from a manifest.json");

    std::vector<CLI::App*> subs;
    for (const auto& s : subcommands()) subs.push_back(app.add_subcommand(s)->fallthrough());
    app.require_subcommand(0, 1);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << usage();
        return 2;
    }

    try {
        KeyValues kv;
        std::string sub;
        for (auto* s : subs)
            if (s->parsed()) sub = s->get_name();

        if (!manifest_path.empty()) {
            std::ifstream f(manifest_path);
            if (!f) throw ConfigError("cannot open manifest '" + manifest_path + "'");
            nlohmann::json m;
            try {
                f >> m;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("malformed manifest: " + std::string(e.what()));
            }
            if (!m.contains("subcommand") || !m.contains("config")) throw ConfigError("manifest lacks subcommand/config");
            if (sub.empty()) sub = m["subcommand"].get<std::string>();
            for (const auto& [k, v] : m["config"].items()) {
                if (!config::known_key(k)) throw ConfigError("manifest: unknown key '" + k + "'");
                kv[k] = v.get<std::string>();
            }
        } else {
            if (const char* env = std::getenv("DIRACLAB_SEED")) kv["seed"] = env;
            if (!cfg_path.empty())
                for (const auto& [k, v] : config::parse_config_file(cfg_path)) kv[k] = v;
        }
        if (sub.empty()) {
            err << usage();
            return 2;
        }

        if (o_manifold->count()) kv["manifold"] = manifold;
        if (o_dim->count()) kv["dim"] = std::to_string(dim);
        if (o_alpha->count()) kv["alpha"] = fmt(alpha);
        if (o_grid->count()) kv["n_grid"] = n_grid;
        if (o_rep->count()) kv["repeats"] = std::to_string(repeats);
        if (o_seed->count()) kv["seed"] = std::to_string(seed);
        if (o_sign->count()) kv["sign"] = std::to_string(sign);
        if (o_out->count()) kv["out"] = out_dir;
        if (o_threads->count()) kv["threads"] = std::to_string(threads);
        if (o_dump->count()) kv["dump_operators"] = dump;
        if (o_fn->count()) kv["function"] = function;

        Context ctx{sub, config::resolve(kv), {}, out, err};
        ctx.resolved = config::to_key_values(ctx.settings, default_dim(sub));
        return dispatch(ctx);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args);
}

}  // namespace diraclab::cli
