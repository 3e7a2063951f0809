// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "diraclab/diraclab.hpp"

using namespace diraclab;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240607;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "/" : "") + num(v[i]);
    return s;
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = cli::commutator_suite(kSeed, 200, 2);
    for (int s = 1; s <= 4; ++s) worst = std::max(worst, cli::commutator_suite(kSeed + s, 50, s));
    const double secs = seconds_since(t0);
    report(1, worst <= 1e-12 && secs < 10.0, "max_abs " + num(worst) + ", " + num(secs) + " s");
}

void criterion2() {
    const auto t0 = std::chrono::steady_clock::now();
    const double sym = cli::laplacian_suite(kSeed + 11, 100);
    const double conc = cli::laplacian_concrete_suite(kSeed + 12, 100);
    const double secs = seconds_since(t0);
    report(2, sym <= 1e-12 && conc <= 1e-12 && secs < 10.0,
           "symbolic " + num(sym) + ", realized " + num(conc) + ", " + num(secs) + " s");
}

void criterion3() {
    bool ok = true;
    std::string detail;
    for (const auto& r : cli::clifford_suite(kSeed + 13)) {
        ok = ok && r.pass();
        detail += r.name + " " + num(r.max_err) + "; ";
    }
    // left-regular representation in d = 3 against an explicit matrix product
    const int d = 3, n = 8;
    std::mt19937_64 rng(kSeed);
    double reg = 0.0;
    for (int t = 0; t < 20; ++t) {
        const auto u = cli::random_multivector(rng, d), v = cli::random_multivector(rng, d);
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
        for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(n); ++a)
            for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(n); ++b) {
                const auto p = clifford::blade_mul(clifford::Blade(a, d), clifford::Blade(b, d));
                L(p.blade.mask, b) += p.sign * u[a];
            }
        Eigen::VectorXd vv(n);
        for (int k = 0; k < n; ++k) vv(k) = v[k];
        const Eigen::VectorXd w = L * vv;
        const auto uv = clifford::mv_mul(u, v);
        for (int k = 0; k < n; ++k) reg = std::max(reg, std::abs(w(k) - uv[k]));
    }
    ok = ok && reg <= 1e-12;
    report(3, ok, detail + "regular_rep " + num(reg));
}

void criterion4() {
    double bessel = 0.0;
    for (double x = 0.1; x <= 200.0; x *= 1.01) {
        const double e = std::exp(-2.0 * x);
        const double pre = std::sqrt(2.0 / (std::numbers::pi * x));
        const double i12 = pre * 0.5 * (1.0 - e);
        const double i32 = pre * (0.5 * (1.0 + e) - 0.5 * (1.0 - e) / x);
        bessel = std::max(bessel, std::abs(specfun::bessel_i_scaled(0.5, x) - i12) / i12);
        bessel = std::max(bessel, std::abs(specfun::bessel_i_scaled(1.5, x) - i32) / i32);
    }
    double c3 = 0.0;
    for (double b = 0.5; b <= 50.0; b += 0.5) {
        const double closed = b / (4.0 * std::numbers::pi * std::sinh(b));
        c3 = std::max(c3, std::abs(specfun::c_d(3, b) - closed) / closed);
    }
    std::vector<double> a, bb, c;
    for (double t : {0.2, 0.1, 0.05, 0.02}) {
        const auto v = specfun::lemma_abc(3, t);
        a.push_back(std::abs(v.A - 1.0));
        bb.push_back(std::abs(v.B));
        c.push_back(std::abs(v.C_coef));
    }
    const bool ok = bessel <= 1e-10 && c3 <= 1e-10 && strictly_decreasing(a) && strictly_decreasing(bb) &&
                    strictly_decreasing(c);
    report(4, ok,
           "bessel " + num(bessel) + ", C_3 " + num(c3) + ", |A-1| " + join(a) + ", |B| " + join(bb) + ", |C| " +
               join(c));
}

void criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    const int d = 3;
    Eigen::VectorXd s(d);
    s << 1.0, 2.0, 2.0;
    s /= 3.0;
    double perp = 0.0;
    std::vector<double> m2n;
    for (double t : {0.2, 0.1, 0.05, 0.02}) {
        const auto m = specfun::vmf_moments(d, s, t);
        perp = std::max(perp, ((m.m1 - m.m1.dot(s) * s) / t).cwiseAbs().maxCoeff());
        m2n.push_back(m.m2.operatorNorm() / t);
    }
    const double secs = seconds_since(t0);
    report(5, perp < 1e-6 && strictly_decreasing(m2n) && secs < 60.0,
           "m1 perp " + num(perp) + ", |m2|/t " + join(m2n) + ", " + num(secs) + " s");
}

void criterion6() {
    bool ok = true;
    std::string detail;
    for (const std::string kind : {"flat", "sphere"})
        for (const auto& r : cli::geometry_suite(kind, 2, kSeed)) {
            ok = ok && r.pass();
            detail += r.name + " " + num(r.max_err) + "; ";
        }
    double dens = 0.0;
    for (int d = 2; d <= 4; ++d) {
        const manifold::Sphere S(d);
        const auto fp = manifold::default_framed_point(S);
        for (double r = 0.05; r < 3.0; r += 0.05) {
            Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
            y(0) = r;
            dens = std::max(dens, std::abs(S.vol_density(fp.p, fp.to_tangent(y)) - std::pow(std::sin(r) / r, d - 1)));
        }
    }
    ok = ok && dens <= 1e-10;
    report(6, ok, detail + "sphere_density " + num(dens));
}

// (a) mean within 3 SE of the oracle, (b) oracle error decreasing in n,
// (c) final error below `tol`. Only the j = 1 (or Laplacian) rows enter (b), (c).
bool convergence_verdict(const estimators::ConvergenceReport& rep, double tol, std::string& detail) {
    bool within = true;
    std::vector<double> oracle_err;
    double final_err = 0.0;
    for (const auto& r : rep.rows) {
        within = within && std::abs(r.estimate_mean - r.oracle) <= 3.0 * r.estimate_se;
        if (r.j <= 1) {
            oracle_err.push_back(std::abs(r.oracle - r.target));
            final_err = r.abs_err;
        }
    }
    const bool mono = strictly_decreasing(oracle_err);
    detail += rep.cfg.manifold + ": 3SE " + (within ? "ok" : "no") + ", oracle err " + join(oracle_err) + " (" +
              (mono ? "monotone" : "not monotone") + "), final err " + num(final_err) + "; ";
    return !rep.partial && within && mono && final_err < tol;
}

estimators::RunConfig base_config(estimators::Mode mode) {
    estimators::RunConfig cfg;
    cfg.mode = mode;
    cfg.alpha = 0.2;
    cfg.n_grid = {1000, 10000, 100000};
    cfg.repeats = 50;
    cfg.seed = kSeed;
    cfg.family = false;
    cfg.threads = 1;
    return cfg;
}

void criterion7() {
    std::string detail;
    bool ok = true;
    double worst_secs = 0.0;
    for (const std::string kind : {"flat", "sphere"}) {
        auto cfg = base_config(estimators::Mode::dirac);
        cfg.manifold = kind;
        const auto t0 = std::chrono::steady_clock::now();
        const auto rep = estimators::convergence_run(cfg);
        worst_secs = std::max(worst_secs, seconds_since(t0));
        ok = convergence_verdict(rep, 0.1, detail) && ok;
    }
    ok = ok && worst_secs < 300.0;
    report(7, ok, detail + num(worst_secs) + " s");
}

void criterion8() {
    std::string detail;
    auto cfg = base_config(estimators::Mode::laplace);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = estimators::convergence_run(cfg);
    const double secs = seconds_since(t0);
    const bool ok = convergence_verdict(rep, 0.4, detail) && secs < 300.0;
    report(8, ok, detail + num(secs) + " s");
}

void criterion9() {
    const auto M = manifold::make_manifold("flat", 2);
    const auto fp = manifold::default_framed_point(*M);
    const auto a = estimators::named_function("x1", M, fp);
    const auto rows = estimators::pf_sweep(*M, fp, a, {1.0, 0.5, 0.1, 0.05}, kSeed, graphdirac::kCalibratedSign);
    bool finite = true;
    std::vector<double> ratios;
    for (const auto& r : rows) {
        finite = finite && std::isfinite(r.rho) && std::isfinite(r.ratio);
        ratios.push_back(r.ratio);
    }
    // baseline rows for flat d = 2
    std::ifstream in(std::string(DIRACLAB_DATA_DIR) + "/pf_baseline.csv");
    std::string line;
    std::getline(in, line);
    double worst = 0.0;
    int matched = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kind, d, h, rho;
        std::getline(ls, kind, ',');
        std::getline(ls, d, ',');
        std::getline(ls, h, ',');
        std::getline(ls, rho, ',');
        if (kind != "flat" || d != "2") continue;
        for (const auto& r : rows)
            if (std::abs(r.hbar - std::stod(h)) < 1e-12) {
                worst = std::max(worst, std::abs(r.rho - std::stod(rho)) / std::stod(rho));
                ++matched;
            }
    }
    report(9, finite && matched == 4 && worst <= 0.05,
           "ratio " + join(ratios) + ", baseline drift " + num(worst) + " over " + std::to_string(matched) + " rows");
}

void criterion10() {
    const fs::path root = fs::temp_directory_path() / "diraclab_acceptance";
    fs::remove_all(root);
    auto run = [](std::vector<std::string> args) {
        std::ostringstream out, err;
        return cli::run(args, out, err);
    };
    bool ok = true;
    std::string detail;
    for (const std::string sub : {"dirac-converge", "laplace-converge", "bound-report", "specfun", "algebra-check"}) {
        const auto a = root / (sub + "_t1"), b = root / (sub + "_t4"), c = root / (sub + "_manifest");
        std::vector<std::string> args{sub, "--out", a.string(), "--threads", "1"};
        if (sub.find("converge") != std::string::npos)
            args.insert(args.end(), {"--n-grid", "100,1000", "--repeats", "8", "--manifold", "sphere"});
        ok = run(args) == 0 && ok;
        args[2] = b.string();
        args[4] = "4";
        ok = run(args) == 0 && ok;
        ok = run({"--manifest", (a / "manifest.json").string(), "--out", c.string(), "--threads", "3"}) == 0 && ok;
        int files = 0;
        for (const auto& e : fs::directory_iterator(a)) {
            const auto name = e.path().filename();
            if (name == "timing.txt") continue;
            const std::string ref = slurp(e.path());
            const bool same = ref == slurp(b / name) && ref == slurp(c / name);
            if (!same) detail += sub + "/" + name.string() + " differs; ";
            ok = ok && same;
            ++files;
        }
        detail += sub + " " + std::to_string(files) + " files; ";
    }
    report(10, ok, detail);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
