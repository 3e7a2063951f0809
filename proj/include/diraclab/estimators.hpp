#pragma once

// Monte Carlo estimators of the Dirac commutator and of the Laplacian at a
// base point, their finite-hbar expectations by quadrature, and the
// convergence harness.
//
// Samples are kept in log coordinates y relative to a FramedPoint; the
// neighbour point is exp_p(sum y_j e_j). Every estimate carries the factor
// mu(U_p) (volume of the sampled neighbourhood) so that sample means
// approximate integrals against Riemannian volume.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "diraclab/clifford.hpp"
#include "diraclab/error.hpp"
#include "diraclab/graphdirac.hpp"
#include "diraclab/liealg.hpp"
#include "diraclab/manifold.hpp"
#include "diraclab/specfun.hpp"

namespace diraclab::estimators {

using manifold::FramedPoint;
using manifold::ManifoldModel;
using manifold::Vec;

// ---------------------------------------------------------------------------
// Test functions

/// A smooth function on U_p given in log coordinates, with its frame
/// derivatives e_j(a)(p) and Laplace-Beltrami value at p.
struct TestFunction {
    std::string name;
    std::function<double(const Vec&)> f;
    Vec grad;
    double laplacian = 0.0;

    double operator()(const Vec& y) const { return f(y); }
};

struct Monomial {
    double coef;
    std::vector<int> powers;  // one exponent per log coordinate
};

/// Polynomial in log coordinates. At y = 0 the gradient is read from the
/// linear monomials and the Laplacian from the pure squares.
inline TestFunction polynomial(std::string name, int d, std::vector<Monomial> terms) {
    TestFunction t;
    t.name = std::move(name);
    t.grad = Vec::Zero(d);
    for (auto& m : terms) {
        m.powers.resize(d, 0);
        int deg = 0, nz = -1;
        for (int j = 0; j < d; ++j)
            if (m.powers[j] > 0) {
                deg += m.powers[j];
                nz = j;
            }
        const int support = static_cast<int>(std::count_if(m.powers.begin(), m.powers.end(), [](int p) { return p > 0; }));
        if (deg == 1) t.grad(nz) += m.coef;
        if (deg == 2 && support == 1) t.laplacian += 2.0 * m.coef;
    }
    t.f = [terms = std::move(terms)](const Vec& y) {
        double s = 0.0;
        for (const auto& m : terms) {
            double v = m.coef;
            for (std::size_t j = 0; j < m.powers.size(); ++j)
                for (int k = 0; k < m.powers[j]; ++k) v *= y(static_cast<Eigen::Index>(j));
            s += v;
        }
        return s;
    };
    return t;
}

/// k-th ambient coordinate restricted to M (k is 0-based). On the sphere its
/// Laplacian is -d times the function.
inline TestFunction ambient_coordinate(std::shared_ptr<const ManifoldModel> M, const FramedPoint& fp, int k) {
    if (k < 0 || k >= M->ambient_dim()) throw InvalidArgument("ambient_coordinate: index out of range");
    TestFunction t;
    t.name = "embed" + std::to_string(k + 1);
    t.grad = Vec(fp.dim());
    for (int j = 0; j < fp.dim(); ++j) t.grad(j) = fp.frame[j](k);
    t.laplacian = M->kind() == "sphere" ? -fp.dim() * fp.p(k) : 0.0;
    t.f = [M, fp, k](const Vec& y) { return M->exp_map(fp.p, fp.to_tangent(y))(k); };
    return t;
}

/// x1 (first log coordinate), r2 (squared geodesic distance) or embed1.
inline TestFunction named_function(const std::string& name, std::shared_ptr<const ManifoldModel> M,
                                   const FramedPoint& fp) {
    const int d = fp.dim();
    if (name == "x1") return polynomial("x1", d, {{1.0, {1}}});
    if (name == "r2") {
        std::vector<Monomial> terms;
        for (int j = 0; j < d; ++j) {
            std::vector<int> p(d, 0);
            p[j] = 2;
            terms.push_back({1.0, p});
        }
        return polynomial("r2", d, terms);
    }
    if (name == "embed1") return ambient_coordinate(std::move(M), fp, 0);
    throw InvalidArgument("unknown test function '" + name + "'");
}

/// Ten polynomials standing in for the sup over a function class.
inline std::vector<TestFunction> polynomial_family(int d) {
    if (d < 2) throw InvalidArgument("polynomial_family: needs d >= 2");
    return {
        polynomial("f1", d, {{1.0, {1, 0}}}),
        polynomial("f2", d, {{1.0, {0, 1}}}),
        polynomial("f3", d, {{1.0, {1, 0}}, {1.0, {0, 1}}}),
        polynomial("f4", d, {{1.0, {1, 0}}, {-0.5, {0, 1}}}),
        polynomial("f5", d, {{1.0, {2, 0}}}),
        polynomial("f6", d, {{1.0, {1, 1}}}),
        polynomial("f7", d, {{1.0, {2, 0}}, {1.0, {0, 2}}}),
        polynomial("f8", d, {{1.0, {1, 0}}, {1.0, {1, 1}}}),
        polynomial("f9", d, {{1.0, {0, 1}}, {0.5, {3, 0}}}),
        polynomial("f10", d, {{1.0, {0, 0}}, {1.0, {1, 0}}, {-1.0, {0, 1}}, {0.5, {2, 0}}, {-0.25, {0, 2}}}),
    };
}

/// Largest disagreement between the analytic derivatives of `a` and
/// central differences in log coordinates at p.
inline double check_test_function(const TestFunction& a, int d, double h = 1e-4) {
    double worst = 0.0;
    const Vec z = Vec::Zero(d);
    const double a0 = a(z);
    double lap = 0.0;
    for (int j = 0; j < d; ++j) {
        const Vec e = Vec::Unit(d, j) * h;
        const double ap = a(e), am = a(-e);
        worst = std::max(worst, std::abs((ap - am) / (2.0 * h) - a.grad(j)));
        lap += (ap - 2.0 * a0 + am) / (h * h);
    }
    return std::max(worst, std::abs(lap - a.laplacian));
}

// ---------------------------------------------------------------------------
// Estimators

inline double hbar_schedule(long long n, double alpha) {
    if (n < 1) throw InvalidArgument("hbar_schedule: n must be positive");
    if (!(alpha > 0.0)) throw InvalidArgument("hbar_schedule: alpha must be positive");
    return std::pow(static_cast<double>(n), -alpha);
}

/// 2 exp(-eps^2 n / C_d(n^alpha)^2).
inline double hoeffding_bound(long long n, double eps, double alpha, int d) {
    if (n < 1) throw InvalidArgument("hoeffding_bound: n must be positive");
    if (!(eps > 0.0)) throw InvalidArgument("hoeffding_bound: eps must be positive");
    const double beta = std::pow(static_cast<double>(n), alpha);
    const double log_b =
        std::log(2.0) - eps * eps * static_cast<double>(n) * std::exp(-2.0 * specfun::log_c_d(d, beta));
    return std::exp(log_b);
}

inline void check_in_neighbourhood(const FramedPoint& fp, const Vec& y) {
    if (y.size() != fp.dim()) throw InvalidArgument("sample has wrong dimension");
    if (!(y.norm() <= fp.delta_u * (1.0 + 1e-12))) throw OutOfNeighbourhood("sample lies outside U_p");
}

/// One copy of the star graph: log coordinates of the d+1 neighbours.
using Copy = std::vector<Vec>;

/// S_{j,n} = mu(U_p)/(n hbar) sum_k w_j(x^k_j) (a(x^k_j) - a(p)), where
/// samples[k] are the log coordinates of x^k_j.
inline double s_jn(const ManifoldModel& M, const FramedPoint& fp, const std::vector<Vec>& samples,
                   const TestFunction& a, int j, double hbar, int sigma) {
    const int d = fp.dim();
    if (j < 1 || j > d) throw InvalidArgument("s_jn: j must be in 1..d");
    if (!(hbar > 0.0)) throw InvalidArgument("s_jn: hbar must be positive");
    if (samples.empty()) throw InvalidArgument("s_jn: no samples");
    const double log_cd = specfun::log_c_d(d, 1.0 / hbar);
    const double a0 = a(Vec::Zero(d));
    double sum = 0.0;
    for (const Vec& y : samples) {
        check_in_neighbourhood(fp, y);
        sum += std::exp(log_cd + sigma * y(j - 1) / hbar) * (a(y) - a0);
    }
    return M.neighbourhood_volume(fp.delta_u) * sum / (static_cast<double>(samples.size()) * hbar);
}

struct DiracEstimate {
    clifford::Multivector value;       // components S_{j,n}
    liealg::Complex factor{0.0, 1.0};  // Psi o S_n = factor * value
};

/// Averages the per-copy commutators e_k [D_k, a_k] e_k^* as tensor
/// elements and maps the base row into Cl(R^d).
inline DiracEstimate dirac_estimate(const ManifoldModel& M, const FramedPoint& fp, const std::vector<Copy>& copies,
                                    const TestFunction& a, double hbar, int sigma) {
    const int d = fp.dim();
    const int N = d + 1;
    if (copies.empty()) throw InvalidArgument("dirac_estimate: no copies");
    const double a0 = a(Vec::Zero(d));
    liealg::TensorElement total(N);
    for (std::size_t k = 0; k < copies.size(); ++k) {
        const Copy& c = copies[k];
        if (static_cast<int>(c.size()) != d + 1) throw InvalidGraph("dirac_estimate: copy needs d+1 neighbours");
        std::vector<Vec> pts;
        std::vector<double> values(2 * N, a0);
        for (int j = 0; j <= d; ++j) {
            check_in_neighbourhood(fp, c[j]);
            pts.push_back(M.exp_map(fp.p, fp.to_tangent(c[j])));
            values[N + j] = a(c[j]);
        }
        const auto g = graphdirac::make_star_graph(d, std::move(pts), static_cast<int>(k));
        const auto D = graphdirac::assemble_dirac(g, M, fp, hbar, sigma).dirac();
        total += liealg::commutator_closed_form(D, liealg::DiagonalObservable(values));
    }
    total *= liealg::Complex(M.neighbourhood_volume(fp.delta_u) / static_cast<double>(copies.size()));
    DiracEstimate out;
    out.value = liealg::psi_map_to_clifford(total, 1, d, hbar);
    out.value *= 1.0 / hbar;
    return out;
}

/// Omega_n = mu(U_p) C_d(1/hbar)/(n hbar^2) sum_k sum_j c_j exp(sigma <y^k_j, s_j>/hbar) (a(x^k_j) - a(p))
/// with c_j = lambda_j, or lambda_j^2 when `lambda_squared` is set.
inline double laplace_estimate(const ManifoldModel& M, const FramedPoint& fp, const std::vector<Copy>& copies,
                               const TestFunction& a, double hbar, int sigma, bool lambda_squared = false) {
    const int d = fp.dim();
    if (copies.empty()) throw InvalidArgument("laplace_estimate: no copies");
    if (!(hbar > 0.0)) throw InvalidArgument("laplace_estimate: hbar must be positive");
    const auto lw = graphdirac::laplace_lambda(d);
    const double log_cd = specfun::log_c_d(d, 1.0 / hbar);
    const double a0 = a(Vec::Zero(d));
    double sum = 0.0;
    for (const Copy& c : copies) {
        if (static_cast<int>(c.size()) != d + 1) throw InvalidGraph("laplace_estimate: copy needs d+1 neighbours");
        for (int j = 1; j <= d + 1; ++j) {
            check_in_neighbourhood(fp, c[j - 1]);
            const double lam = lambda_squared ? lw.lambda[j - 1] * lw.lambda[j - 1] : lw.lambda[j - 1];
            sum += lam * std::exp(log_cd + sigma * graphdirac::anchor_projection(c[j - 1], j, &lw) / hbar) *
                   (a(c[j - 1]) - a0);
        }
    }
    return M.neighbourhood_volume(fp.delta_u) * sum / (static_cast<double>(copies.size()) * hbar * hbar);
}

/// Deterministic finite-hbar expectation of S_{j,n} (j >= 1) or Omega_n
/// (j = 0): the integral over U_p in log coordinates with the volume density.
inline double expectation_oracle(const ManifoldModel& M, const FramedPoint& fp, const TestFunction& a, int j,
                                 double hbar, int sigma, const specfun::QuadratureRule& rule = {},
                                 bool lambda_squared = false) {
    const int d = fp.dim();
    if (j < 0 || j > d) throw InvalidArgument("expectation_oracle: j must be in 0..d");
    if (!(hbar > 0.0)) throw InvalidArgument("expectation_oracle: hbar must be positive");
    const double log_cd = specfun::log_c_d(d, 1.0 / hbar);
    const double a0 = a(Vec::Zero(d));
    const auto lw = graphdirac::laplace_lambda(d);
    auto integrand = [&](const Vec& y) {
        const double diff = (a(y) - a0) * M.vol_density_radial(y.norm());
        double v = 0.0;
        if (j > 0) {
            v = std::exp(log_cd + sigma * y(j - 1) / hbar) * diff / hbar;
        } else {
            for (int k = 1; k <= d + 1; ++k) {
                const double lam = lambda_squared ? lw.lambda[k - 1] * lw.lambda[k - 1] : lw.lambda[k - 1];
                v += lam * std::exp(log_cd + sigma * graphdirac::anchor_projection(y, k, &lw) / hbar);
            }
            v *= diff / (hbar * hbar);
        }
        return Vec::Constant(1, v);
    };
    return specfun::integrate_ball(d, fp.delta_u, integrand, rule).value(0);
}

struct SignCalibration {
    int sign = 0;  // the sign whose values approach +1
    std::vector<double> t;
    std::vector<double> plus;   // oracle with sigma = +1
    std::vector<double> minus;  // oracle with sigma = -1
};

/// One-dimensional flat check: (1/t) C_1(1/t) int_{-1}^{1} exp(sigma y/t) y dy
/// should tend to e_1(y) = 1 for exactly one sign.
inline SignCalibration calibrate_sign(const std::vector<double>& ts = {0.5, 0.2, 0.1, 0.05, 0.02}) {
    SignCalibration c;
    specfun::QuadratureRule rule;
    rule.tolerance = 1e-10;
    for (double t : ts) {
        const double lc = specfun::detail::log_c_d_any(1, 1.0 / t);
        auto oracle = [&](int s) {
            return specfun::integrate_interval([&](double y) { return std::exp(lc + s * y / t) * y / t; }, -1.0,
                                               1.0, rule)
                .value;
        };
        c.t.push_back(t);
        c.plus.push_back(oracle(+1));
        c.minus.push_back(oracle(-1));
    }
    const double ep = std::abs(c.plus.back() - 1.0), em = std::abs(c.minus.back() - 1.0);
    c.sign = ep < em ? +1 : -1;
    return c;
}

// ---------------------------------------------------------------------------
// Sampling with reproducible seeds

/// Generator for task (n_index, repeat_index) under a master seed.
inline std::mt19937_64 task_rng(std::uint64_t master, std::uint64_t n_index, std::uint64_t repeat_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(n_index), static_cast<std::uint32_t>(repeat_index)};
    return std::mt19937_64(seq);
}

inline std::vector<Copy> sample_copies(const ManifoldModel& M, const FramedPoint& fp, long long n,
                                       std::mt19937_64& rng) {
    std::vector<Copy> copies(static_cast<std::size_t>(n));
    for (auto& c : copies)
        for (int j = 0; j <= fp.dim(); ++j) c.push_back(manifold::sample_log_coords(M, fp, rng));
    return copies;
}

// ---------------------------------------------------------------------------
// Convergence harness

enum class Mode { dirac, laplace };

inline std::string to_string(Mode m) { return m == Mode::dirac ? "dirac" : "laplace"; }

struct RunConfig {
    std::string manifold = "flat";
    int d = 2;
    double delta_u = -1.0;  // <= 0 selects the default
    double alpha = 0.2;
    std::vector<long long> n_grid{1000, 10000, 100000};
    int repeats = 50;
    std::uint64_t seed = 20240607;
    int sigma = graphdirac::kCalibratedSign;
    Mode mode = Mode::dirac;
    std::string function;  // empty selects x1/embed1 (dirac) or r2 (laplace)
    bool family = true;
    bool lambda_squared = false;
    double hoeffding_eps = 0.1;
    int threads = 1;
};

inline std::string default_function(const RunConfig& cfg) {
    if (!cfg.function.empty()) return cfg.function;
    if (cfg.mode == Mode::laplace) return "r2";
    return cfg.manifold == "sphere" ? "embed1" : "x1";
}

struct ReportRow {
    long long n = 0;
    double hbar = 0.0;
    int j = 0;  // 0 for the Laplacian
    double estimate_mean = 0.0;
    double estimate_se = 0.0;
    double oracle = 0.0;
    double target = 0.0;
    double abs_err = 0.0;
    double hoeffding = 0.0;
};

struct FamilyRow {
    long long n = 0;
    double sup_err = 0.0;
    std::string argmax;
};

struct ConvergenceReport {
    RunConfig cfg;
    std::string function;
    std::vector<ReportRow> rows;
    std::vector<FamilyRow> family;
    bool partial = false;
    std::string error;
};

namespace detail {

// Per-task results: one value per (function, component).
struct TaskResult {
    std::vector<double> values;
};

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
    threads = std::max(1, threads);
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace detail

/// Runs the configured experiment. Sub-operation failures stop the run and
/// return what was computed so far with `partial` set.
inline ConvergenceReport convergence_run(const RunConfig& cfg, const specfun::QuadratureRule& rule = {}) {
    ConvergenceReport rep;
    rep.cfg = cfg;
    if (cfg.alpha <= 0.0) throw InvalidArgument("alpha must be positive");
    if (cfg.repeats < 1) throw InvalidArgument("repeats must be positive");
    for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
        if (cfg.n_grid[i] <= cfg.n_grid[i - 1]) throw InvalidArgument("n grid must be strictly increasing");
    if (!cfg.n_grid.empty() && cfg.n_grid.front() < 1) throw InvalidArgument("n grid entries must be positive");
    if (cfg.sigma != 1 && cfg.sigma != -1) throw InvalidArgument("sign must be +1 or -1");

    const auto M = manifold::make_manifold(cfg.manifold, cfg.d);
    const FramedPoint fp = manifold::default_framed_point(*M, cfg.delta_u);
    const int d = fp.dim();
    const TestFunction main_fn = named_function(default_function(cfg), M, fp);
    rep.function = main_fn.name;
    std::vector<TestFunction> fns{main_fn};
    if (cfg.family) {
        auto fam = polynomial_family(d);
        fns.insert(fns.end(), fam.begin(), fam.end());
    }
    const bool dirac = cfg.mode == Mode::dirac;
    const int comps = dirac ? d : 1;
    const double volume = M->neighbourhood_volume(fp.delta_u);
    const auto lw = graphdirac::laplace_lambda(d);

    const std::size_t n_count = cfg.n_grid.size();
    const std::size_t tasks = n_count * static_cast<std::size_t>(cfg.repeats);
    std::vector<detail::TaskResult> results(tasks);

    try {
        detail::parallel_for(tasks, cfg.threads, [&](std::size_t task) {
            const std::size_t ni = task / cfg.repeats, ri = task % cfg.repeats;
            const long long n = cfg.n_grid[ni];
            const double hbar = hbar_schedule(n, cfg.alpha);
            const double log_cd = specfun::log_c_d(d, 1.0 / hbar);
            auto rng = task_rng(cfg.seed, ni, ri);
            std::vector<double> acc(fns.size() * comps, 0.0);
            std::vector<double> a0(fns.size());
            for (std::size_t f = 0; f < fns.size(); ++f) a0[f] = fns[f](Vec::Zero(d));
            std::vector<Vec> nb(d + 1);
            for (long long k = 0; k < n; ++k) {
                for (int j = 0; j <= d; ++j) nb[j] = manifold::sample_log_coords(*M, fp, rng);
                if (dirac) {
                    for (int j = 1; j <= d; ++j) {
                        const double w = std::exp(log_cd + cfg.sigma * nb[j - 1](j - 1) / hbar);
                        for (std::size_t f = 0; f < fns.size(); ++f)
                            acc[f * comps + (j - 1)] += w * (fns[f](nb[j - 1]) - a0[f]);
                    }
                } else {
                    for (int j = 1; j <= d + 1; ++j) {
                        const double lam =
                            cfg.lambda_squared ? lw.lambda[j - 1] * lw.lambda[j - 1] : lw.lambda[j - 1];
                        const double w =
                            lam * std::exp(log_cd + cfg.sigma * graphdirac::anchor_projection(nb[j - 1], j, &lw) / hbar);
                        for (std::size_t f = 0; f < fns.size(); ++f) acc[f] += w * (fns[f](nb[j - 1]) - a0[f]);
                    }
                }
            }
            const double scale = volume / (static_cast<double>(n) * (dirac ? hbar : hbar * hbar));
            for (double& v : acc) v *= scale;
            results[task].values = std::move(acc);
        });
    } catch (const std::exception& e) {
        rep.partial = true;
        rep.error = e.what();
        return rep;
    }

    try {
        for (std::size_t ni = 0; ni < n_count; ++ni) {
            const long long n = cfg.n_grid[ni];
            const double hbar = hbar_schedule(n, cfg.alpha);
            const double hoeff = hoeffding_bound(n, cfg.hoeffding_eps, cfg.alpha, d);
            FamilyRow fam{n, 0.0, ""};
            for (std::size_t f = 0; f < fns.size(); ++f) {
                for (int c = 0; c < comps; ++c) {
                    std::vector<double> est(cfg.repeats);
                    for (int r = 0; r < cfg.repeats; ++r) est[r] = results[ni * cfg.repeats + r].values[f * comps + c];
                    const double m = detail::mean(est);
                    const double target = dirac ? fns[f].grad(c) : fns[f].laplacian;
                    if (f == 0) {
                        ReportRow row;
                        row.n = n;
                        row.hbar = hbar;
                        row.j = dirac ? c + 1 : 0;
                        row.estimate_mean = m;
                        row.estimate_se = detail::standard_error(est);
                        row.oracle = expectation_oracle(*M, fp, fns[f], row.j, hbar, cfg.sigma, rule,
                                                        cfg.lambda_squared);
                        row.target = target;
                        row.abs_err = std::abs(m - target);
                        row.hoeffding = hoeff;
                        rep.rows.push_back(row);
                    } else if (std::abs(m - target) > fam.sup_err) {
                        fam.sup_err = std::abs(m - target);
                        fam.argmax = fns[f].name;
                    }
                }
            }
            if (cfg.family) rep.family.push_back(fam);
        }
    } catch (const std::exception& e) {
        rep.partial = true;
        rep.error = e.what();
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Report output

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_csv(std::ostream& os, const ConvergenceReport& rep) {
    os << "mode,manifold,d,alpha,n,hbar,j,estimate_mean,estimate_se,oracle,target,abs_err,hoeffding\n";
    for (const auto& r : rep.rows)
        os << to_string(rep.cfg.mode) << ',' << rep.cfg.manifold << ',' << rep.cfg.d << ','
           << format_double(rep.cfg.alpha) << ',' << r.n << ',' << format_double(r.hbar) << ',' << r.j << ','
           << format_double(r.estimate_mean) << ',' << format_double(r.estimate_se) << ','
           << format_double(r.oracle) << ',' << format_double(r.target) << ',' << format_double(r.abs_err) << ','
           << format_double(r.hoeffding) << '\n';
}

/// Columns n, hbar, j, mean, se, oracle, target, abs_err for gnuplot.
inline void write_dat(std::ostream& os, const ConvergenceReport& rep) {
    os << "# n hbar j estimate_mean estimate_se oracle target abs_err\n";
    for (const auto& r : rep.rows)
        os << r.n << ' ' << format_double(r.hbar) << ' ' << r.j << ' ' << format_double(r.estimate_mean) << ' '
           << format_double(r.estimate_se) << ' ' << format_double(r.oracle) << ' ' << format_double(r.target) << ' '
           << format_double(r.abs_err) << '\n';
}

inline nlohmann::json to_json(const RunConfig& c) {
    return {{"manifold", c.manifold},
            {"d", c.d},
            {"delta_u", c.delta_u},
            {"alpha", c.alpha},
            {"n_grid", c.n_grid},
            {"repeats", c.repeats},
            {"seed", c.seed},
            {"sign", c.sigma},
            {"mode", to_string(c.mode)},
            {"function", c.function},
            {"family", c.family},
            {"lambda_squared", c.lambda_squared},
            {"hoeffding_eps", c.hoeffding_eps}};
}

inline nlohmann::json to_json(const ConvergenceReport& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"n", r.n},
                        {"hbar", r.hbar},
                        {"j", r.j},
                        {"estimate_mean", r.estimate_mean},
                        {"estimate_se", r.estimate_se},
                        {"oracle", r.oracle},
                        {"target", r.target},
                        {"abs_err", r.abs_err},
                        {"hoeffding", r.hoeffding}});
    nlohmann::json fam = nlohmann::json::array();
    for (const auto& f : rep.family) fam.push_back({{"n", f.n}, {"sup_err", f.sup_err}, {"argmax", f.argmax}});
    return {{"config", to_json(rep.cfg)},
            {"function", rep.function},
            {"normalization", "estimates include mu(U_p); Laplacian weights use lambda_j"},
            {"rows", rows},
            {"family", fam},
            {"partial", rep.partial},
            {"error", rep.error}};
}

// ---------------------------------------------------------------------------
// Perron-Frobenius sweep

struct PfRow {
    double hbar = 0.0;
    double rho = 0.0;
    double ratio = 0.0;
};

/// rho([D, a]) over an hbar grid for one star graph sampled from `seed`.
inline std::vector<PfRow> pf_sweep(const ManifoldModel& M, const FramedPoint& fp, const TestFunction& a,
                                   const std::vector<double>& hbars, std::uint64_t seed, int sigma) {
    const int d = fp.dim();
    const int N = d + 1;
    auto rng = task_rng(seed, 0, 0);
    std::vector<Vec> pts;
    std::vector<double> values(2 * N, a(Vec::Zero(d)));
    for (int j = 0; j <= d; ++j) {
        const Vec y = manifold::sample_log_coords(M, fp, rng);
        pts.push_back(M.exp_map(fp.p, fp.to_tangent(y)));
        values[N + j] = a(y);
    }
    const auto g = graphdirac::make_star_graph(d, pts);
    const liealg::DiagonalObservable obs(values);
    const double grad_sup = a.grad.cwiseAbs().maxCoeff();
    std::vector<PfRow> out;
    for (double h : hbars) {
        const auto D = graphdirac::assemble_dirac(g, M, fp, h, sigma);
        const auto r = graphdirac::pf_bound_report(D, obs, grad_sup);
        out.push_back({h, r.rho, r.bound_ratio});
    }
    return out;
}

}  // namespace diraclab::estimators
