#pragma once

// Modified Bessel functions, the von Mises-Fisher normaliser C_d(beta), the
// A/B/C coefficient functions of the VMF small-bandwidth expansion, and
// quadrature-based VMF moment integrals over the unit ball.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "diraclab/error.hpp"

namespace diraclab::specfun {

// Series / asymptotic switch point for e^{-x} I_nu(x). The asymptotic series
// is only used once x exceeds kBesselCrossover + nu^2, so higher orders stay
// on the convergent power series.
inline constexpr double kBesselCrossover = 15.0;

namespace detail {

inline double bessel_i_scaled_series(double nu, double x) {
    // e^{-x} sum_k (x/2)^{2k+nu} / (k! Gamma(k+nu+1)), all terms positive
    double term = std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) - x);
    double sum = term;
    const double q = 0.25 * x * x;
    for (int k = 0; k < 100000; ++k) {
        term *= q / ((k + 1.0) * (k + 1.0 + nu));
        sum += term;
        if (term < 1e-17 * sum) return sum;
    }
    throw NumericFailure("bessel_i_scaled: power series did not converge", sum);
}

inline double bessel_i_scaled_asymptotic(double nu, double x) {
    // e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(nu) / x^k
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev_abs = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (8.0 * k * x);
        const double a = std::abs(term);
        if (a == 0.0) break;  // half-integer orders terminate
        if (a > prev_abs) break;  // divergent tail
        sum += term;
        if (a < 1e-17 * std::abs(sum)) break;
        prev_abs = a;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

}  // namespace detail

/// e^{-x} I_nu(x). Orders in (-1, 0) are accepted as well; the C_{d-2}
/// factors of the coefficient functions need I_{-1/2}.
inline double bessel_i_scaled(double nu, double x) {
    if (x < 0.0) throw InvalidArgument("bessel_i_scaled: negative argument");
    if (!(nu > -1.0)) throw InvalidArgument("bessel_i_scaled: order must exceed -1");
    if (x == 0.0) {
        if (nu == 0.0) return 1.0;
        if (nu > 0.0) return 0.0;
        throw InvalidArgument("bessel_i_scaled: I_nu(0) is unbounded for negative order");
    }
    if (x <= kBesselCrossover + nu * nu) return detail::bessel_i_scaled_series(nu, x);
    return detail::bessel_i_scaled_asymptotic(nu, x);
}

/// ln I_nu(x) without overflow.
inline double log_bessel_i(double nu, double x) { return x + std::log(bessel_i_scaled(nu, x)); }

namespace detail {

/// ln C_d(beta) for any d >= 1 (d = 1 is the two-point sphere S^0).
inline double log_c_d_any(int d, double beta) {
    if (d < 1) throw InvalidArgument("log_c_d: dimension must be positive");
    if (!(beta > 0.0)) throw InvalidArgument("log_c_d: beta must be positive");
    const double nu = 0.5 * d - 1.0;
    return nu * std::log(beta) - 0.5 * d * std::log(2.0 * std::numbers::pi) - log_bessel_i(nu, beta);
}

}  // namespace detail

/// ln C_d(beta) with C_d(beta) = beta^{d/2-1} / ((2 pi)^{d/2} I_{d/2-1}(beta)).
inline double log_c_d(int d, double beta) {
    if (d < 2) throw InvalidArgument("log_c_d: dimension must be at least 2");
    return detail::log_c_d_any(d, beta);
}

inline double c_d(int d, double beta) { return std::exp(log_c_d(d, beta)); }

// ---------------------------------------------------------------------------
// Quadrature

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) : nodes(n), weights(n) {
        if (n < 1) throw InvalidArgument("GaussLegendre: need at least one node");
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int k = 1; k <= n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

/// Adaptive tensor-product Gauss rule. Node counts start at the given
/// values and double until two successive estimates differ by less than
/// `tolerance` (absolute).
struct QuadratureRule {
    int radial_nodes = 32;
    int angular_nodes = 32;
    double tolerance = 1e-8;
    int max_refinements = 6;
};

struct QuadratureResult {
    double value = 0.0;
    double change = 0.0;  // |last - previous| at termination
    int radial_nodes = 0;
    int angular_nodes = 0;
};

/// Fixed-order Gauss-Legendre on [a, b].
inline double integrate_fixed(const std::function<double(double)>& f, double a, double b, int n) {
    const GaussLegendre gl(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += gl.weights[i] * f(mid + half * gl.nodes[i]);
    return s * half;
}

inline QuadratureResult integrate_interval(const std::function<double(double)>& f, double a, double b,
                                           const QuadratureRule& rule) {
    int n = rule.radial_nodes;
    double prev = integrate_fixed(f, a, b, n);
    for (int r = 0; r < rule.max_refinements; ++r) {
        n *= 2;
        const double cur = integrate_fixed(f, a, b, n);
        const double change = std::abs(cur - prev);
        if (change < rule.tolerance) return {cur, change, n, 0};
        prev = cur;
    }
    throw NumericFailure("integrate_interval: no convergence after refinement cap", prev);
}

namespace detail {

// Unit sphere S^{dim-1} in R^dim: points (unit vectors) and weights summing
// to its surface area. Polar angles use Gauss-Legendre with the sin^k
// Jacobian folded into the weights, the azimuth uses the periodic
// trapezoid rule.
inline void sphere_rule(int dim, int m, std::vector<Eigen::VectorXd>& pts, std::vector<double>& wts) {
    pts.clear();
    wts.clear();
    if (dim == 1) {
        pts.push_back(Eigen::VectorXd::Constant(1, 1.0));
        pts.push_back(Eigen::VectorXd::Constant(1, -1.0));
        wts = {1.0, 1.0};
        return;
    }
    if (dim == 2) {
        const int na = 2 * m;
        for (int k = 0; k < na; ++k) {
            const double th = 2.0 * std::numbers::pi * k / na;
            Eigen::VectorXd v(2);
            v << std::cos(th), std::sin(th);
            pts.push_back(v);
            wts.push_back(2.0 * std::numbers::pi / na);
        }
        return;
    }
    std::vector<Eigen::VectorXd> sub_pts;
    std::vector<double> sub_wts;
    sphere_rule(dim - 1, m, sub_pts, sub_wts);
    const GaussLegendre gl(m);
    for (int i = 0; i < m; ++i) {
        const double th = 0.5 * std::numbers::pi * (gl.nodes[i] + 1.0);
        const double w = 0.5 * std::numbers::pi * gl.weights[i] * std::pow(std::sin(th), dim - 2);
        const double c = std::cos(th), s = std::sin(th);
        for (std::size_t k = 0; k < sub_pts.size(); ++k) {
            Eigen::VectorXd v(dim);
            v(0) = c;
            v.tail(dim - 1) = s * sub_pts[k];
            pts.push_back(std::move(v));
            wts.push_back(w * sub_wts[k]);
        }
    }
}

}  // namespace detail

/// Fixed-order rule for the ball B(0, radius) in R^dim. The integrand
/// receives the point and returns a vector-valued result (all components
/// integrated at once).
inline Eigen::VectorXd integrate_ball_fixed(int dim, double radius,
                                            const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                            int radial_nodes, int angular_nodes) {
    std::vector<Eigen::VectorXd> dirs;
    std::vector<double> dw;
    detail::sphere_rule(dim, angular_nodes, dirs, dw);
    const GaussLegendre gl(radial_nodes);
    Eigen::VectorXd acc;
    for (int i = 0; i < radial_nodes; ++i) {
        const double r = 0.5 * radius * (gl.nodes[i] + 1.0);
        const double wr = 0.5 * radius * gl.weights[i] * std::pow(r, dim - 1);
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            Eigen::VectorXd v = f(r * dirs[k]);
            if (acc.size() == 0) acc = Eigen::VectorXd::Zero(v.size());
            acc += (wr * dw[k]) * v;
        }
    }
    return acc;
}

struct BallQuadratureResult {
    Eigen::VectorXd value;
    double change = 0.0;
    int radial_nodes = 0;
    int angular_nodes = 0;
};

inline BallQuadratureResult integrate_ball(int dim, double radius,
                                           const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                           const QuadratureRule& rule) {
    if (dim < 1) throw InvalidArgument("integrate_ball: dimension must be positive");
    int nr = rule.radial_nodes, na = rule.angular_nodes;
    Eigen::VectorXd prev = integrate_ball_fixed(dim, radius, f, nr, na);
    for (int r = 0; r < rule.max_refinements; ++r) {
        nr *= 2;
        na *= 2;
        Eigen::VectorXd cur = integrate_ball_fixed(dim, radius, f, nr, na);
        const double change = (cur - prev).cwiseAbs().maxCoeff();
        if (change < rule.tolerance) return {std::move(cur), change, nr, na};
        prev = std::move(cur);
    }
    throw NumericFailure("integrate_ball: no convergence after refinement cap", prev.size() ? prev(0) : 0.0);
}

// ---------------------------------------------------------------------------
// Coefficient functions and moments

struct LemmaABC {
    double A = 0.0;
    double B = 0.0;
    double C_coef = 0.0;  // scalar multiplying s in C(t)
};

/// A(t), B(t) and the scalar coefficient of C(t) = C_coef * s, with every
/// C_d ratio formed as an exponential of log differences.
inline LemmaABC lemma_abc(int d, double t, const QuadratureRule& rule = {}) {
    if (d < 3) throw InvalidArgument("lemma_abc: needs d >= 3 (uses C_{d-2})");
    if (!(t > 0.0)) throw InvalidArgument("lemma_abc: t must be positive");
    const double log_cd = log_c_d(d, 1.0 / t);
    const double log_t = std::log(t);

    LemmaABC out;
    out.A = integrate_interval([&](double r) { return r * std::exp(log_cd - log_t - log_c_d(d, r / t)); }, 0.0, 1.0,
                               rule)
                .value;
    out.B = integrate_interval([&](double r) { return r * std::exp(log_cd - log_c_d(d, r / t)); }, 0.0, 1.0, rule)
                .value;

    const double two_pi = 2.0 * std::numbers::pi;
    const double boundary = t * std::exp(log_cd - detail::log_c_d_any(d - 2, 1.0 / t));
    const double bulk =
        integrate_interval([&](double r) { return t * std::exp(log_cd - detail::log_c_d_any(d - 2, r / t)); }, 0.0,
                           1.0, rule)
            .value;
    const double tail = std::exp(0.5 * d * std::log(two_pi) + log_cd - std::lgamma(0.5 * d - 1.0)) / 3.0;
    out.C_coef = two_pi * (boundary - bulk) - tail;
    return out;
}

struct VmfMoments {
    Eigen::VectorXd m1;
    Eigen::MatrixXd m2;
};

/// First and second moment integrals of C_d(1/t) exp(sign * <s,x> / t) over
/// the unit ball in R^d, neither normalised by the total mass nor centred.
/// sign = -1 is exp(-beta <s,x>); sign = +1 is the one whose first moment
/// points along +s.
inline VmfMoments vmf_moments(int d, const Eigen::VectorXd& s, double t, const QuadratureRule& rule = {},
                              int sign = +1) {
    if (s.size() != d) throw InvalidArgument("vmf_moments: direction has wrong dimension");
    if (std::abs(s.norm() - 1.0) > 1e-12) throw InvalidArgument("vmf_moments: direction must be a unit vector");
    if (!(t > 0.0)) throw InvalidArgument("vmf_moments: t must be positive");
    if (sign != 1 && sign != -1) throw InvalidArgument("vmf_moments: sign must be +1 or -1");
    const double log_cd = log_c_d(d, 1.0 / t);
    auto integrand = [&](const Eigen::VectorXd& x) {
        const double w = std::exp(log_cd + sign * s.dot(x) / t);
        Eigen::VectorXd out(d + d * d);
        out.head(d) = w * x;
        Eigen::MatrixXd xx = w * x * x.transpose();
        out.tail(d * d) = Eigen::Map<const Eigen::VectorXd>(xx.data(), d * d);
        return out;
    };
    const auto res = integrate_ball(d, 1.0, integrand, rule);
    VmfMoments m;
    m.m1 = res.value.head(d);
    m.m2 = Eigen::Map<const Eigen::MatrixXd>(res.value.tail(d * d).data(), d, d);
    return m;
}

}  // namespace diraclab::specfun
