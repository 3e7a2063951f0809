#pragma once

// Model manifolds with closed-form exponential and logarithm maps: flat R^d
// and the unit sphere S^d embedded in R^{d+1}. Points and tangent vectors
// are stored in ambient coordinates. A FramedPoint fixes a base point p, an
// orthonormal frame e_1..e_d of T_pM and the radius of the neighbourhood
// U_p = exp_p(B(0, delta_U)).

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diraclab/error.hpp"
#include "diraclab/specfun.hpp"

namespace diraclab::manifold {

using Vec = Eigen::VectorXd;

/// Uniform double in [0, 1) from the top 53 bits; same value on every
/// platform, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class ManifoldModel {
public:
    virtual ~ManifoldModel() = default;

    virtual std::string kind() const = 0;
    int dim() const { return d_; }
    virtual int ambient_dim() const = 0;
    virtual double injectivity_radius() const = 0;

    virtual Vec exp_map(const Vec& p, const Vec& v) const = 0;
    virtual Vec log_map(const Vec& p, const Vec& q) const = 0;
    /// det(d exp_p) at v, as a function of |v|.
    virtual double vol_density_radial(double r) const = 0;

    double vol_density(const Vec& /*p*/, const Vec& v) const {
        const double r = v.norm();
        check_radius(r);
        return vol_density_radial(r);
    }

    /// sup of the density over B(0, radius).
    virtual double density_sup(double radius) const = 0;

    /// Riemannian volume of exp_p(B(0, radius)).
    double neighbourhood_volume(double radius) const {
        check_radius(radius);
        const double sphere_area =
            2.0 * std::pow(std::numbers::pi, 0.5 * d_) / std::tgamma(0.5 * d_);  // |S^{d-1}|
        const double radial = specfun::integrate_fixed(
            [&](double r) { return std::pow(r, d_ - 1) * vol_density_radial(r); }, 0.0, radius, 64);
        return sphere_area * radial;
    }

protected:
    explicit ManifoldModel(int d) : d_(d) {
        if (d < 1) throw InvalidArgument("manifold dimension must be positive");
    }
    void check_radius(double r) const {
        if (!(r < injectivity_radius())) throw OutOfInjectivity("tangent vector beyond the injectivity radius");
    }

    int d_;
};

class Flat final : public ManifoldModel {
public:
    explicit Flat(int d) : ManifoldModel(d) {}
    std::string kind() const override { return "flat"; }
    int ambient_dim() const override { return d_; }
    double injectivity_radius() const override { return std::numeric_limits<double>::infinity(); }
    Vec exp_map(const Vec& p, const Vec& v) const override { return p + v; }
    Vec log_map(const Vec& p, const Vec& q) const override { return q - p; }
    double vol_density_radial(double) const override { return 1.0; }
    double density_sup(double) const override { return 1.0; }
};

class Sphere final : public ManifoldModel {
public:
    explicit Sphere(int d) : ManifoldModel(d) {}
    std::string kind() const override { return "sphere"; }
    int ambient_dim() const override { return d_ + 1; }
    double injectivity_radius() const override { return std::numbers::pi; }

    Vec exp_map(const Vec& p, const Vec& v) const override {
        const double r = v.norm();
        check_radius(r);
        if (r == 0.0) return p;
        return std::cos(r) * p + (std::sin(r) / r) * v;
    }

    Vec log_map(const Vec& p, const Vec& q) const override {
        const double c = p.dot(q);
        Vec w = q - c * p;
        const double s = w.norm();
        const double theta = std::atan2(s, c);
        if (theta >= std::numbers::pi * (1.0 - 1e-12) || (s == 0.0 && c < 0.0))
            throw OutOfInjectivity("log_map: antipodal point");
        if (s == 0.0) return Vec::Zero(p.size());
        return (theta / s) * w;
    }

    double vol_density_radial(double r) const override {
        if (r == 0.0) return 1.0;
        return std::pow(std::sin(r) / r, d_ - 1);
    }
    double density_sup(double) const override { return 1.0; }
};

inline std::shared_ptr<const ManifoldModel> make_manifold(const std::string& kind, int d) {
    if (kind == "flat") return std::make_shared<Flat>(d);
    if (kind == "sphere") return std::make_shared<Sphere>(d);
    throw InvalidArgument("unknown manifold kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

struct FramedPoint {
    Vec p;
    std::vector<Vec> frame;  // e_1..e_d in ambient coordinates
    double delta_u = 1.0;

    int dim() const { return static_cast<int>(frame.size()); }

    /// sum_j y_j e_j
    Vec to_tangent(const Vec& y) const {
        Vec v = Vec::Zero(p.size());
        for (int j = 0; j < dim(); ++j) v += y(j) * frame[j];
        return v;
    }
    /// (<v, e_j>)_j
    Vec coords(const Vec& v) const {
        Vec y(dim());
        for (int j = 0; j < dim(); ++j) y(j) = v.dot(frame[j]);
        return y;
    }
};

inline double default_delta_u(const ManifoldModel& M) { return std::min(0.9 * M.injectivity_radius(), 1.0); }

/// Orthonormalizes `vectors` (Gram-Schmidt, after projecting out p on the
/// sphere) and checks the result.
inline FramedPoint make_framed_point(const ManifoldModel& M, const Vec& p, const std::vector<Vec>& vectors,
                                     double delta_u = -1.0) {
    if (p.size() != M.ambient_dim()) throw InvalidArgument("base point has wrong ambient dimension");
    if (static_cast<int>(vectors.size()) != M.dim()) throw InvalidArgument("frame needs exactly d vectors");
    FramedPoint fp;
    fp.p = p;
    if (M.kind() == "sphere") {
        if (std::abs(p.norm() - 1.0) > 1e-12) throw InvalidArgument("sphere base point must be a unit vector");
    }
    for (const Vec& v0 : vectors) {
        if (v0.size() != M.ambient_dim()) throw InvalidArgument("frame vector has wrong ambient dimension");
        Vec v = v0;
        if (M.kind() == "sphere") v -= v.dot(p) * p;
        for (const Vec& e : fp.frame) v -= v.dot(e) * e;
        const double n = v.norm();
        if (n < 1e-10) throw InvalidArgument("frame vectors are degenerate");
        fp.frame.push_back(v / n);
    }
    fp.delta_u = delta_u > 0.0 ? delta_u : default_delta_u(M);
    if (!(fp.delta_u < M.injectivity_radius())) throw InvalidArgument("delta_U must be below the injectivity radius");
    return fp;
}

/// Origin with the standard frame (flat) or north pole e_{d+1} with frame
/// e_1..e_d (sphere).
inline FramedPoint default_framed_point(const ManifoldModel& M, double delta_u = -1.0) {
    const int n = M.ambient_dim();
    Vec p = Vec::Zero(n);
    if (M.kind() == "sphere") p(n - 1) = 1.0;
    std::vector<Vec> frame;
    for (int j = 0; j < M.dim(); ++j) frame.push_back(Vec::Unit(n, j));
    return make_framed_point(M, p, frame, delta_u);
}

// ---------------------------------------------------------------------------
// Sampling

inline constexpr int kSamplingRetryCap = 100000;

/// Log coordinates y of a point uniform on U_p with respect to Riemannian
/// volume: uniform in the cube, kept inside the ball, then accepted with
/// probability G(y) / sup G.
inline Vec sample_log_coords(const ManifoldModel& M, const FramedPoint& fp, std::mt19937_64& rng) {
    const int d = fp.dim();
    const double R = fp.delta_u;
    const double gmax = M.density_sup(R);
    Vec y(d);
    for (int attempt = 0; attempt < kSamplingRetryCap; ++attempt) {
        for (int j = 0; j < d; ++j) y(j) = R * (2.0 * uniform01(rng) - 1.0);
        const double r = y.norm();
        if (!(r < R)) continue;
        const double g = M.vol_density_radial(r);
        if (g >= gmax || uniform01(rng) * gmax < g) return y;
    }
    throw SamplingFailure("sample_log_coords: retry cap reached");
}

inline Vec sample_uniform(const ManifoldModel& M, const FramedPoint& fp, std::mt19937_64& rng) {
    return M.exp_map(fp.p, fp.to_tangent(sample_log_coords(M, fp, rng)));
}

// ---------------------------------------------------------------------------
// Jacobi field check

struct JacobiRow {
    double t = 0.0;
    double residual = 0.0;           // <w, J(t)> - t
    double residual_over_t2 = 0.0;   // |r(t)| / t^2
};

/// J(t) = (d exp_p)_{tv}(tw) by central differences, with v, w unit and
/// orthogonal in T_pM.
inline std::vector<JacobiRow> jacobi_expansion_check(const ManifoldModel& M, const FramedPoint& fp, const Vec& v,
                                                     const Vec& w, const std::vector<double>& ts, double h = 1e-5) {
    if (std::abs(w.norm() - 1.0) > 1e-12) throw InvalidArgument("jacobi_expansion_check: w must be a unit vector");
    std::vector<JacobiRow> rows;
    for (double t : ts) {
        const Vec jt = (M.exp_map(fp.p, t * v + h * t * w) - M.exp_map(fp.p, t * v - h * t * w)) / (2.0 * h);
        const double r = w.dot(jt) - t;
        rows.push_back({t, r, std::abs(r) / (t * t)});
    }
    return rows;
}

/// Central-difference gradient of y -> G(sum y_j e_j) at y = 0.
inline Vec vol_density_gradient_fd(const ManifoldModel& M, const FramedPoint& fp, double h = 1e-4) {
    const int d = fp.dim();
    Vec g(d);
    for (int j = 0; j < d; ++j) {
        const Vec e = Vec::Unit(d, j) * h;
        g(j) = (M.vol_density(fp.p, fp.to_tangent(e)) - M.vol_density(fp.p, fp.to_tangent(-e))) / (2.0 * h);
    }
    return g;
}

}  // namespace diraclab::manifold
