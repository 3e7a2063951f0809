#pragma once

// Real Clifford algebra Cl(R^d) with generators e_1..e_d satisfying
// e_i e_j = -e_j e_i (i != j) and e_i^2 = -1.
//
// A basis blade is a subset of {1..d} stored as a bitmask (bit k-1 <-> e_k),
// always in increasing index order. Multivectors store one coefficient per
// blade, so the algebra over d generators has exactly 2^d coefficients.

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "diraclab/error.hpp"

namespace diraclab::clifford {

inline constexpr int kMaxDim = 16;

struct Blade {
    std::uint32_t mask = 0;
    int d = 0;

    Blade() = default;
    Blade(std::uint32_t m, int dim) : mask(m), d(dim) {
        if (dim <= 0 || dim > kMaxDim)
            throw InvalidArgument("blade dimension must be in [1, 16]");
        if (m >= (std::uint32_t{1} << dim))
            throw InvalidArgument("blade mask exceeds 2^d");
    }

    static Blade scalar(int dim) { return Blade(0, dim); }
    /// Generator e_k, 1-based.
    static Blade generator(int k, int dim) {
        if (k < 1 || k > dim) throw InvalidArgument("generator index out of range");
        return Blade(std::uint32_t{1} << (k - 1), dim);
    }

    int grade() const { return std::popcount(mask); }
    friend bool operator==(const Blade&, const Blade&) = default;
};

struct SignedBlade {
    int sign;
    Blade blade;
};

/// Number of transpositions needed to bring the concatenation (a, b) into
/// canonical order: each generator of b must hop over every generator of a
/// with a larger index.
inline int reorder_swaps(std::uint32_t a, std::uint32_t b) {
    int swaps = 0;
    a >>= 1;
    while (a != 0) {
        swaps += std::popcount(a & b);
        a >>= 1;
    }
    return swaps;
}

inline SignedBlade blade_mul(const Blade& a, const Blade& b) {
    if (a.d != b.d) throw InvalidArgument("blade_mul: dimension mismatch");
    int swaps = reorder_swaps(a.mask, b.mask);
    // every shared generator contracts with e_i^2 = -1
    swaps += std::popcount(a.mask & b.mask);
    return {(swaps & 1) ? -1 : 1, Blade(a.mask ^ b.mask, a.d)};
}

class Multivector {
public:
    Multivector() = default;
    explicit Multivector(int d) : d_(d), coeffs_(std::size_t{1} << checked(d), 0.0) {}

    static Multivector scalar(int d, double value) {
        Multivector m(d);
        m.coeffs_[0] = value;
        return m;
    }
    static Multivector blade(const Blade& b, double value = 1.0) {
        Multivector m(b.d);
        m.coeffs_[b.mask] = value;
        return m;
    }

    int dim() const { return d_; }
    std::size_t size() const { return coeffs_.size(); }

    double operator[](std::uint32_t mask) const { return coeffs_.at(mask); }
    double& operator[](std::uint32_t mask) { return coeffs_.at(mask); }
    double coeff(const Blade& b) const { return (*this)[b.mask]; }

    std::span<const double> coeffs() const { return coeffs_; }

    /// Grade-k part, everything else zeroed.
    Multivector grade_part(int k) const {
        Multivector out(d_);
        for (std::uint32_t m = 0; m < coeffs_.size(); ++m)
            if (std::popcount(m) == k) out.coeffs_[m] = coeffs_[m];
        return out;
    }

    double max_abs() const {
        double r = 0.0;
        for (double c : coeffs_) r = std::max(r, std::abs(c));
        return r;
    }

    Multivector& operator+=(const Multivector& o) {
        same_dim(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    Multivector& operator-=(const Multivector& o) {
        same_dim(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    Multivector& operator*=(double s) {
        for (double& c : coeffs_) c *= s;
        return *this;
    }

    friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
    friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
    friend Multivector operator*(Multivector a, double s) { return a *= s; }
    friend Multivector operator*(double s, Multivector a) { return a *= s; }

    friend bool operator==(const Multivector&, const Multivector&) = default;

private:
    static int checked(int d) {
        if (d <= 0 || d > kMaxDim) throw InvalidArgument("multivector dimension must be in [1, 16]");
        return d;
    }
    void same_dim(const Multivector& o) const {
        if (o.d_ != d_) throw InvalidArgument("multivector dimension mismatch");
    }

    int d_ = 0;
    std::vector<double> coeffs_;
};

/// Geometric (Clifford) product, the bilinear extension of blade_mul.
inline Multivector mv_mul(const Multivector& u, const Multivector& v) {
    if (u.dim() != v.dim()) throw InvalidArgument("mv_mul: dimension mismatch");
    const int d = u.dim();
    Multivector out(d);
    const auto n = static_cast<std::uint32_t>(u.size());
    for (std::uint32_t a = 0; a < n; ++a) {
        const double ua = u[a];
        if (ua == 0.0) continue;
        for (std::uint32_t b = 0; b < n; ++b) {
            const double vb = v[b];
            if (vb == 0.0) continue;
            const auto [sign, blade] = blade_mul(Blade(a, d), Blade(b, d));
            out[blade.mask] += sign * ua * vb;
        }
    }
    return out;
}

/// Natural embedding R^d -> Cl(R^d), coords_j -> coords_j e_j.
inline Multivector embed_vector(std::span<const double> coords) {
    const int d = static_cast<int>(coords.size());
    Multivector out(d);
    for (int j = 0; j < d; ++j) out[std::uint32_t{1} << j] = coords[j];
    return out;
}

inline nlohmann::json to_json(const Multivector& m) {
    nlohmann::json terms = nlohmann::json::array();
    for (std::uint32_t mask = 0; mask < m.size(); ++mask)
        if (m[mask] != 0.0) terms.push_back({{"mask", mask}, {"c", m[mask]}});
    return {{"d", m.dim()}, {"terms", terms}};
}

inline Multivector multivector_from_json(const nlohmann::json& j) {
    Multivector m(j.at("d").get<int>());
    for (const auto& t : j.at("terms")) m[t.at("mask").get<std::uint32_t>()] = t.at("c").get<double>();
    return m;
}

}  // namespace diraclab::clifford
