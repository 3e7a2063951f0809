#pragma once

// Root-vector blocks, the operator W = sum w_ij Z_ij, Dirac operators
// D = (i/hbar) Re(W), their commutators with diagonal observables, the
// Clifford reduction of the bi-commutator and the map of a commutator row
// into Cl(R^d).
//
// Index conventions: blocks are 1-based, 1..2N, each block is 2x2, so the
// concrete matrices are 4N x 4N. Vertices 1..N form the first half of the
// chirality split, N+1..2N the second.
//
// Symbolic elements are Mat2-weighted words in root generators Z_ij (i < j).
// A length-1 word M (x) Z_ij realizes as the skew pattern: M in block (i,j),
// -M^t in block (j,i). The empty word M realizes as M in every diagonal block.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "diraclab/clifford.hpp"
#include "diraclab/error.hpp"

namespace diraclab::liealg {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using ConcreteOperator = Eigen::MatrixXcd;

inline constexpr Complex kI{0.0, 1.0};

namespace mat2 {

inline Mat2 X() { return (Mat2() << 1, 0, 0, -1).finished(); }
inline Mat2 Y() { return (Mat2() << 0, -1, -1, 0).finished(); }
inline Mat2 J() { return (Mat2() << 0, -1, 1, 0).finished(); }
/// Block used for the Cartan realization of diagonal observables.
inline Mat2 cartan() { return (Mat2() << 0, 1, -1, 0).finished(); }

}  // namespace mat2

/// C_1..C_4.
inline Mat2 root_block(int s) {
    switch (s) {
        case 1: return (Mat2() << Complex(1, 0), Complex(0, 1), Complex(0, 1), Complex(-1, 0)).finished();
        case 2: return (Mat2() << Complex(1, 0), Complex(0, -1), Complex(0, -1), Complex(-1, 0)).finished();
        case 3: return (Mat2() << Complex(1, 0), Complex(0, -1), Complex(0, 1), Complex(1, 0)).finished();
        case 4: return (Mat2() << Complex(1, 0), Complex(0, -1), Complex(0, 1), Complex(-1, 0)).finished();
        default: throw InvalidArgument("root_block: s must be in {1,2,3,4}");
    }
}

// ---------------------------------------------------------------------------
// Words and tensor elements

struct Generator {
    int i = 0;
    int j = 0;
    friend auto operator<=>(const Generator&, const Generator&) = default;
};

using Word = std::vector<Generator>;

class TensorElement {
public:
    TensorElement() = default;
    explicit TensorElement(int N) : N_(N) {
        if (N < 1) throw InvalidArgument("TensorElement: N must be positive");
    }

    int N() const { return N_; }
    const std::map<Word, Mat2>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add(const Word& w, const Mat2& m) {
        if (w.size() > 2) throw UnsupportedDegree("TensorElement: words longer than 2 are not represented");
        for (const auto& g : w)
            if (g.i < 1 || g.j <= g.i || g.j > 2 * N_)
                throw InvalidArgument("TensorElement: generator index out of range");
        auto [it, inserted] = terms_.try_emplace(w, m);
        if (!inserted) it->second += m;
    }

    Mat2 coeff(const Word& w) const {
        auto it = terms_.find(w);
        return it == terms_.end() ? Mat2::Zero() : it->second;
    }

    /// Drops terms whose coefficient is exactly zero.
    void prune() {
        std::erase_if(terms_, [](const auto& kv) { return kv.second.isZero(0.0); });
    }

    double max_abs() const {
        double r = 0.0;
        for (const auto& [w, m] : terms_) r = std::max(r, m.cwiseAbs().maxCoeff());
        return r;
    }

    TensorElement& operator+=(const TensorElement& o) {
        same_n(o);
        for (const auto& [w, m] : o.terms_) add(w, m);
        return *this;
    }
    TensorElement& operator-=(const TensorElement& o) {
        same_n(o);
        for (const auto& [w, m] : o.terms_) add(w, -m);
        return *this;
    }
    TensorElement& operator*=(Complex c) {
        for (auto& [w, m] : terms_) m *= c;
        return *this;
    }

    friend TensorElement operator+(TensorElement a, const TensorElement& b) { return a += b; }
    friend TensorElement operator-(TensorElement a, const TensorElement& b) { return a -= b; }
    friend TensorElement operator*(Complex c, TensorElement a) { return a *= c; }

    /// Product in M_2 (x) U: matrices multiply, words concatenate.
    friend TensorElement operator*(const TensorElement& a, const TensorElement& b) {
        a.same_n(b);
        TensorElement out(a.N_);
        for (const auto& [wa, ma] : a.terms_)
            for (const auto& [wb, mb] : b.terms_) {
                Word w = wa;
                w.insert(w.end(), wb.begin(), wb.end());
                out.add(w, ma * mb);
            }
        return out;
    }

    /// Concrete 4N x 4N matrix. Defined for words of length <= 1.
    ConcreteOperator realize() const {
        ConcreteOperator out = ConcreteOperator::Zero(4 * N_, 4 * N_);
        for (const auto& [w, m] : terms_) {
            if (w.empty()) {
                for (int k = 0; k < 2 * N_; ++k) out.block<2, 2>(2 * k, 2 * k) += m;
            } else if (w.size() == 1) {
                const int i = w[0].i - 1, j = w[0].j - 1;
                out.block<2, 2>(2 * i, 2 * j) += m;
                out.block<2, 2>(2 * j, 2 * i) -= m.transpose();
            } else {
                throw UnsupportedDegree("realize: degree-2 words have no matrix realization");
            }
        }
        return out;
    }

private:
    void same_n(const TensorElement& o) const {
        if (o.N_ != N_) throw InvalidArgument("TensorElement: block count mismatch");
    }

    int N_ = 1;
    std::map<Word, Mat2> terms_;
};

inline TensorElement commutator(const TensorElement& a, const TensorElement& b) { return a * b - b * a; }

inline nlohmann::json to_json(const TensorElement& t) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [w, m] : t.terms()) {
        nlohmann::json word = nlohmann::json::array();
        for (const auto& g : w) word.push_back({g.i, g.j});
        nlohmann::json entries = nlohmann::json::array();
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) entries.push_back({m(r, c).real(), m(r, c).imag()});
        out.push_back({{"word", word}, {"mat2", entries}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Root vectors and W

using WeightMap = std::map<std::pair<int, int>, double>;

inline void check_pair(int i, int j, int N) {
    if (N < 1) throw InvalidArgument("N must be positive");
    if (i < 1 || j > 2 * N || i >= j) throw InvalidArgument("block indices must satisfy 1 <= i < j <= 2N");
}

inline ConcreteOperator build_root_vector(int i, int j, int s, int N) {
    check_pair(i, j, N);
    const Mat2 c = root_block(s);
    ConcreteOperator out = ConcreteOperator::Zero(4 * N, 4 * N);
    out.block<2, 2>(2 * (i - 1), 2 * (j - 1)) = c;
    out.block<2, 2>(2 * (j - 1), 2 * (i - 1)) = -c.transpose();
    return out;
}

struct RootOperator {
    int N = 1;
    int s = 2;
    WeightMap weights;
    TensorElement symbolic;
    ConcreteOperator concrete;
};

inline RootOperator build_W(const WeightMap& weights, int s, int N) {
    RootOperator W{N, s, weights, TensorElement(N), ConcreteOperator::Zero(4 * N, 4 * N)};
    const Mat2 c = root_block(s);
    for (const auto& [ij, w] : weights) {
        const auto [i, j] = ij;
        check_pair(i, j, N);
        W.symbolic.add({{i, j}}, w * c);
        W.concrete += w * build_root_vector(i, j, s, N);
    }
    return W;
}

struct DiracOperator {
    int N = 1;
    int s = 2;
    double hbar = 1.0;
    WeightMap weights;
    TensorElement symbolic;
    ConcreteOperator concrete;
};

inline DiracOperator dirac_from_W(const RootOperator& W, double hbar) {
    if (!(hbar > 0.0)) throw InvalidArgument("dirac_from_W: hbar must be positive");
    const Complex f = kI / hbar;
    DiracOperator D{W.N, W.s, hbar, W.weights, TensorElement(W.N), {}};
    for (const auto& [w, m] : W.symbolic.terms()) D.symbolic.add(w, f * Mat2(m.real().cast<Complex>()));
    D.concrete = f * ConcreteOperator(W.concrete.real().cast<Complex>());
    return D;
}

/// gamma = diag(1_{2N}, -1_{2N}).
inline ConcreteOperator chirality(int N) {
    ConcreteOperator g = ConcreteOperator::Identity(4 * N, 4 * N);
    g.bottomRightCorner(2 * N, 2 * N) *= -1.0;
    return g;
}

// ---------------------------------------------------------------------------
// Observables and commutators

class DiagonalObservable {
public:
    explicit DiagonalObservable(std::vector<double> values) : a_(std::move(values)) {
        if (a_.empty() || a_.size() % 2 != 0)
            throw InvalidArgument("DiagonalObservable: need 2N values");
        for (double v : a_)
            if (!std::isfinite(v)) throw InvalidArgument("DiagonalObservable: non-finite value");
    }

    int N() const { return static_cast<int>(a_.size() / 2); }
    double value(int k) const { return a_.at(k - 1); }
    const std::vector<double>& values() const { return a_; }

    double alpha(int i, int j) const { return value(i) - value(j); }

    /// +1 on the first half of the chirality split, -1 on the second.
    int parity(int k) const { return k <= N() ? 1 : -1; }

    /// Value of the Cartan functional on the root (i,j): eps_i a_i + eps_j a_j.
    /// Equals alpha(i,j) whenever i and j lie on opposite sides of the split.
    double root_value(int i, int j) const { return parity(i) * value(i) + parity(j) * value(j); }

    /// Block k = eps_k a_k * cartan().
    ConcreteOperator realize() const {
        const int n = 2 * N();
        ConcreteOperator out = ConcreteOperator::Zero(2 * n, 2 * n);
        for (int k = 1; k <= n; ++k) out.block<2, 2>(2 * (k - 1), 2 * (k - 1)) = parity(k) * value(k) * mat2::cartan();
        return out;
    }

private:
    std::vector<double> a_;
};

inline ConcreteOperator commutator_concrete(const ConcreteOperator& D, const ConcreteOperator& A) {
    if (D.rows() != D.cols() || A.rows() != A.cols() || D.rows() != A.rows())
        throw InvalidArgument("commutator_concrete: size mismatch");
    return D * A - A * D;
}

/// Coefficient of Z_ij in [D, a] for one weighted root vector of type s.
inline Mat2 commutator_block(int s, double omega, double hbar, const DiagonalObservable& a, int i, int j) {
    const Mat2 R = root_block(s).real().cast<Complex>();
    const Mat2 K = mat2::cartan();
    const double ci = a.parity(i) * a.value(i), cj = a.parity(j) * a.value(j);
    return (kI / hbar) * omega * (cj * R * K - ci * K * R);
}

inline TensorElement commutator_closed_form(int N, int s, double hbar, const WeightMap& weights,
                                            const DiagonalObservable& a) {
    if (a.N() != N) throw InvalidArgument("commutator_closed_form: block count mismatch");
    TensorElement out(N);
    for (const auto& [ij, w] : weights) {
        const auto [i, j] = ij;
        check_pair(i, j, N);
        if (s == 2)
            out.add({{i, j}}, -(kI / hbar) * w * a.root_value(i, j) * mat2::Y());
        else
            out.add({{i, j}}, commutator_block(s, w, hbar, a, i, j));
    }
    return out;
}

inline TensorElement commutator_closed_form(const DiracOperator& D, const DiagonalObservable& a) {
    return commutator_closed_form(D.N, D.s, D.hbar, D.weights, a);
}

/// [D, [D, a]] expanded symbolically (degree-2 words).
inline TensorElement bi_commutator(const DiracOperator& D, const DiagonalObservable& a) {
    return commutator(D.symbolic, commutator_closed_form(D, a));
}

/// Clifford reduction of degree-2 words: Z Z -> -1, distinct generators
/// anticommute, so Z_b Z_a (a < b) becomes -Z_a Z_b and the symmetric part
/// of a distinct pair cancels. Remaining degree-2 words are bivectors in
/// canonical order.
inline TensorElement psi_reduce(const TensorElement& t) {
    TensorElement out(t.N());
    for (const auto& [w, m] : t.terms()) {
        if (w.size() <= 1) {
            out.add(w, m);
        } else if (w.size() == 2) {
            if (w[0] == w[1]) out.add({}, -m);
            else if (w[0] < w[1]) out.add(w, m);
            else out.add({w[1], w[0]}, -m);
        } else {
            throw UnsupportedDegree("psi_reduce: word longer than 2");
        }
    }
    out.prune();
    return out;
}

/// Delta(a) = -(1/hbar^2) sum w_ij^2 r_ij(a) J, as the empty-word element.
inline TensorElement laplacian_closed_form(const DiracOperator& D, const DiagonalObservable& a) {
    if (D.s != 2) throw InvalidArgument("laplacian_closed_form: needs s = 2");
    if (a.N() != D.N) throw InvalidArgument("laplacian_closed_form: block count mismatch");
    double c = 0.0;
    for (const auto& [ij, w] : D.weights) c += w * w * a.root_value(ij.first, ij.second);
    TensorElement out(D.N);
    out.add({}, Complex(-c / (D.hbar * D.hbar)) * mat2::J());
    out.prune();
    return out;
}

// ---------------------------------------------------------------------------
// Map into the Clifford algebra

/// Reads off row i0 of a degree-1 element (coefficients proportional to
/// (i/hbar) Y) and sends the neighbour labelled k to e_k. `order` lists the
/// neighbours in label order; the last one (label d+1) is projected away.
/// An empty `order` means ascending neighbour index.
inline clifford::Multivector psi_map_to_clifford(const TensorElement& t, int i0, int d, double hbar,
                                                 std::vector<int> order = {}) {
    if (!(hbar > 0.0)) throw InvalidArgument("psi_map_to_clifford: hbar must be positive");
    std::map<int, Mat2> row;
    for (const auto& [w, m] : t.terms()) {
        if (w.size() != 1) throw UnsupportedDegree("psi_map_to_clifford: expects degree-1 words");
        if (w[0].i == i0) row[w[0].j] += m;
        else if (w[0].j == i0) row[w[0].i] -= m.transpose();
    }
    if (static_cast<int>(row.size()) != d + 1)
        throw InvalidGraph("psi_map_to_clifford: row must have exactly d+1 neighbours");
    if (order.empty())
        for (const auto& kv : row) order.push_back(kv.first);
    if (static_cast<int>(order.size()) != d + 1) throw InvalidGraph("psi_map_to_clifford: bad labelling");

    const Complex unit = (kI / hbar) * mat2::Y()(0, 1);
    clifford::Multivector out(d);
    for (int k = 0; k < d; ++k) {
        auto it = row.find(order[k]);
        if (it == row.end()) throw InvalidGraph("psi_map_to_clifford: labelling names a non-neighbour");
        const Complex c = it->second(0, 1) / unit;
        const Mat2 resid = it->second - c * (kI / hbar) * mat2::Y();
        if (resid.cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, it->second.cwiseAbs().maxCoeff()))
            throw InvalidArgument("psi_map_to_clifford: coefficient is not a multiple of Y");
        out[std::uint32_t{1} << k] = c.real();
    }
    return out;
}

}  // namespace diraclab::liealg
