#pragma once

// VMF edge weights, the lambda combination used by the Laplacian weights,
// star-graph Dirac operators and spectral diagnostics.
//
// A star graph for one copy lives on 2N vertices with N = d+1: the base
// vertex i0 = 1 sits in the first half of the chirality split and its d+1
// neighbours are the vertices N+1..2N, so every edge crosses the split and
// the assembled operator anticommutes with gamma.

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "diraclab/error.hpp"
#include "diraclab/liealg.hpp"
#include "diraclab/manifold.hpp"
#include "diraclab/specfun.hpp"

namespace diraclab::graphdirac {

using manifold::FramedPoint;
using manifold::ManifoldModel;
using manifold::Vec;

/// The sign that makes the weighted averages converge to +e_j(a)(p); the
/// kernel as printed carries the opposite sign.
inline constexpr int kCalibratedSign = +1;

struct LambdaWeights {
    Vec s_last;                  // s_{d+1} in frame coordinates
    std::vector<double> lambda;  // lambda_1..lambda_{d+1}
};

/// u = e_1 + ... + e_d, s_{d+1} = -u/|u|, lambda_j = 1/(d+|u|) for j <= d and
/// lambda_{d+1} = |u|/(d+|u|). Expressed in frame coordinates, so u = (1,..,1).
inline LambdaWeights laplace_lambda(int d) {
    if (d < 1) throw InvalidArgument("laplace_lambda: dimension must be positive");
    const Vec u = Vec::Ones(d);
    const double nu = u.norm();
    if (nu == 0.0) throw InvalidArgument("laplace_lambda: degenerate frame");
    LambdaWeights lw;
    lw.s_last = -u / nu;
    lw.lambda.assign(d, 1.0 / (d + nu));
    lw.lambda.push_back(nu / (d + nu));
    return lw;
}

inline LambdaWeights laplace_lambda(const FramedPoint& fp) { return laplace_lambda(fp.dim()); }

/// <y, s_j> for log coordinates y: y_j for j <= d, <y, s_{d+1}> for j = d+1.
inline double anchor_projection(const Vec& y, int j, const LambdaWeights* lw) {
    const int d = static_cast<int>(y.size());
    if (j >= 1 && j <= d) return y(j - 1);
    if (j == d + 1) {
        if (lw == nullptr) throw InvalidArgument("anchor s_{d+1} needs lambda weights");
        return y.dot(lw->s_last);
    }
    throw InvalidArgument("frame index out of range");
}

/// Log coordinates of x relative to fp, checked against U_p.
inline Vec neighbourhood_coords(const ManifoldModel& M, const FramedPoint& fp, const Vec& x) {
    const Vec y = fp.coords(M.log_map(fp.p, x));
    if (!(y.norm() <= fp.delta_u * (1.0 + 1e-12))) throw OutOfNeighbourhood("point lies outside U_p");
    return y;
}

/// C_d(1/hbar) exp(sigma <log_p x, e_j> / hbar), formed in log space.
inline double vmf_weight(const ManifoldModel& M, const FramedPoint& fp, const Vec& x, int j, double hbar, int sigma,
                         const LambdaWeights* lw = nullptr) {
    if (!(hbar > 0.0)) throw InvalidArgument("vmf_weight: hbar must be positive");
    if (sigma != 1 && sigma != -1) throw InvalidArgument("vmf_weight: sign must be +1 or -1");
    const Vec y = neighbourhood_coords(M, fp, x);
    return std::exp(specfun::log_c_d(fp.dim(), 1.0 / hbar) + sigma * anchor_projection(y, j, lw) / hbar);
}

/// Laplacian edge weight sqrt(lambda_j) C_d(1/hbar) exp(sigma <y, s_j> / (2 hbar)).
inline double laplace_weight(const ManifoldModel& M, const FramedPoint& fp, const Vec& x, int j, double hbar,
                             int sigma, const LambdaWeights& lw) {
    if (!(hbar > 0.0)) throw InvalidArgument("laplace_weight: hbar must be positive");
    const Vec y = neighbourhood_coords(M, fp, x);
    return std::sqrt(lw.lambda.at(j - 1)) *
           std::exp(specfun::log_c_d(fp.dim(), 1.0 / hbar) + sigma * anchor_projection(y, j, &lw) / (2.0 * hbar));
}

// ---------------------------------------------------------------------------
// Graphs and operators

struct StarGraph {
    int i0 = 1;
    std::vector<int> neighbours;
    std::vector<Vec> points;  // neighbour points, ambient coordinates
    int copy = 0;
};

/// Standard layout for dimension d: i0 = 1, neighbours d+2..2d+2.
inline StarGraph make_star_graph(int d, std::vector<Vec> points, int copy = 0) {
    if (static_cast<int>(points.size()) != d + 1) throw InvalidGraph("star graph needs exactly d+1 neighbours");
    StarGraph g;
    g.copy = copy;
    const int N = d + 1;
    for (int j = 1; j <= d + 1; ++j) g.neighbours.push_back(N + j);
    g.points = std::move(points);
    return g;
}

struct WeightedGraphDirac {
    int N = 1;  // the operator acts on 2N blocks
    double hbar = 1.0;
    liealg::WeightMap weights;

    int vertex_count() const { return 2 * N; }

    liealg::DiracOperator dirac() const { return liealg::dirac_from_W(liealg::build_W(weights, 2, N), hbar); }
    liealg::ConcreteOperator matrix() const { return dirac().concrete; }
};

/// Keeps block row and block column i0 only.
inline liealg::ConcreteOperator project_row(const liealg::ConcreteOperator& A, int i0) {
    liealg::ConcreteOperator out = liealg::ConcreteOperator::Zero(A.rows(), A.cols());
    const int r = 2 * (i0 - 1);
    out.middleRows(r, 2) = A.middleRows(r, 2);
    out.middleCols(r, 2) = A.middleCols(r, 2);
    return out;
}

enum class WeightKind { dirac, laplace };

/// Weighted operator for one copy. Neighbour k (1-based in the graph's
/// list) is weighted against anchor s_k.
inline WeightedGraphDirac assemble_dirac(const StarGraph& g, const ManifoldModel& M, const FramedPoint& fp,
                                         double hbar, int sigma, WeightKind kind = WeightKind::dirac) {
    const int d = fp.dim();
    if (static_cast<int>(g.neighbours.size()) != d + 1 || g.points.size() != g.neighbours.size())
        throw InvalidGraph("assemble_dirac: every base vertex needs exactly d+1 neighbours");
    WeightedGraphDirac out;
    out.N = d + 1;
    out.hbar = hbar;
    const LambdaWeights lw = laplace_lambda(d);
    for (int k = 0; k <= d; ++k) {
        const int i = std::min(g.i0, g.neighbours[k]), j = std::max(g.i0, g.neighbours[k]);
        liealg::check_pair(i, j, out.N);
        const double w = kind == WeightKind::dirac ? vmf_weight(M, fp, g.points[k], k + 1, hbar, sigma, &lw)
                                                   : laplace_weight(M, fp, g.points[k], k + 1, hbar, sigma, lw);
        out.weights[{i, j}] = w;
    }
    return out;
}

inline std::vector<WeightedGraphDirac> assemble_dirac(const std::vector<StarGraph>& graphs, const ManifoldModel& M,
                                                      const FramedPoint& fp, double hbar, int sigma,
                                                      WeightKind kind = WeightKind::dirac) {
    std::vector<WeightedGraphDirac> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(assemble_dirac(g, M, fp, hbar, sigma, kind));
    return out;
}

// ---------------------------------------------------------------------------
// Spectral diagnostics

struct PowerIterationOptions {
    int max_iterations = 200000;
    double tolerance = 1e-13;  // relative change between iterates
};

/// Largest |eigenvalue| by power iteration on |A v| / |v|.
template <class Derived>
double spectral_radius(const Eigen::MatrixBase<Derived>& A, const PowerIterationOptions& opt = {}) {
    using Scalar = typename Derived::Scalar;
    using VecS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (A.rows() != A.cols()) throw InvalidArgument("spectral_radius: matrix must be square");
    const auto n = A.rows();
    if (n == 0) return 0.0;
    if (A.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    // deterministic, non-symmetric start vector
    VecS v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Scalar(1.0 + 0.1 * std::sin(1.0 + 3.0 * static_cast<double>(i)));
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        VecS w = A * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        const double change = std::abs(nw - est);
        est = nw;
        v = w / nw;
        if (it > 10 && change <= opt.tolerance * nw) return est;
    }
    throw NumericFailure("spectral_radius: power iteration did not converge", est);
}

struct PfReport {
    double rho = 0.0;
    double bound_ratio = 0.0;
};

/// rho([D, a]) and its ratio to the supplied sup-norm of the gradient.
inline PfReport pf_bound_report(const WeightedGraphDirac& D, const liealg::DiagonalObservable& a, double grad_sup) {
    if (!(grad_sup > 0.0)) throw InvalidArgument("pf_bound_report: grad_sup must be positive");
    const auto C = liealg::commutator_concrete(D.matrix(), a.realize());
    PfReport r;
    r.rho = spectral_radius(C);
    if (!std::isfinite(r.rho)) throw NumericFailure("pf_bound_report: non-finite spectral radius", r.rho);
    r.bound_ratio = r.rho / grad_sup;
    return r;
}

/// Matrix Market coordinate format, complex general, 1-based triplets.
inline void write_matrix_market(std::ostream& os, const liealg::ConcreteOperator& A) {
    int nnz = 0;
    for (Eigen::Index c = 0; c < A.cols(); ++c)
        for (Eigen::Index r = 0; r < A.rows(); ++r)
            if (A(r, c) != liealg::Complex(0.0)) ++nnz;
    os << "%%MatrixMarket matrix coordinate complex general\n";
    os << A.rows() << ' ' << A.cols() << ' ' << nnz << '\n';
    os.precision(17);
    for (Eigen::Index c = 0; c < A.cols(); ++c)
        for (Eigen::Index r = 0; r < A.rows(); ++r)
            if (A(r, c) != liealg::Complex(0.0))
                os << r + 1 << ' ' << c + 1 << ' ' << A(r, c).real() << ' ' << A(r, c).imag() << '\n';
}

}  // namespace diraclab::graphdirac
