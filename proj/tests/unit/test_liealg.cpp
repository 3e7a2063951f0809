#include <catch_amalgamated.hpp>

#include <random>

#include "diraclab/liealg.hpp"

using namespace diraclab;
using namespace diraclab::liealg;

namespace {

const Complex I{0.0, 1.0};

double max_abs(const ConcreteOperator& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Random weights on edges that cross the chirality split (i <= N < j).
WeightMap bipartite_weights(std::mt19937_64& rng, int N) {
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::bernoulli_distribution keep(0.5);
    WeightMap w;
    for (int i = 1; i <= N; ++i)
        for (int j = N + 1; j <= 2 * N; ++j)
            if (keep(rng)) w[{i, j}] = u(rng);
    if (w.empty()) w[{1, 2 * N}] = u(rng);
    return w;
}

WeightMap any_weights(std::mt19937_64& rng, int N) {
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::bernoulli_distribution keep(0.4);
    WeightMap w;
    for (int i = 1; i <= 2 * N; ++i)
        for (int j = i + 1; j <= 2 * N; ++j)
            if (keep(rng)) w[{i, j}] = u(rng);
    if (w.empty()) w[{1, 2}] = u(rng);
    return w;
}

std::vector<double> random_values(std::mt19937_64& rng, int N) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(2 * N);
    for (auto& x : a) x = u(rng);
    return a;
}

}  // namespace

TEST_CASE("root blocks as printed") {
    Mat2 c2;
    c2 << 1.0, -I, -I, -1.0;
    CHECK(root_block(2) == c2);
    Mat2 c1;
    c1 << 1.0, I, I, -1.0;
    CHECK(root_block(1) == c1);
    CHECK(root_block(1).conjugate() == root_block(2));
    CHECK(root_block(2).real() == mat2::X().real());
    CHECK(root_block(2).imag() == mat2::Y().real());
    CHECK_THROWS_AS(root_block(0), InvalidArgument);
    CHECK_THROWS_AS(root_block(5), InvalidArgument);
}

TEST_CASE("build_root_vector places C_s and -C_s^t") {
    const auto X = build_root_vector(1, 2, 2, 1);
    ConcreteOperator expect(4, 4);
    expect << 0, 0, 1.0, -I,  //
        0, 0, -I, -1.0,       //
        -1.0, I, 0, 0,        //
        I, 1.0, 0, 0;
    CHECK(max_abs(X - expect) == 0.0);

    for (int s = 1; s <= 4; ++s) CHECK(max_abs(build_root_vector(2, 3, s, 2) + build_root_vector(2, 3, s, 2).transpose()) == 0.0);

    const auto Z = build_root_vector(1, 3, 4, 2);
    for (int bi = 0; bi < 4; ++bi)
        for (int bj = 0; bj < 4; ++bj) {
            const bool populated = (bi == 0 && bj == 2) || (bi == 2 && bj == 0);
            CHECK((Z.block<2, 2>(2 * bi, 2 * bj).cwiseAbs().maxCoeff() > 0.0) == populated);
        }
    CHECK_THROWS_AS(build_root_vector(2, 2, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(build_root_vector(3, 2, 2, 2), InvalidArgument);
    CHECK_THROWS_AS(build_root_vector(1, 5, 2, 2), InvalidArgument);
}

TEST_CASE("build_W symbolic and concrete forms agree") {
    const auto W0 = build_W({}, 2, 2);
    CHECK(W0.symbolic.empty());
    CHECK(max_abs(W0.concrete) == 0.0);

    const auto W1 = build_W({{{1, 2}, 1.0}}, 2, 1);
    CHECK(W1.symbolic.terms().size() == 1);
    CHECK(W1.symbolic.coeff({{1, 2}}) == root_block(2));
    CHECK(max_abs(W1.concrete - build_root_vector(1, 2, 2, 1)) == 0.0);
    CHECK(max_abs(W1.symbolic.realize() - W1.concrete) == 0.0);

    const auto W2 = build_W({{{1, 2}, 0.7}, {{1, 3}, 1.3}}, 2, 2);
    CHECK(max_abs(W2.concrete - (0.7 * build_root_vector(1, 2, 2, 2) + 1.3 * build_root_vector(1, 3, 2, 2))) <= 1e-15);
    CHECK(max_abs(W2.symbolic.realize() - W2.concrete) <= 1e-15);
    CHECK_THROWS_AS(build_W({{{2, 1}, 1.0}}, 2, 1), InvalidArgument);
}

TEST_CASE("dirac_from_W is Hermitian, scales with 1/hbar and is gamma-odd on bipartite graphs") {
    CHECK(max_abs(dirac_from_W(build_W({}, 2, 2), 0.5).concrete) == 0.0);
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
        const int N = 1 + t % 6;
        const int s = 1 + t % 4;
        const auto W = build_W(any_weights(rng, N), s, N);
        const auto D = dirac_from_W(W, 0.8);
        CHECK(max_abs(D.concrete - D.concrete.adjoint()) <= 1e-12);
        CHECK(max_abs(D.symbolic.realize() - D.concrete) <= 1e-12);
        const auto D2 = dirac_from_W(W, 0.4);
        CHECK(max_abs(D2.concrete - 2.0 * D.concrete) <= 1e-12);

        const auto B = dirac_from_W(build_W(bipartite_weights(rng, N), s, N), 1.3);
        const auto g = chirality(N);
        CHECK(max_abs(g * B.concrete + B.concrete * g) <= 1e-12);
    }
    CHECK_THROWS_AS(dirac_from_W(build_W({}, 2, 1), 0.0), InvalidArgument);
}

TEST_CASE("commutator_concrete") {
    ConcreteOperator A(2, 2), B(2, 2);
    A << 0, 1, 0, 0;
    B << 1, 0, 0, 2;
    ConcreteOperator expect(2, 2);
    expect << 0, 1, 0, 0;
    CHECK(max_abs(commutator_concrete(A, B) - expect) == 0.0);
    CHECK(max_abs(commutator_concrete(A, A)) == 0.0);
    CHECK(max_abs(commutator_concrete(A, ConcreteOperator::Identity(2, 2))) == 0.0);
    CHECK_THROWS_AS(commutator_concrete(A, ConcreteOperator::Identity(3, 3)), InvalidArgument);
}

TEST_CASE("commutator closed form") {
    // constant observable on a bipartite operator
    std::mt19937_64 rng(23);
    const int N = 3;
    const auto D = dirac_from_W(build_W(bipartite_weights(rng, N), 2, N), 0.7);
    const DiagonalObservable c(std::vector<double>(2 * N, 0.37));
    CHECK(commutator_closed_form(D, c).max_abs() == 0.0);
    CHECK(max_abs(commutator_concrete(D.concrete, c.realize())) == 0.0);

    // one edge: the coefficient is (i/hbar) w (a2 - a1) Y
    const double w = 1.7, hbar = 0.3, a1 = 0.4, a2 = -1.1;
    const auto D1 = dirac_from_W(build_W({{{1, 2}, w}}, 2, 1), hbar);
    const auto C1 = commutator_closed_form(D1, DiagonalObservable({a1, a2}));
    const Mat2 expect = (I / hbar) * w * (a2 - a1) * mat2::Y();
    CHECK((C1.coeff({{1, 2}}) - expect).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(C1.terms().size() == 1);

    // agreement with the dense commutator, all root types, arbitrary graphs
    for (int t = 0; t < 60; ++t) {
        const int n = 1 + t % 8;
        const int s = 1 + t % 4;
        std::uniform_real_distribution<double> h(0.1, 10.0);
        const auto Dt = dirac_from_W(build_W(any_weights(rng, n), s, n), h(rng));
        const DiagonalObservable a(random_values(rng, n));
        const auto sym = commutator_closed_form(Dt, a).realize();
        const auto dense = commutator_concrete(Dt.concrete, a.realize());
        REQUIRE(max_abs(sym - dense) <= 1e-12);
    }
    CHECK_THROWS_AS(commutator_closed_form(D1, DiagonalObservable({1, 2, 3, 4})), InvalidArgument);
}

TEST_CASE("psi_reduce rules") {
    TensorElement t(2);
    Mat2 M;
    M << 1.0, 2.0, I, -3.0;
    t.add({{1, 2}, {1, 2}}, M);
    const auto r = psi_reduce(t);
    CHECK(r.terms().size() == 1);
    CHECK(r.coeff({}) == -M);

    TensorElement sym(2);
    sym.add({{1, 2}, {3, 4}}, M);
    sym.add({{3, 4}, {1, 2}}, M);
    CHECK(psi_reduce(sym).empty());

    TensorElement anti(2);
    anti.add({{3, 4}, {1, 2}}, M);
    CHECK(psi_reduce(anti).coeff({{1, 2}, {3, 4}}) == -M);

    TensorElement lin(2);
    lin.add({{1, 3}}, M);
    lin.add({}, M);
    CHECK(psi_reduce(lin).terms().size() == 2);

    CHECK_THROWS_AS(lin.add({{1, 2}, {1, 2}, {1, 2}}, M), UnsupportedDegree);
}

TEST_CASE("Laplacian closed form equals half the reduced bi-commutator") {
    // single edge
    const double w = 0.9, hbar = 0.6, a1 = 0.25, a2 = 1.5;
    const auto D1 = dirac_from_W(build_W({{{1, 2}, w}}, 2, 1), hbar);
    const DiagonalObservable a({a1, a2});
    const Mat2 expect = -(1.0 / (hbar * hbar)) * w * w * (a1 - a2) * mat2::J();
    CHECK((laplacian_closed_form(D1, a).coeff({}) - expect).cwiseAbs().maxCoeff() <= 1e-14);

    // two edges at a common vertex: cross terms cancel, only the scalar word survives
    const auto D2 = dirac_from_W(build_W({{{1, 3}, 0.5}, {{1, 4}, 1.5}}, 2, 2), 0.8);
    const DiagonalObservable a2v({0.1, -0.2, 0.7, 0.3});
    auto red = psi_reduce(bi_commutator(D2, a2v));
    CHECK(red.terms().size() == 1);
    CHECK(red.terms().begin()->first.empty());
    red *= 0.5;
    CHECK((red - laplacian_closed_form(D2, a2v)).max_abs() <= 1e-13);

    // random instances
    std::mt19937_64 rng(29);
    for (int t = 0; t < 100; ++t) {
        const int N = 1 + t % 8;
        std::uniform_real_distribution<double> h(0.1, 10.0);
        const auto D = dirac_from_W(build_W(any_weights(rng, N), 2, N), h(rng));
        const DiagonalObservable ob(random_values(rng, N));
        auto half = psi_reduce(bi_commutator(D, ob));
        half *= 0.5;
        const auto closed = laplacian_closed_form(D, ob);
        REQUIRE((half - closed).max_abs() <= 1e-12 * std::max(1.0, closed.max_abs()));
    }

    const DiagonalObservable constant(std::vector<double>(4, -0.8));
    const auto Db = dirac_from_W(build_W({{{1, 3}, 0.5}, {{2, 4}, 1.0}}, 2, 2), 0.5);
    CHECK(laplacian_closed_form(Db, constant).empty());
    CHECK_THROWS_AS(laplacian_closed_form(dirac_from_W(build_W({{{1, 2}, 1.0}}, 3, 1), 1.0), a), InvalidArgument);
}

TEST_CASE("Laplacian closed form is realized by the dense bi-commutator at a star centre") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 30; ++t) {
        const int d = 2 + t % 3, N = d + 1;
        std::uniform_real_distribution<double> u(0.1, 2.0);
        WeightMap w;
        for (int j = 1; j <= d + 1; ++j) w[{1, N + j}] = u(rng);
        const auto D = dirac_from_W(build_W(w, 2, N), 0.5 + u(rng));
        const DiagonalObservable a(random_values(rng, N));
        const auto bi = commutator_concrete(D.concrete, commutator_concrete(D.concrete, a.realize()));
        const Mat2 got = 0.5 * bi.block<2, 2>(0, 0);
        REQUIRE((got - laplacian_closed_form(D, a).coeff({})).cwiseAbs().maxCoeff() <= 1e-11);
    }
}

TEST_CASE("psi_map_to_clifford reads the base row") {
    const double hbar = 0.5;
    const int d = 2, N = 3;
    auto row = [&](std::vector<double> c) {
        TensorElement t(N);
        for (int j = 0; j <= d; ++j) t.add({{1, N + 1 + j}}, (I / hbar) * c[j] * mat2::Y());
        return t;
    };
    const auto zero = psi_map_to_clifford(row({0, 0, 0}), 1, d, hbar);
    CHECK(zero.max_abs() == 0.0);

    const auto m = psi_map_to_clifford(row({0.3, -1.2, 5.0}), 1, d, hbar);
    CHECK(m[1] == Catch::Approx(0.3).margin(1e-15));
    CHECK(m[2] == Catch::Approx(-1.2).margin(1e-15));
    CHECK(m[3] == 0.0);

    const auto p = psi_map_to_clifford(row({0.3, -1.2, 5.0}), 1, d, hbar, {6, 5, 4});
    CHECK(p[1] == Catch::Approx(5.0).margin(1e-15));
    CHECK(p[2] == Catch::Approx(-1.2).margin(1e-15));

    TensorElement short_row(N);
    short_row.add({{1, 4}}, mat2::Y());
    CHECK_THROWS_AS(psi_map_to_clifford(short_row, 1, d, hbar), InvalidGraph);

    // the commutator of a star operator goes through unchanged
    const auto D = dirac_from_W(build_W({{{1, 4}, 2.0}, {{1, 5}, 3.0}, {{1, 6}, 4.0}}, 2, N), hbar);
    const DiagonalObservable a({0.5, 0.5, 0.5, 1.0, 0.0, 2.0});
    const auto c = psi_map_to_clifford(commutator_closed_form(D, a), 1, d, hbar);
    CHECK(c[1] == Catch::Approx(2.0 * (1.0 - 0.5)));
    CHECK(c[2] == Catch::Approx(3.0 * (0.0 - 0.5)));
}

TEST_CASE("TensorElement JSON dump") {
    TensorElement t(1);
    t.add({{1, 2}}, root_block(2));
    const auto j = to_json(t);
    REQUIRE(j.size() == 1);
    CHECK(j[0]["word"] == nlohmann::json::array({nlohmann::json::array({1, 2})}));
    CHECK(j[0]["mat2"].size() == 4);
    CHECK(j[0]["mat2"][1][1] == -1.0);
}
