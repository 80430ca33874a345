#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "wg/geometry.hpp"

using namespace wg;

namespace {
CellGeometry square_geom(int nx = 24, int n3 = 16) {
    CellGeometry g;
    g.quad_nx1 = g.quad_nx2 = nx;
    g.quad_n3 = n3;
    g.gamma_nt = nx;
    g.gamma_n3 = n3;
    return g;
}
}  // namespace

TEST_CASE("dirichlet eigenpairs: closed-form separable modes") {
    auto g = square_geom();
    auto one = dirichlet_eigenpairs(g, 1);
    CHECK(one.size() == 1);
    CHECK(one[0].mu == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(one[0].m == 1);
    CHECK(one[0].n == 1);

    auto three = dirichlet_eigenpairs(g, 3);
    CHECK(three[0].mu == doctest::Approx(2.0));
    CHECK(three[1].mu == doctest::Approx(5.0));
    CHECK(three[2].mu == doctest::Approx(5.0));
    // lexicographic tie-break between (1,2) and (2,1)
    CHECK(three[1].m == 1);
    CHECK(three[1].n == 2);
    CHECK(three[2].m == 2);
    CHECK(three[2].n == 1);

    CellGeometry rect = g;
    rect.b = M_PI / 2.0;
    auto first = dirichlet_eigenpairs(rect, 1);
    CHECK(first[0].mu == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("cell basis: lambda_star values and degeneracy") {
    auto g = square_geom();
    auto b0 = cell_basis(QuasiMomentum{0.0}, g, 4, 2);
    CHECK(b0.front().lambda_star == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(b0.front().idx.m == 1);
    CHECK(b0.front().idx.n == 1);
    CHECK(b0.front().idx.j == 0);

    auto bp = cell_basis(QuasiMomentum{M_PI}, g, 4, 2);
    // (1,1,0) and (1,1,-1) share lambda_star = 2 + 1/4
    CHECK(bp[0].lambda_star == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(bp[1].lambda_star == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(bp[0].idx.j == -1);  // tie broken lexicographically on (m,n,j)
    CHECK(bp[1].idx.j == 0);
}

TEST_CASE("poincare constant branches") {
    auto g = square_geom();
    const double mu1 = 2.0;
    CHECK(poincare_constant(QuasiMomentum{0.0}, g) == doctest::Approx(mu1));
    CHECK(poincare_constant(QuasiMomentum{M_PI}, g) == doctest::Approx(mu1 + 0.25));
    CHECK(poincare_constant(QuasiMomentum{1.5 * M_PI}, g) ==
          doctest::Approx(mu1 + 1.0 / 16.0));
    CHECK(poincare_constant(QuasiMomentum{0.3}, g) > 0.0);
}

TEST_CASE("quadrature grids: weight sums and a closed-form integral") {
    auto g = square_geom(32, 24);
    auto [y, gamma] = quadrature_grids(g);

    long double wy = 0.0L;
    for (double w : y.w1) wy += w;
    long double wx2 = 0.0L, wx3 = 0.0L;
    for (double w : y.w2) wx2 += w;
    for (double w : y.w3) wx3 += w;
    CHECK(double(wy * wx2 * wx3) ==
          doctest::Approx(g.a * g.b * kTwoPi).epsilon(1e-12));

    long double wg_sum = 0.0L;
    for (std::size_t i = 0; i < gamma.size(); ++i) wg_sum += gamma.weight(i);
    CHECK(double(wg_sum) == doctest::Approx(2.0 * (g.a + g.b) * kTwoPi).epsilon(1e-12));

    // integral of sin^2(x1) sin^2(x2) over Y equals pi^3 / 2 on the square cell
    long double acc = 0.0L;
    for (std::size_t i1 = 0; i1 < y.x1.size(); ++i1)
        for (std::size_t i2 = 0; i2 < y.x2.size(); ++i2)
            for (std::size_t i3 = 0; i3 < y.x3.size(); ++i3)
                acc += y.weight(i1, i2, i3) * std::pow(std::sin(y.x1[i1]), 2) *
                       std::pow(std::sin(y.x2[i2]), 2);
    CHECK(double(acc) == doctest::Approx(std::pow(M_PI, 3) / 2.0).epsilon(1e-10));
}

TEST_CASE("basis orthonormality via quadrature (Gram equals identity)") {
    auto g = square_geom(28, 20);
    auto [y, gamma] = quadrature_grids(g);
    QuasiMomentum th{1.3};
    auto basis = cell_basis(th, g, 25, 4);
    basis.resize(200);

    const std::size_t n1 = y.x1.size(), n2 = y.x2.size(), n3 = y.x3.size();
    Eigen::MatrixXcd E(n1 * n2 * n3, basis.size());
    Eigen::VectorXd w(n1 * n2 * n3);
    std::size_t row = 0;
    for (std::size_t i1 = 0; i1 < n1; ++i1)
        for (std::size_t i2 = 0; i2 < n2; ++i2)
            for (std::size_t i3 = 0; i3 < n3; ++i3, ++row) {
                w[row] = y.weight(i1, i2, i3);
                for (std::size_t p = 0; p < basis.size(); ++p)
                    E(row, p) = basis_value(basis[p].idx, th, g, y.x1[i1], y.x2[i2], y.x3[i3]);
            }
    Eigen::MatrixXcd gram = E.adjoint() * w.asDiagonal() * E;
    double worst = (gram - Eigen::MatrixXcd::Identity(basis.size(), basis.size()))
                       .cwiseAbs()
                       .maxCoeff();
    CHECK(worst < 1e-8);
}

TEST_CASE("Rayleigh quotient of basis functions equals lambda_star") {
    auto g = square_geom(24, 16);
    auto [y, gamma] = quadrature_grids(g);
    QuasiMomentum th{2.1};
    auto basis = cell_basis(th, g, 6, 2);
    for (std::size_t pick : {0ul, 5ul, 20ul, basis.size() - 1}) {
        const auto& e = basis[pick];
        long double num = 0.0L, den = 0.0L;
        for (std::size_t i1 = 0; i1 < y.x1.size(); ++i1)
            for (std::size_t i2 = 0; i2 < y.x2.size(); ++i2)
                for (std::size_t i3 = 0; i3 < y.x3.size(); ++i3) {
                    auto grad = basis_gradient(e.idx, th, g, y.x1[i1], y.x2[i2], y.x3[i3]);
                    cplx val = basis_value(e.idx, th, g, y.x1[i1], y.x2[i2], y.x3[i3]);
                    double w = y.weight(i1, i2, i3);
                    num += w * (std::norm(grad[0]) + std::norm(grad[1]) + std::norm(grad[2]));
                    den += w * std::norm(val);
                }
        CHECK(double(num / den) == doctest::Approx(e.lambda_star).epsilon(1e-8));
    }
}

TEST_CASE("Poincare inequality on random basis combinations") {
    auto g = square_geom();
    QuasiMomentum th{0.9};
    auto basis = cell_basis(th, g, 10, 3);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double lam1 = poincare_constant(th, g);
    for (int trial = 0; trial < 20; ++trial) {
        // ||u||^2 = sum |c|^2 and ||grad u||^2 = sum lambda_star |c|^2 by
        // orthonormality; the inequality must hold with the first eigenvalue.
        double n2 = 0.0, g2 = 0.0;
        for (const auto& e : basis) {
            cplx c(u(rng), u(rng));
            n2 += std::norm(c);
            g2 += e.lambda_star * std::norm(c);
        }
        CHECK(lam1 * n2 <= g2 + 1e-8);
    }
    CHECK(basis.front().lambda_star == doctest::Approx(lam1).epsilon(1e-14));
}

TEST_CASE("basis quasi-periodicity in x3") {
    auto g = square_geom();
    QuasiMomentum th{2.4};
    auto basis = cell_basis(th, g, 4, 3);
    for (const auto& e : basis) {
        cplx at0 = basis_value(e.idx, th, g, 1.1, 0.7, 0.0);
        cplx at2pi = basis_value(e.idx, th, g, 1.1, 0.7, kTwoPi);
        CHECK(std::abs(at2pi - std::polar(1.0, th.theta) * at0) < 1e-12);
    }
}

TEST_CASE("potential: closed form is source of truth, bound respected") {
    auto g = square_geom();
    auto [y, gamma] = quadrature_grids(g);
    std::vector<TrigTerm> terms = {
        {0.4, {AxisFactor::Kind::Sin, 1}, {AxisFactor::Kind::Sin, 1}, {AxisFactor::Kind::Cos, 1}},
        {-0.2, {AxisFactor::Kind::Cos, 2}, {AxisFactor::Kind::One, 0}, {AxisFactor::Kind::Sin, 2}}};
    auto V = Potential::from_terms(terms, g, y, 0.0);
    CHECK(V.samples.size() == y.size());
    CHECK(V.grid_sup() <= V.bound_M);
    // x3 periodicity is structural: integer frequencies only
    CHECK(V.eval(g, 0.3, 0.9, 0.5) ==
          doctest::Approx(V.eval(g, 0.3, 0.9, 0.5 + kTwoPi)).epsilon(1e-14));
    // samples come from the closed form
    CHECK(V.samples[0] == doctest::Approx(V.eval(g, y.x1[0], y.x2[0], y.x3[0])));
}

TEST_CASE("geometry validation") {
    CellGeometry bad;
    bad.a = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CellGeometry few;
    few.quad_n3 = 1;
    CHECK_THROWS_AS(few.validate(), std::invalid_argument);
    CHECK_THROWS_AS(QuasiMomentum{kTwoPi}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_eigenpairs(square_geom(), 0), std::invalid_argument);
}
