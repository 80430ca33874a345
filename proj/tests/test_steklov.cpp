#include <cmath>
#include <random>

#include "doctest.h"
#include "wg/steklov.hpp"

using namespace wg;

namespace {

constexpr auto kSin = AxisFactor::Kind::Sin;
constexpr auto kCos = AxisFactor::Kind::Cos;
constexpr auto kOne = AxisFactor::Kind::One;

struct Lab {
    CellGeometry geom;
    QuasiMomentum theta{0.7};
    YGrid y;
    GammaGrid gamma;
    Potential V;
    std::vector<BasisEntry> basis;
    EigenSolution sol;
    BoundarySpectralData bsd;
};

Lab make_lab(std::vector<TrigTerm> terms, double theta = 0.7, int k_cross = 20, int j_max = 2,
             int keep = 0, int nx = 28, int n3 = 16) {
    Lab lab;
    lab.geom.quad_nx1 = lab.geom.quad_nx2 = nx;
    lab.geom.quad_n3 = n3;
    lab.geom.gamma_nt = nx;
    lab.geom.gamma_n3 = n3;
    lab.theta = QuasiMomentum{theta};
    auto grids = quadrature_grids(lab.geom);
    lab.y = std::move(grids.first);
    lab.gamma = std::move(grids.second);
    lab.V = Potential::from_terms(std::move(terms), lab.geom, lab.y);
    lab.basis = cell_basis(lab.theta, lab.geom, k_cross, j_max);
    int B = static_cast<int>(lab.basis.size());
    lab.sol = eigensolve(assemble(lab.theta, lab.V, lab.basis, lab.geom, lab.y),
                         keep > 0 ? keep : B);
    lab.bsd = boundary_traces(lab.sol, lab.geom, lab.gamma, 1);
    return lab;
}

std::vector<TrigTerm> trig_v() {
    return {{0.4, {kSin, 1}, {kSin, 1}, {kCos, 1}},
            {0.3, {kSin, 2}, {kSin, 1}, {kSin, 1}},
            {0.25, {kSin, 1}, {kSin, 2}, {kCos, 2}}};
}

// closed-form pairing of a probe against one raw-mode normal derivative:
// alpha_p = integral over Gamma of e_zeta conj(d e_p/dn), evaluated axis by
// axis with exact 1-d integrals
cplx closed_form_alpha(const BasisIndex& idx, QuasiMomentum th, const CellGeometry& geom,
                       const CVec3& zeta) {
    auto sin_exp = [](int m, double L, cplx z) -> cplx {
        // integral_0^L sin(m pi x / L) e^{z x} dx
        const cplx k(0.0, m * M_PI / L);
        const cplx ip = z + k, im = z - k;
        auto ex = [&](cplx w) -> cplx {
            if (std::abs(w) * L < 1e-12) return cplx(L, 0.0);
            return (std::exp(w * L) - 1.0) / w;
        };
        return (ex(ip) - ex(im)) / cplx(0.0, 2.0);
    };
    auto exp_exp = [](cplx z, double L) -> cplx {
        if (std::abs(z) * L < 1e-12) return cplx(L, 0.0);
        return (std::exp(z * L) - 1.0) / z;
    };
    const double a = geom.a, b = geom.b;
    const double q = th.theta / kTwoPi + idx.j;
    // conj of the longitudinal factor times the probe factor
    const cplx z3 = zeta[2] - cplx(0.0, q);
    const cplx long_part = exp_exp(z3, kTwoPi) / std::sqrt(kTwoPi);

    const double dm = std::sqrt(2.0 / a) * (idx.m * M_PI / a);  // derivative factor
    const double dn = std::sqrt(2.0 / b) * (idx.n * M_PI / b);
    const double norm_a = std::sqrt(2.0 / a), norm_b = std::sqrt(2.0 / b);

    // four faces: x1 = 0 (normal -x1), x1 = a (+x1), x2 = 0, x2 = b
    cplx total = 0.0;
    // d e_p/dn on x1-faces: sign * dm * cos(m pi x1/a)|_face * s_n(x2) E(x3)
    cplx f_x2 = norm_b * sin_exp(idx.n, b, zeta[1]);
    total += (-1.0) * dm * f_x2 * long_part * std::exp(zeta[0] * 0.0);
    total += (+1.0) * dm * ((idx.m % 2 == 0) ? 1.0 : -1.0) * f_x2 * long_part *
             std::exp(zeta[0] * a);
    cplx f_x1 = norm_a * sin_exp(idx.m, a, zeta[0]);
    total += (-1.0) * dn * f_x1 * long_part * std::exp(zeta[1] * 0.0);
    total += (+1.0) * dn * ((idx.n % 2 == 0) ? 1.0 : -1.0) * f_x1 * long_part *
             std::exp(zeta[1] * b);
    return total;
}

}  // namespace

TEST_CASE("boundary pairing: self-pairing, orthogonality, refinement") {
    auto lab = make_lab(trig_v());
    const std::size_t n = lab.gamma.size();

    std::vector<cplx> psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = lab.bsd.psi(i, 2);
    cplx self = boundary_pairing(psi, psi, lab.gamma);
    CHECK(self.imag() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(self.real() > 0.0);
    CHECK(self.real() == doctest::Approx(std::pow(lab.bsd.psi_gamma_norm(2), 2)));

    // Gram-Schmidt a random vector against psi, pairing must vanish
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> f(n);
    for (auto& v : f) v = cplx(u(rng), u(rng));
    cplx proj = boundary_pairing(f, psi, lab.gamma) / self;
    for (std::size_t i = 0; i < n; ++i) f[i] -= proj * psi[i];
    CHECK(std::abs(boundary_pairing(f, psi, lab.gamma)) < 1e-12 * std::abs(self));

    std::vector<cplx> wrong(n - 1);
    CHECK_THROWS_AS(boundary_pairing(wrong, psi, lab.gamma), std::invalid_argument);

    // grid refinement: pairing against a closed-form probe converges
    auto zp = make_zeta({0.5, 0.2}, 1, lab.theta, 1.0 - std::pow(2.0, -4));
    auto coarse_probe = exp_probe_on_gamma(zp.zeta0, lab.gamma);
    cplx coarse = boundary_pairing(coarse_probe, psi, lab.gamma);
    // recompute both psi and the probe on a doubled boundary grid
    auto fine_geom = lab.geom;
    fine_geom.gamma_nt *= 2;
    fine_geom.gamma_n3 *= 2;
    auto fine_gamma = quadrature_grids(fine_geom).second;
    auto fine_bsd = boundary_traces(lab.sol, lab.geom, fine_gamma, 1);
    std::vector<cplx> psi_fine(fine_gamma.size());
    for (std::size_t i = 0; i < fine_gamma.size(); ++i) psi_fine[i] = fine_bsd.psi(i, 2);
    cplx fine = boundary_pairing(exp_probe_on_gamma(zp.zeta0, fine_gamma), psi_fine, fine_gamma);
    CHECK(std::abs(coarse - fine) < 1e-8 * (1.0 + std::abs(fine)));
}

TEST_CASE("solve_bvp: zero datum, norm identity, resolvent decay, closed-form alphas") {
    auto lab = make_lab(trig_v());
    const std::size_t n = lab.gamma.size();

    BoundaryDatum zero{std::vector<cplx>(n, cplx(0, 0)), "zero"};
    auto u0 = solve_bvp(lab.bsd, zero, cplx(-5.0, 0.0));
    for (const auto& c : u0.coeffs) CHECK(std::abs(c) == 0.0);
    CHECK(u0.norm == 0.0);

    auto zp = make_zeta({0.5, 0.2}, 1, lab.theta, 1.0 - std::pow(2.0, -4));
    auto f = BoundaryDatum::from_probe(zp.zeta0, lab.gamma);

    double prev = 1e300;
    for (double lam : {-10.0, -100.0, -1000.0, -10000.0}) {
        auto u = solve_bvp(lab.bsd, f, cplx(lam, 0.0));
        // truncated norm identity holds by construction
        long double direct = 0.0L;
        for (const auto& c : u.coeffs) direct += std::norm(c);
        CHECK(std::sqrt(double(direct)) == doctest::Approx(u.norm).epsilon(1e-13));
        CHECK(u.norm < prev);
        prev = u.norm;
    }

    // guard: lambda too close to an eigenvalue names the mode
    CHECK_THROWS_AS(solve_bvp(lab.bsd, f, cplx(lab.bsd.lambdas[3], 0.0)),
                    std::invalid_argument);

    // V = 0: alphas against the free modes match exact face integrals
    auto free_lab = make_lab({}, 0.7, 12, 2);
    auto ff = BoundaryDatum::from_probe(zp.zeta0, free_lab.gamma);
    auto uf = solve_bvp(free_lab.bsd, ff, cplx(-3.0, 0.0));
    for (int k = 0; k < 20; ++k) {
        // free eigenvectors are permutation columns: find the raw mode index
        int p = -1;
        for (int q = 0; q < free_lab.sol.size(); ++q)
            if (std::abs(free_lab.sol.C(q, k)) > 0.5) p = q;
        REQUIRE(p >= 0);
        cplx expect = closed_form_alpha(free_lab.basis[p].idx, free_lab.theta, free_lab.geom,
                                        zp.zeta0);
        CHECK(std::abs(uf.alphas[k] - expect) < 1e-8 * (1.0 + std::abs(expect)));
    }
}

TEST_CASE("normal derivative difference: antisymmetry and the mu limit") {
    auto lab = make_lab(trig_v());
    auto zp = make_zeta({0.4, 0.1}, 1, lab.theta, 1.0 - std::pow(2.0, -4));
    auto f = BoundaryDatum::from_probe(zp.zeta0, lab.gamma);
    cplx lam(-2.0, 0.0), mu(-40.0, 0.0);

    auto same = normal_derivative_difference(lab.bsd, lam, lam, f);
    for (const auto& v : same.values) CHECK(std::abs(v) == 0.0);

    auto ab = normal_derivative_difference(lab.bsd, lam, mu, f);
    auto ba = normal_derivative_difference(lab.bsd, mu, lam, f);
    for (std::size_t i = 0; i < ab.values.size(); ++i)
        CHECK(std::abs(ab.values[i] + ba.values[i]) < 1e-15 * (1.0 + std::abs(ab.values[i])));

    // mu -> -infinity: converges to sum_k alpha_k/(lambda-lambda_k) psi_k
    auto u = solve_bvp(lab.bsd, f, lam);
    std::vector<cplx> direct(lab.gamma.size(), cplx(0, 0));
    for (int k = 0; k < lab.bsd.k_keep; ++k)
        for (std::size_t i = 0; i < lab.gamma.size(); ++i)
            direct[i] += u.coeffs[k] * lab.bsd.psi(i, k);
    auto far = normal_derivative_difference(lab.bsd, lam, cplx(-1e6, 0.0), f);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < direct.size(); ++i) {
        worst = std::max(worst, std::abs(far.values[i] - direct[i]));
        scale = std::max(scale, std::abs(direct[i]));
    }
    CHECK(worst < 1e-4 * scale);
}

TEST_CASE("steklov action on exponentials") {
    auto lab = make_lab(trig_v());
    auto zp = make_zeta({0.5, 0.0}, 1, lab.theta, 1.0 - std::pow(2.0, -4));

    // V = 0: the action reduces to the exact normal derivative
    auto free_lab = make_lab({}, 0.7, 12, 2);
    auto tr0 = steklov_apply_exponential(free_lab.sol, free_lab.bsd, free_lab.V,
                                         free_lab.geom, free_lab.y, zp.zeta0, zp.lambda);
    auto dn = exp_probe_normal_derivative_on_gamma(zp.zeta0, free_lab.gamma);
    for (std::size_t i = 0; i < dn.size(); ++i)
        CHECK(std::abs(tr0.values[i] - dn[i]) < 1e-13 * (1.0 + std::abs(dn[i])));

    // Green consistency: (lambda - lambda_k)(e|phi_k) + (V e|phi_k) = alpha_k
    auto e_pair = potential_probe_pairings(lab.sol, lab.V, lab.geom, lab.y, zp.zeta0, true);
    Potential one = Potential::constant(1.0, lab.geom, lab.y);
    auto e_plain = potential_probe_pairings(lab.sol, one, lab.geom, lab.y, zp.zeta0, true);
    auto f = BoundaryDatum::from_probe(zp.zeta0, lab.gamma);
    auto u = solve_bvp(lab.bsd, f, zp.lambda);
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
        cplx lhs = (zp.lambda - lab.bsd.lambdas[k]) * e_plain[k] + e_pair[k];
        worst = std::max(worst, std::abs(lhs - u.alphas[k]) / (1.0 + std::abs(u.alphas[k])));
    }
    CHECK(worst < 1e-6);

    // the potential part of the action vanishes as |lambda| grows
    double prev = 1e300;
    for (int i : {3, 6, 9, 12}) {
        auto zpi = make_zeta({0.5, 0.0}, 1, lab.theta, 1.0 - std::pow(2.0, -i));
        auto tr = steklov_apply_exponential(lab.sol, lab.bsd, lab.V, lab.geom, lab.y,
                                            zpi.zeta0, zpi.lambda);
        auto dni = exp_probe_normal_derivative_on_gamma(zpi.zeta0, lab.gamma);
        long double acc = 0.0L;
        for (std::size_t s = 0; s < dni.size(); ++s)
            acc += lab.gamma.weight(s) * std::norm(tr.values[s] - dni[s]);
        double diff = std::sqrt(double(acc));
        CHECK(diff < prev);
        prev = diff;
    }

    // inadmissible zeta and mismatched lambda are rejected
    CHECK_THROWS_AS(steklov_apply_exponential(lab.sol, lab.bsd, lab.V, lab.geom, lab.y,
                                              zp.zeta0, zp.lambda + cplx(0.5, 0.0)),
                    std::invalid_argument);
    CVec3 badz = {cplx(0, 1), cplx(0.3, 0), cplx(0.2, 0.4)};
    CHECK_THROWS_AS(steklov_apply_exponential(lab.sol, lab.bsd, lab.V, lab.geom, lab.y, badz,
                                              -bilinear_dot(badz, badz)),
                    std::invalid_argument);
}

TEST_CASE("s functional: zero, linearity, free-case closed form") {
    auto free_lab = make_lab({}, 0.7, 12, 2);
    auto zp = make_zeta({0.5, 0.1}, 1, free_lab.theta, 1.0 - std::pow(2.0, -4));

    SteklovTrace zero;
    zero.values.assign(free_lab.gamma.size(), cplx(0, 0));
    zero.lambda = zp.lambda;
    CHECK(std::abs(s_functional(zero, zp.zeta1, free_lab.theta, free_lab.gamma)) == 0.0);

    auto tr = steklov_apply_exponential(free_lab.sol, free_lab.bsd, free_lab.V, free_lab.geom,
                                        free_lab.y, zp.zeta0, zp.lambda);
    cplx s = s_functional(tr, zp.zeta1, free_lab.theta, free_lab.gamma);
    // for V = 0, S = (zeta0.zeta1 - lambda) * cell integral of e^{(z0+z1).x}
    cplx expect = (bilinear_dot(zp.zeta0, zp.zeta1) - zp.lambda) *
                  exp_cell_integral(zp.zeta_sum(), free_lab.geom);
    CHECK(std::abs(s - expect) < 1e-8 * (1.0 + std::abs(expect)));

    // linearity
    SteklovTrace twice = tr;
    for (auto& v : twice.values) v *= 2.0;
    cplx s2 = s_functional(twice, zp.zeta1, free_lab.theta, free_lab.gamma);
    CHECK(std::abs(s2 - 2.0 * s) < 1e-12 * (1.0 + std::abs(s)));
}

TEST_CASE("isozaki identity residual") {
    auto zp = make_zeta({0.5, 0.0}, 1, QuasiMomentum{0.7}, 1.0 - std::pow(2.0, -4));

    // V = 0 reduces to the pure Green identity
    auto free_lab = make_lab({}, 0.7, 12, 2);
    auto r0 = isozaki_identity_residual(free_lab.sol, free_lab.bsd, free_lab.V, free_lab.geom,
                                        free_lab.y, zp.lambda, zp);
    CHECK(std::abs(r0.residual) < 1e-8 * (1.0 + std::abs(r0.s_value)));

    // trig potential: residual small and shrinking under basis refinement
    auto lab_small = make_lab(trig_v(), 0.7, 30, 2, 0, 32, 20);
    auto lab_big = lab_small;
    {
        auto basis = cell_basis(lab_small.theta, lab_small.geom, 30, 2);
        auto small_basis = basis;
        small_basis.resize(60);
        auto big_basis = basis;
        big_basis.resize(120);
        lab_small.basis = small_basis;
        lab_small.sol = eigensolve(assemble(lab_small.theta, lab_small.V, small_basis,
                                            lab_small.geom, lab_small.y), 60);
        lab_small.bsd = boundary_traces(lab_small.sol, lab_small.geom, lab_small.gamma, 1);
        lab_big.basis = big_basis;
        lab_big.sol = eigensolve(assemble(lab_big.theta, lab_big.V, big_basis, lab_big.geom,
                                          lab_big.y), 120);
        lab_big.bsd = boundary_traces(lab_big.sol, lab_big.geom, lab_big.gamma, 1);
    }
    auto rs = isozaki_identity_residual(lab_small.sol, lab_small.bsd, lab_small.V,
                                        lab_small.geom, lab_small.y, zp.lambda, zp);
    auto rb = isozaki_identity_residual(lab_big.sol, lab_big.bsd, lab_big.V, lab_big.geom,
                                        lab_big.y, zp.lambda, zp);
    CHECK(std::abs(rs.residual) < 0.05 * (1.0 + std::abs(rs.s_value)));
    CHECK(std::abs(rb.residual) < std::abs(rs.residual));
}

TEST_CASE("z_mu decay table") {
    auto lab1 = make_lab(trig_v(), 0.7, 16, 2);
    auto lab2 = make_lab({{0.35, {kSin, 1}, {kSin, 1}, {kOne, 0}},
                          {-0.28, {kSin, 2}, {kSin, 2}, {kCos, 1}}},
                         0.7, 16, 2);
    auto zp = make_zeta({0.5, 0.0}, 1, lab1.theta, 1.0 - std::pow(2.0, -4));
    auto f = BoundaryDatum::from_probe(zp.zeta0, lab1.gamma);

    // identical potentials: identically zero
    auto same = z_mu_decay(lab1.sol, lab1.bsd, lab1.sol, lab1.bsd, lab1.geom, f,
                           {-10.0, -100.0});
    for (const auto& row : same) {
        CHECK(row.z_norm < 1e-12);
        CHECK(row.dz_norm < 1e-12);
    }

    // zero datum: zero coefficients
    BoundaryDatum zero{std::vector<cplx>(lab1.gamma.size(), cplx(0, 0)), "zero"};
    auto z0 = z_mu_decay(lab1.sol, lab1.bsd, lab2.sol, lab2.bsd, lab1.geom, zero, {-10.0});
    CHECK(z0[0].z_norm == 0.0);
    CHECK(z0[0].dz_norm == 0.0);

    auto rows = z_mu_decay(lab1.sol, lab1.bsd, lab2.sol, lab2.bsd, lab1.geom, f,
                           {-10.0, -100.0, -1000.0, -10000.0, -100000.0});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].z_norm < rows[i - 1].z_norm);
        CHECK(rows[i].dz_norm < rows[i - 1].dz_norm);
    }
    CHECK(rows.back().z_norm < 1e-3 * rows.front().z_norm);
    CHECK(rows.back().dz_norm < 1e-3 * rows.front().dz_norm);
}

TEST_CASE("bessel sums stay bounded along the probe sweep") {
    auto lab = make_lab(trig_v());
    double first = 0.0, last = 0.0;
    for (int i : {3, 5, 7, 9, 11}) {
        auto zp = make_zeta({0.5, 0.3}, 1, lab.theta, 1.0 - std::pow(2.0, -i));
        auto e0 = exp_probe_on_gamma(zp.zeta0, lab.gamma);
        auto e1s = exp_probe_on_gamma(zp.zeta1, lab.gamma, true);
        double s = bessel_sum(lab.bsd, e0, zp.lambda) +
                   bessel_sum(lab.bsd, e1s, std::conj(zp.lambda));
        if (i == 3) first = s;
        last = s;
        CHECK(s < 1e4);
    }
    CHECK(last < 10.0 * first + 1.0);
}
