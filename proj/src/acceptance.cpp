#include "wg/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "wg/forward.hpp"
#include "wg/geometry.hpp"
#include "wg/inverse.hpp"
#include "wg/steklov.hpp"
#include "wg/zeta.hpp"

namespace wg {

namespace {

// ---------------------------------------------------------------------------
// shared scaffolding
// ---------------------------------------------------------------------------

struct ForwardBundle {
    CellGeometry geom;
    QuasiMomentum theta;
    YGrid ygrid;
    GammaGrid ggrid;
    Potential V;
    std::vector<BasisEntry> basis;
    EigenSolution sol;
    BoundarySpectralData bsd;
};

ForwardBundle make_forward(const CellGeometry& geom, double theta, int k_cross, int j_max,
                           int basis_size, int k_keep, const std::vector<TrigTerm>& terms,
                           double bound = 0.0) {
    ForwardBundle fb;
    fb.geom = geom;
    fb.theta = QuasiMomentum{theta};
    auto grids = quadrature_grids(geom);
    fb.ygrid = std::move(grids.first);
    fb.ggrid = std::move(grids.second);
    fb.V = Potential::from_terms(terms, geom, fb.ygrid, bound);
    fb.basis = cell_basis(fb.theta, geom, k_cross, j_max);
    Truncation tr{k_cross, j_max, basis_size, k_keep};
    auto [B, keep] = resolve_truncation(tr, fb.basis.size());
    fb.basis.resize(B);
    auto op = assemble(fb.theta, fb.V, fb.basis, geom, fb.ygrid);
    fb.sol = eigensolve(op, keep);
    std::uint64_t key = provenance_hash(geom, fb.theta, k_cross, j_max, B, keep, fb.V);
    fb.bsd = boundary_traces(fb.sol, geom, fb.ggrid, key);
    return fb;
}

TrigTerm term(double c, AxisFactor::Kind k1, int m1, AxisFactor::Kind k2, int m2,
              AxisFactor::Kind k3, int m3) {
    return TrigTerm{c, {k1, m1}, {k2, m2}, {k3, m3}};
}

constexpr auto kSin = AxisFactor::Kind::Sin;
constexpr auto kCos = AxisFactor::Kind::Cos;
constexpr auto kOne = AxisFactor::Kind::One;

std::vector<TrigTerm> generic_trig_a() {
    return {term(0.40, kSin, 1, kSin, 1, kCos, 1), term(0.30, kSin, 2, kSin, 1, kSin, 1),
            term(0.25, kSin, 1, kSin, 2, kCos, 2)};
}

std::vector<TrigTerm> generic_trig_b() {
    return {term(0.35, kSin, 1, kSin, 1, kOne, 0), term(-0.28, kSin, 2, kSin, 2, kCos, 1),
            term(0.20, kSin, 3, kSin, 1, kSin, 2)};
}

std::vector<TrigTerm> random_trig(std::mt19937_64& rng, int nterms, double total_mass) {
    std::uniform_int_distribution<int> mode(1, 3), fn(0, 1), x3fn(0, 2);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<TrigTerm> terms;
    double mass = 0.0;
    std::vector<double> raw;
    for (int i = 0; i < nterms; ++i) {
        raw.push_back(unit(rng));
        mass += std::abs(raw.back());
    }
    for (int i = 0; i < nterms; ++i) {
        AxisFactor::Kind kinds[3] = {kOne, kSin, kCos};
        AxisFactor::Kind f3 = kinds[x3fn(rng)];
        terms.push_back(term(raw[i] * total_mass / mass, fn(rng) ? kSin : kCos, mode(rng),
                             fn(rng) ? kSin : kCos, mode(rng), f3,
                             f3 == kOne ? 0 : mode(rng)));
    }
    return terms;
}

int cross_count_below(const CellGeometry& geom, double mu_cap) {
    int count = 0;
    const int mmax = static_cast<int>(std::sqrt(mu_cap) * std::max(geom.a, geom.b) / M_PI) + 2;
    for (int m = 1; m <= mmax; ++m)
        for (int n = 1; n <= mmax; ++n)
            if (std::pow(m * M_PI / geom.a, 2) + std::pow(n * M_PI / geom.b, 2) <= mu_cap)
                ++count;
    return count;
}

int count_lambda_below(const std::vector<BasisEntry>& basis, double cap) {
    int count = 0;
    for (const auto& e : basis)
        if (e.lambda_star <= cap) ++count;
    return count;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

using Criterion = std::function<CriterionResult(const AcceptanceOptions&)>;

CriterionResult a1_exact_free_spectrum(const AcceptanceOptions& opt) {
    CriterionResult r{"A1", true, "", 0};
    const double tol = 1e-10 * opt.tol_scale;
    CellGeometry geom;
    geom.quad_nx1 = geom.quad_nx2 = 20;
    geom.quad_n3 = 12;
    geom.gamma_nt = 12;
    geom.gamma_n3 = 8;
    double worst = 0.0;
    for (double theta : {0.0, 1.0, M_PI, 5.0}) {
        auto fb = make_forward(geom, theta, 36, 4, 0, 80, {});
        for (int k = 0; k < fb.sol.k_keep; ++k) {
            double expect = fb.basis[k].lambda_star;  // basis already sorted ascending
            double rel = std::abs(fb.sol.eigenvalues[k] - expect) / (std::abs(expect) + 1e-300);
            worst = std::max(worst, rel);
        }
    }
    r.pass = worst <= tol;
    r.detail = "max relative eigenvalue error " + fmt(worst) + " (tol " + fmt(tol) + ")";
    return r;
}

CriterionResult a2_constant_shift(const AcceptanceOptions& opt) {
    CriterionResult r{"A2", true, "", 0};
    const double tol = 1e-9 * opt.tol_scale;
    CellGeometry geom;
    geom.b = M_PI / 2.0;
    geom.quad_nx1 = geom.quad_nx2 = 28;
    geom.quad_n3 = 16;
    geom.gamma_nt = 24;
    geom.gamma_n3 = 12;
    auto v1 = generic_trig_a();
    auto v2 = v1;
    v2.push_back(term(0.7, kOne, 0, kOne, 0, kOne, 0));
    auto f1 = make_forward(geom, 1.0, 16, 3, 0, 40, v1);
    auto f2 = make_forward(geom, 1.0, 16, 3, 0, 40, v2);
    double worst_lambda = 0.0;
    for (int k = 0; k < f1.sol.k_keep; ++k)
        worst_lambda = std::max(worst_lambda,
                                std::abs(f2.bsd.lambdas[k] - f1.bsd.lambdas[k] - 0.7));
    auto pair = partition(f1.bsd, f2.bsd, 1e-6, 1e-6);
    auto metrics = bsd_metrics(pair);
    r.pass = worst_lambda <= tol && metrics.delta1 <= tol;
    r.detail = "max |lambda2-lambda1-0.7| = " + fmt(worst_lambda) +
               ", delta1(aligned) = " + fmt(metrics.delta1) + " (tol " + fmt(tol) + ")";
    return r;
}

CriterionResult a3_eigenvalue_gap_bound(const AcceptanceOptions& opt) {
    CriterionResult r{"A3", true, "", 0};
    const double slack = 1e-8 * opt.tol_scale;
    CellGeometry geom;
    geom.b = M_PI / 2.0;
    geom.quad_nx1 = geom.quad_nx2 = 24;
    geom.quad_n3 = 16;
    geom.gamma_nt = 12;
    geom.gamma_n3 = 8;
    std::mt19937_64 rng(opt.seed);
    double worst_excess = -1e300;
    for (int trial = 0; trial < 5; ++trial) {
        auto v1 = random_trig(rng, 3, 1.5);
        auto diff = random_trig(rng, 2, 1.8);
        auto v2 = v1;
        for (const auto& t : diff) v2.push_back(t);
        auto f1 = make_forward(geom, 2.0, 12, 2, 0, 45, v1);
        auto f2 = make_forward(geom, 2.0, 12, 2, 0, 45, v2);
        double sup = 0.0;
        for (std::size_t i = 0; i < f1.V.samples.size(); ++i)
            sup = std::max(sup, std::abs(f1.V.samples[i] - f2.V.samples[i]));
        double gap = 0.0;
        for (int k = 0; k < f1.sol.k_keep; ++k)
            gap = std::max(gap, std::abs(f1.bsd.lambdas[k] - f2.bsd.lambdas[k]));
        worst_excess = std::max(worst_excess, gap - sup);
    }
    r.pass = worst_excess <= slack;
    r.detail = "max over 5 pairs of (max_k|dlambda| - sup|V1-V2|) = " + fmt(worst_excess) +
               " (allowed " + fmt(slack) + ")";
    return r;
}

CriterionResult a4_zeta_invariants(const AcceptanceOptions& opt) {
    CriterionResult r{"A4", true, "", 0};
    const double dot_tol = 1e-12 * opt.tol_scale;  // scaled by (1+|lambda|) below
    const double limit_tol = 0.02 * opt.tol_scale;
    QuasiMomentum theta{1.0};
    std::vector<std::array<double, 2>> xis;
    for (double mag : {0.3, 0.5, 0.65, 0.8})
        for (double ang : {0.2, 1.4, 2.9})
            xis.push_back({mag * std::cos(ang), mag * std::sin(ang)});
    double worst_dot = 0.0, worst_limit = 0.0, worst_third = 0.0;
    int checked = 0;
    for (int j : {1, -1, 0}) {
        for (const auto& xi : xis) {
            cplx last_z0z1(0, 0);
            double last_f2 = 1.0;
            for (int i = 0; i < 8; ++i) {
                double p = (j != 0) ? 1.0 - std::pow(2.0, -(5 + i)) : std::pow(2.0, 2 + i);
                auto zp = make_zeta(xi, j, theta, p);
                double scale = 1.0 + std::abs(zp.lambda);
                worst_dot = std::max(worst_dot,
                                     std::abs(bilinear_dot(zp.zeta0, zp.zeta0) + zp.lambda) / scale);
                worst_dot = std::max(worst_dot,
                                     std::abs(bilinear_dot(zp.zeta1, zp.zeta1) + zp.lambda) / scale);
                if (!validate_admissibility(zp.zeta0, theta, ProbeKind::Plain).pass ||
                    !validate_admissibility(zp.zeta1, theta, ProbeKind::Star).pass) {
                    r.pass = false;
                    r.detail = "admissibility failure";
                    return r;
                }
                // third components exact per branch
                cplx expect0, expect1;
                if (j >= 1) {
                    expect0 = cplx(0.0, j + theta.theta / kTwoPi);
                    expect1 = cplx(0.0, -theta.theta / kTwoPi);
                } else if (j <= -1) {
                    expect0 = cplx(0.0, j - 1 + theta.theta / kTwoPi);
                    expect1 = cplx(0.0, 1 - theta.theta / kTwoPi);
                } else {
                    expect0 = cplx(0.0, theta.theta / kTwoPi);
                    expect1 = cplx(0.0, -theta.theta / kTwoPi);
                }
                worst_third = std::max({worst_third, std::abs(zp.zeta0[2] - expect0),
                                        std::abs(zp.zeta1[2] - expect1)});
                last_z0z1 = bilinear_dot(zp.zeta0, zp.zeta1) - zp.lambda;
                last_f2 = xi[0] * xi[0] + xi[1] * xi[1] + double(j) * j;
                ++checked;
            }
            worst_limit = std::max(worst_limit,
                                   std::abs(last_z0z1 - cplx(-0.5 * last_f2, 0.0)) /
                                       (0.5 * last_f2));
        }
    }
    r.pass = worst_dot <= dot_tol && worst_limit <= limit_tol && worst_third <= 1e-15;
    r.detail = std::to_string(checked) + " pairs; max |zeta.zeta+lambda|/(1+|lambda|) = " +
               fmt(worst_dot) + ", limit deviation " + fmt(worst_limit) +
               ", third-component error " + fmt(worst_third);
    return r;
}

CriterionResult a5_asymptotic_rate(const AcceptanceOptions& opt) {
    CriterionResult r{"A5", true, "", 0};
    const double tol = 0.1 * opt.tol_scale;
    QuasiMomentum theta{1.0};
    std::string parts;
    for (int j : {-2, 0, 3}) {
        auto sweep = zeta_sweep_parameters(j, j != 0 ? 3 : 1, j != 0 ? 14 : 12);
        auto asym = zeta_asymptotics({1.0, 0.0}, j, theta, sweep);
        parts += "j=" + std::to_string(j) + ": slope " + fmt(asym.slope) + "; ";
        if (std::abs(asym.slope + 0.5) > tol) r.pass = false;
    }
    r.detail = parts + "(target -0.5 +- " + fmt(tol) + ")";
    return r;
}

struct IsozakiConfig {
    std::array<double, 2> xi;
    int j;
    double exponent;
};

struct FreqSpec {
    double xi1, xi2;
    int j;
};

CriterionResult a6_isozaki_residual(const AcceptanceOptions& opt) {
    CriterionResult r{"A6", true, "", 0};
    const double rel_tol = 1e-3 * opt.tol_scale;
    const double shrink_required = 3.0;
    CellGeometry geom;
    geom.quad_nx1 = geom.quad_nx2 = 32;
    geom.quad_n3 = 24;
    geom.gamma_nt = 32;
    geom.gamma_n3 = 16;
    const double theta = 0.7;
    auto V = generic_trig_a();

    std::vector<IsozakiConfig> configs = {
        {{0.5, 0.0}, 1, 4.0},  {{0.0, 0.6}, -1, 4.0}, {{0.4, 0.4}, 0, 2.0},
        {{0.7, 0.2}, 2, 3.0},  {{0.3, -0.5}, -2, 3.0}, {{0.6, 0.1}, 0, 2.5}};

    auto base = make_forward(geom, theta, 60, 3, 150, 150, V);
    auto dbl = make_forward(geom, theta, 60, 3, 300, 300, V);

    std::string parts;
    for (const auto& cfg : configs) {
        double p = cfg.j != 0 ? 1.0 - std::pow(2.0, -cfg.exponent) : std::pow(2.0, cfg.exponent);
        auto zp = make_zeta(cfg.xi, cfg.j, QuasiMomentum{theta}, p);
        auto res1 = isozaki_identity_residual(base.sol, base.bsd, base.V, geom, base.ygrid,
                                              zp.lambda, zp);
        auto res2 = isozaki_identity_residual(dbl.sol, dbl.bsd, dbl.V, geom, dbl.ygrid,
                                              zp.lambda, zp);
        double scale = 1.0 + std::abs(res1.s_value);
        double rel1 = std::abs(res1.residual) / scale;
        bool ok_small = rel1 <= rel_tol;
        bool ok_shrink = std::abs(res2.residual) * shrink_required <= std::abs(res1.residual) ||
                         std::abs(res2.residual) <= 1e-11 * scale;
        if (!ok_small || !ok_shrink) r.pass = false;
        parts += "|res|/(1+|S|)=" + fmt(rel1) + (ok_shrink ? "" : "(shrink<3)") + "; ";
    }
    r.detail = parts + "(tol " + fmt(rel_tol) + ", shrink >= 3 at 2B)";
    return r;
}

CriterionResult a7_norm_identity_resolvent_decay(const AcceptanceOptions& opt) {
    CriterionResult r{"A7", true, "", 0};
    CellGeometry geom;
    geom.quad_nx1 = geom.quad_nx2 = 28;
    geom.quad_n3 = 20;
    geom.gamma_nt = 28;
    geom.gamma_n3 = 16;
    auto fb = make_forward(geom, 0.7, 40, 3, 0, 120, generic_trig_a());
    auto zp = make_zeta({0.5, 0.0}, 1, fb.theta, 1.0 - std::pow(2.0, -4.0));
    auto f = BoundaryDatum::from_probe(zp.zeta0, fb.ggrid);

    double identity_err = 0.0;
    std::vector<double> norms;
    for (double lam : {-10.0, -100.0, -1000.0, -10000.0}) {
        auto u = solve_bvp(fb.bsd, f, cplx(lam, 0.0));
        long double direct = 0.0L;
        for (const auto& c : u.coeffs) direct += std::norm(c);
        identity_err = std::max(identity_err,
                                std::abs(std::sqrt(double(direct)) - u.norm) / (u.norm + 1e-300));
        norms.push_back(u.norm);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < norms.size(); ++i) monotone &= norms[i] < norms[i - 1];
    double ratio = norms.back() / norms.front();
    r.pass = identity_err <= 1e-13 * opt.tol_scale && monotone &&
             ratio < 1e-2 * opt.tol_scale;
    r.detail = "identity error " + fmt(identity_err) + ", norms " + fmt(norms.front()) +
               " .. " + fmt(norms.back()) + ", final/initial " + fmt(ratio) +
               (monotone ? " (monotone)" : " (NOT monotone)");
    return r;
}

CriterionResult a8_z_mu_decay(const AcceptanceOptions& opt) {
    CriterionResult r{"A8", true, "", 0};
    CellGeometry geom;
    geom.quad_nx1 = geom.quad_nx2 = 28;
    geom.quad_n3 = 20;
    geom.gamma_nt = 28;
    geom.gamma_n3 = 16;
    auto f1 = make_forward(geom, 0.7, 30, 2, 0, 100, generic_trig_a());
    auto f2 = make_forward(geom, 0.7, 30, 2, 0, 100, generic_trig_b());
    auto zp = make_zeta({0.5, 0.0}, 1, f1.theta, 1.0 - std::pow(2.0, -4.0));
    auto f = BoundaryDatum::from_probe(zp.zeta0, f1.ggrid);
    auto rows = z_mu_decay(f1.sol, f1.bsd, f2.sol, f2.bsd, geom, f,
                           {-10.0, -100.0, -1000.0, -10000.0, -100000.0});
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
        monotone &= rows[i].z_norm < rows[i - 1].z_norm && rows[i].dz_norm < rows[i - 1].dz_norm;
    double rz = rows.back().z_norm / rows.front().z_norm;
    double rdz = rows.back().dz_norm / rows.front().dz_norm;
    r.pass = monotone && rz < 1e-3 * opt.tol_scale && rdz < 1e-3 * opt.tol_scale;
    r.detail = "z ratio " + fmt(rz) + ", dz/dn ratio " + fmt(rdz) +
               (monotone ? " (monotone)" : " (NOT monotone)");
    return r;
}

struct TrigPairBundle {
    ForwardBundle f1, f2;
};

TrigPairBundle make_keep_all_pair() {
    CellGeometry geom;
    geom.quad_nx1 = geom.quad_nx2 = 32;
    geom.quad_n3 = 20;
    geom.gamma_nt = 32;
    geom.gamma_n3 = 16;
    TrigPairBundle tp;
    tp.f1 = make_forward(geom, 0.3, 25, 2, 0, 125, generic_trig_a());
    tp.f2 = make_forward(geom, 0.3, 25, 2, 0, 125, generic_trig_b());
    return tp;
}

CriterionResult a9_mu_limit(const AcceptanceOptions& opt) {
    CriterionResult r{"A9", true, "", 0};
    auto tp = make_keep_all_pair();
    auto pair = partition(tp.f1.bsd, tp.f2.bsd, 1e-9, 1e-9);
    auto zp = make_zeta({0.5, 0.3}, 1, tp.f1.theta, 1.0 - std::pow(2.0, -3.0));
    SDiffOptions sopt;
    sopt.margin_factor = 4.0;
    auto sd = s_difference_series(pair, zp, sopt);
    auto rows = mu_limit_check(pair, zp, {-10.0, -100.0, -1000.0, -10000.0, -100000.0}, sopt);
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) monotone &= rows[i].deviation < rows[i - 1].deviation;
    double bound = 1e-6 * std::abs(sd.s_diff) * opt.tol_scale + 1e-12;
    r.pass = monotone && rows.back().deviation <= bound;
    r.detail = "|S_diff| = " + fmt(std::abs(sd.s_diff)) + ", final deviation " +
               fmt(rows.back().deviation) + " (bound " + fmt(bound) + ")" +
               (monotone ? "" : " NOT monotone");
    return r;
}

CriterionResult a10_bsd_vs_solver_route(const AcceptanceOptions& opt) {
    CriterionResult r{"A10", true, "", 0};
    auto tp = make_keep_all_pair();
    auto pair = partition(tp.f1.bsd, tp.f2.bsd, 1e-9, 1e-9);
    auto zp = make_zeta({0.5, 0.3}, 1, tp.f1.theta, 1.0 - std::pow(2.0, -3.0));
    SDiffOptions sopt;
    auto sd = s_difference_series(pair, zp, sopt);

    auto tr1 = steklov_apply_exponential(tp.f1.sol, tp.f1.bsd, tp.f1.V, tp.f1.geom,
                                         tp.f1.ygrid, zp.zeta0, zp.lambda);
    auto tr2 = steklov_apply_exponential(tp.f2.sol, tp.f2.bsd, tp.f2.V, tp.f2.geom,
                                         tp.f2.ygrid, zp.zeta0, zp.lambda);
    cplx s1 = s_functional(tr1, zp.zeta1, tp.f1.theta, tp.f1.ggrid);
    cplx s2 = s_functional(tr2, zp.zeta1, tp.f2.theta, tp.f2.ggrid);
    cplx solver_route = s1 - s2;
    double rel = std::abs(sd.s_diff - solver_route) / (std::abs(solver_route) + 1e-300);
    r.pass = rel <= 1e-3 * opt.tol_scale;
    r.detail = "BSD route " + fmt(std::abs(sd.s_diff)) + ", solver route " +
               fmt(std::abs(solver_route)) + ", relative mismatch " + fmt(rel) + " (tol " +
               fmt(1e-3 * opt.tol_scale) + ")";
    return r;
}

// The reconstruction scenario of the accuracy criterion: V1 = 0.5 sin sin cos,
// V2 = 0 on the square cross-section.
std::vector<TrigTerm> recon_v1() { return {term(0.5, kSin, 1, kSin, 1, kCos, 1)}; }

CriterionResult a11_reconstruction_accuracy(const AcceptanceOptions& opt) {
    CriterionResult r{"A11", true, "", 0};
    CellGeometry geom;
    geom.quad_nx1 = geom.quad_nx2 = 56;
    geom.quad_n3 = 24;
    geom.gamma_nt = 56;
    geom.gamma_n3 = 24;
    const double theta = 0.0;
    const double mu_cap = 700.0;
    const int k_cross = cross_count_below(geom, mu_cap);
    const int j_max = 2;

    auto basis_probe = cell_basis(QuasiMomentum{theta}, geom, k_cross, j_max);
    const int B = static_cast<int>(basis_probe.size());
    const int keep = count_lambda_below(basis_probe, 0.85 * mu_cap);

    auto f1 = make_forward(geom, theta, k_cross, j_max, B, keep, recon_v1());
    auto f2 = make_forward(geom, theta, k_cross, j_max, B, keep, {});

    auto pair = partition(f1.bsd, f2.bsd, 1e-9, 1e-9);
    SDiffOptions sopt;
    sopt.margin_factor = 1.25;
    SweepConfig scfg;
    std::vector<double> exponents = {0.8, 1.8, 2.8, 3.8, 4.8, 5.8, 6.8, 7.8, 8.3};
    auto res = reconstruct_with_exponents(pair, {0.8, 0.8}, -1, QuasiMomentum{theta},
                                          exponents, scfg, sopt);

    // oracle at the sweep end: direct quadrature of V1 against the probe kernel
    auto zp_end = make_zeta(res.xi_prime, -1, QuasiMomentum{theta}, res.sweep.back().param);
    cplx oracle = potential_exp_integral(f1.V, f1.ygrid, zp_end.zeta_sum());

    const double lam_end = res.sweep.back().abs_lambda;
    const double rel_err = std::abs(res.estimate - oracle) / (std::abs(oracle) + 1e-300);
    const double decades =
        std::log10(res.sweep.back().abs_lambda / res.sweep.front().abs_lambda);

    bool ok_lambda = lam_end >= 400.0;
    bool ok_acc = rel_err <= 0.05 * opt.tol_scale;
    bool ok_slope = res.slope_valid && std::abs(res.decay_slope + 0.5) <= 0.15 * opt.tol_scale &&
                    decades >= 2.0;
    r.pass = ok_lambda && ok_acc && ok_slope;
    r.detail = "B=" + std::to_string(B) + " keep=" + std::to_string(keep) + "; sweep end |lambda|=" +
               fmt(lam_end) + (ok_lambda ? "" : " (<400; 1e3 needs B>~1e4)") +
               ", rel err vs oracle " + fmt(rel_err) + " (tol 0.05)" +
               ", slope " + fmt(res.decay_slope) + " over " + fmt(decades) + " decades";
    return r;
}

CriterionResult a12_uniqueness_regime(const AcceptanceOptions& opt) {
    CriterionResult r{"A12", true, "", 0};
    CellGeometry geom;
    geom.quad_nx1 = geom.quad_nx2 = 32;
    geom.quad_n3 = 16;
    geom.gamma_nt = 32;
    geom.gamma_n3 = 16;
    auto fb = make_forward(geom, 0.0, 80, 2, 400, 320, recon_v1());
    auto pair = partition(fb.bsd, fb.bsd, 1e-9, 1e-9);  // byte-identical data
    SDiffOptions sopt;
    sopt.margin_factor = 3.0;
    SweepConfig scfg;
    std::vector<double> exps = {0.8, 1.8, 2.8, 3.8};
    double worst = 0.0;
    int count = 0;
    for (double mag : {0.5, 1.0}) {
        for (double ang : {0.1, 0.73, 1.51, 2.2, 2.9}) {
            for (int j : {0, 1}) {
                auto res = reconstruct_with_exponents(pair, {mag * std::cos(ang), mag * std::sin(ang)},
                                                      j, fb.theta, exps, scfg, sopt);
                worst = std::max(worst, std::abs(res.vhat));
                ++count;
            }
        }
    }
    r.pass = worst < 1e-10 * opt.tol_scale;
    r.detail = std::to_string(count) + " frequencies, max |vhat| = " + fmt(worst) +
               " (tol 1e-10)";
    return r;
}

CriterionResult a13_stability_shape(const AcceptanceOptions& opt) {
    CriterionResult r{"A13", true, "", 0};
    CellGeometry geom;
    geom.quad_nx1 = geom.quad_nx2 = 40;
    geom.quad_n3 = 20;
    geom.gamma_nt = 40;
    geom.gamma_n3 = 16;
    const int k_cross = 160, j_max = 2;
    SweepConfig scfg;
    std::vector<double> exps = {0.8, 1.8, 2.8, 3.8};
    std::vector<FreqSpec> freqs = {{0.8, 0.8, -1}, {0.5, 0.0, 1}, {0.0, 0.7, 0},
                                        {0.9, 0.2, -2}};
    std::map<int, std::vector<double>> c_by_n;
    std::string parts;
    for (int B : {400, 600, 800}) {
        auto basis_probe = cell_basis(QuasiMomentum{0.0}, geom, k_cross, j_max);
        basis_probe.resize(B);
        int keep = count_lambda_below(basis_probe, 0.8 * basis_probe.back().lambda_star);
        auto f1 = make_forward(geom, 0.0, k_cross, j_max, B, keep, recon_v1());
        auto f2 = make_forward(geom, 0.0, k_cross, j_max, B, keep, {});
        auto pair = partition(f1.bsd, f2.bsd, 1e-9, 1e-9);
        auto metrics = bsd_metrics(pair);
        SDiffOptions sopt;
        sopt.margin_factor = 3.0;
        std::vector<ReconstructionResult> results;
        for (const auto& f : freqs)
            results.push_back(reconstruct_with_exponents(pair, {f.xi1, f.xi2}, f.j,
                                                         QuasiMomentum{0.0}, exps, scfg, sopt));
        auto rep = stability_check(results, metrics, {1, 5, 20}, 1e9);
        for (const auto& row : rep.rows) {
            if (row.uniqueness_regime || !std::isfinite(row.c_observed)) {
                r.pass = false;
                parts += "N=" + std::to_string(row.N) + " degenerate; ";
            } else {
                c_by_n[row.N].push_back(row.c_observed);
            }
        }
        parts += "B=" + std::to_string(B) + ": c(1)=" + fmt(rep.rows[0].c_observed) + "; ";
    }
    for (auto& [N, cs] : c_by_n) {
        double lo = *std::min_element(cs.begin(), cs.end());
        double hi = *std::max_element(cs.begin(), cs.end());
        if (!(hi / lo < 2.0 * opt.tol_scale)) {
            r.pass = false;
            parts += "N=" + std::to_string(N) + " ratio " + fmt(hi / lo) + " >= 2; ";
        }
    }
    r.detail = parts;
    return r;
}

CriterionResult a14_randomized_bounds(const AcceptanceOptions& opt) {
    CriterionResult r{"A14", true, "", 0};
    std::mt19937_64 rng(opt.seed + 14);
    const double M = 2.0;
    std::uniform_real_distribution<double> tau_d(-M, 50.0), re_d(-20.0, 20.0),
        im_d(1.0, 30.0), mu_extra(0.0, 4.0), unit(-1.0, 1.0);

    int violations1 = 0;
    for (int i = 0; i < 10000; ++i) {
        double t1 = tau_d(rng), t2 = tau_d(rng);
        cplx lambda(re_d(rng), im_d(rng));
        cplx mu(-(M + 1.0) - std::exp(mu_extra(rng)), 0.0);
        double lo = std::min(t1, t2), hi = std::max(t1, t2);
        double maxw = 0.0;
        for (int g = 0; g <= 64; ++g) {
            double tau = lo + (hi - lo) * g / 64.0;
            maxw = std::max(maxw, 1.0 / std::norm(lambda - tau) + 1.0 / std::norm(mu - tau));
        }
        double lhs = std::abs(f_lambda_mu(t1, lambda, mu) - f_lambda_mu(t2, lambda, mu));
        if (lhs > 2.0 * std::abs(t1 - t2) * maxw * (1.0 + 1e-12)) ++violations1;
    }

    // quadratic-form difference bound on a small boundary grid
    CellGeometry geom;
    geom.gamma_nt = 8;
    geom.gamma_n3 = 8;
    geom.quad_nx1 = geom.quad_nx2 = geom.quad_n3 = 4;
    auto grid = quadrature_grids(geom).second;
    auto zp = make_zeta({0.6, 0.3}, 1, QuasiMomentum{0.9}, 1.0 - std::pow(2.0, -4.0));
    auto e0 = exp_probe_on_gamma(zp.zeta0, grid, false);
    auto e1 = exp_probe_on_gamma(zp.zeta1, grid, false);
    double c = std::max(exp_probe_gamma_norm(zp.zeta0, grid, false),
                        exp_probe_gamma_norm(zp.zeta1, grid, true));
    int violations2 = 0;
    const std::size_t n = grid.size();
    std::vector<cplx> psi1(n), psi2(n);
    for (int i = 0; i < 10000; ++i) {
        for (std::size_t s = 0; s < n; ++s) {
            psi1[s] = cplx(unit(rng), unit(rng));
            psi2[s] = cplx(unit(rng), unit(rng));
        }
        cplx g1 = g_quadratic(psi1, zp, grid), g2 = g_quadratic(psi2, zp, grid);
        cplx b1 = 0.0, a2 = 0.0;
        long double dist2 = 0.0L;
        for (std::size_t s = 0; s < n; ++s) {
            double w = grid.weight(s);
            b1 += w * psi1[s] * e1[s];             // <e_{*zeta1}, psi1>
            a2 += w * e0[s] * std::conj(psi2[s]);  // <psi2, e_{zeta0}>
            dist2 += w * std::norm(psi1[s] - psi2[s]);
        }
        double rhs = c * (std::abs(b1) + std::abs(a2)) * std::sqrt(double(dist2));
        if (std::abs(g1 - g2) > rhs * (1.0 + 1e-10)) ++violations2;
    }
    r.pass = violations1 == 0 && violations2 == 0;
    r.detail = "f-bound violations " + std::to_string(violations1) + "/10000, g-bound violations " +
               std::to_string(violations2) + "/10000";
    return r;
}

CriterionResult a15_gauge_invariance(const AcceptanceOptions& opt) {
    CriterionResult r{"A15", true, "", 0};
    CellGeometry geom;
    geom.quad_nx1 = geom.quad_nx2 = 40;
    geom.quad_n3 = 20;
    geom.gamma_nt = 40;
    geom.gamma_n3 = 16;
    const int k_cross = 160, j_max = 2, B = 600;
    auto basis_probe = cell_basis(QuasiMomentum{0.0}, geom, k_cross, j_max);
    basis_probe.resize(B);
    int keep = count_lambda_below(basis_probe, 0.8 * basis_probe.back().lambda_star);
    auto f1 = make_forward(geom, 0.0, k_cross, j_max, B, keep, recon_v1());
    auto f2 = make_forward(geom, 0.0, k_cross, j_max, B, keep, {});

    SweepConfig scfg;
    SDiffOptions sopt;
    sopt.margin_factor = 3.0;
    std::vector<double> exps = {0.8, 1.8, 2.8, 3.8};
    std::vector<FreqSpec> freqs = {{0.8, 0.8, -1}, {0.5, 0.0, 1}, {0.0, 0.7, 0}};

    auto run_all = [&](const BoundarySpectralData& b1, const BoundarySpectralData& b2) {
        std::vector<cplx> out;
        auto pair = partition(b1, b2, 1e-9, 1e-9);
        for (const auto& f : freqs)
            out.push_back(reconstruct_with_exponents(pair, {f.xi1, f.xi2}, f.j,
                                                     QuasiMomentum{0.0}, exps, scfg, sopt)
                              .vhat);
        return out;
    };

    auto baseline = run_all(f1.bsd, f2.bsd);
    std::mt19937_64 rng(opt.seed + 15);
    auto b1 = f1.bsd;
    auto b2 = f2.bsd;
    rephase_randomly(b1, rng);
    rephase_randomly(b2, rng);
    remix_clusters_randomly(b1, rng);
    remix_clusters_randomly(b2, rng);
    auto gauged = run_all(b1, b2);

    double worst = 0.0;
    for (std::size_t i = 0; i < baseline.size(); ++i)
        worst = std::max(worst, std::abs(baseline[i] - gauged[i]));
    r.pass = worst <= 1e-12 * opt.tol_scale;
    r.detail = "max coefficient change " + fmt(worst) + " (tol 1e-12)";
    return r;
}

const std::vector<std::pair<std::string, Criterion>>& criteria() {
    static const std::vector<std::pair<std::string, Criterion>> table = {
        {"A1", a1_exact_free_spectrum},
        {"A2", a2_constant_shift},
        {"A3", a3_eigenvalue_gap_bound},
        {"A4", a4_zeta_invariants},
        {"A5", a5_asymptotic_rate},
        {"A6", a6_isozaki_residual},
        {"A7", a7_norm_identity_resolvent_decay},
        {"A8", a8_z_mu_decay},
        {"A9", a9_mu_limit},
        {"A10", a10_bsd_vs_solver_route},
        {"A11", a11_reconstruction_accuracy},
        {"A12", a12_uniqueness_regime},
        {"A13", a13_stability_shape},
        {"A14", a14_randomized_bounds},
        {"A15", a15_gauge_invariance},
    };
    return table;
}

}  // namespace

std::vector<std::string> acceptance_ids() {
    std::vector<std::string> ids;
    for (const auto& [id, fn] : criteria()) ids.push_back(id);
    return ids;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& out) {
    std::vector<CriterionResult> results;
    for (const auto& [id, fn] : criteria()) {
        if (!opt.only.empty() &&
            std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end())
            continue;
        auto t0 = std::chrono::steady_clock::now();
        CriterionResult res;
        try {
            res = fn(opt);
        } catch (const std::exception& e) {
            res.id = id;
            res.pass = false;
            res.detail = std::string("exception: ") + e.what();
        }
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out << (res.pass ? "[PASS] " : "[FAIL] ") << res.id << "  " << res.detail << "  ("
            << fmt(res.seconds) << "s)" << std::endl;
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace wg
