#include "wg/steklov.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace wg {

BoundaryDatum BoundaryDatum::from_probe(const CVec3& zeta, const GammaGrid& grid,
                                        const std::string& tag) {
    return {exp_probe_on_gamma(zeta, grid), tag};
}

cplx boundary_pairing(const std::vector<cplx>& f, const std::vector<cplx>& psi,
                      const GammaGrid& grid) {
    if (f.size() != grid.size() || psi.size() != grid.size())
        throw std::invalid_argument("boundary_pairing: sample count does not match the grid");
    long double re = 0.0L, im = 0.0L;
    for (std::size_t i = 0; i < f.size(); ++i) {
        cplx v = f[i] * std::conj(psi[i]);
        double w = grid.weight(i);
        re += w * v.real();
        im += w * v.imag();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

double SteklovTrace::gamma_norm(const GammaGrid& grid) const {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < values.size(); ++i) acc += grid.weight(i) * std::norm(values[i]);
    return std::sqrt(static_cast<double>(acc));
}

void check_spectrum_distance(const std::vector<double>& lambdas, cplx lambda, double guard) {
    for (std::size_t k = 0; k < lambdas.size(); ++k)
        if (std::abs(lambda - lambdas[k]) <= guard) {
            std::ostringstream msg;
            msg << "lambda = (" << lambda.real() << "," << lambda.imag()
                << ") is within " << guard << " of eigenvalue k=" << k + 1 << " ("
                << lambdas[k] << ")";
            throw std::invalid_argument(msg.str());
        }
}

namespace {
std::vector<cplx> pairings_against_psi(const BoundarySpectralData& bsd,
                                       const std::vector<cplx>& f) {
    std::vector<cplx> alpha(bsd.k_keep);
    for (int k = 0; k < bsd.k_keep; ++k) {
        long double re = 0.0L, im = 0.0L;
        for (std::size_t i = 0; i < bsd.gamma.size(); ++i) {
            cplx v = f[i] * std::conj(bsd.psi(i, k));
            double w = bsd.gamma.weight(i);
            re += w * v.real();
            im += w * v.imag();
        }
        alpha[k] = {static_cast<double>(re), static_cast<double>(im)};
    }
    return alpha;
}

// l1 mass of the last decade of the series sum_k |c_k| * ||psi_k||
double last_decade_tail(const BoundarySpectralData& bsd, const std::vector<cplx>& coef) {
    const int K = static_cast<int>(coef.size());
    const int start = std::max(0, K - std::max(1, K / 10));
    double tail = 0.0;
    for (int k = start; k < K; ++k) tail += std::abs(coef[k]) * bsd.psi_gamma_norm(k);
    return tail;
}
}  // namespace

InteriorSolution solve_bvp(const BoundarySpectralData& bsd, const BoundaryDatum& f,
                           cplx lambda) {
    if (f.values.size() != bsd.gamma.size())
        throw std::invalid_argument("solve_bvp: boundary datum does not match the Gamma grid");
    check_spectrum_distance(bsd.lambdas, lambda);
    InteriorSolution u;
    u.lambda = lambda;
    u.alphas = pairings_against_psi(bsd, f.values);
    u.coeffs.resize(bsd.k_keep);
    long double n2 = 0.0L;
    for (int k = 0; k < bsd.k_keep; ++k) {
        u.coeffs[k] = u.alphas[k] / (lambda - bsd.lambdas[k]);
        n2 += std::norm(u.alphas[k]) / std::norm(lambda - bsd.lambdas[k]);
    }
    u.norm = std::sqrt(static_cast<double>(n2));
    return u;
}

SteklovTrace normal_derivative_difference(const BoundarySpectralData& bsd, cplx lambda,
                                          cplx mu, const BoundaryDatum& f) {
    if (f.values.size() != bsd.gamma.size())
        throw std::invalid_argument("normal_derivative_difference: datum/grid mismatch");
    check_spectrum_distance(bsd.lambdas, lambda);
    check_spectrum_distance(bsd.lambdas, mu);

    auto alpha = pairings_against_psi(bsd, f.values);
    std::vector<cplx> coef(bsd.k_keep);
    for (int k = 0; k < bsd.k_keep; ++k)
        coef[k] = (mu - lambda) * alpha[k] /
                  ((lambda - bsd.lambdas[k]) * (mu - bsd.lambdas[k]));

    SteklovTrace tr;
    tr.lambda = lambda;
    tr.provenance = "difference";
    tr.values.assign(bsd.gamma.size(), cplx(0.0, 0.0));
    for (int k = 0; k < bsd.k_keep; ++k)
        for (std::size_t i = 0; i < bsd.gamma.size(); ++i)
            tr.values[i] += coef[k] * bsd.psi(i, k);
    tr.tail_diag = last_decade_tail(bsd, coef);
    return tr;
}

std::vector<cplx> potential_probe_pairings(const EigenSolution& sol, const Potential& V,
                                           const CellGeometry& geom, const YGrid& grid,
                                           const CVec3& zeta, bool conjugate_basis) {
    if (V.samples.size() != grid.size())
        throw std::invalid_argument("potential_probe_pairings: samples/grid mismatch");
    const std::size_t n1 = grid.x1.size(), n2 = grid.x2.size(), n3 = grid.x3.size();
    const int B = sol.size();

    // distinct mode tables
    std::vector<int> mv, nv;
    for (const auto& e : sol.basis) {
        mv.push_back(e.idx.m);
        nv.push_back(e.idx.n);
    }
    auto uniq = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(mv);
    uniq(nv);

    // stage 1: contract x1 against w1 s_m e^{zeta1 x1}
    std::vector<std::vector<cplx>> r1(mv.size(), std::vector<cplx>(n2 * n3, cplx(0, 0)));
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        cplx e1 = std::exp(zeta[0] * grid.x1[i1]);
        const double* vrow = V.samples.data() + i1 * n2 * n3;
        for (std::size_t a = 0; a < mv.size(); ++a) {
            cplx f = grid.w1[i1] * e1 *
                     std::sqrt(2.0 / geom.a) * std::sin(mv[a] * M_PI * grid.x1[i1] / geom.a);
            auto& dst = r1[a];
            for (std::size_t r = 0; r < n2 * n3; ++r) dst[r] += f * vrow[r];
        }
    }
    // stage 2: contract x2
    std::vector<std::vector<cplx>> r2(mv.size() * nv.size(), std::vector<cplx>(n3, cplx(0, 0)));
    for (std::size_t a = 0; a < mv.size(); ++a)
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            cplx e2 = std::exp(zeta[1] * grid.x2[i2]);
            const cplx* row = r1[a].data() + i2 * n3;
            for (std::size_t b = 0; b < nv.size(); ++b) {
                cplx f = grid.w2[i2] * e2 *
                         std::sqrt(2.0 / geom.b) * std::sin(nv[b] * M_PI * grid.x2[i2] / geom.b);
                auto& dst = r2[a * nv.size() + b];
                for (std::size_t i3 = 0; i3 < n3; ++i3) dst[i3] += f * row[i3];
            }
        }
    // stage 3: contract x3 against e^{zeta3 x3} times the longitudinal mode
    std::map<int, int> jpos;
    std::vector<int> jv;
    for (const auto& e : sol.basis)
        if (!jpos.count(e.idx.j)) {
            jpos[e.idx.j] = static_cast<int>(jv.size());
            jv.push_back(e.idx.j);
        }
    std::vector<std::vector<cplx>> e3(jv.size(), std::vector<cplx>(n3));
    for (std::size_t c = 0; c < jv.size(); ++c)
        for (std::size_t i3 = 0; i3 < n3; ++i3) {
            double q = sol.theta.theta / kTwoPi + jv[c];
            cplx mode = std::polar(1.0 / std::sqrt(kTwoPi), q * grid.x3[i3]);
            if (conjugate_basis) mode = std::conj(mode);
            e3[c][i3] = grid.w3[i3] * mode * std::exp(zeta[2] * grid.x3[i3]);
        }

    std::map<int, int> mpos, npos;
    for (std::size_t i = 0; i < mv.size(); ++i) mpos[mv[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < nv.size(); ++i) npos[nv[i]] = static_cast<int>(i);

    std::vector<cplx> raw(B);
    for (int p = 0; p < B; ++p) {
        const auto& idx = sol.basis[p].idx;
        const auto& row = r2[mpos[idx.m] * nv.size() + npos[idx.n]];
        const auto& ker = e3[jpos[idx.j]];
        cplx acc = 0.0;
        for (std::size_t i3 = 0; i3 < n3; ++i3) acc += ker[i3] * row[i3];
        raw[p] = acc;
    }

    // project onto eigenfunctions: conj(C)^T raw when conjugating the basis,
    // C^T raw otherwise
    std::vector<cplx> out(sol.k_keep, cplx(0, 0));
    for (int k = 0; k < sol.k_keep; ++k) {
        cplx acc = 0.0;
        for (int p = 0; p < B; ++p)
            acc += (conjugate_basis ? std::conj(sol.C(p, k)) : sol.C(p, k)) * raw[p];
        out[k] = acc;
    }
    return out;
}

SteklovTrace steklov_apply_exponential(const EigenSolution& sol,
                                       const BoundarySpectralData& bsd, const Potential& V,
                                       const CellGeometry& geom, const YGrid& grid,
                                       const CVec3& zeta, cplx lambda) {
    cplx zz = bilinear_dot(zeta, zeta);
    if (std::abs(zz + lambda) > 1e-10 * (1.0 + std::abs(lambda)))
        throw std::invalid_argument("steklov_apply_exponential: zeta.zeta != -lambda");
    auto adm = validate_admissibility(zeta, sol.theta, ProbeKind::Plain);
    if (!adm.pass)
        throw std::invalid_argument("steklov_apply_exponential: inadmissible zeta: " + adm.reason);
    check_spectrum_distance(bsd.lambdas, lambda);

    SteklovTrace tr;
    tr.lambda = lambda;
    tr.provenance = "resolvent";
    tr.values = exp_probe_normal_derivative_on_gamma(zeta, bsd.gamma);

    std::vector<cplx> coef(bsd.k_keep, cplx(0, 0));
    if (!V.is_zero()) {
        auto vp = potential_probe_pairings(sol, V, geom, grid, zeta, true);
        for (int k = 0; k < bsd.k_keep; ++k) {
            coef[k] = -vp[k] / (bsd.lambdas[k] - lambda);
            for (std::size_t i = 0; i < bsd.gamma.size(); ++i)
                tr.values[i] += coef[k] * bsd.psi(i, k);
        }
    }
    tr.tail_diag = last_decade_tail(bsd, coef);
    return tr;
}

cplx s_functional(const SteklovTrace& trace, const CVec3& zeta1, QuasiMomentum theta,
                  const GammaGrid& grid) {
    auto adm = validate_admissibility(zeta1, theta, ProbeKind::Star);
    if (!adm.pass)
        throw std::invalid_argument("s_functional: inadmissible zeta1: " + adm.reason);
    if (trace.values.size() != grid.size())
        throw std::invalid_argument("s_functional: trace/grid mismatch");
    auto e1 = exp_probe_on_gamma(zeta1, grid, false);
    long double re = 0.0L, im = 0.0L;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        cplx v = trace.values[i] * e1[i];
        double w = grid.weight(i);
        re += w * v.real();
        im += w * v.imag();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

cplx potential_exp_integral(const Potential& V, const YGrid& grid, const CVec3& z) {
    if (V.samples.size() != grid.size())
        throw std::invalid_argument("potential_exp_integral: samples/grid mismatch");
    const std::size_t n1 = grid.x1.size(), n2 = grid.x2.size(), n3 = grid.x3.size();
    std::vector<cplx> a1(n2 * n3, cplx(0, 0));
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        cplx f = grid.w1[i1] * std::exp(z[0] * grid.x1[i1]);
        const double* vrow = V.samples.data() + i1 * n2 * n3;
        for (std::size_t r = 0; r < n2 * n3; ++r) a1[r] += f * vrow[r];
    }
    std::vector<cplx> a2(n3, cplx(0, 0));
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
        cplx f = grid.w2[i2] * std::exp(z[1] * grid.x2[i2]);
        for (std::size_t i3 = 0; i3 < n3; ++i3) a2[i3] += f * a1[i2 * n3 + i3];
    }
    cplx acc = 0.0;
    for (std::size_t i3 = 0; i3 < n3; ++i3)
        acc += grid.w3[i3] * std::exp(z[2] * grid.x3[i3]) * a2[i3];
    return acc;
}

IsozakiResidual isozaki_identity_residual(const EigenSolution& sol,
                                          const BoundarySpectralData& bsd,
                                          const Potential& V, const CellGeometry& geom,
                                          const YGrid& grid, cplx lambda,
                                          const ZetaPair& zp) {
    IsozakiResidual r;
    CVec3 zsum = zp.zeta_sum();
    r.lhs = potential_exp_integral(V, grid, zsum);

    auto trace = steklov_apply_exponential(sol, bsd, V, geom, grid, zp.zeta0, lambda);
    r.s_value = s_functional(trace, zp.zeta1, sol.theta, bsd.gamma);

    r.geometric = (bilinear_dot(zp.zeta0, zp.zeta1) - lambda) * exp_cell_integral(zsum, geom);

    r.resolvent = 0.0;
    if (!V.is_zero()) {
        auto b = potential_probe_pairings(sol, V, geom, grid, zp.zeta0, true);
        auto d = potential_probe_pairings(sol, V, geom, grid, zp.zeta1, false);
        for (int k = 0; k < bsd.k_keep; ++k)
            r.resolvent += b[k] / (bsd.lambdas[k] - lambda) * d[k];
    }

    r.residual = r.lhs - (r.s_value - r.geometric + r.resolvent);
    return r;
}

std::vector<ZMuRow> z_mu_decay(const EigenSolution& sol1, const BoundarySpectralData& bsd1,
                               const EigenSolution& sol2, const BoundarySpectralData& bsd2,
                               const CellGeometry& geom, const BoundaryDatum& f,
                               const std::vector<double>& mu_list) {
    if (sol1.size() != sol2.size())
        throw std::invalid_argument("z_mu_decay: solutions use different raw bases");
    const int B = sol1.size();

    auto alpha1 = pairings_against_psi(bsd1, f.values);
    auto alpha2 = pairings_against_psi(bsd2, f.values);

    // normal-derivative table of the common raw basis
    const std::size_t ng = bsd1.gamma.size();
    Eigen::MatrixXcd D(ng, B);
    std::size_t row = 0;
    for (const auto& face : bsd1.gamma.faces)
        for (std::size_t it = 0; it < face.t.size(); ++it)
            for (std::size_t i3 = 0; i3 < face.x3.size(); ++i3, ++row)
                for (int p = 0; p < B; ++p)
                    D(row, p) = basis_normal_derivative(sol1.basis[p].idx, sol1.theta, geom,
                                                        face, face.t[it], face.x3[i3]);

    std::vector<ZMuRow> out;
    for (double mu : mu_list) {
        check_spectrum_distance(bsd1.lambdas, mu);
        check_spectrum_distance(bsd2.lambdas, mu);
        Eigen::VectorXcd c1 = Eigen::VectorXcd::Zero(B), c2 = Eigen::VectorXcd::Zero(B);
        for (int k = 0; k < bsd1.k_keep; ++k)
            c1 += sol1.C.col(k) * (alpha1[k] / (cplx(mu, 0.0) - bsd1.lambdas[k]));
        for (int k = 0; k < bsd2.k_keep; ++k)
            c2 += sol2.C.col(k) * (alpha2[k] / (cplx(mu, 0.0) - bsd2.lambdas[k]));
        Eigen::VectorXcd z = c1 - c2;
        Eigen::VectorXcd dz = D * z;
        long double acc = 0.0L;
        for (std::size_t i = 0; i < ng; ++i) acc += bsd1.gamma.weight(i) * std::norm(dz[i]);
        out.push_back({mu, z.norm(), std::sqrt(static_cast<double>(acc))});
    }
    return out;
}

double bessel_sum(const BoundarySpectralData& bsd, const std::vector<cplx>& probe,
                  cplx lambda) {
    auto alpha = pairings_against_psi(bsd, probe);
    long double acc = 0.0L;
    for (int k = 0; k < bsd.k_keep; ++k)
        acc += std::norm(alpha[k]) / std::norm(lambda - bsd.lambdas[k]);
    return static_cast<double>(acc);
}

}  // namespace wg
