#include "wg/zeta.hpp"

#include <cmath>
#include <stdexcept>

namespace wg {

cplx bilinear_dot(const CVec3& u, const CVec3& v) {
    long double re = 0.0L, im = 0.0L;
    for (int i = 0; i < 3; ++i) {
        re += (long double)u[i].real() * v[i].real() - (long double)u[i].imag() * v[i].imag();
        im += (long double)u[i].real() * v[i].imag() + (long double)u[i].imag() * v[i].real();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

CVec3 ZetaPair::zeta_sum() const {
    return {zeta0[0] + zeta1[0], zeta0[1] + zeta1[1], zeta0[2] + zeta1[2]};
}

CVec3 ZetaPair::zeta_sum_limit() const {
    return {cplx(0.0, -xi_prime[0]), cplx(0.0, -xi_prime[1]), cplx(0.0, double(j))};
}

std::array<double, 3> ZetaPair::probed_frequency() const {
    // e^{(zeta0+zeta1).x} -> e^{-i xi.x} with xi = i*lim(zeta0+zeta1) = (xi', -j)
    return {xi_prime[0], xi_prime[1], -double(j)};
}

namespace {

// zeta' = i(p + i q)(-xi'/(2p) + sgn * beta * eta'), with the cross vector
// renormalized to unit length so the probe invariants survive in floating point.
CVec3 cross_probe(const std::array<double, 2>& xi, const std::array<double, 2>& eta,
                  double p, double q, double sgn, cplx third) {
    double beta2 = 1.0 - (xi[0] * xi[0] + xi[1] * xi[1]) / (4.0 * p * p);
    if (beta2 <= 0.0)
        throw std::invalid_argument("make_zeta: parameter too small, need p > |xi'|/2");
    double beta = std::sqrt(beta2);
    std::array<double, 2> w = {-xi[0] / (2.0 * p) + sgn * beta * eta[0],
                               -xi[1] / (2.0 * p) + sgn * beta * eta[1]};
    double wn = std::sqrt(w[0] * w[0] + w[1] * w[1]);
    w[0] /= wn;
    w[1] /= wn;
    cplx factor = cplx(0.0, 1.0) * cplx(p, q);  // i(p + iq)
    return {factor * w[0], factor * w[1], third};
}

}  // namespace

ZetaPair make_zeta(const std::array<double, 2>& xi_prime, int j, QuasiMomentum theta,
                   double s_or_t) {
    theta.validate();
    const double xi_norm = std::hypot(xi_prime[0], xi_prime[1]);
    if (!(xi_norm > 0.0)) throw std::invalid_argument("make_zeta: |xi'| must be positive");
    const std::array<double, 2> xih = {xi_prime[0] / xi_norm, xi_prime[1] / xi_norm};
    // counterclockwise rotation of xi'/|xi'| by pi/2
    const std::array<double, 2> eta = {-xih[1], xih[0]};
    const double th = theta.theta;

    ZetaPair zp;
    zp.xi_prime = xi_prime;
    zp.j = j;
    zp.theta = theta;
    zp.eta_prime = eta;

    if (j != 0) {
        const double s = s_or_t;
        if (!(s > 0.0 && s < 1.0))
            throw std::invalid_argument("make_zeta: s must lie in (0,1) for j != 0");
        const double gap = (j >= 1) ? double(j) * (j + th / M_PI)
                                    : double(j) * (j - 2.0 + th / M_PI);
        if (!(gap > 0.0))
            throw std::invalid_argument("make_zeta: j(j +- theta/pi) must be positive");
        const double t2 = gap / (1.0 - s * s) - 1.0;
        if (!(t2 > 0.0))
            throw std::invalid_argument("make_zeta: derived t^2 not positive, s too small");
        const double t = std::sqrt(t2);
        if (!(s * t > xi_norm / 2.0))
            throw std::invalid_argument("make_zeta: admissibility needs s*t > |xi'|/2");
        zp.s = s;
        zp.t = t;
        zp.branch = (j >= 1) ? ZetaBranch::JPositive : ZetaBranch::JNegative;
        const cplx third0 = (j >= 1) ? cplx(0.0, j + th / kTwoPi)
                                     : cplx(0.0, j - 1.0 + th / kTwoPi);
        const cplx third1 = (j >= 1) ? cplx(0.0, -th / kTwoPi)
                                     : cplx(0.0, 1.0 - th / kTwoPi);
        zp.zeta0 = cross_probe(xi_prime, eta, s * t, 1.0, +1.0, third0);
        zp.zeta1 = cross_probe(xi_prime, eta, t, s, -1.0, third1);
    } else {
        const double t = s_or_t;
        if (!(t > xi_norm / 2.0))
            throw std::invalid_argument("make_zeta: need t > |xi'|/2 for j = 0");
        zp.s = 0.0;
        zp.t = t;
        zp.branch = ZetaBranch::JZero;
        zp.zeta0 = cross_probe(xi_prime, eta, t, 1.0, +1.0, cplx(0.0, th / kTwoPi));
        zp.zeta1 = cross_probe(xi_prime, eta, t, 1.0, -1.0, cplx(0.0, -th / kTwoPi));
    }

    zp.lambda = -bilinear_dot(zp.zeta0, zp.zeta0);

    const cplx mismatch = bilinear_dot(zp.zeta1, zp.zeta1) - bilinear_dot(zp.zeta0, zp.zeta0);
    if (std::abs(mismatch) > 1e-12 * (1.0 + std::abs(zp.lambda)))
        throw std::runtime_error("make_zeta: zeta0.zeta0 != zeta1.zeta1");
    auto a0 = validate_admissibility(zp.zeta0, theta, ProbeKind::Plain);
    auto a1 = validate_admissibility(zp.zeta1, theta, ProbeKind::Star);
    if (!a0.pass) throw std::runtime_error("make_zeta: zeta0 inadmissible: " + a0.reason);
    if (!a1.pass) throw std::runtime_error("make_zeta: zeta1 inadmissible: " + a1.reason);
    return zp;
}

AdmissibilityReport validate_admissibility(const CVec3& zeta, QuasiMomentum theta,
                                           ProbeKind kind) {
    AdmissibilityReport r;
    // zeta = i xi + eta over R^3: xi = Im(zeta), eta = Re(zeta)
    r.eta3_abs = std::abs(zeta[2].real());
    const double xi3 = zeta[2].imag();
    const double target = (kind == ProbeKind::Plain) ? theta.theta / kTwoPi
                                                     : -theta.theta / kTwoPi;
    const double d = xi3 - target;
    r.xi3_integer_dist = std::abs(d - std::round(d));
    if (r.eta3_abs > 1e-12) {
        r.reason = "eta3 nonzero";
        return r;
    }
    if (r.xi3_integer_dist > 1e-12) {
        r.reason = (kind == ProbeKind::Plain) ? "xi3 not in theta/2pi + Z"
                                              : "xi3 not in -theta/2pi + Z";
        return r;
    }
    r.pass = true;
    return r;
}

ZetaAsymptotics zeta_asymptotics(const std::array<double, 2>& xi_prime, int j,
                                 QuasiMomentum theta, const std::vector<double>& sweep) {
    if (sweep.size() < 3)
        throw std::invalid_argument("zeta_asymptotics: need at least 3 sweep points");
    ZetaAsymptotics out;
    std::vector<ZetaPair> pairs;
    for (double p : sweep) pairs.push_back(make_zeta(xi_prime, j, theta, p));
    std::sort(pairs.begin(), pairs.end(),
              [](const ZetaPair& u, const ZetaPair& v) {
                  return std::abs(u.lambda) < std::abs(v.lambda);
              });
    const double lam_lo = std::abs(pairs.front().lambda);
    const double lam_hi = std::abs(pairs.back().lambda);
    if (lam_hi < 100.0 * lam_lo)
        throw std::invalid_argument("zeta_asymptotics: sweep must span >= 2 decades of |lambda|");

    // Operational limit: 1/t extrapolation from the last two sweep points.
    const auto zN = pairs[pairs.size() - 1].zeta_sum();
    const auto zP = pairs[pairs.size() - 2].zeta_sum();
    const double tN = pairs[pairs.size() - 1].t, tP = pairs[pairs.size() - 2].t;
    for (int c = 0; c < 3; ++c) {
        // z(t) = L + C/t  =>  L = z(tN) + (z(tN) - z(tP)) * (tP/ (tN - tP)) ... solved directly
        out.limit[c] = (tN * zN[c] - tP * zP[c]) / (tN - tP);
    }

    const double f2 = xi_prime[0] * xi_prime[0] + xi_prime[1] * xi_prime[1] + double(j) * j;
    out.z0z1_limit = cplx(-0.5 * f2, 0.0);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int nfit = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& zp = pairs[i];
        ZetaSweepRow row;
        row.param = (zp.branch == ZetaBranch::JZero) ? zp.t : zp.s;
        row.lambda = zp.lambda;
        row.abs_lambda = std::abs(zp.lambda);
        row.sum = zp.zeta_sum();
        double dev2 = 0.0;
        for (int c = 0; c < 3; ++c) dev2 += std::norm(row.sum[c] - out.limit[c]);
        row.deviation = std::sqrt(dev2);
        row.z0z1_minus_lambda = bilinear_dot(zp.zeta0, zp.zeta1) - zp.lambda;
        out.rows.push_back(row);
        // last two points define the limit; keep them out of the fit
        if (i + 2 < pairs.size() && row.deviation > 1e-14) {
            double lx = std::log(row.abs_lambda), ly = std::log(row.deviation);
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
            ++nfit;
        }
    }
    if (nfit < 2) throw std::invalid_argument("zeta_asymptotics: too few usable points for slope fit");
    out.slope = (nfit * sxy - sx * sy) / (nfit * sxx - sx * sx);
    return out;
}

std::vector<double> zeta_sweep_parameters(int j, int i_min, int i_max) {
    if (i_max < i_min) throw std::invalid_argument("zeta_sweep_parameters: empty range");
    std::vector<double> out;
    for (int i = i_min; i <= i_max; ++i)
        out.push_back(j != 0 ? 1.0 - std::pow(2.0, -i) : std::pow(2.0, i));
    return out;
}

// ---------------------------------------------------------------------------
// Exponential probes
// ---------------------------------------------------------------------------

cplx exp_probe(const CVec3& zeta, double x1, double x2, double x3) {
    return std::exp(zeta[0] * x1 + zeta[1] * x2 + zeta[2] * x3);
}

cplx exp_probe_normal_derivative(const CVec3& zeta, const GammaFace& f, double t, double x3) {
    double p1, p2;
    cplx zn;
    if (f.normal_axis == 0) {
        p1 = f.coord;
        p2 = t;
        zn = f.normal_sign * zeta[0];
    } else {
        p1 = t;
        p2 = f.coord;
        zn = f.normal_sign * zeta[1];
    }
    return zn * exp_probe(zeta, p1, p2, x3);
}

std::vector<cplx> exp_probe_on_gamma(const CVec3& zeta, const GammaGrid& grid, bool star) {
    CVec3 z = zeta;
    if (star)
        for (auto& c : z) c = std::conj(c);
    std::vector<cplx> out(grid.size());
    std::size_t row = 0;
    for (const auto& f : grid.faces)
        for (std::size_t it = 0; it < f.t.size(); ++it)
            for (std::size_t i3 = 0; i3 < f.x3.size(); ++i3, ++row) {
                double x1 = (f.normal_axis == 0) ? f.coord : f.t[it];
                double x2 = (f.normal_axis == 0) ? f.t[it] : f.coord;
                out[row] = exp_probe(z, x1, x2, f.x3[i3]);
            }
    return out;
}

std::vector<cplx> exp_probe_normal_derivative_on_gamma(const CVec3& zeta,
                                                       const GammaGrid& grid) {
    std::vector<cplx> out(grid.size());
    std::size_t row = 0;
    for (const auto& f : grid.faces)
        for (std::size_t it = 0; it < f.t.size(); ++it)
            for (std::size_t i3 = 0; i3 < f.x3.size(); ++i3, ++row)
                out[row] = exp_probe_normal_derivative(zeta, f, f.t[it], f.x3[i3]);
    return out;
}

double exp_probe_gamma_norm(const CVec3& zeta, const GammaGrid& grid, bool star) {
    auto vals = exp_probe_on_gamma(zeta, grid, star);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < vals.size(); ++i) acc += grid.weight(i) * std::norm(vals[i]);
    return std::sqrt(static_cast<double>(acc));
}

double exp_probe_cell_norm(const CVec3& zeta, const YGrid& grid) {
    long double acc = 0.0L;
    for (std::size_t i1 = 0; i1 < grid.x1.size(); ++i1)
        for (std::size_t i2 = 0; i2 < grid.x2.size(); ++i2)
            for (std::size_t i3 = 0; i3 < grid.x3.size(); ++i3)
                acc += grid.weight(i1, i2, i3) *
                       std::norm(exp_probe(zeta, grid.x1[i1], grid.x2[i2], grid.x3[i3]));
    return std::sqrt(static_cast<double>(acc));
}

cplx exp_cell_integral(const CVec3& z, const CellGeometry& geom) {
    auto axis = [](cplx zz, double L) -> cplx {
        if (std::abs(zz) * L < 1e-12) return cplx(L, 0.0);  // -> L as z -> 0
        return (std::exp(zz * L) - 1.0) / zz;
    };
    return axis(z[0], geom.a) * axis(z[1], geom.b) * axis(z[2], kTwoPi);
}

}  // namespace wg
