#include "wg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wg {

void CellGeometry::validate() const {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("CellGeometry: side lengths must be positive");
    for (int n : {quad_nx1, quad_nx2, quad_n3, gamma_nt, gamma_n3})
        if (n < 2) throw std::invalid_argument("CellGeometry: all point counts must be >= 2");
}

void QuasiMomentum::validate() const {
    if (!(theta >= 0.0) || !(theta < kTwoPi))
        throw std::invalid_argument("QuasiMomentum: theta must lie in [0, 2pi)");
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

void gauss_legendre(int n, double length, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        // nodes on [-1,1] mapped to (0, length)
        x[i] = 0.5 * length * (1.0 - z);
        x[n - 1 - i] = 0.5 * length * (1.0 + z);
        double wi = length / ((1.0 - z * z) * pp * pp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
}

std::pair<YGrid, GammaGrid> quadrature_grids(const CellGeometry& geom) {
    geom.validate();
    YGrid y;
    gauss_legendre(geom.quad_nx1, geom.a, y.x1, y.w1);
    gauss_legendre(geom.quad_nx2, geom.b, y.x2, y.w2);
    y.x3.resize(geom.quad_n3);
    y.w3.assign(geom.quad_n3, kTwoPi / geom.quad_n3);
    for (int i = 0; i < geom.quad_n3; ++i) y.x3[i] = kTwoPi * i / geom.quad_n3;

    GammaGrid g;
    std::vector<double> ta, wa, tb, wb, z, wz;
    gauss_legendre(geom.gamma_nt, geom.a, ta, wa);
    gauss_legendre(geom.gamma_nt, geom.b, tb, wb);
    z.resize(geom.gamma_n3);
    wz.assign(geom.gamma_n3, kTwoPi / geom.gamma_n3);
    for (int i = 0; i < geom.gamma_n3; ++i) z[i] = kTwoPi * i / geom.gamma_n3;

    g.faces[0] = GammaFace{0, 0.0, -1.0, tb, wb, z, wz};      // x1 = 0
    g.faces[1] = GammaFace{0, geom.a, +1.0, tb, wb, z, wz};   // x1 = a
    g.faces[2] = GammaFace{1, 0.0, -1.0, ta, wa, z, wz};      // x2 = 0
    g.faces[3] = GammaFace{1, geom.b, +1.0, ta, wa, z, wz};   // x2 = b
    return {std::move(y), std::move(g)};
}

double GammaGrid::weight(std::size_t flat) const {
    for (const auto& f : faces) {
        if (flat < f.size()) {
            std::size_t it = flat / f.x3.size();
            std::size_t i3 = flat % f.x3.size();
            return f.wt[it] * f.w3[i3];
        }
        flat -= f.size();
    }
    throw std::out_of_range("GammaGrid::weight: node index out of range");
}

std::array<double, 3> GammaGrid::point(std::size_t flat) const {
    for (const auto& f : faces) {
        if (flat < f.size()) {
            std::size_t it = flat / f.x3.size();
            std::size_t i3 = flat % f.x3.size();
            double t = f.t[it], x3 = f.x3[i3];
            if (f.normal_axis == 0) return {f.coord, t, x3};
            return {t, f.coord, x3};
        }
        flat -= f.size();
    }
    throw std::out_of_range("GammaGrid::point: node index out of range");
}

// ---------------------------------------------------------------------------
// Eigenbasis
// ---------------------------------------------------------------------------

std::vector<DirichletMode> dirichlet_eigenpairs(const CellGeometry& geom, int count) {
    geom.validate();
    if (count < 1) throw std::invalid_argument("dirichlet_eigenpairs: count must be >= 1");
    // The k-th smallest eigenvalue has m,n <= k, so a count x count candidate
    // block always contains the answer.
    std::vector<DirichletMode> modes;
    modes.reserve(static_cast<std::size_t>(count) * count);
    for (int m = 1; m <= count; ++m)
        for (int n = 1; n <= count; ++n) {
            double mu = std::pow(m * M_PI / geom.a, 2) + std::pow(n * M_PI / geom.b, 2);
            modes.push_back({mu, m, n});
        }
    std::sort(modes.begin(), modes.end(), [](const DirichletMode& u, const DirichletMode& v) {
        if (u.mu != v.mu) return u.mu < v.mu;
        if (u.m != v.m) return u.m < v.m;
        return u.n < v.n;
    });
    modes.resize(count);
    return modes;
}

std::vector<BasisEntry> cell_basis(QuasiMomentum theta, const CellGeometry& geom,
                                   int k_cross, int j_max) {
    theta.validate();
    if (k_cross < 1) throw std::invalid_argument("cell_basis: k_cross must be >= 1");
    if (j_max < 0) throw std::invalid_argument("cell_basis: j_max must be >= 0");
    auto cross = dirichlet_eigenpairs(geom, k_cross);
    std::vector<BasisEntry> basis;
    basis.reserve(cross.size() * (2 * j_max + 1));
    for (const auto& c : cross)
        for (int j = -j_max; j <= j_max; ++j) {
            double q = theta.theta / kTwoPi + j;
            basis.push_back({c.mu + q * q, {c.m, c.n, j}});
        }
    std::sort(basis.begin(), basis.end(), [](const BasisEntry& u, const BasisEntry& v) {
        if (u.lambda_star != v.lambda_star) return u.lambda_star < v.lambda_star;
        if (u.idx.m != v.idx.m) return u.idx.m < v.idx.m;
        if (u.idx.n != v.idx.n) return u.idx.n < v.idx.n;
        return u.idx.j < v.idx.j;
    });
    return basis;
}

double poincare_constant(QuasiMomentum theta, const CellGeometry& geom) {
    double mu1 = std::pow(M_PI / geom.a, 2) + std::pow(M_PI / geom.b, 2);
    double t = theta.theta;
    double frac = (t <= M_PI) ? t / kTwoPi : (kTwoPi - t) / kTwoPi;
    return mu1 + frac * frac;
}

// ---------------------------------------------------------------------------
// Closed-form evaluation
// ---------------------------------------------------------------------------

namespace {
inline double sine_mode(int m, double L, double x) {
    return std::sqrt(2.0 / L) * std::sin(m * M_PI * x / L);
}
inline double sine_mode_deriv(int m, double L, double x) {
    return std::sqrt(2.0 / L) * (m * M_PI / L) * std::cos(m * M_PI * x / L);
}
inline cplx longitudinal_mode(double theta, int j, double x3) {
    double q = theta / kTwoPi + j;
    return std::polar(1.0 / std::sqrt(kTwoPi), q * x3);
}
}  // namespace

cplx basis_value(const BasisIndex& idx, QuasiMomentum theta, const CellGeometry& geom,
                 double x1, double x2, double x3) {
    return sine_mode(idx.m, geom.a, x1) * sine_mode(idx.n, geom.b, x2) *
           longitudinal_mode(theta.theta, idx.j, x3);
}

std::array<cplx, 3> basis_gradient(const BasisIndex& idx, QuasiMomentum theta,
                                   const CellGeometry& geom,
                                   double x1, double x2, double x3) {
    double s1 = sine_mode(idx.m, geom.a, x1), d1 = sine_mode_deriv(idx.m, geom.a, x1);
    double s2 = sine_mode(idx.n, geom.b, x2), d2 = sine_mode_deriv(idx.n, geom.b, x2);
    cplx e = longitudinal_mode(theta.theta, idx.j, x3);
    double q = theta.theta / kTwoPi + idx.j;
    return {d1 * s2 * e, s1 * d2 * e, s1 * s2 * e * cplx(0.0, q)};
}

cplx basis_normal_derivative(const BasisIndex& idx, QuasiMomentum theta,
                             const CellGeometry& geom, const GammaFace& f,
                             double t, double x3) {
    cplx e = longitudinal_mode(theta.theta, idx.j, x3);
    if (f.normal_axis == 0) {
        // faces x1 = 0 or x1 = a; tangential coordinate is x2
        return f.normal_sign * sine_mode_deriv(idx.m, geom.a, f.coord) *
               sine_mode(idx.n, geom.b, t) * e;
    }
    return f.normal_sign * sine_mode(idx.m, geom.a, t) *
           sine_mode_deriv(idx.n, geom.b, f.coord) * e;
}

std::vector<std::vector<cplx>> basis_normal_derivative_table(
    const std::vector<BasisEntry>& basis, QuasiMomentum theta,
    const CellGeometry& geom, const GammaGrid& grid) {
    const std::size_t ng = grid.size();
    std::vector<std::vector<cplx>> table(ng, std::vector<cplx>(basis.size()));
    std::size_t row = 0;
    for (const auto& f : grid.faces) {
        for (std::size_t it = 0; it < f.t.size(); ++it)
            for (std::size_t i3 = 0; i3 < f.x3.size(); ++i3, ++row)
                for (std::size_t p = 0; p < basis.size(); ++p)
                    table[row][p] = basis_normal_derivative(basis[p].idx, theta, geom, f,
                                                            f.t[it], f.x3[i3]);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

double AxisFactor::eval(double x, double scale) const {
    switch (kind) {
        case Kind::One: return 1.0;
        case Kind::Sin: return std::sin(k * scale * x);
        case Kind::Cos: return std::cos(k * scale * x);
    }
    return 1.0;
}

double Potential::eval(const CellGeometry& geom, double x1, double x2, double x3) const {
    double v = 0.0;
    for (const auto& t : terms)
        v += t.c * t.f1.eval(x1, M_PI / geom.a) * t.f2.eval(x2, M_PI / geom.b) *
             t.f3.eval(x3, 1.0);
    return v;
}

double Potential::grid_sup() const {
    double s = 0.0;
    for (double v : samples) s = std::max(s, std::abs(v));
    return s;
}

Potential Potential::zero(const CellGeometry& geom, const YGrid& grid) {
    return from_terms({}, geom, grid, 0.0);
}

Potential Potential::constant(double c, const CellGeometry& geom, const YGrid& grid) {
    TrigTerm t;
    t.c = c;
    return from_terms({t}, geom, grid, std::abs(c));
}

Potential Potential::from_terms(std::vector<TrigTerm> terms, const CellGeometry& geom,
                                const YGrid& grid, double declared_bound) {
    Potential V;
    V.terms = std::move(terms);
    for (const auto& t : V.terms)
        if (t.f3.kind != AxisFactor::Kind::One && t.f3.k != static_cast<int>(t.f3.k))
            throw std::invalid_argument("Potential: x3 factor must have integer frequency");
    const std::size_t n1 = grid.x1.size(), n2 = grid.x2.size(), n3 = grid.x3.size();
    V.samples.resize(n1 * n2 * n3);
    for (std::size_t i1 = 0; i1 < n1; ++i1)
        for (std::size_t i2 = 0; i2 < n2; ++i2)
            for (std::size_t i3 = 0; i3 < n3; ++i3)
                V.samples[(i1 * n2 + i2) * n3 + i3] =
                    V.eval(geom, grid.x1[i1], grid.x2[i2], grid.x3[i3]);
    V.bound_M = std::max(declared_bound, V.grid_sup());
    return V;
}

// ---------------------------------------------------------------------------
// Hashing
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t provenance_hash(const CellGeometry& geom, QuasiMomentum theta,
                              int k_cross, int j_max, int basis_size, int k_keep,
                              const Potential& V) {
    char buf[128];
    std::string s;
    auto add = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g;", v);
        s += buf;
    };
    auto addi = [&](long long v) {
        std::snprintf(buf, sizeof(buf), "%lld;", v);
        s += buf;
    };
    s += "wg-bsd-v1;";
    add(geom.a); add(geom.b);
    addi(geom.quad_nx1); addi(geom.quad_nx2); addi(geom.quad_n3);
    addi(geom.gamma_nt); addi(geom.gamma_n3);
    add(theta.theta);
    addi(k_cross); addi(j_max); addi(basis_size); addi(k_keep);
    add(V.bound_M);
    addi(static_cast<long long>(V.terms.size()));
    for (const auto& t : V.terms) {
        add(t.c);
        for (const AxisFactor* f : {&t.f1, &t.f2, &t.f3}) {
            addi(static_cast<long long>(f->kind));
            addi(f->k);
        }
    }
    return fnv1a64(s);
}

}  // namespace wg
