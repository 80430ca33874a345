// geometry.hpp — cell geometry, quasi-periodic Laplacian eigenbasis, quadrature
// grids on the cell Y = (0,a)x(0,b)x(0,2pi) and its lateral boundary Gamma,
// and trig-polynomial potentials with grid samples.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace wg {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------------
// Core domain types
// ---------------------------------------------------------------------------

/// Rectangular cross-section (0,a)x(0,b); the cell is periodic in x3 with
/// period 2pi. Point counts configure the tensor quadrature grids.
struct CellGeometry {
    double a = 3.141592653589793;
    double b = 3.141592653589793;
    int quad_nx1 = 24;   // Gauss-Legendre points along x1
    int quad_nx2 = 24;   // Gauss-Legendre points along x2
    int quad_n3  = 24;   // uniform periodic points along x3
    int gamma_nt = 24;   // Gauss-Legendre points along the tangential cross axis of each face
    int gamma_n3 = 24;   // uniform periodic points along x3 on Gamma

    void validate() const;  // throws std::invalid_argument on bad sizes
};

/// Floquet quasi-momentum, theta in [0, 2pi).
struct QuasiMomentum {
    double theta = 0.0;
    void validate() const;
};

/// Index of one quasi-periodic basis function: cross-section sine mode (m,n)
/// with m,n >= 1 and longitudinal Fourier index j.
struct BasisIndex {
    int m = 1;
    int n = 1;
    int j = 0;
};

/// One Dirichlet eigenpair of -Laplace' on the cross-section:
/// mu = (m pi/a)^2 + (n pi/b)^2.
struct DirichletMode {
    double mu;
    int m, n;
};

/// One member of the quasi-periodic cell basis, sorted by lambda_star.
struct BasisEntry {
    double lambda_star;   // mu_{m,n} + (theta/2pi + j)^2
    BasisIndex idx;
};

// ---------------------------------------------------------------------------
// Quadrature grids
// ---------------------------------------------------------------------------

/// Tensor grid on Y: Gauss-Legendre in x1, x2; uniform periodic in x3.
/// Flattened node index is (i1*n2 + i2)*n3 + i3.
struct YGrid {
    std::vector<double> x1, w1;
    std::vector<double> x2, w2;
    std::vector<double> x3, w3;

    std::size_t size() const { return x1.size() * x2.size() * x3.size(); }
    double weight(std::size_t i1, std::size_t i2, std::size_t i3) const {
        return w1[i1] * w2[i2] * w3[i3];
    }
};

/// One lateral face of Gamma. normal_axis 0 means the face x1 = coord
/// (tangential variable is x2); normal_axis 1 means x2 = coord.
struct GammaFace {
    int normal_axis;      // 0 or 1
    double coord;         // 0, a (axis 0) or 0, b (axis 1)
    double normal_sign;   // -1 on the 0-side, +1 on the far side
    std::vector<double> t, wt;   // tangential cross-section nodes/weights
    std::vector<double> x3, w3;  // longitudinal nodes/weights

    std::size_t size() const { return t.size() * x3.size(); }
};

/// The four faces of Gamma, flattened in face order; within a face the node
/// index is it*n3 + i3.
struct GammaGrid {
    std::array<GammaFace, 4> faces;

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& f : faces) n += f.size();
        return n;
    }
    /// Quadrature weight of the flattened node.
    double weight(std::size_t flat) const;
    /// Cartesian coordinates (x1,x2,x3) of the flattened node.
    std::array<double, 3> point(std::size_t flat) const;
};

/// Builds the Y and Gamma grids for a geometry. Weights sum to |Y| and
/// |Gamma| exactly up to roundoff.
std::pair<YGrid, GammaGrid> quadrature_grids(const CellGeometry& geom);

/// Gauss-Legendre nodes and weights on (0, length).
void gauss_legendre(int n, double length, std::vector<double>& x, std::vector<double>& w);

// ---------------------------------------------------------------------------
// Dirichlet eigenbasis of the cross-section and the cell basis
// ---------------------------------------------------------------------------

/// First `count` Dirichlet eigenpairs of the cross-section Laplacian, sorted
/// ascending by mu with lexicographic (m,n) tie-break.
std::vector<DirichletMode> dirichlet_eigenpairs(const CellGeometry& geom, int count);

/// Quasi-periodic cell basis built from the first k_cross cross-section modes
/// and longitudinal indices |j| <= j_max; sorted ascending by lambda_star with
/// (m,n,j) tie-break. Basis functions are orthonormal in L2(Y).
std::vector<BasisEntry> cell_basis(QuasiMomentum theta, const CellGeometry& geom,
                                   int k_cross, int j_max);

/// Best constant lambda_{*,1}(theta) in the Poincare inequality on H^1_{0,theta}(Y):
/// mu_1 + theta^2/4pi^2 for theta <= pi, mu_1 + (2pi-theta)^2/4pi^2 otherwise.
double poincare_constant(QuasiMomentum theta, const CellGeometry& geom);

// ---------------------------------------------------------------------------
// Closed-form basis evaluation
// ---------------------------------------------------------------------------

/// Value of the basis function at (x1,x2,x3).
cplx basis_value(const BasisIndex& idx, QuasiMomentum theta, const CellGeometry& geom,
                 double x1, double x2, double x3);

/// Gradient of the basis function at (x1,x2,x3).
std::array<cplx, 3> basis_gradient(const BasisIndex& idx, QuasiMomentum theta,
                                   const CellGeometry& geom,
                                   double x1, double x2, double x3);

/// Outward normal derivative of the basis function at a Gamma node given by
/// face f and in-face coordinates (t, x3).
cplx basis_normal_derivative(const BasisIndex& idx, QuasiMomentum theta,
                             const CellGeometry& geom, const GammaFace& f,
                             double t, double x3);

/// Samples the normal derivative of every basis entry on the whole Gamma grid.
/// Row = flattened Gamma node, column = basis entry.
std::vector<std::vector<cplx>> basis_normal_derivative_table(
    const std::vector<BasisEntry>& basis, QuasiMomentum theta,
    const CellGeometry& geom, const GammaGrid& grid);

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

/// One separable trig factor along an axis. For cross axes the argument is
/// k*pi*x/L; along x3 it is k*x3 with integer k, keeping 2pi-periodicity.
struct AxisFactor {
    enum class Kind { One, Sin, Cos };
    Kind kind = Kind::One;
    int k = 0;

    /// scale is pi/L for cross axes and 1 for x3.
    double eval(double x, double scale) const;
};

/// c * f1(x1) * f2(x2) * f3(x3).
struct TrigTerm {
    double c = 0.0;
    AxisFactor f1, f2, f3;
};

/// Real bounded potential on Y with dual representation: the closed-form trig
/// terms are the source of truth; samples live on the Y quadrature grid.
struct Potential {
    std::vector<TrigTerm> terms;
    double bound_M = 0.0;          // declared sup-norm bound
    std::vector<double> samples;   // Y-grid samples, (i1*n2+i2)*n3+i3 order

    static Potential zero(const CellGeometry& geom, const YGrid& grid);
    static Potential constant(double c, const CellGeometry& geom, const YGrid& grid);
    static Potential from_terms(std::vector<TrigTerm> terms, const CellGeometry& geom,
                                const YGrid& grid, double declared_bound = 0.0);

    double eval(const CellGeometry& geom, double x1, double x2, double x3) const;
    /// max |V| over the sample grid
    double grid_sup() const;
    bool is_zero() const { return terms.empty(); }
};

// ---------------------------------------------------------------------------
// Hashing (provenance keys for cached spectral data)
// ---------------------------------------------------------------------------

/// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

/// Canonical provenance hash of (geometry, theta, truncation, potential).
std::uint64_t provenance_hash(const CellGeometry& geom, QuasiMomentum theta,
                              int k_cross, int j_max, int basis_size, int k_keep,
                              const Potential& V);

}  // namespace wg
