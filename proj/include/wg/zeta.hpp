// zeta.hpp — admissible complex probe pairs (zeta0, zeta1, lambda) targeting a
// Fourier frequency (xi', j), their validation, asymptotics along parameter
// sweeps, and evaluation of the exponentials e_zeta on the cell grids.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "wg/geometry.hpp"

namespace wg {

using CVec3 = std::array<cplx, 3>;

/// Bilinear (non-conjugating) dot product; accumulated in long double so the
/// zeta.zeta = -lambda invariant survives large |lambda|.
cplx bilinear_dot(const CVec3& u, const CVec3& v);

enum class ZetaBranch { JPositive, JNegative, JZero };
enum class ProbeKind { Plain, Star };   // membership test for e_zeta vs e_{*zeta}

/// Admissible probe pair: zeta0.zeta0 = zeta1.zeta1 = -lambda, e_{zeta0} and
/// e_{*zeta1} quasi-periodic for the given theta.
struct ZetaPair {
    CVec3 zeta0, zeta1;
    cplx lambda;                      // -zeta0.zeta0, computed
    std::array<double, 2> xi_prime;   // target cross frequency, |xi'| > 0
    int j = 0;                        // target longitudinal integer index
    QuasiMomentum theta;
    ZetaBranch branch = ZetaBranch::JZero;
    double s = 0.0;                   // in (0,1) for j != 0 branches
    double t = 0.0;                   // derived (j != 0) or the parameter (j = 0)
    std::array<double, 2> eta_prime;  // unit vector orthogonal to xi'

    CVec3 zeta_sum() const;
    /// Exact limit of zeta0 + zeta1 along the sweep: (-i xi', i j).
    CVec3 zeta_sum_limit() const;
    /// Frequency actually probed by e^{(zeta0+zeta1).x}: (xi', -j).
    std::array<double, 3> probed_frequency() const;
};

/// Builds the probe pair for the branch selected by sign(j). The parameter is
/// s in (0,1) for j != 0 and t > |xi'|/2 for j = 0. Throws on inadmissible
/// parameters or |xi'| = 0.
ZetaPair make_zeta(const std::array<double, 2>& xi_prime, int j, QuasiMomentum theta,
                   double s_or_t);

struct AdmissibilityReport {
    bool pass = false;
    double eta3_abs = 0.0;        // must vanish
    double xi3_integer_dist = 0.0;  // dist of xi3 -+ theta/2pi to the integers
    std::string reason;
};

/// Checks the H^1_theta membership conditions: zeta = i xi + eta with eta3 = 0
/// and xi3 in +-theta/2pi + Z (sign per kind).
AdmissibilityReport validate_admissibility(const CVec3& zeta, QuasiMomentum theta,
                                           ProbeKind kind);

struct ZetaSweepRow {
    double param;            // s or t
    cplx lambda;
    double abs_lambda;
    CVec3 sum;               // zeta0 + zeta1
    double deviation;        // |sum - limit|
    cplx z0z1_minus_lambda;  // zeta0.zeta1 - lambda
};

struct ZetaAsymptotics {
    std::vector<ZetaSweepRow> rows;   // sorted by |lambda| ascending
    CVec3 limit;                      // operational limit of zeta0 + zeta1
    double slope = 0.0;               // LS slope of log|deviation| vs log|lambda|
    cplx z0z1_limit;                  // -(|xi'|^2 + j^2)/2
};

/// Evaluates the pair along a parameter sweep and fits the decay rate of
/// |zeta0 + zeta1 - limit|. The sweep must span at least two decades of
/// |lambda|; rows with zero deviation are excluded from the fit.
ZetaAsymptotics zeta_asymptotics(const std::array<double, 2>& xi_prime, int j,
                                 QuasiMomentum theta, const std::vector<double>& sweep);

/// Geometric sweep parameters: s = 1 - 2^{-i} (j != 0) or t = 2^i (j = 0)
/// for i in [i_min, i_max].
std::vector<double> zeta_sweep_parameters(int j, int i_min, int i_max);

// ---------------------------------------------------------------------------
// Exponential probes on the cell
// ---------------------------------------------------------------------------

/// e_zeta(x) = exp(zeta.x)
cplx exp_probe(const CVec3& zeta, double x1, double x2, double x3);

/// Outward normal derivative (zeta.n) e_zeta at a Gamma node.
cplx exp_probe_normal_derivative(const CVec3& zeta, const GammaFace& f, double t, double x3);

/// Samples of e_zeta (or e_{*zeta} = exp(conj(zeta).x) when star) on Gamma.
std::vector<cplx> exp_probe_on_gamma(const CVec3& zeta, const GammaGrid& grid,
                                     bool star = false);

/// Samples of d e_zeta / dn on Gamma.
std::vector<cplx> exp_probe_normal_derivative_on_gamma(const CVec3& zeta,
                                                       const GammaGrid& grid);

/// Quadrature L2(Gamma) norm of e_zeta (or e_{*zeta}).
double exp_probe_gamma_norm(const CVec3& zeta, const GammaGrid& grid, bool star = false);

/// Quadrature L2(Y) norm of e_zeta.
double exp_probe_cell_norm(const CVec3& zeta, const YGrid& grid);

/// Exact cell integral of exp(z.x) over Y = (0,a)x(0,b)x(0,2pi).
cplx exp_cell_integral(const CVec3& z, const CellGeometry& geom);

}  // namespace wg
