// steklov.hpp — series solutions of the non-homogeneous quasi-periodic BVP,
// the Poincare-Steklov action on complex-exponential boundary data, the
// Isozaki S functional and its representation-identity residual.

#pragma once

#include <string>
#include <vector>

#include "wg/forward.hpp"
#include "wg/zeta.hpp"

namespace wg {

/// Complex boundary data sampled on the Gamma grid.
struct BoundaryDatum {
    std::vector<cplx> values;
    std::string tag;  // optional closed-form tag, e.g. "exp(zeta.x)"

    static BoundaryDatum from_probe(const CVec3& zeta, const GammaGrid& grid,
                                    const std::string& tag = "exp(zeta.x)");
};

/// Quadrature pairing alpha = <psi, f> = integral of f * conj(psi) over Gamma.
cplx boundary_pairing(const std::vector<cplx>& f, const std::vector<cplx>& psi,
                      const GammaGrid& grid);

/// Trace on Gamma of a Steklov-type quantity together with provenance and a
/// truncation diagnostic (l1 mass of the last decade of series terms).
struct SteklovTrace {
    std::vector<cplx> values;
    cplx lambda;
    std::string provenance;
    double tail_diag = 0.0;

    double gamma_norm(const GammaGrid& grid) const;
};

/// Interior solution of (-Delta + V - lambda) u = 0, u = f on Gamma, expanded
/// over the kept eigenmodes: (u|phi_k) = alpha_k / (lambda - lambda_k).
struct InteriorSolution {
    cplx lambda;
    std::vector<cplx> alphas;  // alpha_k = <psi_k, f>
    std::vector<cplx> coeffs;  // (u|phi_k)
    double norm = 0.0;         // sqrt(sum |alpha_k|^2 / |lambda - lambda_k|^2)
};

/// Throws if lambda is within `guard` of any kept eigenvalue, naming the mode.
void check_spectrum_distance(const std::vector<double>& lambdas, cplx lambda,
                             double guard = 1e-6);

InteriorSolution solve_bvp(const BoundarySpectralData& bsd, const BoundaryDatum& f,
                           cplx lambda);

/// Trace of d(u_lambda - u_mu)/dn via the difference series
/// sum_k (mu-lambda) alpha_k / ((lambda-lambda_k)(mu-lambda_k)) psi_k.
SteklovTrace normal_derivative_difference(const BoundarySpectralData& bsd, cplx lambda,
                                          cplx mu, const BoundaryDatum& f);

/// Interior pairings of V e_zeta against the kept eigenfunctions:
/// returns (V e_zeta | phi_k) when conjugate_basis, else integral of
/// V e_zeta phi_k (no conjugation).
std::vector<cplx> potential_probe_pairings(const EigenSolution& sol, const Potential& V,
                                           const CellGeometry& geom, const YGrid& grid,
                                           const CVec3& zeta, bool conjugate_basis);

/// Poincare-Steklov action on exponential data via the resolvent route:
/// Lambda(e_zeta) = d e_zeta/dn - sum_k (V e_zeta | phi_k)/(lambda_k - lambda) psi_k.
SteklovTrace steklov_apply_exponential(const EigenSolution& sol,
                                       const BoundarySpectralData& bsd, const Potential& V,
                                       const CellGeometry& geom, const YGrid& grid,
                                       const CVec3& zeta, cplx lambda);

/// Isozaki functional S = integral over Gamma of trace * e_{zeta1}.
cplx s_functional(const SteklovTrace& trace, const CVec3& zeta1, QuasiMomentum theta,
                  const GammaGrid& grid);

/// All four terms of the representation identity, evaluated independently.
struct IsozakiResidual {
    cplx lhs;         // integral of V e^{(zeta0+zeta1).x} over Y
    cplx s_value;     // S functional
    cplx geometric;   // (zeta0.zeta1 - lambda) * cell integral of the exponential
    cplx resolvent;   // integral of R_lambda(V e_zeta0) V e_zeta1
    cplx residual;    // lhs - (s_value - geometric + resolvent)
};

IsozakiResidual isozaki_identity_residual(const EigenSolution& sol,
                                          const BoundarySpectralData& bsd,
                                          const Potential& V, const CellGeometry& geom,
                                          const YGrid& grid, cplx lambda,
                                          const ZetaPair& zp);

/// Quadrature of V(x) exp(z.x) over Y using the potential's grid samples.
cplx potential_exp_integral(const Potential& V, const YGrid& grid, const CVec3& z);

/// Decay table of z_mu = u_{1,mu} - u_{2,mu} along a descending mu list.
struct ZMuRow {
    double mu;
    double z_norm;        // L2(Y)
    double dz_norm;       // L2(Gamma) of the normal derivative
};

std::vector<ZMuRow> z_mu_decay(const EigenSolution& sol1, const BoundarySpectralData& bsd1,
                               const EigenSolution& sol2, const BoundarySpectralData& bsd2,
                               const CellGeometry& geom, const BoundaryDatum& f,
                               const std::vector<double>& mu_list);

/// Bessel-type sum over kept modes: sum_k |<psi_k, e>|^2 / |lambda - lambda_k|^2.
double bessel_sum(const BoundarySpectralData& bsd, const std::vector<cplx>& probe,
                  cplx lambda);

}  // namespace wg
