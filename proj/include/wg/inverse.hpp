// inverse.hpp — everything computable from boundary spectral data alone:
// distance metrics between two data sets, the K0/K1 partition, the difference
// series for S1 - S2, Fourier-coefficient reconstruction of V1 - V2, and
// stability-constant estimation.

#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wg/forward.hpp"
#include "wg/zeta.hpp"

namespace wg {

/// Two compatible boundary spectral data sets plus the K0/K1 index partition
/// (0-based; k in K1 iff the eigenpairs agree within the tolerances).
struct BsdPair {
    const BoundarySpectralData* bsd1 = nullptr;
    const BoundarySpectralData* bsd2 = nullptr;
    std::vector<int> k0, k1;
    double tol_lambda = 0.0, tol_psi = 0.0;
};

/// Throws unless the two data sets share theta, truncation and Gamma grid.
void check_compatible(const BoundarySpectralData& b1, const BoundarySpectralData& b2);

BsdPair partition(const BoundarySpectralData& b1, const BoundarySpectralData& b2,
                  double tol_lambda, double tol_psi);

/// Data-side distances: delta0(N) = sup_{k >= N} |lambda_{1,k} - lambda_{2,k}|
/// over kept modes, delta1 = l2 norm of the per-mode trace distances after
/// optimal per-mode phase alignment.
struct BsdMetrics {
    int k_keep = 0;
    std::vector<double> abs_dlambda;       // per mode
    std::vector<double> psi_dist_raw;      // ||psi1 - psi2||
    std::vector<double> psi_dist_aligned;  // min over unit phase
    std::vector<double> delta0_suffix;     // suffix maxima of abs_dlambda
    double delta1 = 0.0;

    /// N is 1-based as in the stability estimate.
    double delta0(int N) const;
};

BsdMetrics bsd_metrics(const BsdPair& pair);

/// f_{lambda,mu}(tau) = (mu - lambda) / ((lambda - tau)(mu - tau)).
cplx f_lambda_mu(double tau, cplx lambda, cplx mu);

/// g(psi) = <psi, e_{zeta0}> <e_{*zeta1}, psi>; phase invariant in psi.
cplx g_quadratic(const std::vector<cplx>& psi, const ZetaPair& zp, const GammaGrid& grid);

struct SDiffOptions {
    double spectrum_guard = 1e-6;
    double margin_factor = 4.0;  // require |lambda| <= lambda_keep_max / margin; <= 0 disables
    double cluster_tol = 1e-8;   // degenerate-cluster detection gap
    bool require_im_ge_1 = true;
};

struct SDiffRow {
    int k;                 // 0-based mode index (member of K0)
    double lam1, lam2;
    cplx g1, g2;
    cplx a_star, b_star;   // A_{*k}, B_{*k}
    cplx term;             // g1/(lambda-lam1) - g2/(lambda-lam2)
};

struct SDifference {
    cplx lambda;
    cplx s_diff;           // K0 sum, evaluated cluster-wise
    double a_star_sum = 0; // sum of |A_{*k}|
    double b_star_sum = 0; // sum of |B_{*k}|
    double tail_diag = 0;  // l1 mass of the last decade of per-mode terms
    std::vector<SDiffRow> rows;
};

/// S1 - S2 = sum over K0 of [g(psi_1k)/(lambda - lambda_1k) -
/// g(psi_2k)/(lambda - lambda_2k)]. Degenerate clusters are summed against a
/// common representative eigenvalue so the value is invariant under unitary
/// remixing inside clusters.
SDifference s_difference_series(const BsdPair& pair, const ZetaPair& zp,
                                const SDiffOptions& opt = {});

struct MuLimitRow {
    double mu;
    cplx value;       // finite-mu pairing
    double deviation; // |value - s_diff|
};

/// Finite-mu difference series versus its mu -> -infinity limit.
std::vector<MuLimitRow> mu_limit_check(const BsdPair& pair, const ZetaPair& zp,
                                       const std::vector<double>& mu_list,
                                       const SDiffOptions& opt = {});

struct SweepConfig {
    int i_min = 2;
    int i_max = 9;
    double epsilon_freq = 1e-2;  // replacement magnitude for |xi'| = 0 requests
};

struct SweepPoint {
    double param;
    cplx lambda;
    double abs_lambda;
    cplx s_diff;
    double a_star_sum, b_star_sum, tail_diag;
};

struct ReconstructionResult {
    std::array<double, 2> xi_prime{};  // as probed (after any epsilon replacement)
    int j_requested = 0;
    std::array<double, 3> frequency{};  // probed frequency (xi', -j)
    double theta = 0.0;
    std::vector<SweepPoint> sweep;      // |lambda| ascending
    cplx estimate;                      // last-point s_diff: integral of (V1-V2) e^{(z0+z1).x}
    cplx vhat;                          // (2pi)^{-3/2} * estimate
    double decay_slope = 0.0;           // fit of log|s_diff - estimate| vs log|lambda|
    bool slope_valid = false;
    std::string note;
};

ReconstructionResult reconstruct_fourier_difference(const BsdPair& pair,
                                                    const std::array<double, 2>& xi_prime,
                                                    int j, QuasiMomentum theta,
                                                    const SweepConfig& sweep,
                                                    const SDiffOptions& opt = {});

/// Same with explicit sweep exponents i (s = 1 - 2^{-i} for j != 0, t = 2^i
/// for j = 0); fractional exponents are allowed.
ReconstructionResult reconstruct_with_exponents(const BsdPair& pair,
                                                const std::array<double, 2>& xi_prime, int j,
                                                QuasiMomentum theta,
                                                const std::vector<double>& exponents,
                                                const SweepConfig& sweep,
                                                const SDiffOptions& opt = {});

struct StabilityRow {
    int N;
    double delta0;
    double c_observed;   // max |vhat| / delta0(N)
    bool uniqueness_regime;
    bool pass;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    double max_abs_vhat = 0.0;
    bool pass = true;
};

/// c_observed = max over the frequency grid of |vhat| / delta0(N); when
/// delta0(N) vanishes the uniqueness regime applies and every estimate must be
/// below 1e-10.
StabilityReport stability_check(const std::vector<ReconstructionResult>& results,
                                const BsdMetrics& metrics, const std::vector<int>& n_list,
                                double c_max);

// ---------------------------------------------------------------------------
// Gauge transformations (diagnostics and invariance tests)
// ---------------------------------------------------------------------------

/// Multiplies every kept trace by a random unit phase.
void rephase_randomly(BoundarySpectralData& bsd, std::mt19937_64& rng);

/// Applies a random unitary mix inside every degenerate eigenvalue cluster.
void remix_clusters_randomly(BoundarySpectralData& bsd, std::mt19937_64& rng,
                             double cluster_tol = 1e-8);

}  // namespace wg
