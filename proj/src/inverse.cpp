#include "wg/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wg/steklov.hpp"

namespace wg {

void check_compatible(const BoundarySpectralData& b1, const BoundarySpectralData& b2) {
    if (std::abs(b1.theta.theta - b2.theta.theta) > 1e-12)
        throw std::invalid_argument("bsd pair: theta mismatch");
    if (b1.k_keep != b2.k_keep || b1.basis_size != b2.basis_size)
        throw std::invalid_argument("bsd pair: truncation mismatch");
    if (b1.gamma.size() != b2.gamma.size())
        throw std::invalid_argument("bsd pair: Gamma grid mismatch");
    if (std::abs(b1.geom.a - b2.geom.a) > 1e-15 || std::abs(b1.geom.b - b2.geom.b) > 1e-15)
        throw std::invalid_argument("bsd pair: geometry mismatch");
}

namespace {

double psi_distance_raw(const BoundarySpectralData& b1, const BoundarySpectralData& b2, int k) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < b1.gamma.size(); ++i)
        acc += b1.gamma.weight(i) * std::norm(b1.psi(i, k) - b2.psi(i, k));
    return std::sqrt(static_cast<double>(acc));
}

double psi_distance_aligned(const BoundarySpectralData& b1, const BoundarySpectralData& b2,
                            int k) {
    long double n1 = 0.0L, n2 = 0.0L;
    cplx overlap = 0.0;
    for (std::size_t i = 0; i < b1.gamma.size(); ++i) {
        double w = b1.gamma.weight(i);
        n1 += w * std::norm(b1.psi(i, k));
        n2 += w * std::norm(b2.psi(i, k));
        overlap += w * b1.psi(i, k) * std::conj(b2.psi(i, k));
    }
    double d2 = static_cast<double>(n1 + n2) - 2.0 * std::abs(overlap);
    return std::sqrt(std::max(0.0, d2));
}

}  // namespace

BsdPair partition(const BoundarySpectralData& b1, const BoundarySpectralData& b2,
                  double tol_lambda, double tol_psi) {
    check_compatible(b1, b2);
    if (!(tol_lambda > 0.0) || !(tol_psi > 0.0))
        throw std::invalid_argument("partition: tolerances must be positive");
    BsdPair pair;
    pair.bsd1 = &b1;
    pair.bsd2 = &b2;
    pair.tol_lambda = tol_lambda;
    pair.tol_psi = tol_psi;
    for (int k = 0; k < b1.k_keep; ++k) {
        bool same = std::abs(b1.lambdas[k] - b2.lambdas[k]) <= tol_lambda &&
                    psi_distance_raw(b1, b2, k) <= tol_psi;
        (same ? pair.k1 : pair.k0).push_back(k);
    }
    return pair;
}

double BsdMetrics::delta0(int N) const {
    if (N < 1) throw std::invalid_argument("delta0: N is 1-based");
    if (N > k_keep) return 0.0;
    return delta0_suffix[N - 1];
}

BsdMetrics bsd_metrics(const BsdPair& pair) {
    const auto& b1 = *pair.bsd1;
    const auto& b2 = *pair.bsd2;
    check_compatible(b1, b2);
    BsdMetrics m;
    m.k_keep = b1.k_keep;
    long double d1 = 0.0L;
    for (int k = 0; k < b1.k_keep; ++k) {
        m.abs_dlambda.push_back(std::abs(b1.lambdas[k] - b2.lambdas[k]));
        m.psi_dist_raw.push_back(psi_distance_raw(b1, b2, k));
        m.psi_dist_aligned.push_back(psi_distance_aligned(b1, b2, k));
        d1 += m.psi_dist_aligned.back() * m.psi_dist_aligned.back();
    }
    m.delta1 = std::sqrt(static_cast<double>(d1));
    m.delta0_suffix.assign(m.k_keep, 0.0);
    double run = 0.0;
    for (int k = m.k_keep - 1; k >= 0; --k) {
        run = std::max(run, m.abs_dlambda[k]);
        m.delta0_suffix[k] = run;
    }
    return m;
}

cplx f_lambda_mu(double tau, cplx lambda, cplx mu) {
    cplx d1 = lambda - tau, d2 = mu - tau;
    if (std::abs(d1) < 1e-14 || std::abs(d2) < 1e-14)
        throw std::invalid_argument("f_lambda_mu: pole at tau");
    return (mu - lambda) / (d1 * d2);
}

cplx g_quadratic(const std::vector<cplx>& psi, const ZetaPair& zp, const GammaGrid& grid) {
    if (psi.size() != grid.size())
        throw std::invalid_argument("g_quadratic: samples do not match the grid");
    auto e0 = exp_probe_on_gamma(zp.zeta0, grid, false);
    auto e1 = exp_probe_on_gamma(zp.zeta1, grid, false);
    cplx alpha = 0.0, beta = 0.0;  // <psi, e_zeta0>, <e_{*zeta1}, psi>
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double w = grid.weight(i);
        alpha += w * e0[i] * std::conj(psi[i]);
        beta += w * psi[i] * e1[i];
    }
    return alpha * beta;
}

namespace {

struct ClusterSums {
    std::vector<double> rep;     // representative eigenvalue per cluster
    std::vector<cplx> g_sum;     // sum of g over cluster members in K0
};

// per-mode quadratic pairings g_{m,k} for every kept mode
std::vector<cplx> g_all_modes(const BoundarySpectralData& bsd, const ZetaPair& zp) {
    auto e0 = exp_probe_on_gamma(zp.zeta0, bsd.gamma, false);
    auto e1 = exp_probe_on_gamma(zp.zeta1, bsd.gamma, false);
    const std::size_t ng = bsd.gamma.size();
    Eigen::VectorXcd a(ng), b(ng);
    for (std::size_t i = 0; i < ng; ++i) {
        double w = bsd.gamma.weight(i);
        a[i] = w * e0[i];
        b[i] = w * e1[i];
    }
    Eigen::VectorXcd alpha = bsd.psi.adjoint() * a;        // alpha_k = sum conj(psi) e0 w
    Eigen::VectorXcd beta = bsd.psi.transpose() * b;       // beta_k  = sum psi e1 w
    std::vector<cplx> g(bsd.k_keep);
    for (int k = 0; k < bsd.k_keep; ++k) g[k] = alpha[k] * beta[k];
    return g;
}

ClusterSums cluster_sums(const BoundarySpectralData& bsd, const std::vector<cplx>& g,
                         const std::vector<char>& in_k0, double cluster_tol) {
    ClusterSums cs;
    auto clusters = eigenvalue_clusters(bsd.lambdas, cluster_tol);
    for (auto [first, last] : clusters) {
        double rep = 0.0;
        for (int k = first; k <= last; ++k) rep += bsd.lambdas[k];
        rep /= (last - first + 1);
        cplx gs = 0.0;
        for (int k = first; k <= last; ++k)
            if (in_k0[k]) gs += g[k];
        cs.rep.push_back(rep);
        cs.g_sum.push_back(gs);
    }
    return cs;
}

void sdiff_guards(const BsdPair& pair, cplx lambda, const SDiffOptions& opt) {
    if (opt.require_im_ge_1 && lambda.imag() < 1.0)
        throw std::invalid_argument("s_difference_series: Im(lambda) must be >= 1");
    check_spectrum_distance(pair.bsd1->lambdas, lambda, opt.spectrum_guard);
    check_spectrum_distance(pair.bsd2->lambdas, lambda, opt.spectrum_guard);
    if (opt.margin_factor > 0.0) {
        double cap = std::min(pair.bsd1->lambdas.back(), pair.bsd2->lambdas.back()) /
                     opt.margin_factor;
        if (std::abs(lambda) > cap) {
            std::ostringstream msg;
            msg << "s_difference_series: |lambda| = " << std::abs(lambda)
                << " exceeds the truncation safety margin " << cap;
            throw std::invalid_argument(msg.str());
        }
    }
}

}  // namespace

SDifference s_difference_series(const BsdPair& pair, const ZetaPair& zp,
                                const SDiffOptions& opt) {
    const auto& b1 = *pair.bsd1;
    const auto& b2 = *pair.bsd2;
    check_compatible(b1, b2);
    const cplx lambda = zp.lambda;
    sdiff_guards(pair, lambda, opt);

    SDifference out;
    out.lambda = lambda;
    if (pair.k0.empty()) return out;  // identical data: exactly zero

    auto g1 = g_all_modes(b1, zp);
    auto g2 = g_all_modes(b2, zp);
    std::vector<char> in_k0(b1.k_keep, 0);
    for (int k : pair.k0) in_k0[k] = 1;

    auto cs1 = cluster_sums(b1, g1, in_k0, opt.cluster_tol);
    auto cs2 = cluster_sums(b2, g2, in_k0, opt.cluster_tol);
    cplx s = 0.0;
    for (std::size_t c = 0; c < cs1.rep.size(); ++c) s += cs1.g_sum[c] / (lambda - cs1.rep[c]);
    for (std::size_t c = 0; c < cs2.rep.size(); ++c) s -= cs2.g_sum[c] / (lambda - cs2.rep[c]);
    out.s_diff = s;

    std::vector<double> term_abs;
    for (int k : pair.k0) {
        SDiffRow row;
        row.k = k;
        row.lam1 = b1.lambdas[k];
        row.lam2 = b2.lambdas[k];
        row.g1 = g1[k];
        row.g2 = g2[k];
        row.a_star = (1.0 / (lambda - row.lam1) - 1.0 / (lambda - row.lam2)) * row.g1;
        row.b_star = (row.g1 - row.g2) / (lambda - row.lam2);
        row.term = row.g1 / (lambda - row.lam1) - row.g2 / (lambda - row.lam2);
        out.a_star_sum += std::abs(row.a_star);
        out.b_star_sum += std::abs(row.b_star);
        term_abs.push_back(std::abs(row.term));
        out.rows.push_back(row);
    }
    const int K = static_cast<int>(term_abs.size());
    for (int i = std::max(0, K - std::max(1, K / 10)); i < K; ++i) out.tail_diag += term_abs[i];
    return out;
}

std::vector<MuLimitRow> mu_limit_check(const BsdPair& pair, const ZetaPair& zp,
                                       const std::vector<double>& mu_list,
                                       const SDiffOptions& opt) {
    const auto& b1 = *pair.bsd1;
    const auto& b2 = *pair.bsd2;
    check_compatible(b1, b2);
    const double floor1 = std::min(b1.lambdas.front(), b2.lambdas.front()) - 1.0;
    for (std::size_t i = 0; i < mu_list.size(); ++i) {
        if (mu_list[i] > floor1)
            throw std::invalid_argument("mu_limit_check: mu must lie below the spectrum by 1");
        if (i > 0 && mu_list[i] >= mu_list[i - 1])
            throw std::invalid_argument("mu_limit_check: mu list must be strictly descending");
    }

    auto sd = s_difference_series(pair, zp, opt);
    std::vector<MuLimitRow> rows;
    if (pair.k0.empty()) {
        for (double mu : mu_list) rows.push_back({mu, cplx(0.0, 0.0), 0.0});
        return rows;
    }

    auto g1 = g_all_modes(b1, zp);
    auto g2 = g_all_modes(b2, zp);
    std::vector<char> in_k0(b1.k_keep, 0);
    for (int k : pair.k0) in_k0[k] = 1;
    auto cs1 = cluster_sums(b1, g1, in_k0, opt.cluster_tol);
    auto cs2 = cluster_sums(b2, g2, in_k0, opt.cluster_tol);

    for (double mu : mu_list) {
        cplx v = 0.0;
        for (std::size_t c = 0; c < cs1.rep.size(); ++c)
            v += f_lambda_mu(cs1.rep[c], sd.lambda, mu) * cs1.g_sum[c];
        for (std::size_t c = 0; c < cs2.rep.size(); ++c)
            v -= f_lambda_mu(cs2.rep[c], sd.lambda, mu) * cs2.g_sum[c];
        rows.push_back({mu, v, std::abs(v - sd.s_diff)});
    }
    return rows;
}

ReconstructionResult reconstruct_fourier_difference(const BsdPair& pair,
                                                    const std::array<double, 2>& xi_prime,
                                                    int j, QuasiMomentum theta,
                                                    const SweepConfig& sweep,
                                                    const SDiffOptions& opt) {
    std::vector<double> exponents;
    for (int i = sweep.i_min; i <= sweep.i_max; ++i) exponents.push_back(i);
    return reconstruct_with_exponents(pair, xi_prime, j, theta, exponents, sweep, opt);
}

ReconstructionResult reconstruct_with_exponents(const BsdPair& pair,
                                                const std::array<double, 2>& xi_prime, int j,
                                                QuasiMomentum theta,
                                                const std::vector<double>& exponents,
                                                const SweepConfig& sweep,
                                                const SDiffOptions& opt) {
    ReconstructionResult res;
    res.j_requested = j;
    res.theta = theta.theta;
    res.xi_prime = xi_prime;
    const double xi_norm = std::hypot(xi_prime[0], xi_prime[1]);
    if (xi_norm < sweep.epsilon_freq) {
        res.xi_prime = {sweep.epsilon_freq, 0.0};
        res.note = "xi' below epsilon_freq, replaced by (epsilon_freq, 0); ";
    }
    res.frequency = {res.xi_prime[0], res.xi_prime[1], -double(j)};

    std::vector<double> params;
    for (double e : exponents)
        params.push_back(j != 0 ? 1.0 - std::pow(2.0, -e) : std::pow(2.0, e));

    for (double p : params) {
        ZetaPair zp;
        try {
            zp = make_zeta(res.xi_prime, j, theta, p);
        } catch (const std::exception&) {
            continue;  // parameter below the admissible range
        }
        try {
            auto sd = s_difference_series(pair, zp, opt);
            res.sweep.push_back({p, zp.lambda, std::abs(zp.lambda), sd.s_diff,
                                 sd.a_star_sum, sd.b_star_sum, sd.tail_diag});
        } catch (const std::invalid_argument& e) {
            res.note += std::string(e.what()) + "; ";
        }
    }
    if (res.sweep.size() < 4)
        throw std::invalid_argument("reconstruct: sweep too short after guard filtering (" +
                                    std::to_string(res.sweep.size()) + " points)");
    std::sort(res.sweep.begin(), res.sweep.end(),
              [](const SweepPoint& u, const SweepPoint& v) { return u.abs_lambda < v.abs_lambda; });

    res.estimate = res.sweep.back().s_diff;
    res.vhat = res.estimate * std::pow(kTwoPi, -1.5);

    // decay of the estimator variation, fitted against |lambda|
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int nfit = 0;
    for (std::size_t i = 0; i + 1 < res.sweep.size(); ++i) {
        double dev = std::abs(res.sweep[i].s_diff - res.estimate);
        if (dev < 1e-14) continue;
        double lx = std::log(res.sweep[i].abs_lambda), ly = std::log(dev);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++nfit;
    }
    if (nfit >= 3) {
        res.decay_slope = (nfit * sxy - sx * sy) / (nfit * sxx - sx * sx);
        res.slope_valid = true;
    }
    return res;
}

StabilityReport stability_check(const std::vector<ReconstructionResult>& results,
                                const BsdMetrics& metrics, const std::vector<int>& n_list,
                                double c_max) {
    StabilityReport rep;
    for (const auto& r : results) rep.max_abs_vhat = std::max(rep.max_abs_vhat, std::abs(r.vhat));
    for (int N : n_list) {
        StabilityRow row;
        row.N = N;
        row.delta0 = metrics.delta0(N);
        row.uniqueness_regime = row.delta0 < 1e-14;
        if (row.uniqueness_regime) {
            row.c_observed = 0.0;
            row.pass = rep.max_abs_vhat < 1e-10;
        } else {
            row.c_observed = rep.max_abs_vhat / row.delta0;
            row.pass = row.c_observed <= c_max;
        }
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

void rephase_randomly(BoundarySpectralData& bsd, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    for (int k = 0; k < bsd.k_keep; ++k) bsd.psi.col(k) *= std::polar(1.0, angle(rng));
}

void remix_clusters_randomly(BoundarySpectralData& bsd, std::mt19937_64& rng,
                             double cluster_tol) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto [first, last] : eigenvalue_clusters(bsd.lambdas, cluster_tol)) {
        const int d = last - first + 1;
        if (d < 2) continue;
        Eigen::MatrixXcd G(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) G(r, c) = cplx(gauss(rng), gauss(rng));
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(G);
        Eigen::MatrixXcd U = qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
        bsd.psi.middleCols(first, d) = (bsd.psi.middleCols(first, d) * U).eval();
    }
}

}  // namespace wg
