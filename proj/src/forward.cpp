#include "wg/forward.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>

namespace wg {

namespace {

// Tensor-factorized quadrature of (V e_q | e_p). The Y grid is a tensor
// product and every basis function separates, so the triple sum collapses to
// three staged 1-d contractions; the result equals the naive node-by-node
// quadrature up to floating-point reassociation.
struct PotentialMatrix {
    std::vector<int> m_values, n_values;       // sorted distinct mode numbers
    std::vector<std::vector<cplx>> f;          // [m-pair * n-pair][d + 2 j_span]
    int j_span = 0;

    static int pair_index(int ia, int ib, int count) {
        if (ia > ib) std::swap(ia, ib);
        return ia * count - ia * (ia - 1) / 2 + (ib - ia);
    }

    cplx entry(int ma, int mb, int na, int nb, int d) const {
        int pm = pair_index(ma, mb, static_cast<int>(m_values.size()));
        int pn = pair_index(na, nb, static_cast<int>(n_values.size()));
        return f[pm * (n_values.size() * (n_values.size() + 1) / 2) + pn][d + 2 * j_span];
    }
};

PotentialMatrix build_potential_matrix(const Potential& V, const std::vector<BasisEntry>& basis,
                                       const CellGeometry& geom, const YGrid& grid) {
    PotentialMatrix pm;
    int j_max = 0;
    for (const auto& e : basis) {
        pm.m_values.push_back(e.idx.m);
        pm.n_values.push_back(e.idx.n);
        j_max = std::max(j_max, std::abs(e.idx.j));
    }
    auto uniq = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(pm.m_values);
    uniq(pm.n_values);
    pm.j_span = j_max;

    const std::size_t n1 = grid.x1.size(), n2 = grid.x2.size(), n3 = grid.x3.size();
    const int Mm = static_cast<int>(pm.m_values.size());
    const int Mn = static_cast<int>(pm.n_values.size());
    const int pairs_m = Mm * (Mm + 1) / 2;
    const int pairs_n = Mn * (Mn + 1) / 2;
    const int nd = 4 * j_max + 1;

    // sine mode tables
    std::vector<std::vector<double>> s1(Mm, std::vector<double>(n1));
    std::vector<std::vector<double>> s2(Mn, std::vector<double>(n2));
    for (int a = 0; a < Mm; ++a)
        for (std::size_t i = 0; i < n1; ++i)
            s1[a][i] = std::sqrt(2.0 / geom.a) * std::sin(pm.m_values[a] * M_PI * grid.x1[i] / geom.a);
    for (int a = 0; a < Mn; ++a)
        for (std::size_t i = 0; i < n2; ++i)
            s2[a][i] = std::sqrt(2.0 / geom.b) * std::sin(pm.n_values[a] * M_PI * grid.x2[i] / geom.b);

    // longitudinal transform kernel e^{i d x3} w3 / 2pi
    std::vector<std::vector<cplx>> e3(nd, std::vector<cplx>(n3));
    for (int d = -2 * j_max; d <= 2 * j_max; ++d)
        for (std::size_t i = 0; i < n3; ++i)
            e3[d + 2 * j_max][i] = std::polar(grid.w3[i] / kTwoPi, d * grid.x3[i]);

    pm.f.assign(static_cast<std::size_t>(pairs_m) * pairs_n, std::vector<cplx>(nd));

    std::vector<double> t1(n2 * n3);
    std::vector<double> t2(n3);
    for (int ma = 0; ma < Mm; ++ma) {
        for (int mb = ma; mb < Mm; ++mb) {
            // stage 1: contract x1
            std::fill(t1.begin(), t1.end(), 0.0);
            for (std::size_t i1 = 0; i1 < n1; ++i1) {
                const double f1 = grid.w1[i1] * s1[ma][i1] * s1[mb][i1];
                const double* vrow = V.samples.data() + i1 * n2 * n3;
                for (std::size_t r = 0; r < n2 * n3; ++r) t1[r] += f1 * vrow[r];
            }
            const int pmi = PotentialMatrix::pair_index(ma, mb, Mm);
            for (int na = 0; na < Mn; ++na) {
                for (int nb = na; nb < Mn; ++nb) {
                    // stage 2: contract x2
                    std::fill(t2.begin(), t2.end(), 0.0);
                    for (std::size_t i2 = 0; i2 < n2; ++i2) {
                        const double f2 = grid.w2[i2] * s2[na][i2] * s2[nb][i2];
                        const double* trow = t1.data() + i2 * n3;
                        for (std::size_t i3 = 0; i3 < n3; ++i3) t2[i3] += f2 * trow[i3];
                    }
                    // stage 3: longitudinal Fourier transform
                    const int pni = PotentialMatrix::pair_index(na, nb, Mn);
                    auto& dest = pm.f[static_cast<std::size_t>(pmi) * pairs_n + pni];
                    for (int d = 0; d < nd; ++d) {
                        cplx acc = 0.0;
                        for (std::size_t i3 = 0; i3 < n3; ++i3) acc += e3[d][i3] * t2[i3];
                        dest[d] = acc;
                    }
                }
            }
        }
    }
    return pm;
}

}  // namespace

GalerkinOperator assemble(QuasiMomentum theta, const Potential& V,
                          const std::vector<BasisEntry>& basis,
                          const CellGeometry& geom, const YGrid& grid) {
    theta.validate();
    if (basis.empty()) throw std::invalid_argument("assemble: empty basis");
    if (V.samples.size() != grid.size())
        throw std::invalid_argument("assemble: potential samples do not match the Y grid");

    const int B = static_cast<int>(basis.size());
    GalerkinOperator op;
    op.theta = theta;
    op.basis = basis;
    op.H = Eigen::MatrixXcd::Zero(B, B);

    if (!V.terms.empty() || V.grid_sup() > 0.0) {
        PotentialMatrix pm = build_potential_matrix(V, basis, geom, grid);
        std::map<int, int> m_pos, n_pos;
        for (std::size_t i = 0; i < pm.m_values.size(); ++i) m_pos[pm.m_values[i]] = int(i);
        for (std::size_t i = 0; i < pm.n_values.size(); ++i) n_pos[pm.n_values[i]] = int(i);
        for (int p = 0; p < B; ++p) {
            const auto& ip = basis[p].idx;
            for (int q = 0; q < B; ++q) {
                const auto& iq = basis[q].idx;
                op.H(p, q) = pm.entry(m_pos[iq.m], m_pos[ip.m], n_pos[iq.n], n_pos[ip.n],
                                      iq.j - ip.j);
            }
        }
    }
    for (int p = 0; p < B; ++p) op.H(p, p) += basis[p].lambda_star;
    op.H = 0.5 * (op.H + op.H.adjoint()).eval();
    return op;
}

namespace {
// Exactly diagonal operators (V = 0 assembles to diag(lambda_star)) have a
// trivial decomposition; skip the dense solver for them.
bool strictly_diagonal(const Eigen::MatrixXcd& H) {
    for (int p = 0; p < H.rows(); ++p)
        for (int q = 0; q < H.cols(); ++q)
            if (p != q && H(p, q) != cplx(0.0, 0.0)) return false;
    return true;
}
}  // namespace

EigenSolution eigensolve(const GalerkinOperator& op, int k_keep) {
    const int B = op.size();
    if (k_keep < 1 || k_keep > B)
        throw std::invalid_argument("eigensolve: k_keep must lie in [1, B]");

    if (strictly_diagonal(op.H)) {
        EigenSolution sol;
        sol.theta = op.theta;
        sol.basis = op.basis;
        sol.k_keep = k_keep;
        std::vector<int> order(B);
        for (int p = 0; p < B; ++p) order[p] = p;
        std::stable_sort(order.begin(), order.end(), [&](int u, int v) {
            return op.H(u, u).real() < op.H(v, v).real();
        });
        sol.eigenvalues.resize(B);
        sol.C = Eigen::MatrixXcd::Zero(B, B);
        for (int k = 0; k < B; ++k) {
            sol.eigenvalues[k] = op.H(order[k], order[k]).real();
            sol.C(order[k], k) = 1.0;
        }
        return sol;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.H);
    if (es.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eigensolve: decomposition failed to converge (B=" << B
            << ", |H|_max=" << op.H.cwiseAbs().maxCoeff() << ")";
        throw std::runtime_error(msg.str());
    }

    EigenSolution sol;
    sol.theta = op.theta;
    sol.basis = op.basis;
    sol.eigenvalues = es.eigenvalues();
    sol.C = es.eigenvectors();
    sol.k_keep = k_keep;

    // phase convention: largest-magnitude entry of each column real positive
    for (int k = 0; k < B; ++k) {
        int pmax = 0;
        double amax = -1.0;
        for (int p = 0; p < B; ++p) {
            double a = std::abs(sol.C(p, k));
            if (a > amax) {
                amax = a;
                pmax = p;
            }
        }
        if (amax > 0.0) sol.C.col(k) *= std::conj(sol.C(pmax, k)) / amax;
    }

    // residual check on the kept modes
    for (int k = 0; k < k_keep; ++k) {
        double resid = (op.H * sol.C.col(k) - sol.eigenvalues[k] * sol.C.col(k)).norm();
        if (resid > 1e-9 * (std::abs(sol.eigenvalues[k]) + 1.0)) {
            std::ostringstream msg;
            msg << "eigensolve: residual " << resid << " too large for mode " << k + 1;
            throw std::runtime_error(msg.str());
        }
    }
    return sol;
}

BoundarySpectralData boundary_traces(const EigenSolution& sol, const CellGeometry& geom,
                                     const GammaGrid& gamma, std::uint64_t potential_hash) {
    BoundarySpectralData bsd;
    bsd.theta = sol.theta;
    bsd.geom = geom;
    bsd.gamma = gamma;
    bsd.basis_size = sol.size();
    bsd.k_keep = sol.k_keep;
    bsd.potential_hash = potential_hash;
    bsd.lambdas.assign(sol.eigenvalues.data(), sol.eigenvalues.data() + sol.k_keep);

    const std::size_t ng = gamma.size();
    const int B = sol.size();
    Eigen::MatrixXcd D(ng, B);
    std::size_t row = 0;
    for (const auto& f : gamma.faces)
        for (std::size_t it = 0; it < f.t.size(); ++it)
            for (std::size_t i3 = 0; i3 < f.x3.size(); ++i3, ++row)
                for (int p = 0; p < B; ++p)
                    D(row, p) = basis_normal_derivative(sol.basis[p].idx, sol.theta, geom, f,
                                                        f.t[it], f.x3[i3]);
    bsd.psi = D * sol.C.leftCols(sol.k_keep);
    return bsd;
}

double BoundarySpectralData::psi_gamma_norm(int k) const {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < gamma.size(); ++i) acc += gamma.weight(i) * std::norm(psi(i, k));
    return std::sqrt(static_cast<double>(acc));
}

std::pair<int, int> resolve_truncation(const Truncation& t, std::size_t product_size) {
    int B = t.basis_size > 0 ? t.basis_size : static_cast<int>(product_size);
    if (B < 1 || B > static_cast<int>(product_size))
        throw std::invalid_argument("truncation: basis_size out of range");
    int keep = t.k_keep > 0 ? t.k_keep : std::max(1, B / 4);
    if (keep > B) throw std::invalid_argument("truncation: k_keep exceeds basis size");
    return {B, keep};
}

BandStructure band_sweep(const Potential& V, const std::vector<double>& theta_list, int K,
                         const CellGeometry& geom, const YGrid& grid,
                         const Truncation& trunc, int jobs) {
    if (theta_list.empty()) throw std::invalid_argument("band_sweep: empty theta list");
    BandStructure bs;
    bs.thetas = theta_list;
    std::vector<std::vector<double>> per_theta(theta_list.size());

    auto run_one = [&](std::size_t i) {
        QuasiMomentum th{theta_list[i]};
        auto basis = cell_basis(th, geom, trunc.k_cross, trunc.j_max);
        auto [B, keep] = resolve_truncation(trunc, basis.size());
        basis.resize(B);
        auto op = assemble(th, V, basis, geom, grid);
        auto sol = eigensolve(op, std::min(keep, B));
        int kk = std::min(K, B);
        per_theta[i].assign(sol.eigenvalues.data(), sol.eigenvalues.data() + kk);
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < theta_list.size(); ++i) run_one(i);
    } else {
        std::vector<std::future<void>> futs;
        for (int w = 0; w < jobs; ++w)
            futs.push_back(std::async(std::launch::async, [&, w]() {
                for (std::size_t i = w; i < theta_list.size(); i += jobs) run_one(i);
            }));
        for (auto& f : futs) f.get();
    }

    const int kb = static_cast<int>(per_theta.front().size());
    bs.bands.assign(kb, std::vector<double>(theta_list.size()));
    for (std::size_t i = 0; i < theta_list.size(); ++i)
        for (int k = 0; k < kb; ++k) bs.bands[k][i] = per_theta[i][k];
    for (int k = 0; k < kb; ++k) {
        auto [lo, hi] = std::minmax_element(bs.bands[k].begin(), bs.bands[k].end());
        bs.band_ranges.emplace_back(*lo, *hi);
    }
    return bs;
}

std::vector<cplx> floquet_transform(const CompactCellSamples& f, QuasiMomentum theta) {
    if (f.cells.empty()) throw std::invalid_argument("floquet_transform: no cells");
    const std::size_t n = f.cells.front().size();
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    for (std::size_t c = 0; c < f.cells.size(); ++c) {
        if (f.cells[c].size() != n)
            throw std::invalid_argument("floquet_transform: ragged cell samples");
        const int k = f.cell_min + static_cast<int>(c);
        const cplx phase = std::polar(1.0, -k * theta.theta);
        for (std::size_t i = 0; i < n; ++i) out[i] += phase * f.cells[c][i];
    }
    return out;
}

std::vector<std::pair<int, int>> eigenvalue_clusters(const std::vector<double>& lambdas,
                                                     double gap_tol) {
    std::vector<std::pair<int, int>> out;
    int first = 0;
    for (int k = 1; k <= static_cast<int>(lambdas.size()); ++k) {
        if (k == static_cast<int>(lambdas.size()) || lambdas[k] - lambdas[k - 1] > gap_tol) {
            out.emplace_back(first, k - 1);
            first = k;
        }
    }
    return out;
}

}  // namespace wg
