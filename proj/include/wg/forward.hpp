// forward.hpp — truncated Galerkin operator of -Laplace + V with quasi-periodic
// conditions, its eigendecomposition, boundary spectral data (eigenvalues plus
// normal-derivative traces on Gamma), Floquet band structure and transform.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wg/geometry.hpp"

namespace wg {

/// Truncated Galerkin matrix H_pq = lambda_star_p delta_pq + (V e_q | e_p),
/// Hermitian-symmetrized.
struct GalerkinOperator {
    QuasiMomentum theta;
    std::vector<BasisEntry> basis;
    Eigen::MatrixXcd H;

    int size() const { return static_cast<int>(basis.size()); }
};

GalerkinOperator assemble(QuasiMomentum theta, const Potential& V,
                          const std::vector<BasisEntry>& basis,
                          const CellGeometry& geom, const YGrid& grid);

/// Full eigendecomposition of the truncated operator. Columns of C are
/// orthonormal coefficient vectors in the cell basis, eigenvalues ascending,
/// and each column's largest-magnitude entry is made real positive.
struct EigenSolution {
    QuasiMomentum theta;
    std::vector<BasisEntry> basis;
    Eigen::VectorXd eigenvalues;  // size B, ascending
    Eigen::MatrixXcd C;           // B x B
    int k_keep = 0;               // number of trusted modes

    int size() const { return static_cast<int>(basis.size()); }
};

EigenSolution eigensolve(const GalerkinOperator& op, int k_keep);

/// Boundary spectral data: (lambda_k, psi_k) for k = 1..k_keep with psi_k
/// sampled on the Gamma grid. The observable of the inverse problem; the
/// generating potential enters only through an opaque hash.
struct BoundarySpectralData {
    QuasiMomentum theta;
    CellGeometry geom;
    GammaGrid gamma;
    int basis_size = 0;
    int k_keep = 0;
    std::vector<double> lambdas;  // ascending, size k_keep
    Eigen::MatrixXcd psi;         // gamma.size() x k_keep, column k = psi_k samples
    std::uint64_t potential_hash = 0;

    double psi_gamma_norm(int k) const;  // quadrature L2(Gamma) norm
};

BoundarySpectralData boundary_traces(const EigenSolution& sol, const CellGeometry& geom,
                                     const GammaGrid& gamma, std::uint64_t potential_hash);

/// Floquet band structure over a theta grid; bands[k][i] = lambda_{k+1}(theta_i).
struct BandStructure {
    std::vector<double> thetas;
    std::vector<std::vector<double>> bands;       // K x thetas.size()
    std::vector<std::pair<double, double>> band_ranges;  // min/max per band
};

struct Truncation {
    int k_cross = 16;
    int j_max = 3;
    int basis_size = 0;  // 0 means the full k_cross*(2 j_max + 1) product
    int k_keep = 0;      // 0 means basis_size / 4
};

BandStructure band_sweep(const Potential& V, const std::vector<double>& theta_list, int K,
                         const CellGeometry& geom, const YGrid& grid,
                         const Truncation& trunc, int jobs = 1);

/// Samples of a compactly supported function on copies of the cell:
/// cells[k - cell_min] holds the Y-grid samples of f(x', x3 + 2 pi (k)).
struct CompactCellSamples {
    int cell_min = 0;
    std::vector<std::vector<cplx>> cells;
};

/// Floquet-Bloch-Gel'fand transform (U f)_theta on the Y grid:
/// sum_k e^{-ik theta} f(x', x3 + 2k pi), finite over the support range.
std::vector<cplx> floquet_transform(const CompactCellSamples& f, QuasiMomentum theta);

/// Consecutive index ranges [first, last] of eigenvalues closer than gap_tol.
std::vector<std::pair<int, int>> eigenvalue_clusters(const std::vector<double>& lambdas,
                                                     double gap_tol);

/// Resolves a truncation against a basis list: returns (B, K_keep) with the
/// defaults above applied and validated.
std::pair<int, int> resolve_truncation(const Truncation& t, std::size_t product_size);

}  // namespace wg
