// scenario.hpp — experiment configuration (strict JSON schema), forward-data
// generation with content-hash caching, and the reconstruction / stability
// batch drivers behind the CLI.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wg/inverse.hpp"
#include "wg/steklov.hpp"

namespace wg {

using nlohmann::json;

struct FrequencySpec {
    double xi1 = 1.0, xi2 = 0.0;
    int j = 0;
};

struct Scenario {
    CellGeometry geometry;
    double theta = 0.0;
    Truncation truncation;
    std::vector<TrigTerm> v1_terms, v2_terms;
    double v1_bound = 0.0, v2_bound = 0.0;
    std::vector<FrequencySpec> frequencies;
    std::vector<double> sweep_exponents;  // i values: s = 1 - 2^-i or t = 2^i
    double epsilon_freq = 1e-2;
    double margin_factor = 4.0;
    double spectrum_guard = 1e-6;
    double cluster_tol = 1e-8;
    double tol_lambda = 1e-9;   // K0/K1 partition tolerances
    double tol_psi = 1e-9;
    std::vector<int> n_list{1};
    double c_max = 1e6;
    std::vector<double> band_thetas;  // for the bands subcommand
    int band_count = 10;

    SDiffOptions sdiff_options() const;
    SweepConfig sweep_config() const;
};

/// Parses and validates a scenario document; unknown keys are rejected.
Scenario scenario_from_json(const json& doc);
Scenario scenario_from_file(const std::filesystem::path& path);

/// Content hash covering everything that determines the outputs.
std::uint64_t scenario_hash(const Scenario& sc);

/// Forward solver products for one potential.
struct ForwardProduct {
    std::shared_ptr<EigenSolution> sol;  // null when loaded from cache
    std::shared_ptr<BoundarySpectralData> bsd;
    bool cache_hit = false;
};

/// Computes (or loads from cache) the boundary spectral data of one potential.
/// Cache documents are keyed by the provenance hash; corrupt entries are
/// regenerated with a warning.
ForwardProduct run_forward_one(const Scenario& sc, const std::vector<TrigTerm>& terms,
                               double declared_bound,
                               const std::optional<std::filesystem::path>& cache_dir,
                               std::ostream& log, bool need_solution = false);

struct ForwardArtifacts {
    ForwardProduct p1, p2;
};

ForwardArtifacts run_forward(const Scenario& sc,
                             const std::optional<std::filesystem::path>& cache_dir,
                             std::ostream& log);

std::vector<ReconstructionResult> run_reconstruct(const Scenario& sc,
                                                  const ForwardArtifacts& fwd,
                                                  std::ostream& log, int jobs = 1);

StabilityReport run_stability(const Scenario& sc, const ForwardArtifacts& fwd,
                              const std::vector<ReconstructionResult>& results,
                              std::ostream& log);

/// Writes reconstruction.csv / reconstruction.json / plot_reconstruction.py
/// under out_dir.
void write_reconstruction_outputs(const Scenario& sc,
                                  const std::vector<ReconstructionResult>& results,
                                  const std::filesystem::path& out_dir);

}  // namespace wg
