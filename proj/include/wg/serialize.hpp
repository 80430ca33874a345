// serialize.hpp — versioned JSON documents for boundary spectral data (the
// cache format), CSV export of reconstruction sweeps, and atomic file writes.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "wg/forward.hpp"
#include "wg/inverse.hpp"

namespace wg {

using nlohmann::json;

json bsd_to_json(const BoundarySpectralData& bsd);
BoundarySpectralData bsd_from_json(const json& doc);

/// Writes via a temp file and rename so concurrent readers never see a
/// partial document.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// One CSV row per (frequency, sweep point); the final sweep row of each
/// frequency carries that frequency's estimate. Columns:
/// xi1,xi2,j,theta,lam_re,lam_im,abs_lam,Sdiff_re,Sdiff_im,Astar_sum,
/// Bstar_sum,tail_diag,vhat_re,vhat_im,scenario_hash
std::string reconstruction_csv(const std::vector<ReconstructionResult>& results,
                               const std::string& scenario_hash);

json reconstruction_to_json(const ReconstructionResult& r);

/// Standalone plotting script (reads the CSV, renders |estimate| vs |lambda|
/// log-log with the fitted slope).
std::string plot_script_text();

std::string hash_hex(std::uint64_t h);

}  // namespace wg
