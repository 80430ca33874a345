// acceptance.hpp — the desk-scale acceptance suite behind `wg_lab selftest`:
// one named criterion per check, each printing a pass/fail line.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wg {

struct CriterionResult {
    std::string id;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20250811;
    double tol_scale = 1.0;            // multiplies every numeric tolerance
    std::vector<std::string> only;     // run only these ids when nonempty
    int jobs = 1;
};

std::vector<std::string> acceptance_ids();

/// Runs the requested criteria, streaming one line per criterion to `out`.
/// Returns all results; overall success = every result passed.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& out);

}  // namespace wg
