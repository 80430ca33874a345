// wg_lab — batch front-end: forward spectral data generation with caching,
// band structure sweeps, Fourier-coefficient reconstruction from boundary
// spectral data, stability reports, and the acceptance self-test.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "wg/acceptance.hpp"
#include "wg/scenario.hpp"
#include "wg/serialize.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out_dir = "out";
    std::string cache_dir;
    int jobs = 1;
    std::uint64_t seed = 20250811;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_config) {
    auto* c = cmd->add_option("--config", args.config, "scenario configuration file (JSON)");
    if (need_config) c->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--cache", args.cache_dir, "BSD cache directory");
    cmd->add_option("--jobs", args.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", args.seed, "seed for randomized property tests");
}

std::optional<std::filesystem::path> cache_path(const CommonArgs& args) {
    if (args.cache_dir.empty()) return std::nullopt;
    return std::filesystem::path(args.cache_dir);
}

int run_bands(const CommonArgs& args) {
    auto sc = wg::scenario_from_file(args.config);
    if (sc.band_thetas.empty())
        for (int i = 0; i < 16; ++i) sc.band_thetas.push_back(wg::kTwoPi * i / 16.0);
    auto [ygrid, ggrid] = wg::quadrature_grids(sc.geometry);
    auto V = wg::Potential::from_terms(sc.v1_terms, sc.geometry, ygrid, sc.v1_bound);
    auto bs = wg::band_sweep(V, sc.band_thetas, sc.band_count, sc.geometry, ygrid,
                             sc.truncation, args.jobs);
    std::filesystem::create_directories(args.out_dir);
    std::string csv = "theta";
    for (std::size_t k = 0; k < bs.bands.size(); ++k) csv += ",band" + std::to_string(k + 1);
    csv += "\n";
    for (std::size_t i = 0; i < bs.thetas.size(); ++i) {
        csv += std::to_string(bs.thetas[i]);
        for (const auto& band : bs.bands) csv += "," + std::to_string(band[i]);
        csv += "\n";
    }
    wg::write_text_atomic(std::filesystem::path(args.out_dir) / "bands.csv", csv);
    std::cout << "[bands] wrote bands.csv; band ranges (approximate spectrum):\n";
    for (std::size_t k = 0; k < bs.band_ranges.size(); ++k)
        std::cout << "  band " << k + 1 << ": [" << bs.band_ranges[k].first << ", "
                  << bs.band_ranges[k].second << "]\n";
    return 0;
}

int run_forward_cmd(const CommonArgs& args) {
    auto sc = wg::scenario_from_file(args.config);
    auto fwd = wg::run_forward(sc, cache_path(args), std::cout);
    std::cout << "[forward] V1: " << (fwd.p1.cache_hit ? "cache hit" : "computed") << ", V2: "
              << (fwd.p2.cache_hit ? "cache hit" : "computed") << "\n";
    return 0;
}

int run_reconstruct_cmd(const CommonArgs& args) {
    auto sc = wg::scenario_from_file(args.config);
    auto fwd = wg::run_forward(sc, cache_path(args), std::cout);
    auto results = wg::run_reconstruct(sc, fwd, std::cout, args.jobs);
    wg::write_reconstruction_outputs(sc, results, args.out_dir);
    std::cout << "[reconstruct] wrote reconstruction.{csv,json} and plot_reconstruction.py to "
              << args.out_dir << "\n";
    return 0;
}

int run_stability_cmd(const CommonArgs& args) {
    auto sc = wg::scenario_from_file(args.config);
    auto fwd = wg::run_forward(sc, cache_path(args), std::cout);
    auto results = wg::run_reconstruct(sc, fwd, std::cout, args.jobs);
    auto rep = wg::run_stability(sc, fwd, results, std::cout);
    wg::write_reconstruction_outputs(sc, results, args.out_dir);

    wg::json doc;
    doc["max_abs_vhat"] = rep.max_abs_vhat;
    doc["pass"] = rep.pass;
    doc["rows"] = wg::json::array();
    for (const auto& row : rep.rows)
        doc["rows"].push_back({{"N", row.N},
                               {"delta0", row.delta0},
                               {"c_observed", row.c_observed},
                               {"uniqueness_regime", row.uniqueness_regime},
                               {"pass", row.pass}});
    wg::write_text_atomic(std::filesystem::path(args.out_dir) / "stability.json", doc.dump(1));
    std::cout << "[stability] wrote stability.json to " << args.out_dir << "\n";
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-periodic waveguide spectral laboratory"};
    app.require_subcommand(1);

    CommonArgs bands_args, fwd_args, rec_args, stab_args, self_args;
    bool list_only = false;
    double tol_scale = 1.0;
    std::vector<std::string> only;

    auto* bands = app.add_subcommand("bands", "Floquet band structure sweep");
    add_common(bands, bands_args, true);
    auto* fwd = app.add_subcommand("forward", "generate (or reuse cached) boundary spectral data");
    add_common(fwd, fwd_args, true);
    auto* rec = app.add_subcommand("reconstruct", "reconstruct Fourier coefficients of V1-V2");
    add_common(rec, rec_args, true);
    auto* stab = app.add_subcommand("stability", "stability report over the frequency grid");
    add_common(stab, stab_args, true);
    auto* self = app.add_subcommand("selftest", "run the acceptance suite");
    add_common(self, self_args, false);
    self->add_flag("--list", list_only, "list criterion ids and exit");
    self->add_option("--tol-scale", tol_scale, "scale every tolerance (testing hook)");
    self->add_option("--only", only, "run only these criterion ids");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bands->parsed()) return run_bands(bands_args);
        if (fwd->parsed()) return run_forward_cmd(fwd_args);
        if (rec->parsed()) return run_reconstruct_cmd(rec_args);
        if (stab->parsed()) return run_stability_cmd(stab_args);
        if (self->parsed()) {
            if (list_only) {
                for (const auto& id : wg::acceptance_ids()) std::cout << id << "\n";
                return 0;
            }
            wg::AcceptanceOptions opt;
            opt.seed = self_args.seed;
            opt.tol_scale = tol_scale;
            opt.only = only;
            opt.jobs = self_args.jobs;
            auto results = wg::run_acceptance(opt, std::cout);
            bool all = !results.empty();
            for (const auto& r : results) all = all && r.pass;
            std::cout << (all ? "selftest: ALL PASS" : "selftest: FAILURES PRESENT") << " ("
                      << results.size() << " criteria)\n";
            return all ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
