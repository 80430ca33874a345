#include "wg/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "wg/serialize.hpp"

namespace wg {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

AxisFactor parse_factor(const json& j, const std::string& where, bool periodic) {
    check_keys(j, {"fn", "k"}, where);
    AxisFactor f;
    const std::string fn = j.at("fn").get<std::string>();
    if (fn == "one")
        f.kind = AxisFactor::Kind::One;
    else if (fn == "sin")
        f.kind = AxisFactor::Kind::Sin;
    else if (fn == "cos")
        f.kind = AxisFactor::Kind::Cos;
    else
        throw std::invalid_argument("config: " + where + ".fn must be one|sin|cos");
    f.k = j.value("k", 0);
    if (f.kind != AxisFactor::Kind::One && f.k < 1)
        throw std::invalid_argument("config: " + where + ".k must be >= 1");
    (void)periodic;  // x3 factors take integer k by construction of the schema
    return f;
}

std::vector<TrigTerm> parse_terms(const json& j, const std::string& where) {
    std::vector<TrigTerm> terms;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& t = j.at(i);
        const std::string here = where + "[" + std::to_string(i) + "]";
        check_keys(t, {"c", "x1", "x2", "x3"}, here);
        TrigTerm term;
        term.c = t.at("c").get<double>();
        if (t.contains("x1")) term.f1 = parse_factor(t.at("x1"), here + ".x1", false);
        if (t.contains("x2")) term.f2 = parse_factor(t.at("x2"), here + ".x2", false);
        if (t.contains("x3")) term.f3 = parse_factor(t.at("x3"), here + ".x3", true);
        terms.push_back(term);
    }
    return terms;
}

}  // namespace

SDiffOptions Scenario::sdiff_options() const {
    SDiffOptions opt;
    opt.spectrum_guard = spectrum_guard;
    opt.margin_factor = margin_factor;
    opt.cluster_tol = cluster_tol;
    return opt;
}

SweepConfig Scenario::sweep_config() const {
    SweepConfig cfg;
    cfg.epsilon_freq = epsilon_freq;
    return cfg;
}

Scenario scenario_from_json(const json& doc) {
    check_keys(doc, {"schema_version", "geometry", "theta", "truncation", "potentials",
                     "frequencies", "sweep_exponents", "epsilon_freq", "margin_factor",
                     "spectrum_guard", "cluster_tol", "tol_lambda", "tol_psi", "n_list",
                     "c_max", "band_thetas", "band_count"},
               "scenario");
    if (doc.at("schema_version").get<int>() != 1)
        throw std::invalid_argument("config: unsupported schema_version");

    Scenario sc;
    const auto& g = doc.at("geometry");
    check_keys(g, {"a", "b", "quad_nx1", "quad_nx2", "quad_n3", "gamma_nt", "gamma_n3"},
               "geometry");
    sc.geometry.a = g.at("a").get<double>();
    sc.geometry.b = g.at("b").get<double>();
    sc.geometry.quad_nx1 = g.value("quad_nx1", 24);
    sc.geometry.quad_nx2 = g.value("quad_nx2", 24);
    sc.geometry.quad_n3 = g.value("quad_n3", 24);
    sc.geometry.gamma_nt = g.value("gamma_nt", 24);
    sc.geometry.gamma_n3 = g.value("gamma_n3", 24);
    sc.geometry.validate();

    sc.theta = doc.at("theta").get<double>();
    QuasiMomentum{sc.theta}.validate();

    const auto& t = doc.at("truncation");
    check_keys(t, {"k_cross", "j_max", "basis_size", "k_keep"}, "truncation");
    sc.truncation.k_cross = t.at("k_cross").get<int>();
    sc.truncation.j_max = t.at("j_max").get<int>();
    sc.truncation.basis_size = t.value("basis_size", 0);
    sc.truncation.k_keep = t.value("k_keep", 0);

    const auto& p = doc.at("potentials");
    check_keys(p, {"v1", "v2"}, "potentials");
    for (const char* key : {"v1", "v2"}) {
        const auto& v = p.at(key);
        check_keys(v, {"bound", "terms"}, std::string("potentials.") + key);
        auto terms = parse_terms(v.at("terms"), std::string("potentials.") + key + ".terms");
        double bound = v.value("bound", 0.0);
        if (std::string(key) == "v1") {
            sc.v1_terms = std::move(terms);
            sc.v1_bound = bound;
        } else {
            sc.v2_terms = std::move(terms);
            sc.v2_bound = bound;
        }
    }

    if (doc.contains("frequencies")) {
        for (const auto& f : doc.at("frequencies")) {
            check_keys(f, {"xi1", "xi2", "j"}, "frequencies[]");
            sc.frequencies.push_back(
                {f.at("xi1").get<double>(), f.at("xi2").get<double>(), f.value("j", 0)});
        }
    }
    if (doc.contains("sweep_exponents"))
        sc.sweep_exponents = doc.at("sweep_exponents").get<std::vector<double>>();
    sc.epsilon_freq = doc.value("epsilon_freq", 1e-2);
    sc.margin_factor = doc.value("margin_factor", 4.0);
    sc.spectrum_guard = doc.value("spectrum_guard", 1e-6);
    sc.cluster_tol = doc.value("cluster_tol", 1e-8);
    sc.tol_lambda = doc.value("tol_lambda", 1e-9);
    sc.tol_psi = doc.value("tol_psi", 1e-9);
    if (doc.contains("n_list")) sc.n_list = doc.at("n_list").get<std::vector<int>>();
    sc.c_max = doc.value("c_max", 1e6);
    if (doc.contains("band_thetas"))
        sc.band_thetas = doc.at("band_thetas").get<std::vector<double>>();
    sc.band_count = doc.value("band_count", 10);

    for (double tol : {sc.epsilon_freq, sc.spectrum_guard, sc.cluster_tol, sc.tol_lambda,
                       sc.tol_psi})
        if (!(tol > 0.0)) throw std::invalid_argument("config: tolerances must be positive");
    if (sc.frequencies.empty())
        throw std::invalid_argument("config: frequency grid must be nonempty");
    if (sc.sweep_exponents.empty())
        for (int i = 2; i <= 9; ++i) sc.sweep_exponents.push_back(i);
    return sc;
}

Scenario scenario_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: parse error in " + path.string() + ": " + e.what());
    }
    return scenario_from_json(doc);
}

std::uint64_t scenario_hash(const Scenario& sc) {
    std::ostringstream s;
    s.precision(17);
    s << "wg-scenario-v1;" << sc.geometry.a << ";" << sc.geometry.b << ";"
      << sc.geometry.quad_nx1 << ";" << sc.geometry.quad_nx2 << ";" << sc.geometry.quad_n3
      << ";" << sc.geometry.gamma_nt << ";" << sc.geometry.gamma_n3 << ";" << sc.theta << ";"
      << sc.truncation.k_cross << ";" << sc.truncation.j_max << ";"
      << sc.truncation.basis_size << ";" << sc.truncation.k_keep << ";";
    auto dump_terms = [&](const std::vector<TrigTerm>& terms, double bound) {
        s << bound << ";" << terms.size() << ";";
        for (const auto& t : terms) {
            s << t.c << ";";
            for (const AxisFactor* f : {&t.f1, &t.f2, &t.f3})
                s << static_cast<int>(f->kind) << ";" << f->k << ";";
        }
    };
    dump_terms(sc.v1_terms, sc.v1_bound);
    dump_terms(sc.v2_terms, sc.v2_bound);
    for (const auto& f : sc.frequencies) s << f.xi1 << ";" << f.xi2 << ";" << f.j << ";";
    for (double e : sc.sweep_exponents) s << e << ";";
    s << sc.epsilon_freq << ";" << sc.margin_factor << ";" << sc.spectrum_guard << ";"
      << sc.cluster_tol << ";" << sc.tol_lambda << ";" << sc.tol_psi << ";";
    for (int n : sc.n_list) s << n << ";";
    s << sc.c_max << ";";
    return fnv1a64(s.str());
}

ForwardProduct run_forward_one(const Scenario& sc, const std::vector<TrigTerm>& terms,
                               double declared_bound,
                               const std::optional<std::filesystem::path>& cache_dir,
                               std::ostream& log, bool need_solution) {
    QuasiMomentum theta{sc.theta};
    auto [ygrid, ggrid] = quadrature_grids(sc.geometry);
    auto V = Potential::from_terms(terms, sc.geometry, ygrid, declared_bound);

    auto basis_full = cell_basis(theta, sc.geometry, sc.truncation.k_cross, sc.truncation.j_max);
    auto [B, keep] = resolve_truncation(sc.truncation, basis_full.size());
    std::uint64_t key = provenance_hash(sc.geometry, theta, sc.truncation.k_cross,
                                        sc.truncation.j_max, B, keep, V);

    ForwardProduct out;
    std::filesystem::path cache_file;
    if (cache_dir && !need_solution) {
        cache_file = *cache_dir / ("bsd_" + hash_hex(key) + ".json");
        if (std::filesystem::exists(cache_file)) {
            try {
                std::ifstream in(cache_file);
                json doc;
                in >> doc;
                auto bsd = bsd_from_json(doc);
                if (bsd.potential_hash != key)
                    throw std::runtime_error("hash mismatch");
                out.bsd = std::make_shared<BoundarySpectralData>(std::move(bsd));
                out.cache_hit = true;
                log << "[forward] cache hit " << cache_file.filename().string() << "\n";
                return out;
            } catch (const std::exception& e) {
                log << "[forward] warning: cache entry " << cache_file.filename().string()
                    << " unusable (" << e.what() << "), regenerating\n";
            }
        }
    }

    std::vector<BasisEntry> basis(basis_full.begin(), basis_full.begin() + B);
    auto op = assemble(theta, V, basis, sc.geometry, ygrid);
    auto sol = eigensolve(op, keep);
    auto bsd = boundary_traces(sol, sc.geometry, ggrid, key);
    out.bsd = std::make_shared<BoundarySpectralData>(std::move(bsd));
    if (need_solution) out.sol = std::make_shared<EigenSolution>(std::move(sol));
    if (cache_dir) {
        std::filesystem::create_directories(*cache_dir);
        if (cache_file.empty()) cache_file = *cache_dir / ("bsd_" + hash_hex(key) + ".json");
        write_text_atomic(cache_file, bsd_to_json(*out.bsd).dump());
        log << "[forward] wrote " << cache_file.filename().string() << "\n";
    }
    return out;
}

ForwardArtifacts run_forward(const Scenario& sc,
                             const std::optional<std::filesystem::path>& cache_dir,
                             std::ostream& log) {
    ForwardArtifacts fwd;
    fwd.p1 = run_forward_one(sc, sc.v1_terms, sc.v1_bound, cache_dir, log);
    fwd.p2 = run_forward_one(sc, sc.v2_terms, sc.v2_bound, cache_dir, log);
    return fwd;
}

std::vector<ReconstructionResult> run_reconstruct(const Scenario& sc,
                                                  const ForwardArtifacts& fwd,
                                                  std::ostream& log, int jobs) {
    auto pair = partition(*fwd.p1.bsd, *fwd.p2.bsd, sc.tol_lambda, sc.tol_psi);
    SDiffOptions opt = sc.sdiff_options();
    SweepConfig sweep = sc.sweep_config();

    std::vector<ReconstructionResult> results(sc.frequencies.size());
    std::vector<std::string> errors(sc.frequencies.size());
    auto run_one = [&](std::size_t i) {
        const auto& f = sc.frequencies[i];
        try {
            results[i] = reconstruct_with_exponents(pair, {f.xi1, f.xi2}, f.j,
                                                    QuasiMomentum{sc.theta},
                                                    sc.sweep_exponents, sweep, opt);
        } catch (const std::exception& e) {
            errors[i] = e.what();
            results[i].xi_prime = {f.xi1, f.xi2};
            results[i].j_requested = f.j;
            results[i].theta = sc.theta;
            results[i].note = std::string("failed: ") + e.what();
        }
    };
    if (jobs <= 1) {
        for (std::size_t i = 0; i < sc.frequencies.size(); ++i) run_one(i);
    } else {
        std::vector<std::future<void>> futs;
        for (int w = 0; w < jobs; ++w)
            futs.push_back(std::async(std::launch::async, [&, w]() {
                for (std::size_t i = w; i < sc.frequencies.size(); i += jobs) run_one(i);
            }));
        for (auto& fu : futs) fu.get();
    }
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty())
            log << "[reconstruct] frequency " << i << " failed: " << errors[i] << "\n";
    return results;
}

StabilityReport run_stability(const Scenario& sc, const ForwardArtifacts& fwd,
                              const std::vector<ReconstructionResult>& results,
                              std::ostream& log) {
    auto pair = partition(*fwd.p1.bsd, *fwd.p2.bsd, sc.tol_lambda, sc.tol_psi);
    auto metrics = bsd_metrics(pair);
    auto rep = stability_check(results, metrics, sc.n_list, sc.c_max);
    log << "[stability] delta1 = " << metrics.delta1 << ", max|vhat| = " << rep.max_abs_vhat
        << "\n";
    for (const auto& row : rep.rows)
        log << "[stability] N=" << row.N << " delta0=" << row.delta0
            << " c_observed=" << row.c_observed << (row.pass ? " pass" : " FAIL") << "\n";
    return rep;
}

void write_reconstruction_outputs(const Scenario& sc,
                                  const std::vector<ReconstructionResult>& results,
                                  const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string hash = hash_hex(scenario_hash(sc));
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    std::string csv = "# generated by wg_lab at unix-ms " +
                      std::to_string(
                          std::chrono::duration_cast<std::chrono::milliseconds>(now).count()) +
                      "\n" + reconstruction_csv(results, hash);
    write_text_atomic(out_dir / "reconstruction.csv", csv);
    json doc;
    doc["scenario_hash"] = hash;
    doc["results"] = json::array();
    for (const auto& r : results) doc["results"].push_back(reconstruction_to_json(r));
    write_text_atomic(out_dir / "reconstruction.json", doc.dump(1));
    write_text_atomic(out_dir / "plot_reconstruction.py", plot_script_text());
}

}  // namespace wg
