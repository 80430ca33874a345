#include "wg/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace wg {

namespace {
std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json bsd_to_json(const BoundarySpectralData& bsd) {
    json doc;
    doc["schema"] = "wg-bsd";
    doc["version"] = 1;
    doc["geometry"] = {
        {"a", bsd.geom.a},           {"b", bsd.geom.b},
        {"quad_nx1", bsd.geom.quad_nx1}, {"quad_nx2", bsd.geom.quad_nx2},
        {"quad_n3", bsd.geom.quad_n3},   {"gamma_nt", bsd.geom.gamma_nt},
        {"gamma_n3", bsd.geom.gamma_n3}};
    doc["theta"] = bsd.theta.theta;
    doc["truncation"] = {{"basis_size", bsd.basis_size}, {"k_keep", bsd.k_keep}};
    doc["potential_hash"] = hash_hex(bsd.potential_hash);
    doc["eigenvalues"] = bsd.lambdas;
    json psi = json::array();
    for (int k = 0; k < bsd.k_keep; ++k) {
        json col = json::array();
        for (std::size_t i = 0; i < bsd.gamma.size(); ++i)
            col.push_back({bsd.psi(i, k).real(), bsd.psi(i, k).imag()});
        psi.push_back(std::move(col));
    }
    doc["psi"] = std::move(psi);
    return doc;
}

BoundarySpectralData bsd_from_json(const json& doc) {
    if (doc.at("schema").get<std::string>() != "wg-bsd" || doc.at("version").get<int>() != 1)
        throw std::runtime_error("bsd_from_json: unknown schema/version");
    BoundarySpectralData bsd;
    const auto& g = doc.at("geometry");
    bsd.geom.a = g.at("a").get<double>();
    bsd.geom.b = g.at("b").get<double>();
    bsd.geom.quad_nx1 = g.at("quad_nx1").get<int>();
    bsd.geom.quad_nx2 = g.at("quad_nx2").get<int>();
    bsd.geom.quad_n3 = g.at("quad_n3").get<int>();
    bsd.geom.gamma_nt = g.at("gamma_nt").get<int>();
    bsd.geom.gamma_n3 = g.at("gamma_n3").get<int>();
    bsd.theta.theta = doc.at("theta").get<double>();
    bsd.basis_size = doc.at("truncation").at("basis_size").get<int>();
    bsd.k_keep = doc.at("truncation").at("k_keep").get<int>();
    bsd.potential_hash = std::stoull(doc.at("potential_hash").get<std::string>(), nullptr, 16);
    bsd.lambdas = doc.at("eigenvalues").get<std::vector<double>>();
    bsd.gamma = quadrature_grids(bsd.geom).second;

    const auto& psi = doc.at("psi");
    if (static_cast<int>(psi.size()) != bsd.k_keep ||
        static_cast<int>(bsd.lambdas.size()) != bsd.k_keep)
        throw std::runtime_error("bsd_from_json: inconsistent mode count");
    bsd.psi.resize(bsd.gamma.size(), bsd.k_keep);
    for (int k = 0; k < bsd.k_keep; ++k) {
        const auto& col = psi.at(k);
        if (col.size() != bsd.gamma.size())
            throw std::runtime_error("bsd_from_json: psi sample count mismatch");
        for (std::size_t i = 0; i < bsd.gamma.size(); ++i)
            bsd.psi(i, k) = cplx(col.at(i).at(0).get<double>(), col.at(i).at(1).get<double>());
    }
    for (std::size_t k = 1; k < bsd.lambdas.size(); ++k)
        if (bsd.lambdas[k] < bsd.lambdas[k - 1])
            throw std::runtime_error("bsd_from_json: eigenvalues not ascending");
    return bsd;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

std::string reconstruction_csv(const std::vector<ReconstructionResult>& results,
                               const std::string& scenario_hash) {
    std::string csv =
        "xi1,xi2,j,theta,lam_re,lam_im,abs_lam,Sdiff_re,Sdiff_im,Astar_sum,Bstar_sum,"
        "tail_diag,vhat_re,vhat_im,scenario_hash\n";
    const double norm = std::pow(kTwoPi, -1.5);
    for (const auto& r : results) {
        for (const auto& p : r.sweep) {
            csv += fmt_double(r.xi_prime[0]) + "," + fmt_double(r.xi_prime[1]) + "," +
                   std::to_string(r.j_requested) + "," + fmt_double(r.theta) + "," +
                   fmt_double(p.lambda.real()) + "," + fmt_double(p.lambda.imag()) + "," +
                   fmt_double(p.abs_lambda) + "," + fmt_double(p.s_diff.real()) + "," +
                   fmt_double(p.s_diff.imag()) + "," + fmt_double(p.a_star_sum) + "," +
                   fmt_double(p.b_star_sum) + "," + fmt_double(p.tail_diag) + "," +
                   fmt_double(p.s_diff.real() * norm) + "," +
                   fmt_double(p.s_diff.imag() * norm) + "," + scenario_hash + "\n";
        }
    }
    return csv;
}

json reconstruction_to_json(const ReconstructionResult& r) {
    json doc;
    doc["xi_prime"] = {r.xi_prime[0], r.xi_prime[1]};
    doc["j"] = r.j_requested;
    doc["theta"] = r.theta;
    doc["probed_frequency"] = {r.frequency[0], r.frequency[1], r.frequency[2]};
    doc["estimate"] = {r.estimate.real(), r.estimate.imag()};
    doc["vhat"] = {r.vhat.real(), r.vhat.imag()};
    doc["decay_slope"] = r.decay_slope;
    doc["slope_valid"] = r.slope_valid;
    doc["note"] = r.note;
    json sweep = json::array();
    for (const auto& p : r.sweep)
        sweep.push_back({{"param", p.param},
                         {"lambda", {p.lambda.real(), p.lambda.imag()}},
                         {"abs_lambda", p.abs_lambda},
                         {"s_diff", {p.s_diff.real(), p.s_diff.imag()}},
                         {"a_star_sum", p.a_star_sum},
                         {"b_star_sum", p.b_star_sum},
                         {"tail_diag", p.tail_diag}});
    doc["sweep"] = std::move(sweep);
    return doc;
}

std::string plot_script_text() {
    return R"PY(#!/usr/bin/env python3
"""Renders |S_diff| vs |lambda| (log-log) per frequency from a results CSV."""
import csv
import math
import sys

path = sys.argv[1] if len(sys.argv) > 1 else "reconstruction.csv"
rows = []
with open(path) as fh:
    for row in csv.DictReader(r for r in fh if not r.startswith("#")):
        rows.append(row)

by_freq = {}
for r in rows:
    key = (r["xi1"], r["xi2"], r["j"])
    by_freq.setdefault(key, []).append(
        (float(r["abs_lam"]), abs(complex(float(r["Sdiff_re"]), float(r["Sdiff_im"])))))

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots()
    for key, pts in sorted(by_freq.items()):
        pts.sort()
        est = pts[-1][1]
        dev = [(l, abs(v - est)) for l, v in pts[:-1] if abs(v - est) > 0]
        if len(dev) >= 2:
            xs = [math.log(l) for l, _ in dev]
            ys = [math.log(d) for _, d in dev]
            n = len(xs)
            sx, sy = sum(xs), sum(ys)
            sxx = sum(x * x for x in xs)
            sxy = sum(x * y for x, y in zip(xs, ys))
            slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
        else:
            slope = float("nan")
        ax.loglog([l for l, _ in pts], [v for _, v in pts], "o-",
                  label=f"xi'=({key[0]},{key[1]}) j={key[2]} slope={slope:.2f}")
    ax.set_xlabel("|lambda|")
    ax.set_ylabel("|S_diff|")
    ax.legend(fontsize=6)
    fig.savefig(path.replace(".csv", ".png"), dpi=150)
    print("wrote", path.replace(".csv", ".png"))
except ImportError:
    for key, pts in sorted(by_freq.items()):
        pts.sort()
        print("frequency", key)
        for l, v in pts:
            print(f"  |lambda|={l:12.4g}  |S_diff|={v:12.6g}")
)PY";
}

}  // namespace wg
