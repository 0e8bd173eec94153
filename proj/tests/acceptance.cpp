// Acceptance driver: one PASS/FAIL line per criterion, exit status 0 only when
// every requested criterion passes.

#include "bow_fixture.hpp"

#include "shockpinn/runner.hpp"
#include "shockpinn/selfcheck.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

using namespace shockpinn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(4) << std::scientific << v;
    return s.str();
}

std::string l2_text(const std::array<double, 4>& e) {
    std::string out;
    for (std::size_t k = 0; k < 4; ++k) out += std::string(k ? " " : "") + analysis::kVariables[k] + "=" + fmt(e[k]);
    return out;
}

Outcome from_check(const selfcheck::CheckResult& r) { return {r.passed, r.detail}; }

Outcome both(const Outcome& a, const Outcome& b) { return {a.passed && b.passed, a.detail + "; " + b.detail}; }

run::RunReport run_preset(exp::ExperimentConfig c, const fs::path& dir) {
    c.threads = 1;
    return run::run(c, dir);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome smooth_inverse(const fs::path& work) {
    const auto r = run_preset(exp::preset(exp::Experiment::Smooth), work / "smooth");
    const auto& e = r.errors.relative_l2;
    const bool ok = std::all_of(e.begin(), e.end(), [](double v) { return v <= 5e-2; });
    return {ok && r.wall_seconds <= 900.0, l2_text(e) + " (limit 5e-2), " + fmt(r.wall_seconds) + " s"};
}

Outcome expansion_aa(const fs::path& work) {
    const auto r = run_preset(exp::preset(exp::Experiment::Expansion), work / "expansion-aa");
    const auto& e = r.errors.relative_l2;
    return {e[0] <= 2e-2 && e[3] <= 2e-2, l2_text(e) + " (limit 2e-2 on rho and p)"};
}

Outcome oblique_xpinn(const fs::path& work) {
    const auto r = run_preset(exp::preset(exp::Experiment::Oblique), work / "oblique-xpinn");
    if (!r.oblique) return {false, "no oblique diagnostics"};
    const auto& d = *r.oblique;
    double worst = 0.0;
    for (double v : d.plateau_relative) worst = std::max(worst, v);
    bool monotone = d.slices.size() == 2;
    std::string slices;
    for (const auto& s : d.slices) {
        monotone = monotone && s.monotone;
        slices += " x=" + fmt(s.x) + (s.monotone ? " monotone" : " not monotone") + " (drop " + fmt(s.drop) +
                  ", max rise " + fmt(s.max_rise) + ")";
    }
    return {worst <= 0.05 && monotone,
            "plateau max relative deviation " + fmt(worst) + " over " + std::to_string(d.plateau_points) +
                " points (limit 5e-2);" + slices + "; " + l2_text(r.errors.relative_l2)};
}

Outcome dynamic_weights(const fs::path& work) {
    auto c = exp::apply_override(exp::preset(exp::Experiment::Expansion), "method.dynamic_weights=true");
    const auto r = run_preset(c, work / "expansion-dw");
    std::ifstream in(r.directory / "loss_history.csv");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    for (std::stringstream s(line); std::getline(s, line, ',');) header.push_back(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
    const std::vector<std::string> wanted{"w_grad_rho", "w_inflow", "w_p_star"};
    for (const auto& w : wanted)
        if (!col.count(w)) return {false, "loss history lacks column " + w};
    std::size_t rows = 0;
    double lo = INFINITY, hi = 0.0;
    bool ok = true;
    std::string row;
    while (std::getline(in, row)) {
        std::vector<std::string> cells;
        for (std::stringstream s(row); std::getline(s, line, ',');) cells.push_back(line);
        for (const auto& w : wanted) {
            const double v = std::stod(cells.at(col[w]));
            ok = ok && std::isfinite(v) && v > 0.0;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        ++rows;
    }
    return {ok && rows > 1, std::to_string(rows) + " rows, weights in [" + fmt(lo) + ", " + fmt(hi) + "]; " +
                                l2_text(r.errors.relative_l2)};
}

Outcome interface_quality(const fs::path& work) {
    const auto c = exp::apply_override(exp::preset(exp::Experiment::Smooth), "method.xpinn=true");
    const auto r = run_preset(c, work / "smooth-xpinn");
    if (!r.interface_jump) return {false, "no interface jump reported"};
    const auto& j = *r.interface_jump;
    const double worst = *std::max_element(j.begin(), j.end());
    return {worst <= 1e-2, "max jump " + l2_text(j) + " (limit 1e-2); " + l2_text(r.errors.relative_l2)};
}

Outcome determinism(const fs::path& work) {
    auto c = exp::preset(exp::Experiment::Smooth);
    c = exp::apply_override(c, "schedule.adam.iterations=300");
    c = exp::apply_override(c, "schedule.lbfgs.iterations=100");
    run_preset(c, work / "determinism-a");
    run_preset(c, work / "determinism-b");
    const auto a = slurp(work / "determinism-a" / "loss_history.csv");
    const auto b = slurp(work / "determinism-b" / "loss_history.csv");
    return {!a.empty() && a == b, std::to_string(a.size()) + " and " + std::to_string(b.size()) + " bytes, " +
                                      (a == b ? "identical" : "different")};
}

Outcome bow_pipeline(const fs::path& work) {
    auto c = exp::preset(exp::Experiment::Bow);
    fs::create_directories(work / "bow");
    c.reference_path = (work / "bow" / "reference.csv").string();
    const std::size_t rows = fixture::write_bow_reference(c.reference_path, c);
    const auto r = run_preset(c, work / "bow" / "run");
    const bool fields = fs::exists(r.directory / "fields.csv") && fs::file_size(r.directory / "fields.csv") > 0;
    const double slip = r.wall_slip.value_or(INFINITY);
    return {fields && slip <= 5e-2, std::to_string(rows) + " reference rows, fields.csv " +
                                        (fields ? "written" : "missing") + ", wall slip RMS " + fmt(slip) +
                                        " (limit 5e-2); " + l2_text(r.errors.relative_l2)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app("Acceptance criteria");
    std::vector<int> which;
    std::string work = "acceptance-runs";
    app.add_option("--criterion,-c", which, "Criterion numbers (default: all)");
    app.add_option("--work", work, "Directory for run outputs");
    CLI11_PARSE(app, argc, argv);
    if (which.empty())
        for (int k = 1; k <= 12; ++k) which.push_back(k);

    const fs::path dir(work);
    const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
        {1, {"autodiff gradients", [] { return from_check(selfcheck::autodiff_gradients(7, 50)); }}},
        {2, {"entropy pair identity", [] { return from_check(selfcheck::entropy_pair_identity(11, 100)); }}},
        {3, {"exact-solution residuals", [] {
                 return both(from_check(selfcheck::smooth_exact_residuals(13, 10000)),
                             from_check(selfcheck::expansion_exact_residuals(17, 2000)));
             }}},
        {4, {"oblique tabulated states", [] { return from_check(selfcheck::oblique_tabulated_states()); }}},
        {5, {"smooth inverse problem", [&] { return smooth_inverse(dir); }}},
        {6, {"expansion wave with adaptive activations", [&] { return expansion_aa(dir); }}},
        {7, {"oblique shock with XPINN", [&] { return oblique_xpinn(dir); }}},
        {8, {"single-subdomain equivalence", [] { return from_check(selfcheck::single_subdomain_equivalence(19, 20)); }}},
        {9, {"dynamic weights", [&] { return dynamic_weights(dir); }}},
        {10, {"XPINN interface quality", [&] { return interface_quality(dir); }}},
        {11, {"determinism", [&] { return determinism(dir); }}},
        {12, {"bow shock pipeline", [&] { return bow_pipeline(dir); }}},
    };

    bool all = true;
    for (int k : which) {
        const auto it = criteria.find(k);
        if (it == criteria.end()) {
            std::cerr << "unknown criterion " << k << "\n";
            return 2;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = it->second.second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << std::setw(2) << k << " " << (o.passed ? "PASS" : "FAIL") << "  "
                  << it->second.first << ": " << o.detail << " [" << std::fixed << std::setprecision(1) << secs
                  << " s]" << std::defaultfloat << std::endl;
        all = all && o.passed;
    }
    return all ? 0 : 1;
}
