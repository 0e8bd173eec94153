#pragma once

// End-to-end runs: generate data, train, analyze and write a run directory.
//
// A run directory holds config.json, points.csv, loss_history.csv,
// checkpoints/, fields.csv and summary.json.

#include "shockpinn/analysis.hpp"
#include "shockpinn/experiment.hpp"
#include "shockpinn/optimize.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace shockpinn::run {

/// Post-shock plateau and slice checks for the oblique experiment.
struct ObliqueDiagnostics {
    physics::PrimitiveState plateau;   ///< mean prediction over the downstream zone
    physics::PrimitiveState expected;  ///< nondimensional post state
    std::array<double, 4> plateau_relative{};
    std::size_t plateau_points = 0;
    struct Slice {
        double x = 0.0;
        double drop = 0.0;         ///< rho(bottom) - rho(top)
        double max_rise = 0.0;     ///< largest increase of rho with y
        bool monotone = false;
    };
    std::vector<Slice> slices;
};

/// Plateau zone: signed distance below -`margin`. Slices run bottom to top with
/// `samples` points; a slice is monotone when no rise exceeds 5% of the exact
/// density jump and the total drop is at least half of it.
ObliqueDiagnostics oblique_diagnostics(const exp::Setup& setup, const analysis::FieldFunction& predicted,
                                       double margin = 0.15, std::size_t samples = 201);

/// RMS of n . u over the wall points, divided by the freestream speed.
double wall_slip_rms(const exp::Setup& setup, const analysis::FieldFunction& predicted);

struct RunReport {
    exp::ExperimentConfig config;
    std::string config_hash;
    std::filesystem::path directory;
    std::shared_ptr<const exp::Setup> setup;
    std::vector<nn::NetworkParams> nets;  ///< best-so-far parameters
    opt::TrainResult training;
    analysis::ErrorReport errors;
    std::optional<std::array<double, 4>> interface_jump;
    std::optional<double> wall_slip;
    std::optional<ObliqueDiagnostics> oblique;
    double wall_seconds = 0.0;
};

std::string method_label(const exp::ExperimentConfig& c);

/// Runs the experiment into `directory` (created if missing). Errors carry the
/// phase name ("generate", "train", "analyze", "emit") and keep their type.
RunReport run(const exp::ExperimentConfig& config, const std::filesystem::path& directory,
              std::ostream* log = nullptr);

/// Summary document written to summary.json.
exp::json summary_json(const RunReport& report);

struct ComparisonColumn {
    std::string label;
    std::filesystem::path directory;
    std::array<double, 4> relative_l2{};
};

struct Comparison {
    std::string experiment;
    std::vector<ComparisonColumn> columns;
    std::optional<analysis::ComplexityReport> norms;
    std::string norms_source;  ///< which runs produced the norms rows
};

/// Reads the summaries (and checkpoints, for the norms report) of finished runs.
/// Throws AnalysisError when the runs differ in experiment or evaluation grid.
Comparison compare(const std::vector<std::filesystem::path>& run_dirs);
void print_comparison(std::ostream& out, const Comparison& c);

}  // namespace shockpinn::run
