#pragma once

#include <filesystem>
#include <vector>

namespace shockpinn::plot {

/// Writes SVG figures for a finished run: one field figure per evaluation time
/// (rows rho, u, v, p; columns predicted, reference, absolute error), the loss
/// history on a log scale, and the loss-weight trajectories. Returns the files
/// written. Throws AnalysisError when the run's CSV files are missing or malformed.
std::vector<std::filesystem::path> plot_run(const std::filesystem::path& run_dir,
                                            const std::filesystem::path& out_dir);

}  // namespace shockpinn::plot
