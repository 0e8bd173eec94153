#pragma once

#include "shockpinn/geometry.hpp"
#include "shockpinn/network.hpp"
#include "shockpinn/physics.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shockpinn::analysis {

using physics::PrimitiveState;

inline constexpr std::array<const char*, 4> kVariables{"rho", "u", "v", "p"};

/// ||pred - ref||_2 / ||ref||_2. Throws AnalysisError for a zero reference
/// norm or mismatched sizes.
double relative_l2(std::span<const double> predicted, std::span<const double> reference);

/// Uniform nx-by-ny lattice over the region's bounding box, keeping nodes in
/// the closure of the region. Columns are (x, y) or (x, y, t).
struct EvaluationGrid {
    Eigen::MatrixXd points;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::optional<double> time;
};
EvaluationGrid make_grid(const geom::Region& region, std::size_t nx = 200, std::size_t ny = 200,
                         std::optional<double> time = std::nullopt);

using FieldFunction = std::function<PrimitiveState(std::span<const double> point)>;

struct FieldSample {
    std::array<double, 3> x{};  ///< x, y, t (t = 0 for steady fields)
    PrimitiveState predicted;
    PrimitiveState reference;
};

struct ErrorReport {
    std::string experiment;
    std::string method;  ///< "PINN" or "XPINN"
    bool adaptive_activation = false;
    bool dynamic_weights = false;
    std::array<double, 4> relative_l2{};
    std::optional<std::array<double, 4>> interface_jump;
    std::vector<FieldSample> samples;
};

/// Relative L2 errors pooled over all grids, with the pointwise samples kept.
ErrorReport error_report(const FieldFunction& predicted, const FieldFunction& reference,
                         std::span<const EvaluationGrid> grids, std::size_t threads = 1);

/// Max over interface points of |xi_a - xi_b| per primitive. Nothing for a single network.
std::optional<std::array<double, 4>> interface_jump(std::span<const nn::NetworkParams> subnets, std::size_t a,
                                                    std::size_t b, const Eigen::MatrixXd& points);

enum class NormKind { Spectral, Frobenius };
std::string to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& name);

/// Product over layers of ||W^k|| in the chosen norm.
double complexity_measure(const nn::NetworkParams& net, NormKind kind = NormKind::Spectral);

struct ComplexityRow {
    std::string label;
    double measure = 0.0;
    double percent = 0.0;
};

struct ComplexityReport {
    NormKind kind = NormKind::Spectral;
    std::vector<ComplexityRow> rows;  ///< first row is the PINN baseline
    /// Sum of subnet measures relative to the baseline, in percent.
    std::optional<double> combined_percent;
};

ComplexityReport complexity_norms(const nn::NetworkParams& baseline, std::span<const nn::NetworkParams> subnets,
                                  NormKind kind = NormKind::Spectral);

/// Columns: x,y,t,var,predicted,reference,abs_error,rel_error.
void write_field_csv(const std::filesystem::path& path, const ErrorReport& report);

}  // namespace shockpinn::analysis
