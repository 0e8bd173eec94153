#pragma once

// Declarative experiment configuration and the assembly of a trainable
// problem (networks, point sets, decomposition, reference field) from it.
//
// Configurations are JSON documents. A document names an experiment; any key
// it omits takes the value of that experiment's built-in preset, and keys
// unknown to the preset are rejected.

#include "shockpinn/analysis.hpp"
#include "shockpinn/decomposition.hpp"
#include "shockpinn/loss.hpp"
#include "shockpinn/optimize.hpp"
#include "shockpinn/oracles.hpp"
#include "shockpinn/sampling.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shockpinn::exp {

using json = nlohmann::ordered_json;

enum class Experiment { Smooth, Expansion, Oblique, Bow };
std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);
inline constexpr std::array<Experiment, 4> kExperiments{Experiment::Smooth, Experiment::Expansion,
                                                        Experiment::Oblique, Experiment::Bow};

struct NetworkConfig {
    std::vector<std::size_t> hidden;
    double scale_n = nn::kDefaultScale;
    bool adaptive = true;
    double alpha_clamp = nn::kDefaultClamp;
    /// Start the output-layer bias at the nondimensional inlet state instead of zero.
    bool inlet_bias = true;
};

struct MethodConfig {
    bool xpinn = false;
    bool dynamic_weights = false;
    bool entropy = true;
    physics::EntropyMode entropy_mode = physics::EntropyMode::Relu;
    double epsilon = 1e-4;
    bool global_conservation = false;
    bool wall_slip = false;
    bool interface_average = true;
    bool interface_residual = true;
    bool flux_continuity = false;
};

struct SamplingConfig {
    std::size_t residual = 0;
    std::size_t gradient = 0;
    std::size_t inflow = 0;
    std::size_t pressure = 0;
    std::size_t wall_slip = 0;
    sampling::Strategy strategy = sampling::Strategy::Uniform;
    sampling::GradientMethod gradient_method = sampling::GradientMethod::Analytic;
    double fd_h = 1e-3;
    /// Keep finite-difference stencils on one side of a known shock line.
    /// When false, stencils may straddle it and the targets show a spike of
    /// height about jump / (2 h).
    bool fd_one_sided = true;
    double noise = 0.0;
    /// Half-width of the gradient-data band around a known shock line.
    double gradient_band = 0.1;
    std::size_t quadrature_panels = 40;
    std::size_t quadrature_order = 4;
};

struct GeometryConfig {
    double theta_deg = 10.0;
    oracles::WallCurve wall = oracles::WallCurve::Tangent;
    geom::Box box;
    /// Gradient-data region D (expansion and bow).
    std::vector<geom::Point> region_d;
    double radius = 0.5;
    geom::Point p_star{0.4, 0.0};
};

struct DecompositionConfig {
    std::size_t interface_points = 200;
    /// Split position: x of the vertical cut (smooth, expansion), half-width of
    /// the shock band (oblique) or upstream offset of the shock-fitted curve (bow).
    double split = 0.5;
};

struct AnalysisConfig {
    std::size_t grid = 200;
    analysis::NormKind norm = analysis::NormKind::Spectral;
    std::vector<double> times;  ///< evaluation times for unsteady experiments
};

struct ExperimentConfig {
    Experiment experiment = Experiment::Smooth;
    std::uint64_t seed = 1234;
    std::size_t threads = 1;
    std::string output = "runs";
    std::size_t checkpoint_every = 1000;
    NetworkConfig network;
    MethodConfig method;
    loss::Weights weights;
    double dw_lambda = 0.1;
    std::size_t dw_period = 10;
    SamplingConfig sampling;
    GeometryConfig geometry;
    physics::PrimitiveState inlet;
    opt::Schedule schedule;
    DecompositionConfig decomposition;
    AnalysisConfig analysis;
    std::string reference_path;
};

/// Configuration key of a loss-weight group ("residual", "grad_rho", ...).
std::string group_key(loss::Group g);

json preset_json(Experiment e);
ExperimentConfig preset(Experiment e);

json to_json(const ExperimentConfig& c);
/// Merges `doc` over the preset named by its "experiment" key, rejects
/// unknown keys and validates ranges. Throws ConfigError.
ExperimentConfig from_json(const json& doc);
ExperimentConfig parse_config(const std::string& text);
/// Loads a preset name or a path to a JSON file.
ExperimentConfig load_config(const std::string& preset_or_path);
/// Applies `dotted.key=value`; the value is parsed as JSON when possible, else taken as a string.
ExperimentConfig apply_override(const ExperimentConfig& c, const std::string& assignment);
std::string serialize(const ExperimentConfig& c);
/// 64-bit FNV-1a of the serialized configuration, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

// --- problem assembly ------------------------------------------------------------

struct Setup {
    ExperimentConfig config;
    physics::ReferenceScales scales;
    geom::Region domain;
    decomp::DecompositionLayout layout;
    loss::Problem problem;
    std::optional<oracles::ExpansionCase> expansion;
    std::optional<oracles::ObliqueShockCase> oblique;
    std::optional<oracles::ReferenceField> reference_field;  ///< nondimensional
    /// Nondimensional reference solution.
    analysis::FieldFunction reference;
    std::vector<analysis::EvaluationGrid> grids;
    /// Wall points with outward body normals (bow), for no-penetration diagnostics.
    sampling::PointSet wall;

    [[nodiscard]] nn::Locator locator() const;
    [[nodiscard]] analysis::FieldFunction predictor(std::span<const nn::NetworkParams> nets) const;
    [[nodiscard]] std::vector<sampling::PointSet> all_point_sets() const;
};

/// Region, scales and decomposition only; no sampling or file access.
decomp::DecompositionLayout build_decomposition(const ExperimentConfig& c);
geom::Region experiment_domain(const ExperimentConfig& c);

/// Throws IngestionError when a required reference file is missing or malformed.
Setup build_setup(const ExperimentConfig& c);

/// Closed counter-clockwise boundary of the domain (steady experiments).
geom::Curve boundary_loop(const ExperimentConfig& c);

/// Shock-fitted curve of the bow experiment: x(y) for a cylinder of radius R in a
/// freestream of Mach M, vertex at x = -R - standoff.
struct BowShockShape {
    double radius = 0.5;
    double mach = 4.0;
    [[nodiscard]] double standoff() const;
    [[nodiscard]] double vertex_radius() const;
    [[nodiscard]] double x_at(double y) const;
};

}  // namespace shockpinn::exp
