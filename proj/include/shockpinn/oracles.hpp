#pragma once

// Closed-form reference solutions and gas-dynamics relations.
//
// Angles are radians everywhere in this interface; configuration files and
// reports use degrees and convert at the boundary.

#include "shockpinn/geometry.hpp"
#include "shockpinn/physics.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace shockpinn::oracles {

using physics::PrimitiveState;
using physics::kGammaAir;

double degrees(double radians);
double radians(double degrees);

// --- smooth advected wave ---------------------------------------------------

inline constexpr double kSmoothU = 0.7;
inline constexpr double kSmoothV = 0.3;

PrimitiveState smooth_exact(double x, double y, double t);
/// (d/dx, d/dy, d/dt) of the smooth density.
std::array<double, 3> smooth_density_gradient(double x, double y, double t);

// --- Prandtl-Meyer expansion -------------------------------------------------

double prandtl_meyer_nu(double mach, double gamma = kGammaAir);
double inverse_nu(double nu, double gamma = kGammaAir);
double max_nu(double gamma = kGammaAir);
double mach_angle(double mach);

enum class WallCurve { Tangent, HyperbolicTangent };

struct WedgeGeometry {
    geom::Point corner{0.0, 0.0};
    double theta = radians(10.0);
    WallCurve wall = WallCurve::Tangent;
    double length = 1.0;  ///< domain extends over x in [corner.x, corner.x + length]
    double top = 1.0;     ///< upper edge height

    [[nodiscard]] double wall_slope() const;
    [[nodiscard]] double wall_y(double x) const;
    [[nodiscard]] geom::Region region() const;
    /// Outward unit normal of the wall surface (pointing into the body).
    [[nodiscard]] geom::Point wall_normal() const;
};

struct ExpansionCase {
    WedgeGeometry geometry;
    PrimitiveState inlet{1.23, 678.1, 0.0, 1.01e5};
    double gamma = kGammaAir;

    [[nodiscard]] double inlet_mach() const;
    /// Polar angle (from the corner) of the leading and trailing Mach lines.
    [[nodiscard]] double lead_angle() const;
    [[nodiscard]] double tail_angle() const;
    [[nodiscard]] double downstream_mach() const;
};

/// Dimensional state at `p`. Throws DomainError outside the wedge domain
/// unless `check_domain` is false.
PrimitiveState expansion_exact(const ExpansionCase& c, geom::Point p, bool check_domain = true);

// --- oblique shock -----------------------------------------------------------

struct ShockRatios {
    double beta = 0.0;
    double density = 1.0;
    double pressure = 1.0;
    double temperature = 1.0;
    double downstream_mach = 0.0;
};

/// Maximum flow deflection for an attached shock at `mach`.
double max_deflection(double mach, double gamma = kGammaAir);
/// Weak-branch solution of the theta-beta-M relation and the jump ratios.
ShockRatios oblique_shock_relations(double mach, double theta, double gamma = kGammaAir);
/// (gamma + 1) Mn^2 / ((gamma - 1) Mn^2 + 2).
double normal_shock_density_ratio(double normal_mach, double gamma = kGammaAir);

double sound_speed(const PrimitiveState& w, double gamma = kGammaAir);

struct ObliqueShockCase {
    PrimitiveState pre;
    PrimitiveState post;
    double beta = 0.0;
    double theta = 0.0;
    double mach = 0.0;

    /// Distance to the shock line through the origin; positive on the pre-shock side.
    [[nodiscard]] double signed_distance(geom::Point p) const;
};

/// Pre state flowing along +x, shock through the origin; post state from the jump ratios.
ObliqueShockCase oblique_case_from_pre(const PrimitiveState& pre, double theta, double gamma = kGammaAir);
PrimitiveState oblique_exact(const ObliqueShockCase& c, geom::Point p);

/// Relative jumps (pre - post) / |pre| of the normal fluxes of mass,
/// normal momentum, tangential momentum and energy across a line at angle beta.
struct JumpResiduals {
    std::array<double, 4> relative{};
    [[nodiscard]] double max_abs() const;
};
JumpResiduals verify_rankine_hugoniot(const PrimitiveState& pre, const PrimitiveState& post, double beta,
                                      double gamma = kGammaAir);

enum class VelocityOrder { CosSin, SinCos };
std::string to_string(VelocityOrder order);

/// Post state with speed `speed` split as (cos, sin) or (sin, cos) of theta.
PrimitiveState post_state(double rho, double speed, double p, double theta, VelocityOrder order);

struct OrderingReport {
    VelocityOrder chosen = VelocityOrder::CosSin;
    JumpResiduals cos_sin;
    JumpResiduals sin_cos;
};
/// Evaluates both component orderings against the jump conditions and keeps the better one.
OrderingReport resolve_velocity_order(const PrimitiveState& pre, double rho, double speed, double p, double theta,
                                      double beta, double gamma = kGammaAir);

/// Tabulated oblique-shock states at theta = 10 degrees (SI units).
inline constexpr PrimitiveState kObliquePre{0.06688, 738.2, 0.0, 9485.0};
inline constexpr double kObliquePostDensity = 0.09515;
inline constexpr double kObliquePostSpeed = 635.9;
inline constexpr double kObliquePostPressure = 1.5e4;

// --- external reference fields ----------------------------------------------

enum class Units { SI, Nondimensional };
enum class FieldSource { Analytic, ExternalFile };

class ReferenceField {
public:
    ReferenceField() = default;
    ReferenceField(std::vector<geom::Point> points, std::vector<PrimitiveState> states, Units units,
                   FieldSource source);

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] const std::vector<geom::Point>& points() const noexcept { return points_; }
    [[nodiscard]] const std::vector<PrimitiveState>& states() const noexcept { return states_; }
    [[nodiscard]] Units units() const noexcept { return units_; }
    [[nodiscard]] FieldSource source() const noexcept { return source_; }
    [[nodiscard]] bool is_lattice() const noexcept { return !xs_.empty(); }

    /// Bilinear interpolation on the lattice. Cells with missing corners use
    /// the normalized weights of the corners that exist.
    [[nodiscard]] PrimitiveState interpolate(geom::Point p) const;
    /// Density gradient from nodal central differences, bilinearly interpolated.
    [[nodiscard]] std::array<double, 2> density_gradient(geom::Point p) const;

    /// Rescales every state (and leaves coordinates alone).
    [[nodiscard]] ReferenceField nondimensionalized(const physics::ReferenceScales& scales) const;

private:
    void build_lattice();
    [[nodiscard]] long node(std::size_t i, std::size_t j) const;
    template <class F>
    auto blend(geom::Point p, F&& value_at) const;

    std::vector<geom::Point> points_;
    std::vector<PrimitiveState> states_;
    Units units_ = Units::SI;
    FieldSource source_ = FieldSource::ExternalFile;
    std::vector<double> xs_, ys_;
    std::vector<long> index_;                   // xs_.size() * ys_.size(), -1 for missing nodes
    std::vector<std::array<double, 2>> grad_;   // nodal density gradient
};

/// Reads `x,y,rho,u,v,p` CSV with an optional `# units: SI|nondim` line.
/// When `domain` is given every point must lie inside it.
ReferenceField load_reference_field(const std::filesystem::path& path, const std::string& format = "csv",
                                    const std::optional<geom::Region>& domain = std::nullopt);
void save_reference_field(const std::filesystem::path& path, const ReferenceField& field);

}  // namespace shockpinn::oracles
