#pragma once

#include "shockpinn/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace shockpinn::sampling {

enum class Role { Residual, GradientData, Inflow, WallPressure, Interface, WallSlip };

std::string to_string(Role role);
Role parse_role(const std::string& name);
/// Number of target components a role carries: 0, 2, 4, 1, 0, 0.
std::size_t target_width(Role role);

/// Tagged collocation points. Coordinates are columns (x, y[, t]).
struct PointSet {
    Role role = Role::Residual;
    Eigen::MatrixXd coords;   ///< dimension x N
    Eigen::MatrixXd targets;  ///< target_width(role) x N
    Eigen::MatrixXd normals;  ///< 2 x N for wall-slip sets, empty otherwise
    std::uint64_t seed = 0;
    std::string method;       ///< "analytic", "fd", "grid", "uniform", "even", "file", ...

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(coords.cols()); }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(coords.rows()); }
    [[nodiscard]] geom::Point point(std::size_t i) const;
    [[nodiscard]] double time(std::size_t i) const;
    /// Throws ContractError if the target or normal shapes disagree with the role.
    void validate() const;
    /// Subset by column indices, preserving order.
    [[nodiscard]] PointSet select(const std::vector<std::size_t>& columns) const;
};

enum class Strategy { Uniform, Grid };
Strategy parse_strategy(const std::string& name);

/// Uniform random or grid (cell-centre) points strictly inside `region`. For
/// regions with a time interval, t is drawn uniformly (or gridded) as well.
PointSet sample_domain(const geom::Region& region, std::size_t count, std::uint64_t seed,
                       Strategy strategy = Strategy::Uniform, Role role = Role::Residual);

using ScalarField = std::function<double(double x, double y, double t)>;
using GradientField = std::function<std::array<double, 2>(double x, double y, double t)>;

enum class GradientMethod { Analytic, FiniteDifference };

struct SchlierenSpec {
    ScalarField density;                 ///< used by the finite-difference method
    GradientField analytic;              ///< used by the analytic method
    GradientMethod method = GradientMethod::Analytic;
    double h = 1e-3;
    /// Signed distance to a known discontinuity. Stencils that would cross it
    /// are replaced by one-sided second-order differences on the point's side.
    std::function<double(geom::Point)> discontinuity;
};

/// Fills density-gradient targets at the given locations.
PointSet synth_schlieren(const SchlierenSpec& spec, PointSet locations);
PointSet synth_schlieren(const SchlierenSpec& spec, const geom::Region& region, std::size_t count, std::uint64_t seed,
                         Strategy strategy = Strategy::Uniform);

struct BoundarySpec {
    Role role = Role::Inflow;
    /// Target vector at a boundary point (size must match the role).
    std::function<std::vector<double>(geom::Point, double t)> targets;
    /// Unit normal at a boundary point; required for wall-slip sets.
    std::function<geom::Point(geom::Point)> normal;
    std::optional<geom::TimeInterval> time;
    /// When set, every point must lie in the closure of this region.
    std::optional<geom::Region> domain;
};

/// Uniformly random points along the curve by arclength.
PointSet sample_boundary(const geom::Curve& curve, std::size_t count, std::uint64_t seed, const BoundarySpec& spec);

/// Evenly spaced points by arclength, ends included. With a time interval the
/// time coordinates follow a base-2 van der Corput sequence.
PointSet sample_interface(const geom::Curve& curve, std::size_t count,
                          std::optional<geom::TimeInterval> time = std::nullopt);

/// Adds independent Gaussian noise with standard deviation `sigma` to every target.
void add_noise(PointSet& set, double sigma, std::uint64_t seed);

/// Concatenates sets of the same role and dimension.
PointSet concatenate(const std::vector<PointSet>& sets);

// CSV with columns role,x,y,t,c0,c1,c2,c3,nx,ny; unused cells are empty.
void write_point_sets(const std::filesystem::path& path, const std::vector<PointSet>& sets);
std::vector<PointSet> read_point_sets(const std::filesystem::path& path);

}  // namespace shockpinn::sampling
