#pragma once

// PINN and XPINN objectives assembled from tagged point sets.
//
// Every component is a mean of squares over its point set. Components are
// grouped; each group carries one weight, and the total is the weighted sum.
// Gradients are accumulated per fixed-size chunk and reduced in a fixed order,
// so results do not depend on the number of threads.

#include "shockpinn/decomposition.hpp"
#include "shockpinn/network.hpp"
#include "shockpinn/physics.hpp"
#include "shockpinn/sampling.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shockpinn::loss {

enum class Component : std::size_t {
    FMass, FMomentumX, FMomentumY, FEnergy, Entropy,
    GradRho, Inflow, PStar,
    GlobalMass, GlobalMomentum, GlobalEnergy,
    WallSlip,
    InterfaceAverage, InterfaceResidual, InterfaceFlux,
};
inline constexpr std::size_t kComponentCount = 15;

enum class Group : std::size_t {
    Residual, Gradient, Inflow, Pressure, Global, WallSlip, InterfaceAverage, InterfaceResidual, InterfaceFlux,
};
inline constexpr std::size_t kGroupCount = 9;

const char* name(Component c);
const char* name(Group g);
Group group_of(Component c);

constexpr std::size_t index(Component c) { return static_cast<std::size_t>(c); }
constexpr std::size_t index(Group g) { return static_cast<std::size_t>(g); }

struct Weights {
    std::array<double, kGroupCount> w{1, 1, 1, 1, 1, 1, 1, 1, 1};
    [[nodiscard]] double operator[](Group g) const { return w[index(g)]; }
    double& operator[](Group g) { return w[index(g)]; }
};

struct LossBreakdown {
    std::array<double, kComponentCount> value{};
    std::array<bool, kComponentCount> active{};
    double total = 0.0;

    [[nodiscard]] double operator[](Component c) const { return value[index(c)]; }
    /// Sum of the Euler residual components plus the entropy term.
    [[nodiscard]] double residual() const;
    /// Sum of all active components with unit weights.
    [[nodiscard]] double unweighted() const;
    void recompute_total(const Weights& weights);
};

struct TermOptions {
    bool unsteady = false;
    bool entropy = true;
    physics::EntropyMode entropy_mode = physics::EntropyMode::Relu;
    double epsilon = 1e-4;
    double gamma = physics::kGammaAir;
    std::size_t chunk = 256;
    std::size_t threads = 1;
    /// Roles every subdomain data set must provide.
    std::vector<sampling::Role> required_roles;
};

/// Point sets of one subdomain; at most one set per role.
struct SubdomainData {
    std::vector<sampling::PointSet> sets;
    [[nodiscard]] const sampling::PointSet* find(sampling::Role role) const;
};

struct InterfaceData {
    std::size_t a = 0;
    std::size_t b = 1;
    sampling::PointSet points;
    Eigen::MatrixXd normals;  ///< 2 x N unit normals, used by flux continuity
    bool average = true;
    bool residual = true;
    bool flux = false;
};

/// Closed boundary loop quadrature; `owners` resolves which subnets predict at each node.
struct GlobalQuadrature {
    Eigen::MatrixXd points;   ///< 2 x N
    Eigen::MatrixXd normals;  ///< 2 x N outward unit normals
    Eigen::VectorXd weights;  ///< arclength weights
    std::vector<decomp::Location> owners;
};

/// Throws ConfigError when the curve is not closed.
GlobalQuadrature make_global_quadrature(const geom::Curve& loop, std::size_t panels, std::size_t order,
                                        const decomp::Decomposition* decomposition = nullptr);

struct Evaluation {
    double total = 0.0;
    std::vector<LossBreakdown> subdomains;
    /// Conservation terms of the stitched predictor (XPINN with several subnets).
    LossBreakdown global;
    std::vector<double> gradient;
    /// Unweighted gradient of each group's components.
    std::array<std::vector<double>, kGroupCount> group_gradient;

    /// Component-wise sum of all breakdowns.
    [[nodiscard]] LossBreakdown combined() const;
};

/// Full problem description for joint evaluation of one or more subnets.
struct Problem {
    std::vector<nn::NetworkParams> nets;  ///< architectures; values are ignored by evaluate
    std::vector<SubdomainData> subdomains;
    std::vector<InterfaceData> interfaces;
    std::optional<GlobalQuadrature> quadrature;
    TermOptions options;
    bool xpinn = false;

    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] std::size_t offset(std::size_t net) const;
    /// Concatenated parameter vector of all nets.
    [[nodiscard]] std::vector<double> pack() const;
    void unpack(std::span<const double> theta);
    /// 1 for trainable entries of the concatenated vector.
    [[nodiscard]] std::vector<double> trainable_mask() const;
    void validate() const;
};

Evaluation evaluate(const Problem& problem, std::span<const double> theta, const Weights& weights,
                    bool want_gradient);

Evaluation pinn_loss(const nn::NetworkParams& params, const SubdomainData& data,
                     const std::optional<GlobalQuadrature>& quadrature, const TermOptions& options,
                     const Weights& weights = {}, bool want_gradient = false);

Evaluation xpinn_loss(std::span<const nn::NetworkParams> subnets, std::span<const SubdomainData> data,
                      std::span<const InterfaceData> interfaces, const std::optional<GlobalQuadrature>& quadrature,
                      const TermOptions& options, const Weights& weights = {}, bool want_gradient = false);

// --- dynamic weights ---------------------------------------------------------

struct DynamicWeights {
    Weights weights;
    double lambda = 0.1;
    std::size_t period = 10;
    /// Groups whose weights adapt; the residual group is always fixed at 1.
    std::vector<Group> adaptive;
};

struct WeightUpdate {
    DynamicWeights next;
    std::vector<Group> skipped;  ///< zero denominator, left unchanged
};

/// omega_hat = max|grad residual| / mean|grad(omega_i * MSE_i)|;
/// omega <- (1 - lambda) omega + lambda omega_hat.
WeightUpdate update_dynamic_weights(const DynamicWeights& current,
                                    const std::array<std::vector<double>, kGroupCount>& group_gradient);

}  // namespace shockpinn::loss
