#pragma once

// Compressible Euler algebra for a polytropic gas: state conversions, fluxes,
// the (eta, phi) entropy pair and PDE residuals assembled from primitive
// fields that carry input tangents.
//
// Tangent directions are ordered (x, y[, t]).

#include "shockpinn/autodiff.hpp"
#include "shockpinn/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace shockpinn::physics {

inline constexpr double kGammaAir = 1.4;

struct PrimitiveState {
    double rho = 0.0;
    double u = 0.0;
    double v = 0.0;
    double p = 0.0;

    [[nodiscard]] bool admissible() const noexcept {
        return std::isfinite(rho) && std::isfinite(u) && std::isfinite(v) && std::isfinite(p) && rho > 0.0 && p > 0.0;
    }
    [[nodiscard]] double operator[](std::size_t i) const noexcept {
        return i == 0 ? rho : i == 1 ? u : i == 2 ? v : p;
    }
    friend bool operator==(const PrimitiveState&, const PrimitiveState&) = default;
};

/// U = (rho, rho u, rho v, rho E).
struct ConservedState {
    double rho = 0.0;
    double rho_u = 0.0;
    double rho_v = 0.0;
    double rho_E = 0.0;
};

struct Flux {
    std::array<double, 4> g1{};
    std::array<double, 4> g2{};
};

struct EntropyPair {
    double eta = 0.0;
    std::array<double, 2> phi{};
};

/// Scales for the non-dimensional form; pressure scale is rho_ref * velocity_ref^2.
struct ReferenceScales {
    double rho = 1.0;
    double velocity = 1.0;
    double length = 1.0;
    [[nodiscard]] double pressure() const noexcept { return rho * velocity * velocity; }
};

enum class EntropyMode { Relu, Squared };

EntropyMode parse_entropy_mode(const std::string& name);
std::string to_string(EntropyMode mode);

/// p = (gamma - 1)(rho E - rho |u|^2 / 2).
double eos_pressure(const ConservedState& U, double gamma = kGammaAir);
/// rho E = p / (gamma - 1) + rho |u|^2 / 2.
double eos_energy(const PrimitiveState& W, double gamma = kGammaAir);

ConservedState to_conserved(const PrimitiveState& W, double gamma = kGammaAir);
PrimitiveState to_primitive(const ConservedState& U, double gamma = kGammaAir);

Flux flux(const ConservedState& U, double gamma = kGammaAir);
Flux flux(const PrimitiveState& W, double gamma = kGammaAir);

/// s = log(p / rho^gamma).
double specific_entropy(const PrimitiveState& W, double gamma = kGammaAir);
/// eta = -rho s / (gamma - 1), phi = (u, v) eta.
EntropyPair entropy_pair(const PrimitiveState& W, double gamma = kGammaAir);

PrimitiveState nondimensionalize(const PrimitiveState& W, const ReferenceScales& scales);
PrimitiveState redimensionalize(const PrimitiveState& W, const ReferenceScales& scales);

// ---------------------------------------------------------------------------
// Templated kernels. T is double, ad::ForwardGrad<N> or ad::Var.

/// Primitive variables, each carrying tangents in the input directions.
template <class T>
struct PrimitiveJet {
    ad::BasicDual<T> rho, u, v, p;

    [[nodiscard]] const ad::BasicDual<T>& operator[](std::size_t i) const {
        return i == 0 ? rho : i == 1 ? u : i == 2 ? v : p;
    }
    [[nodiscard]] ad::BasicDual<T>& operator[](std::size_t i) {
        return i == 0 ? rho : i == 1 ? u : i == 2 ? v : p;
    }
};

namespace detail {
template <class T>
void require_directions(const PrimitiveJet<T>& q, std::size_t needed) {
    for (std::size_t i = 0; i < 4; ++i)
        if (q[i].width < needed) throw ContractError("residual needs tangents in every input direction");
}
}  // namespace detail

/// Conserved fluxes G1, G2 of a primitive state, generic in the scalar.
template <class S>
void flux_components(const S& rho, const S& u, const S& v, const S& p, double gamma,
                     std::array<S, 4>& g1, std::array<S, 4>& g2) {
    const S ke = 0.5 * (rho * (u * u + v * v));
    const S rhoE = p * (1.0 / (gamma - 1.0)) + ke;
    const S enthalpy = rhoE + p;
    const S rho_u = rho * u;
    const S rho_v = rho * v;
    g1 = {rho_u, p + rho_u * u, rho_u * v, u * enthalpy};
    g2 = {rho_v, rho_u * v, p + rho_v * v, v * enthalpy};
}

/// G(U) . n for a primitive state.
template <class S>
std::array<S, 4> normal_flux(const S& rho, const S& u, const S& v, const S& p, double nx, double ny,
                             double gamma) {
    std::array<S, 4> g1, g2;
    flux_components(rho, u, v, p, gamma, g1, g2);
    return {g1[0] * nx + g2[0] * ny, g1[1] * nx + g2[1] * ny, g1[2] * nx + g2[2] * ny,
            g1[3] * nx + g2[3] * ny};
}

/// d/dx G1 + d/dy G2 for (mass, x-momentum, y-momentum, energy).
template <class T>
std::array<T, 4> steady_residual(const PrimitiveJet<T>& q, double gamma = kGammaAir) {
    detail::require_directions(q, 2);
    std::array<ad::BasicDual<T>, 4> g1, g2;
    flux_components(q.rho, q.u, q.v, q.p, gamma, g1, g2);
    std::array<T, 4> r;
    for (std::size_t k = 0; k < 4; ++k) r[k] = g1[k].tangent[0] + g2[k].tangent[1];
    return r;
}

/// d/dt U + d/dx G1 + d/dy G2; the third tangent direction is time.
template <class T>
std::array<T, 4> unsteady_residual(const PrimitiveJet<T>& q, double gamma = kGammaAir) {
    detail::require_directions(q, 3);
    std::array<ad::BasicDual<T>, 4> g1, g2;
    flux_components(q.rho, q.u, q.v, q.p, gamma, g1, g2);
    const auto rho_u = q.rho * q.u;
    const auto rho_v = q.rho * q.v;
    const auto rhoE = q.p * (1.0 / (gamma - 1.0)) + 0.5 * (q.rho * (q.u * q.u + q.v * q.v));
    const std::array<const ad::BasicDual<T>*, 4> U{&q.rho, &rho_u, &rho_v, &rhoE};
    std::array<T, 4> r;
    for (std::size_t k = 0; k < 4; ++k) r[k] = U[k]->tangent[2] + g1[k].tangent[0] + g2[k].tangent[1];
    return r;
}

/// (eta_t +) d/dx phi1 + d/dy phi2; admissible solutions make this <= 0.
template <class T>
T entropy_divergence(const PrimitiveJet<T>& q, bool unsteady, double gamma = kGammaAir) {
    detail::require_directions(q, unsteady ? 3 : 2);
    using ad::log;
    using std::log;
    const auto s = log(q.p) - gamma * log(q.rho);
    const auto eta = -(q.rho * s) * (1.0 / (gamma - 1.0));
    const auto phi1 = q.u * eta;
    const auto phi2 = q.v * eta;
    T div = phi1.tangent[0] + phi2.tangent[1];
    if (unsteady) div = div + eta.tangent[2];
    return div;
}

/// Relu mode: max(0, div phi). Squared mode: -div phi + epsilon.
template <class T>
T entropy_residual(const PrimitiveJet<T>& q, EntropyMode mode, double epsilon, bool unsteady = false,
                   double gamma = kGammaAir) {
    using ad::max_with;
    const T div = entropy_divergence(q, unsteady, gamma);
    if (mode == EntropyMode::Relu) return max_with(div, 0.0);
    return epsilon - div;
}

}  // namespace shockpinn::physics
