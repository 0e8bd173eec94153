#include "shockpinn/physics.hpp"

namespace shockpinn::physics {

EntropyMode parse_entropy_mode(const std::string& name) {
    if (name == "relu") return EntropyMode::Relu;
    if (name == "squared") return EntropyMode::Squared;
    throw ConfigError("unknown entropy mode '" + name + "' (expected relu or squared)");
}

std::string to_string(EntropyMode mode) { return mode == EntropyMode::Relu ? "relu" : "squared"; }

double eos_pressure(const ConservedState& U, double gamma) {
    if (!(U.rho > 0.0)) throw DomainError("equation of state needs positive density");
    const double ke = 0.5 * (U.rho_u * U.rho_u + U.rho_v * U.rho_v) / U.rho;
    return (gamma - 1.0) * (U.rho_E - ke);
}

double eos_energy(const PrimitiveState& W, double gamma) {
    if (!(W.rho > 0.0)) throw DomainError("equation of state needs positive density");
    return W.p / (gamma - 1.0) + 0.5 * W.rho * (W.u * W.u + W.v * W.v);
}

ConservedState to_conserved(const PrimitiveState& W, double gamma) {
    return {W.rho, W.rho * W.u, W.rho * W.v, eos_energy(W, gamma)};
}

PrimitiveState to_primitive(const ConservedState& U, double gamma) {
    const double p = eos_pressure(U, gamma);
    return {U.rho, U.rho_u / U.rho, U.rho_v / U.rho, p};
}

Flux flux(const PrimitiveState& W, double gamma) {
    if (!W.admissible()) throw DomainError("flux of an inadmissible state");
    Flux f;
    flux_components(W.rho, W.u, W.v, W.p, gamma, f.g1, f.g2);
    return f;
}

Flux flux(const ConservedState& U, double gamma) { return flux(to_primitive(U, gamma), gamma); }

double specific_entropy(const PrimitiveState& W, double gamma) {
    if (!W.admissible()) throw DomainError("entropy of an inadmissible state");
    return std::log(W.p) - gamma * std::log(W.rho);
}

EntropyPair entropy_pair(const PrimitiveState& W, double gamma) {
    const double eta = -W.rho * specific_entropy(W, gamma) / (gamma - 1.0);
    return {eta, {W.u * eta, W.v * eta}};
}

namespace {
void check_scales(const ReferenceScales& s) {
    if (!(s.rho > 0.0 && s.velocity > 0.0 && s.length > 0.0)) throw ContractError("reference scales must be positive");
}
}  // namespace

PrimitiveState nondimensionalize(const PrimitiveState& W, const ReferenceScales& s) {
    check_scales(s);
    return {W.rho / s.rho, W.u / s.velocity, W.v / s.velocity, W.p / s.pressure()};
}

PrimitiveState redimensionalize(const PrimitiveState& W, const ReferenceScales& s) {
    check_scales(s);
    return {W.rho * s.rho, W.u * s.velocity, W.v * s.velocity, W.p * s.pressure()};
}

}  // namespace shockpinn::physics
