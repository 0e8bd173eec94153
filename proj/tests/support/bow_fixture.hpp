#pragma once

// Synthetic bow-shock reference field for pipeline tests.
//
// Upstream of a shock-fitted curve the state is the freestream. Behind it the
// state follows the normal-shock jump of the local shock inclination, and the
// velocity is blended towards the cylinder tangent so that it has no normal
// component on the wall. This is a plausible field, not a flow solution.

#include "shockpinn/experiment.hpp"

#include <filesystem>

namespace fixture {

/// Writes an SI-unit CSV lattice covering the bow domain of `config` with
/// spacing `h`, nodes inside the cylinder omitted. Returns the number of rows.
std::size_t write_bow_reference(const std::filesystem::path& path, const shockpinn::exp::ExperimentConfig& config,
                                double h = 0.02);

/// State of the synthetic field at a point (SI units).
shockpinn::physics::PrimitiveState bow_state(const shockpinn::exp::ExperimentConfig& config, double x, double y);

}  // namespace fixture
