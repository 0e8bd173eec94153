#pragma once

// Non-overlapping subdomains separated by ordered, non-crossing cut curves.
// Subdomain q is the set of domain points on the positive (left) side of
// exactly q cuts; the cuts must be ordered so that this count is monotone.

#include "shockpinn/geometry.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace shockpinn::decomp {

inline constexpr double kInterfaceTolerance = 1e-12;

struct SubdomainSpec {
    std::size_t id = 0;
    /// Hidden-layer sizes override; empty means the experiment default.
    std::vector<std::size_t> hidden_override;
    /// Residual-point count override; 0 means proportional to area.
    std::size_t residual_points = 0;
};

struct InterfaceSpec {
    std::size_t a = 0;  ///< subdomain on the non-positive side
    std::size_t b = 1;  ///< subdomain on the positive side
    geom::Curve curve;  ///< portion of the cut inside the domain
    std::size_t points = 0;
    bool average = true;
    bool residual = true;
    bool flux = false;
};

struct Location {
    std::vector<std::size_t> owners;  ///< one id inside a subdomain, two on an interface
    [[nodiscard]] bool on_interface() const noexcept { return owners.size() > 1; }
};

class Decomposition {
public:
    Decomposition() = default;
    Decomposition(geom::Region domain, std::vector<geom::Curve> cuts, double tolerance = kInterfaceTolerance);

    [[nodiscard]] std::size_t subdomain_count() const noexcept { return cuts_.size() + 1; }
    [[nodiscard]] const geom::Region& domain() const noexcept { return domain_; }
    [[nodiscard]] const std::vector<geom::Curve>& cuts() const noexcept { return cuts_; }
    [[nodiscard]] double tolerance() const noexcept { return tolerance_; }

    /// Throws DomainError for points outside the closure of the domain.
    [[nodiscard]] Location locate(geom::Point p) const;
    /// Same as locate but without the domain test (for boundary quadrature).
    [[nodiscard]] Location classify(geom::Point p) const;

private:
    geom::Region domain_;
    std::vector<geom::Curve> cuts_;
    double tolerance_ = kInterfaceTolerance;
};

/// Part of `cut` lying inside the closure of `domain`, as a polyline resampled
/// with `resolution` points per original piece.
geom::Curve clip_to_domain(const geom::Curve& cut, const geom::Region& domain, std::size_t resolution = 400);

struct DecompositionLayout {
    Decomposition decomposition;
    std::vector<SubdomainSpec> subdomains;
    std::vector<InterfaceSpec> interfaces;
};

}  // namespace shockpinn::decomp
