#include "bow_fixture.hpp"

#include "shockpinn/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fixture {

using shockpinn::geom::Point;
using shockpinn::physics::PrimitiveState;

namespace {

constexpr double kBlendDepth = 0.3;

shockpinn::exp::BowShockShape shape_of(const shockpinn::exp::ExperimentConfig& c) {
    const double mach = std::hypot(c.inlet.u, c.inlet.v) / shockpinn::oracles::sound_speed(c.inlet);
    return {c.geometry.radius, mach};
}

}  // namespace

PrimitiveState bow_state(const shockpinn::exp::ExperimentConfig& c, double x, double y) {
    const auto shape = shape_of(c);
    const PrimitiveState inf = c.inlet;
    if (x < shape.x_at(y)) return inf;

    const double gamma = shockpinn::physics::kGammaAir;
    const double dy = 1e-6;
    const double slope = (shape.x_at(y + dy) - shape.x_at(y - dy)) / (2.0 * dy);
    // Shock normal pointing downstream.
    Point n{1.0, -slope};
    n = (1.0 / shockpinn::geom::norm(n)) * n;
    const Point vel{inf.u, inf.v};
    const double vn = shockpinn::geom::dot(vel, n);
    const Point vt = vel - vn * n;

    const double mn = std::max(1.0, vn / shockpinn::oracles::sound_speed(inf));
    const double density_ratio = shockpinn::oracles::normal_shock_density_ratio(mn, gamma);
    const double pressure_ratio = 1.0 + 2.0 * gamma / (gamma + 1.0) * (mn * mn - 1.0);
    Point post = vt + (vn / density_ratio) * n;

    const double r = std::hypot(x, y);
    const Point er{x / r, y / r};
    const Point tangential = post - shockpinn::geom::dot(post, er) * er;
    const double w = std::clamp((r - c.geometry.radius) / kBlendDepth, 0.0, 1.0);
    post = w * post + (1.0 - w) * tangential;
    return {inf.rho * density_ratio, post.x, post.y, inf.p * pressure_ratio};
}

std::size_t write_bow_reference(const std::filesystem::path& path, const shockpinn::exp::ExperimentConfig& c,
                                double h) {
    const auto& b = c.geometry.box;
    const auto nx = static_cast<std::size_t>(std::llround(b.width() / h));
    const auto ny = static_cast<std::size_t>(std::llround(b.height() / h));
    std::vector<Point> points;
    std::vector<PrimitiveState> states;
    for (std::size_t j = 0; j <= ny; ++j) {
        for (std::size_t i = 0; i <= nx; ++i) {
            const double x = b.xmin + b.width() * static_cast<double>(i) / static_cast<double>(nx);
            const double y = b.ymin + b.height() * static_cast<double>(j) / static_cast<double>(ny);
            if (std::hypot(x, y) <= c.geometry.radius) continue;
            points.push_back({x, y});
            states.push_back(bow_state(c, x, y));
        }
    }
    const std::size_t rows = points.size();
    shockpinn::oracles::save_reference_field(
        path, shockpinn::oracles::ReferenceField(std::move(points), std::move(states), shockpinn::oracles::Units::SI,
                                                 shockpinn::oracles::FieldSource::ExternalFile));
    return rows;
}

}  // namespace fixture
