#include "testing.hpp"

#include "shockpinn/error.hpp"
#include "shockpinn/oracles.hpp"
#include "shockpinn/sampling.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace shockpinn;
using namespace shockpinn::sampling;

namespace {
const geom::Region kUnit(geom::Polygon::rectangle({0, 1, 0, 1}));
}

TEST_SUITE("sampling") {

TEST_CASE("grid strategy returns cell centres") {
    const auto s = sample_domain(kUnit, 4, 0, Strategy::Grid);
    REQUIRE(s.size() == 4);
    std::set<std::pair<double, double>> got;
    for (std::size_t i = 0; i < 4; ++i) got.insert({s.point(i).x, s.point(i).y});
    const std::set<std::pair<double, double>> want{{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
    CHECK(got == want);
}

TEST_CASE("uniform sampling is deterministic and stays inside") {
    const geom::Region holed(geom::Polygon::rectangle({-1, 1, -1, 1}), {geom::Disk{{0, 0}, 0.5}});
    const auto a = sample_domain(holed, 1200, 17);
    const auto b = sample_domain(holed, 1200, 17);
    const auto c = sample_domain(holed, 1200, 18);
    CHECK(a.size() == 1200);
    CHECK(a.coords == b.coords);
    CHECK(a.coords != c.coords);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(holed.contains(a.point(i)));
    CHECK_THROWS_AS(sample_domain(kUnit, 0, 1), ConfigError);
}

TEST_CASE("time-extruded regions sample t as well") {
    const geom::Region slab(geom::Polygon::rectangle({-1, 1, -1, 1}), {}, geom::TimeInterval{0.0, 1.0});
    const auto s = sample_domain(slab, 500, 3);
    CHECK(s.dimension() == 3);
    CHECK(s.coords.row(2).minCoeff() >= 0.0);
    CHECK(s.coords.row(2).maxCoeff() <= 1.0);
}

TEST_CASE("analytic Schlieren targets") {
    SchlierenSpec spec;
    spec.method = GradientMethod::Analytic;
    spec.analytic = [](double x, double y, double t) {
        const auto g = oracles::smooth_density_gradient(x, y, t);
        return std::array<double, 2>{g[0], g[1]};
    };
    PointSet at;
    at.role = Role::GradientData;
    at.coords.resize(3, 1);
    at.coords << 0.25, 0.25, 0.0;
    const auto s = synth_schlieren(spec, at);
    CHECK(s.targets.rows() == 2);
    CHECK(std::abs(s.targets(0, 0)) < 1e-15);
    CHECK(std::abs(s.targets(1, 0)) < 1e-15);
}

TEST_CASE("finite-difference Schlieren targets") {
    SchlierenSpec spec;
    spec.method = GradientMethod::FiniteDifference;
    spec.h = 0.01;

    SUBCASE("constant field gives zero") {
        spec.density = [](double, double, double) { return 0.65; };
        const auto s = synth_schlieren(spec, kUnit, 50, 2);
        CHECK(s.targets.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("linear field is exact") {
        spec.density = [](double x, double, double) { return 2.0 * x; };
        const auto s = synth_schlieren(spec, kUnit, 50, 2);
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(s.targets(0, static_cast<Eigen::Index>(i)) == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(std::abs(s.targets(1, static_cast<Eigen::Index>(i))) < 1e-12);
        }
    }
    SUBCASE("quadratics are exact to rounding") {
        spec.density = [](double x, double y, double) { return 1.0 + 0.3 * x * x - 0.7 * x * y + 0.2 * y * y; };
        const auto s = synth_schlieren(spec, kUnit, 100, 5);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto p = s.point(i);
            CHECK(s.targets(0, static_cast<Eigen::Index>(i)) == doctest::Approx(0.6 * p.x - 0.7 * p.y).scale(1).epsilon(1e-11));
            CHECK(s.targets(1, static_cast<Eigen::Index>(i)) == doctest::Approx(-0.7 * p.x + 0.4 * p.y).scale(1).epsilon(1e-11));
        }
    }
    SUBCASE("stencils do not straddle a known discontinuity") {
        spec.density = [](double x, double, double) { return x < 0.5 ? 1.0 + x : 3.0 + 2.0 * x; };
        spec.discontinuity = [](geom::Point p) { return 0.5 - p.x; };
        PointSet at;
        at.role = Role::GradientData;
        at.coords.resize(2, 2);
        at.coords << 0.495, 0.505, 0.5, 0.5;
        const auto s = synth_schlieren(spec, at);
        CHECK(s.targets(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.targets(0, 1) == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("boundary sampling") {
    SUBCASE("wall-pressure points lie on the wall") {
        const oracles::WedgeGeometry g;
        const auto wall = geom::Curve::segment({0, 0}, {1, g.wall_y(1)});
        BoundarySpec spec;
        spec.role = Role::WallPressure;
        spec.targets = [](geom::Point, double) { return std::vector<double>{0.5}; };
        const auto s = sample_boundary(wall, 50, 9, spec);
        CHECK(s.size() == 50);
        CHECK(s.targets.rows() == 1);
        for (std::size_t i = 0; i < s.size(); ++i)
            CHECK(s.point(i).y == doctest::Approx(g.wall_y(s.point(i).x)).scale(1).epsilon(1e-12));
    }
    SUBCASE("single pressure point") {
        BoundarySpec spec;
        spec.role = Role::WallPressure;
        spec.targets = [](geom::Point, double) { return std::vector<double>{1.0}; };
        CHECK_THROWS(sample_boundary(geom::Curve::segment({0.4, 0.0}, {0.4, 0.0}), 1, 1, spec));
    }
    SUBCASE("wall-slip normals on a circular arc have unit length") {
        const auto arc = geom::Curve::arc({0, 0}, 0.5, 0.5 * std::numbers::pi, 1.5 * std::numbers::pi);
        BoundarySpec spec;
        spec.role = Role::WallSlip;
        spec.normal = [](geom::Point p) { return 2.0 * p; };
        const auto s = sample_boundary(arc, 100, 4, spec);
        CHECK(s.normals.rows() == 2);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            const double phi = std::atan2(s.coords(1, k), s.coords(0, k));
            CHECK(std::hypot(s.normals(0, k), s.normals(1, k)) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(s.normals(0, k) == doctest::Approx(std::cos(phi)).scale(1).epsilon(1e-12));
            CHECK(s.normals(1, k) == doctest::Approx(std::sin(phi)).scale(1).epsilon(1e-12));
        }
    }
    SUBCASE("points outside the declared domain are rejected") {
        BoundarySpec spec;
        spec.role = Role::Inflow;
        spec.targets = [](geom::Point, double) { return std::vector<double>{1, 1, 0, 1}; };
        spec.domain = kUnit;
        CHECK_THROWS_AS(sample_boundary(geom::Curve::segment({2, 0}, {2, 1}), 5, 1, spec), ConfigError);
    }
}

TEST_CASE("interface points are evenly spaced with ends included") {
    const auto s = sample_interface(geom::Curve::segment({0, 0}, {1, 0}), 3);
    REQUIRE(s.size() == 3);
    CHECK(s.point(0).x == 0.0);
    CHECK(s.point(1).x == 0.5);
    CHECK(s.point(2).x == 1.0);
    CHECK(sample_interface(geom::Curve::segment({0, 0}, {0, 1}), 300).size() == 300);
    const auto timed = sample_interface(geom::Curve::segment({0, 0}, {0, 1}), 8, geom::TimeInterval{0, 1});
    CHECK(timed.dimension() == 3);
}

TEST_CASE("roles carry fixed target widths") {
    CHECK(target_width(Role::GradientData) == 2);
    CHECK(target_width(Role::Inflow) == 4);
    CHECK(target_width(Role::WallPressure) == 1);
    CHECK(target_width(Role::Residual) == 0);
    for (Role r : {Role::Residual, Role::GradientData, Role::Inflow, Role::WallPressure, Role::Interface,
                   Role::WallSlip})
        CHECK(parse_role(to_string(r)) == r);
    PointSet bad;
    bad.role = Role::Inflow;
    bad.coords = Eigen::MatrixXd::Zero(2, 3);
    bad.targets = Eigen::MatrixXd::Zero(2, 3);
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("noise is seeded") {
    PointSet s = sample_domain(kUnit, 20, 1, Strategy::Uniform, Role::WallPressure);
    s.targets = Eigen::MatrixXd::Ones(1, 20);
    PointSet t = s;
    add_noise(s, 0.1, 5);
    add_noise(t, 0.1, 5);
    CHECK(s.targets == t.targets);
    CHECK((s.targets.array() - 1.0).abs().maxCoeff() > 0.0);
}

TEST_CASE("point-set CSV round trip") {
    const auto dir = testing::scratch_dir("points");
    PointSet inflow = sample_domain(kUnit, 10, 2, Strategy::Uniform, Role::Inflow);
    inflow.targets = Eigen::MatrixXd::Random(4, 10);
    PointSet slip;
    slip.role = Role::WallSlip;
    slip.coords = Eigen::MatrixXd::Random(2, 3);
    slip.normals = Eigen::MatrixXd::Random(2, 3);
    write_point_sets(dir / "p.csv", {inflow, slip});
    const auto back = read_point_sets(dir / "p.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].role == Role::Inflow);
    CHECK(back[0].coords == inflow.coords);
    CHECK(back[0].targets == inflow.targets);
    CHECK(back[1].normals == slip.normals);
}

TEST_CASE("concatenate and select preserve order") {
    const auto a = sample_domain(kUnit, 5, 1);
    const auto b = sample_domain(kUnit, 3, 2);
    const auto c = concatenate({a, b});
    CHECK(c.size() == 8);
    CHECK(c.coords.col(5) == b.coords.col(0));
    const auto d = c.select({7, 0});
    CHECK(d.coords.col(0) == b.coords.col(2));
    CHECK(d.coords.col(1) == a.coords.col(0));
}

}
