#include "testing.hpp"

#include "shockpinn/decomposition.hpp"
#include "shockpinn/error.hpp"
#include "shockpinn/experiment.hpp"

#include <doctest.h>

using namespace shockpinn;

namespace {

decomp::Decomposition vertical_split() {
    const geom::Region unit(geom::Polygon::rectangle({0, 1, 0, 1}));
    return decomp::Decomposition(unit, {geom::Curve::segment({0.5, 2.0}, {0.5, -1.0})});
}

}  // namespace

TEST_SUITE("decomposition") {

TEST_CASE("single subdomain always answers 0") {
    const decomp::Decomposition d(geom::Region(geom::Polygon::rectangle({0, 1, 0, 1})), {});
    testing::Uniform rng(1);
    for (int k = 0; k < 100; ++k) {
        const auto loc = d.locate({rng(0, 1), rng(0, 1)});
        REQUIRE(loc.owners.size() == 1);
        CHECK(loc.owners[0] == 0);
    }
}

TEST_CASE("vertical split") {
    const auto d = vertical_split();
    CHECK(d.subdomain_count() == 2);
    const auto left = d.locate({0.25, 0.9});
    const auto right = d.locate({0.75, 0.1});
    REQUIRE(left.owners.size() == 1);
    REQUIRE(right.owners.size() == 1);
    CHECK(left.owners[0] != right.owners[0]);

    const auto on = d.locate({0.5 + 1e-13, 0.3});
    CHECK(on.on_interface());
    CHECK(on.owners.size() == 2);
    CHECK_FALSE(d.locate({0.5 + 1e-9, 0.3}).on_interface());
    CHECK_THROWS_AS((void)d.locate({1.5, 0.5}), DomainError);
    CHECK_NOTHROW((void)d.classify({1.5, 0.5}));
}

TEST_CASE("partition property over random points") {
    for (auto e : exp::kExperiments) {
        auto c = exp::preset(e);
        c.method.xpinn = true;
        const auto layout = exp::build_decomposition(c);
        const auto& d = layout.decomposition;
        const auto box = d.domain().bounds();
        testing::Uniform rng(7);
        std::vector<std::size_t> counts(d.subdomain_count(), 0);
        std::size_t inside = 0;
        while (inside < 100000) {
            const geom::Point p{rng(box.xmin, box.xmax), rng(box.ymin, box.ymax)};
            if (!d.domain().contains(p)) continue;
            ++inside;
            const auto loc = d.locate(p);
            REQUIRE(loc.owners.size() >= 1);
            if (loc.owners.size() == 1) ++counts[loc.owners[0]];
        }
        INFO(exp::to_string(e));
        for (std::size_t q = 0; q < counts.size(); ++q) CHECK(counts[q] > 0);
    }
}

TEST_CASE("experiment decompositions") {
    SUBCASE("PINN mode is a single subdomain") {
        const auto layout = exp::build_decomposition(exp::preset(exp::Experiment::Expansion));
        CHECK(layout.decomposition.subdomain_count() == 1);
        CHECK(layout.interfaces.empty());
    }
    SUBCASE("expansion: two subdomains, 300 interface points") {
        auto c = exp::preset(exp::Experiment::Expansion);
        c.method.xpinn = true;
        const auto layout = exp::build_decomposition(c);
        CHECK(layout.decomposition.subdomain_count() == 2);
        REQUIRE(layout.interfaces.size() == 1);
        CHECK(layout.interfaces[0].points == 300);
    }
    SUBCASE("oblique: three subdomains, 200 points, flux continuity") {
        auto c = exp::preset(exp::Experiment::Oblique);
        CHECK(c.method.xpinn);
        const auto layout = exp::build_decomposition(c);
        CHECK(layout.decomposition.subdomain_count() == 3);
        REQUIRE(layout.interfaces.size() == 2);
        for (const auto& i : layout.interfaces) {
            CHECK(i.points == 200);
            CHECK(i.flux);
        }
    }
    SUBCASE("bow: two subdomains with a curved interface") {
        auto c = exp::preset(exp::Experiment::Bow);
        c.method.xpinn = true;
        const auto layout = exp::build_decomposition(c);
        CHECK(layout.decomposition.subdomain_count() == 2);
        REQUIRE(layout.interfaces.size() == 1);
        CHECK(layout.interfaces[0].points == 200);
        CHECK(layout.interfaces[0].curve.piece_count() > 1);
    }
}

TEST_CASE("interface curves lie on the shared boundary") {
    for (auto e : exp::kExperiments) {
        auto c = exp::preset(e);
        c.method.xpinn = true;
        const auto layout = exp::build_decomposition(c);
        for (const auto& spec : layout.interfaces) {
            for (int k = 0; k <= 20; ++k) {
                const auto p = spec.curve.at(k / 20.0);
                const auto loc = layout.decomposition.classify(p);
                INFO(exp::to_string(e), " s=", k / 20.0);
                CHECK(loc.on_interface());
            }
        }
    }
}

TEST_CASE("clip keeps only the part inside the domain") {
    const geom::Region unit(geom::Polygon::rectangle({0, 1, 0, 1}));
    const auto clipped = decomp::clip_to_domain(geom::Curve::segment({0.5, 2.0}, {0.5, -1.0}), unit);
    CHECK(clipped.length() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(clipped.start().y == doctest::Approx(1.0).epsilon(1e-3));
}

}
