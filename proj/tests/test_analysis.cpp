#include "derived_values.hpp"
#include "testing.hpp"

#include "shockpinn/analysis.hpp"
#include "shockpinn/error.hpp"

#include <doctest.h>

#include <fstream>

using namespace shockpinn;

TEST_SUITE("analysis") {

TEST_CASE("relative L2 examples") {
    const std::vector<double> ref{2, 2, 2, 2}, pred{2.2, 2.2, 2.2, 2.2};
    CHECK(analysis::relative_l2(ref, ref) == 0.0);
    CHECK(analysis::relative_l2(pred, ref) == doctest::Approx(oracle::kRelativeL2Constant).epsilon(1e-14));
    const std::vector<double> zero(4, 0.0);
    CHECK_THROWS_AS(analysis::relative_l2(pred, zero), AnalysisError);
    const std::vector<double> shorter{1.0};
    CHECK_THROWS_AS(analysis::relative_l2(shorter, ref), AnalysisError);
}

TEST_CASE("relative L2 is scale invariant and non-negative") {
    testing::Uniform rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(20), b(20), ca(20), cb(20);
        const double c = rng(0.01, 100);
        for (std::size_t k = 0; k < 20; ++k) {
            a[k] = rng(-1, 1);
            b[k] = rng(-1, 1);
            ca[k] = c * a[k];
            cb[k] = c * b[k];
        }
        const double e = analysis::relative_l2(a, b);
        CHECK(e >= 0.0);
        CHECK(analysis::relative_l2(ca, cb) == doctest::Approx(e).epsilon(1e-12));
    }
}

TEST_CASE("evaluation grids keep nodes inside the region") {
    const geom::Region holed(geom::Polygon::rectangle({-1, 1, -1, 1}), {geom::Disk{{0, 0}, 0.5}});
    const auto g = analysis::make_grid(holed, 21, 21);
    CHECK(g.points.rows() == 2);
    CHECK(g.points.cols() > 0);
    CHECK(g.points.cols() < 21 * 21);
    for (Eigen::Index k = 0; k < g.points.cols(); ++k) CHECK(g.points.col(k).norm() >= 0.5 - 1e-12);
    const auto full = analysis::make_grid(geom::Region(geom::Polygon::rectangle({0, 1, 0, 1})), 5, 4, 0.5);
    CHECK(full.points.rows() == 3);
    CHECK(full.points.cols() == 20);
    CHECK(full.points(2, 7) == 0.5);
}

TEST_CASE("error report on a known perturbation") {
    const std::vector<analysis::EvaluationGrid> grids{
        analysis::make_grid(geom::Region(geom::Polygon::rectangle({0, 1, 0, 1})), 10, 10)};
    const analysis::FieldFunction ref = [](std::span<const double> x) {
        return physics::PrimitiveState{1.0 + x[0], 0.5, 0.1 + x[1], 1.0};
    };
    const analysis::FieldFunction same = ref;
    const auto r0 = analysis::error_report(same, ref, grids);
    for (double e : r0.relative_l2) CHECK(e == 0.0);
    CHECK(r0.samples.size() == 100);

    const analysis::FieldFunction scaled = [&](std::span<const double> x) {
        auto w = ref(x);
        w.p *= 1.1;
        return w;
    };
    const auto r1 = analysis::error_report(scaled, ref, grids, 2);
    CHECK(r1.relative_l2[3] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r1.relative_l2[0] == 0.0);

    const auto dir = testing::scratch_dir("fields");
    analysis::write_field_csv(dir / "f.csv", r1);
    std::ifstream in(dir / "f.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,y,t,var,predicted,reference,abs_error,rel_error");
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 400);
}

TEST_CASE("network complexity") {
    const auto base = nn::xavier_init({2, 8, 8, 4}, 1);
    const std::vector<nn::NetworkParams> same{base};
    for (auto kind : {analysis::NormKind::Spectral, analysis::NormKind::Frobenius}) {
        const auto r = analysis::complexity_norms(base, same, kind);
        REQUIRE(r.rows.size() == 2);
        CHECK(r.rows[0].percent == doctest::Approx(100.0));
        CHECK(r.rows[1].percent == doctest::Approx(100.0));
        const std::vector<nn::NetworkParams> pair{base, base};
        const auto r2 = analysis::complexity_norms(base, pair, kind);
        REQUIRE(r2.combined_percent.has_value());
        CHECK(*r2.combined_percent == doctest::Approx(200.0));
        CHECK(analysis::parse_norm_kind(analysis::to_string(kind)) == kind);
    }
    auto doubled = base;
    for (std::size_t l = 0; l < doubled.depth(); ++l) doubled.weights(l) *= 2.0;
    CHECK(analysis::complexity_measure(doubled) == doctest::Approx(8.0 * analysis::complexity_measure(base)));
}

TEST_CASE("interface jump") {
    const Eigen::MatrixXd pts = Eigen::MatrixXd::Random(2, 30);
    const auto a = nn::xavier_init({2, 6, 4}, 3);
    const std::vector<nn::NetworkParams> one{a};
    CHECK_FALSE(analysis::interface_jump(one, 0, 0, pts).has_value());

    const std::vector<nn::NetworkParams> twins{a, a};
    const auto j0 = analysis::interface_jump(twins, 0, 1, pts);
    REQUIRE(j0.has_value());
    for (double v : *j0) CHECK(v == 0.0);

    auto b = a;
    b.bias(1)[0] += 0.5;
    const std::vector<nn::NetworkParams> shifted{a, b};
    const auto j1 = analysis::interface_jump(shifted, 0, 1, pts);
    REQUIRE(j1.has_value());
    CHECK((*j1)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((*j1)[1] == 0.0);
}

}
