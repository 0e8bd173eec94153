#include "derived_values.hpp"
#include "testing.hpp"

#include "shockpinn/network.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace shockpinn;

namespace {

nn::NetworkParams random_net(std::uint64_t seed, std::vector<std::size_t> sizes = {2, 12, 12, 4}) {
    nn::NetworkParams p = nn::xavier_init(sizes, seed);
    testing::Uniform rng(seed + 1);
    // Non-zero biases and slopes away from 1/n exercise every term.
    for (std::size_t k = 0; k < p.depth(); ++k) {
        auto b = p.bias(k);
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng(-0.5, 0.5);
        if (k + 1 < p.depth()) p.set_slope(k, rng(0.05, 0.2));
    }
    return p;
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("6x40 network has 8484 weights and biases plus 6 slopes") {
    const auto p = nn::xavier_init({2, 40, 40, 40, 40, 40, 40, 4}, 0);
    CHECK(p.size() == static_cast<std::size_t>(oracle::kParameterCount6x40) + 6);
    CHECK(p.hidden_layers() == 6);
}

TEST_CASE("xavier init: zero biases, slopes 1/n, deterministic") {
    const auto a = nn::xavier_init({3, 20, 20, 4}, 42);
    const auto b = nn::xavier_init({3, 20, 20, 4}, 42);
    const auto c = nn::xavier_init({3, 20, 20, 4}, 43);
    for (std::size_t k = 0; k < a.depth(); ++k) {
        CHECK(a.bias(k).cwiseAbs().maxCoeff() == 0.0);
        if (k + 1 < a.depth()) CHECK(a.slope(k) * a.scale_n() == 1.0);
    }
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST_CASE("xavier variance is 2 / (fan_in + fan_out)") {
    const auto p = nn::xavier_init({2, 300, 300, 4}, 9);
    const auto W = p.weights(1);
    const double var = W.array().square().mean();
    CHECK(var == doctest::Approx(2.0 / 600.0).epsilon(0.03));
    CHECK(std::abs(W.mean()) < 5e-4);
}

TEST_CASE("invalid layer sizes are configuration errors") {
    CHECK_THROWS_AS(nn::xavier_init({2, 4}, 0), ConfigError);
    CHECK_THROWS_AS(nn::xavier_init({2, 0, 4}, 0), ConfigError);
}

TEST_CASE("zero network outputs the clamp floor") {
    nn::NetworkParams p = nn::xavier_init({2, 5, 4}, 1);
    for (double& v : p.values()) v = 0.0;
    const std::vector<double> x{0.3, -0.2};
    const auto out = nn::forward(p, x);
    CHECK(out.rho.value == p.alpha_clamp());
    CHECK(out.u.value == 0.0);
    CHECK(out.v.value == 0.0);
    CHECK(out.p.value == p.alpha_clamp());
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 2; ++d) CHECK(out[c].tangent[d] == 0.0);
}

TEST_CASE("one hidden neuron evaluates tanh(0.5) in the u channel") {
    nn::NetworkParams p({2, 1, 4});
    for (double& v : p.values()) v = 0.0;
    p.weights(0)(0, 0) = 1.0;
    p.set_slope(0, 0.1);
    p.weights(1)(1, 0) = 1.0;
    const std::vector<double> x{0.5, 0.0};
    const auto out = nn::forward(p, x);
    CHECK(out.u.value == doctest::Approx(oracle::kTanhHalf).epsilon(1e-15));
    CHECK(out.u.tangent[0] == doctest::Approx(1.0 - oracle::kTanhHalf * oracle::kTanhHalf).epsilon(1e-14));
}

TEST_CASE("dimension mismatch is rejected") {
    const auto p = nn::xavier_init({2, 5, 4}, 1);
    const std::vector<double> x{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(nn::forward(p, x), ContractError);
}

TEST_CASE("clamped channels never fall below alpha") {
    testing::Uniform rng(77);
    for (std::uint64_t s = 0; s < 30; ++s) {
        nn::NetworkParams p = random_net(s);
        for (double& v : p.values()) v *= 4.0;
        for (int k = 0; k < 50; ++k) {
            const std::vector<double> x{rng(-3, 3), rng(-3, 3)};
            const auto out = nn::forward(p, x);
            CHECK(out.rho.value >= p.alpha_clamp());
            CHECK(out.p.value >= p.alpha_clamp());
        }
    }
}

TEST_CASE("only the product n a enters the activation") {
    testing::Uniform rng(3);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const nn::NetworkParams p = random_net(s);
        nn::NetworkParams q = p;
        q.set_scale_n(p.scale_n() / 2.0);
        for (std::size_t k = 0; k + 1 < q.depth(); ++k) q.set_slope(k, 2.0 * p.slope(k));
        const std::vector<double> x{rng(-1, 1), rng(-1, 1)};
        const auto a = nn::forward(p, x);
        const auto b = nn::forward(q, x);
        for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(a[c].value - b[c].value) <= 1e-15);
    }
}

TEST_CASE("input tangents match finite differences") {
    testing::Uniform rng(8);
    const double h = 1e-6;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const nn::NetworkParams p = random_net(s, {3, 10, 10, 4});
        std::vector<double> x{rng(-1, 1), rng(-1, 1), rng(0, 1)};
        const auto out = nn::forward(p, x);
        for (std::size_t d = 0; d < 3; ++d) {
            auto xp = x, xm = x;
            xp[d] += h;
            xm[d] -= h;
            const auto op = nn::forward(p, xp);
            const auto om = nn::forward(p, xm);
            for (std::size_t c = 0; c < 4; ++c) {
                const double fd = (op[c].value - om[c].value) / (2 * h);
                CHECK(std::abs(fd - out[c].tangent[d]) <= 1e-6 * (std::abs(out[c].tangent[d]) + 1e-3));
            }
        }
    }
}

TEST_CASE("batch evaluator agrees with single-point forward") {
    const nn::NetworkParams p = random_net(4);
    Eigen::MatrixXd pts(2, 7);
    testing::Uniform rng(1);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) pts.col(i) << rng(-1, 1), rng(-1, 1);
    nn::BatchEvaluator ev;
    ev.forward(p, pts, 2);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
        const std::vector<double> x{pts(0, i), pts(1, i)};
        const auto out = nn::forward(p, x);
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(ev.output()(static_cast<Eigen::Index>(c), i) == doctest::Approx(out[c].value).epsilon(1e-13));
            for (std::size_t d = 0; d < 2; ++d)
                CHECK(ev.output_tangent(d)(static_cast<Eigen::Index>(c), i) ==
                      doctest::Approx(out[c].tangent[d]).epsilon(1e-12).scale(1e-12));
        }
    }
}

TEST_CASE("stitched forward") {
    const nn::NetworkParams a = random_net(10);
    const std::vector<nn::NetworkParams> one{a};
    const std::vector<double> x{0.2, -0.4};

    SUBCASE("one subdomain equals forward") {
        const auto s = nn::stitched_forward(one, [](std::span<const double>) { return std::vector<std::size_t>{0}; }, x);
        const auto f = nn::forward(a, x);
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(s[c].value == f[c].value);
            CHECK(s[c].tangent[0] == f[c].tangent[0]);
        }
    }
    SUBCASE("interface points average their owners") {
        nn::NetworkParams lo({2, 3, 4}), hi({2, 3, 4});
        for (double& v : lo.values()) v = 0.0;
        for (double& v : hi.values()) v = 0.0;
        lo.bias(1)[0] = 1.0;
        hi.bias(1)[0] = 3.0;
        const std::vector<nn::NetworkParams> pair{lo, hi};
        const auto locate = [](std::span<const double> p) {
            if (p[0] < 0.0) return std::vector<std::size_t>{0};
            if (p[0] > 0.0) return std::vector<std::size_t>{1};
            return std::vector<std::size_t>{0, 1};
        };
        const std::vector<double> on{0.0, 0.5}, left{-0.5, 0.5}, right{0.5, 0.5};
        CHECK(nn::stitched_forward(pair, locate, on).rho.value == 2.0);
        CHECK(nn::stitched_forward(pair, locate, left).rho.value == 1.0);
        CHECK(nn::stitched_forward(pair, locate, right).rho.value == 3.0);
    }
    SUBCASE("points outside every region are domain errors") {
        CHECK_THROWS_AS(
            nn::stitched_forward(one, [](std::span<const double>) { return std::vector<std::size_t>{}; }, x),
            DomainError);
    }
}

TEST_CASE("checkpoint round trip is exact") {
    nn::NetworkParams p = random_net(12);
    p.set_seed(99);
    p.set_adaptive(false);
    const auto dir = testing::scratch_dir("checkpoint");
    nn::save_checkpoint(dir / "net.txt", p);
    const auto q = nn::load_checkpoint(dir / "net.txt");
    CHECK(q.layer_sizes() == p.layer_sizes());
    CHECK(q.seed() == 99);
    CHECK_FALSE(q.adaptive());
    CHECK(q.scale_n() == p.scale_n());
    CHECK(std::equal(p.values().begin(), p.values().end(), q.values().begin(), q.values().end()));
}

TEST_CASE("frozen slopes are masked out") {
    nn::NetworkParams p = nn::xavier_init({2, 4, 4, 4}, 0);
    p.set_adaptive(false);
    const auto mask = p.trainable_mask();
    CHECK(mask[p.slope_offset(0)] == 0.0);
    CHECK(mask[p.slope_offset(1)] == 0.0);
    CHECK(mask[p.weight_offset(0)] == 1.0);
}

}
