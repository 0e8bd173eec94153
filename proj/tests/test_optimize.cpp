#include "derived_values.hpp"
#include "testing.hpp"

#include "shockpinn/error.hpp"
#include "shockpinn/experiment.hpp"
#include "shockpinn/optimize.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace shockpinn;

namespace {

double quadratic(std::span<const double> x, std::span<double> g) {
    g[0] = x[0];
    g[1] = 100.0 * x[1];
    return 0.5 * (x[0] * x[0] + 100.0 * x[1] * x[1]);
}

double rosenbrock(std::span<const double> x, std::span<double> g) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
}

exp::ExperimentConfig tiny_smooth(std::size_t adam, std::size_t lbfgs) {
    auto c = exp::preset(exp::Experiment::Smooth);
    for (const std::string o : {"network.hidden=[5,5]", "sampling.residual=60", "sampling.gradient=20",
                                "sampling.inflow=20", "sampling.pressure=5", "analysis.grid=10"})
        c = exp::apply_override(c, o);
    c = exp::apply_override(c, "schedule.adam.iterations=" + std::to_string(adam));
    c = exp::apply_override(c, "schedule.lbfgs.iterations=" + std::to_string(lbfgs));
    return c;
}

}  // namespace

TEST_SUITE("optimize") {

TEST_CASE("Adam first step") {
    opt::AdamState s;
    std::vector<double> theta{0.0, 0.0, 5.0};
    const std::vector<double> g{1.0, -1.0, 0.0};
    opt::adam_step(s, {}, theta, g);
    CHECK(theta[0] == doctest::Approx(oracle::kAdamFirstStep).epsilon(1e-12));
    CHECK(theta[1] == doctest::Approx(-oracle::kAdamFirstStep).epsilon(1e-12));
    CHECK(theta[2] == 5.0);
    CHECK(s.step == 1);
}

TEST_CASE("Adam steps are bounded by the learning rate") {
    testing::Uniform rng(1);
    opt::AdamState s;
    opt::AdamOptions o;
    o.learning_rate = 0.01;
    std::vector<double> theta(50, 0.0);
    for (int it = 0; it < 200; ++it) {
        std::vector<double> g(50);
        for (double& v : g) v = rng(-1e3, 1e3);
        const auto before = theta;
        opt::adam_step(s, o, theta, g);
        for (std::size_t k = 0; k < theta.size(); ++k) CHECK(std::abs(theta[k] - before[k]) <= 10.0 * o.learning_rate);
    }
}

TEST_CASE("Adam rejects non-finite gradients") {
    opt::AdamState s;
    std::vector<double> theta{1.0, 2.0};
    const std::vector<double> g{1.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(opt::adam_step(s, {}, theta, g), DivergenceError);
    const std::vector<double> h{std::numeric_limits<double>::infinity(), 0.0};
    CHECK_THROWS_AS(opt::adam_step(s, {}, theta, h), DivergenceError);
}

TEST_CASE("L-BFGS on a one-dimensional quadratic") {
    std::vector<double> theta{0.0};
    opt::LbfgsOptions o;
    o.iterations = 50;
    const auto r = opt::lbfgs_run(
        [](std::span<const double> x, std::span<double> g) {
            g[0] = x[0] - 3.0;
            return 0.5 * (x[0] - 3.0) * (x[0] - 3.0);
        },
        theta, o);
    CHECK(theta[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(r.iterations <= 2);
}

TEST_CASE("L-BFGS on an ill-conditioned quadratic") {
    std::vector<double> theta{1.0, 1.0};
    opt::LbfgsOptions o;
    o.iterations = 100;
    o.tol_grad = 1e-8;
    const auto r = opt::lbfgs_run(quadratic, theta, o);
    CHECK(r.gradient_norm < 1e-8);
    CHECK(r.status == opt::LbfgsStatus::GradientTolerance);
    CHECK(static_cast<double>(r.iterations) <= 4.0 * oracle::kScipyLbfgsIterations);
}

TEST_CASE("L-BFGS started at the minimum does not move") {
    std::vector<double> theta{0.0, 0.0};
    opt::LbfgsOptions o;
    o.iterations = 10;
    std::size_t calls = 0;
    const auto r = opt::lbfgs_run(quadratic, theta, o, [&](std::size_t, std::span<const double>, double) { ++calls; });
    CHECK(r.iterations == 0);
    CHECK(theta == std::vector<double>{0.0, 0.0});
    CHECK(calls == 1);
}

TEST_CASE("L-BFGS on the Rosenbrock function") {
    std::vector<double> theta{-1.2, 1.0};
    opt::LbfgsOptions o;
    o.iterations = 500;
    o.memory = 10;
    double last = std::numeric_limits<double>::infinity();
    bool monotone = true;
    const auto r = opt::lbfgs_run(rosenbrock, theta, o, [&](std::size_t, std::span<const double>, double v) {
        monotone = monotone && v <= last;
        last = v;
    });
    CHECK(monotone);
    CHECK(theta[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(theta[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.value < 1e-12);
}

TEST_CASE("schedule validation") {
    opt::Schedule s;
    s.adam.learning_rate = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.adam.learning_rate = 1e-3;
    s.lbfgs.memory = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.lbfgs.memory = 5;
    s.lbfgs.c1 = 0.95;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("training with no iterations returns the initialization") {
    const auto c = tiny_smooth(0, 0);
    const auto setup = exp::build_setup(c);
    const auto theta = setup.problem.pack();
    opt::TrainOptions o;
    o.schedule = c.schedule;
    o.weights = c.weights;
    const auto r = opt::train(setup.problem, theta, o);
    CHECK(r.theta == theta);
    REQUIRE(r.history.size() == 1);
    CHECK(r.history[0].phase == "init");
    CHECK(r.best == r.history[0].total);
}

TEST_CASE("best-so-far loss never increases and training is deterministic") {
    const auto c = tiny_smooth(60, 20);
    const auto setup = exp::build_setup(c);
    opt::TrainOptions o;
    o.schedule = c.schedule;
    o.weights = c.weights;
    std::ostringstream h1, h2;
    o.history = &h1;
    const auto a = opt::train(setup.problem, setup.problem.pack(), o);
    o.history = &h2;
    const auto b = opt::train(setup.problem, setup.problem.pack(), o);

    REQUIRE(a.history.size() > 60);
    for (std::size_t k = 1; k < a.history.size(); ++k) CHECK(a.history[k].best <= a.history[k - 1].best);
    CHECK(a.best < a.history.front().total);
    CHECK(a.theta == b.theta);
    CHECK(h1.str() == h2.str());
    CHECK(h1.str().rfind("iteration,phase,", 0) == 0);
}

TEST_CASE("with dynamic weights only frozen-weight iterates compete for best") {
    const auto c = tiny_smooth(20, 5);
    const auto setup = exp::build_setup(c);
    opt::TrainOptions o;
    o.schedule = c.schedule;
    o.weights = c.weights;
    loss::DynamicWeights dw;
    dw.weights = c.weights;
    dw.lambda = 0.5;
    dw.period = 5;
    o.dynamic = dw;
    const auto r = opt::train(setup.problem, setup.problem.pack(), o);

    REQUIRE(r.history.size() > 20);
    for (std::size_t k = 0; k < 20; ++k) CHECK(std::isinf(r.history[k].best));
    CHECK(r.history[20].phase == "adam");
    CHECK(r.history[20].best == r.history[20].total);
    CHECK(r.best_iteration >= 20);
    for (std::size_t k = 21; k < r.history.size(); ++k) {
        CHECK(r.history[k].weights.w == r.history[20].weights.w);
        CHECK(r.history[k].best <= r.history[k - 1].best);
    }
}

TEST_CASE("non-finite losses are reported by component") {
    loss::Evaluation e;
    e.subdomains.resize(1);
    e.subdomains[0].active[loss::index(loss::Component::Inflow)] = true;
    e.subdomains[0].value[loss::index(loss::Component::Inflow)] = std::numeric_limits<double>::quiet_NaN();
    e.total = std::numeric_limits<double>::quiet_NaN();
    try {
        opt::check_finite(e);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& err) {
        CHECK(std::string(err.what()).find("inflow") != std::string::npos);
    }
}

}
