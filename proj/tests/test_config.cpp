#include "testing.hpp"

#include "shockpinn/error.hpp"
#include "shockpinn/experiment.hpp"

#include <doctest.h>

#include <fstream>
#include <set>

using namespace shockpinn;
using exp::Experiment;

TEST_SUITE("config") {

TEST_CASE("presets carry the documented architectures and point counts") {
    const auto smooth = exp::preset(Experiment::Smooth);
    CHECK(smooth.network.hidden == std::vector<std::size_t>(4, 30));
    CHECK(smooth.analysis.times == std::vector<double>{0.0, 0.5, 1.0});

    const auto expansion = exp::preset(Experiment::Expansion);
    CHECK(expansion.network.hidden == std::vector<std::size_t>(6, 40));
    CHECK(expansion.sampling.residual == 1200);
    CHECK(expansion.sampling.gradient == 340);
    CHECK(expansion.schedule.adam.iterations == 5000);
    CHECK(expansion.schedule.lbfgs.iterations == 2000);
    CHECK_FALSE(expansion.method.xpinn);

    const auto oblique = exp::preset(Experiment::Oblique);
    CHECK(oblique.network.hidden == std::vector<std::size_t>(7, 30));
    CHECK(oblique.method.xpinn);
    CHECK(oblique.method.flux_continuity);
    CHECK(oblique.method.global_conservation);
    CHECK(oblique.sampling.gradient_method == sampling::GradientMethod::FiniteDifference);

    const auto bow = exp::preset(Experiment::Bow);
    CHECK(bow.network.hidden == std::vector<std::size_t>(5, 160));
    CHECK(bow.method.dynamic_weights);
    CHECK(bow.method.wall_slip);
    CHECK(bow.geometry.radius == 0.5);

    for (auto e : exp::kExperiments) {
        const auto c = exp::preset(e);
        CHECK(c.experiment == e);
        CHECK(exp::parse_experiment(exp::to_string(e)) == e);
        CHECK_NOTHROW(exp::validate(c));
        CHECK(c.network.adaptive);
    }
}

TEST_CASE("serialization round trip is idempotent") {
    for (auto e : exp::kExperiments) {
        const auto c = exp::preset(e);
        const std::string once = exp::serialize(c);
        const auto back = exp::parse_config(once);
        CHECK(exp::serialize(back) == once);
        CHECK(exp::config_hash(back) == exp::config_hash(c));
    }
}

TEST_CASE("hash is stable and sensitive") {
    const auto c = exp::preset(Experiment::Expansion);
    const std::string h = exp::config_hash(c);
    CHECK(h.size() == 16);
    CHECK(h == exp::config_hash(exp::preset(Experiment::Expansion)));
    CHECK(h != exp::config_hash(exp::apply_override(c, "seed=1235")));
    CHECK(h != exp::config_hash(exp::preset(Experiment::Smooth)));
}

TEST_CASE("partial documents merge over the preset") {
    const auto c = exp::parse_config(R"({"experiment": "oblique", "method": {"xpinn": false}, "seed": 9})");
    CHECK_FALSE(c.method.xpinn);
    CHECK(c.seed == 9);
    CHECK(c.network.hidden == std::vector<std::size_t>(7, 30));
}

TEST_CASE("invalid documents are rejected") {
    CHECK_THROWS_AS(exp::parse_config(R"({"experiment": "oblique", "unknown_key": 1})"), ConfigError);
    CHECK_THROWS_AS(exp::parse_config(R"({"experiment": "oblique", "network": {"depth": 3}})"), ConfigError);
    CHECK_THROWS_AS(exp::parse_config(R"({"experiment": "oblique", "seed": "many"})"), ConfigError);
    CHECK_THROWS_AS(exp::parse_config(R"({"experiment": "supersonic"})"), ConfigError);
    CHECK_THROWS_AS(exp::parse_config(R"({"seed": 1})"), ConfigError);
    CHECK_THROWS_AS(exp::parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(exp::parse_config(R"({"experiment": "expansion", "sampling": {"residual": 0}})"), ConfigError);
    CHECK_THROWS_AS(exp::parse_config(R"({"experiment": "expansion", "dynamic": {"lambda": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(exp::parse_config(R"({"experiment": "smooth", "method": {"wall_slip": true}})"), ConfigError);
    CHECK_THROWS_AS(exp::parse_config(R"({"experiment": "expansion", "method": {"entropy_mode": "sideways"}})"), ConfigError);
}

TEST_CASE("dotted overrides") {
    const auto c = exp::preset(Experiment::Expansion);
    const auto d = exp::apply_override(c, "schedule.adam.learning_rate=0.005");
    CHECK(d.schedule.adam.learning_rate == 0.005);
    CHECK(exp::apply_override(c, "network.hidden=[8,8]").network.hidden == std::vector<std::size_t>{8, 8});
    CHECK(exp::apply_override(c, "method.entropy_mode=squared").method.entropy_mode ==
          physics::EntropyMode::Squared);
    CHECK(exp::preset(Experiment::Oblique).sampling.fd_one_sided);
    CHECK_FALSE(exp::apply_override(c, "sampling.fd_one_sided=false").sampling.fd_one_sided);
    CHECK(exp::apply_override(c, "weights.grad_rho=2.5").weights[loss::Group::Gradient] == 2.5);
    CHECK_THROWS_AS(exp::apply_override(c, "experiment=bow"), ConfigError);
    CHECK_THROWS_AS(exp::apply_override(c, "schedule.adam.momentum=1"), ConfigError);
    CHECK_THROWS_AS(exp::apply_override(c, "seed"), ConfigError);
    CHECK_THROWS_AS(exp::apply_override(c, "schedule..adam=1"), ConfigError);
}

TEST_CASE("group keys are distinct") {
    std::set<std::string> keys;
    for (std::size_t g = 0; g < loss::kGroupCount; ++g) keys.insert(exp::group_key(static_cast<loss::Group>(g)));
    CHECK(keys.size() == loss::kGroupCount);
    CHECK(exp::group_key(loss::Group::Gradient) == "grad_rho");
}

TEST_CASE("configs load from presets and files") {
    CHECK(exp::load_config("oblique").experiment == Experiment::Oblique);
    const auto dir = testing::scratch_dir("config");
    std::ofstream(dir / "c.json") << R"({"experiment": "smooth", "threads": 2})";
    const auto c = exp::load_config((dir / "c.json").string());
    CHECK(c.threads == 2);
    CHECK_THROWS_AS(exp::load_config((dir / "missing.json").string()), ConfigError);
}

}
