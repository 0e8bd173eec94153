#include "shockpinn/experiment.hpp"

#include "shockpinn/error.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

namespace shockpinn::exp {

using geom::Point;
using sampling::PointSet;
using sampling::Role;

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::Smooth: return "smooth";
        case Experiment::Expansion: return "expansion";
        case Experiment::Oblique: return "oblique";
        case Experiment::Bow: return "bow";
    }
    return "unknown";
}

Experiment parse_experiment(const std::string& name) {
    for (Experiment e : kExperiments)
        if (to_string(e) == name) return e;
    throw ConfigError("unknown experiment '" + name + "' (expected smooth, expansion, oblique or bow)");
}

// --- presets ---------------------------------------------------------------------

namespace {

json schedule_json(std::size_t adam, std::size_t lbfgs) {
    return {{"adam", {{"iterations", adam}, {"learning_rate", 1e-3}, {"beta1", 0.9}, {"beta2", 0.999}, {"epsilon", 1e-8}}},
            {"lbfgs",
             {{"iterations", lbfgs},
              {"memory", 50},
              {"c1", 1e-4},
              {"c2", 0.9},
              {"tol_grad", 1e-9},
              {"tol_change", 1e-12},
              {"max_line_search", 25}}}};
}

json weights_json() {
    json w = json::object();
    for (std::size_t g = 0; g < loss::kGroupCount; ++g) w[group_key(static_cast<loss::Group>(g))] = 1.0;
    return w;
}

}  // namespace

json preset_json(Experiment e) {
    json j;
    j["experiment"] = to_string(e);
    j["seed"] = 1234;
    j["threads"] = 1;
    j["output"] = "runs/" + to_string(e);
    j["checkpoint_every"] = 1000;
    j["network"] = {{"hidden", json::array()}, {"scale_n", 10.0}, {"adaptive", true}, {"alpha_clamp", 1e-6}, {"inlet_bias", true}};
    j["method"] = {{"xpinn", false},
                   {"dynamic_weights", false},
                   {"entropy", true},
                   {"entropy_mode", "relu"},
                   {"epsilon", 1e-4},
                   {"global_conservation", false},
                   {"wall_slip", false},
                   {"interface_average", true},
                   {"interface_residual", true},
                   {"flux_continuity", false}};
    j["weights"] = weights_json();
    j["dynamic"] = {{"lambda", 0.1}, {"period", 10}};
    j["sampling"] = {{"residual", 0},
                     {"gradient", 0},
                     {"inflow", 0},
                     {"pressure", 0},
                     {"wall_slip", 0},
                     {"strategy", "uniform"},
                     {"gradient_method", "analytic"},
                     {"fd_h", 1e-3},
                     {"fd_one_sided", true},
                     {"noise", 0.0},
                     {"gradient_band", 0.1},
                     {"quadrature_panels", 40},
                     {"quadrature_order", 4}};
    j["geometry"] = {{"theta_deg", 10.0},
                     {"wall_curve", "tangent"},
                     {"box", {0.0, 1.0, 0.0, 1.0}},
                     {"region_d", json::array()},
                     {"radius", 0.5},
                     {"p_star", {0.4, 0.0}}};
    j["inlet"] = {{"rho", 1.0}, {"u", 1.0}, {"v", 0.0}, {"p", 1.0}};
    j["schedule"] = schedule_json(0, 0);
    j["decomposition"] = {{"interface_points", 200}, {"split", 0.5}};
    j["analysis"] = {{"grid", 200}, {"norm", "spectral"}, {"times", json::array()}};
    j["reference"] = {{"path", ""}};

    switch (e) {
        case Experiment::Smooth:
            j["network"]["hidden"] = {30, 30, 30, 30};
            j["sampling"]["residual"] = 2000;
            j["sampling"]["gradient"] = 200;
            j["sampling"]["inflow"] = 300;
            j["sampling"]["pressure"] = 50;
            j["geometry"]["box"] = {-1.0, 1.0, -1.0, 1.0};
            j["geometry"]["p_star"] = {-1.0, -1.0};
            j["inlet"] = {{"rho", 1.0}, {"u", 0.7}, {"v", 0.3}, {"p", 1.0}};
            j["schedule"] = schedule_json(2000, 500);
            j["decomposition"] = {{"interface_points", 200}, {"split", 0.0}};
            j["analysis"]["times"] = {0.0, 0.5, 1.0};
            break;
        case Experiment::Expansion:
            j["network"]["hidden"] = {40, 40, 40, 40, 40, 40};
            j["sampling"]["residual"] = 1200;
            j["sampling"]["gradient"] = 340;
            j["sampling"]["inflow"] = 100;
            j["sampling"]["pressure"] = 50;
            j["geometry"]["region_d"] = {{0.15, 0.02}, {1.0, 0.2}, {1.0, 0.65}, {0.15, 0.12}};
            j["inlet"] = {{"rho", 1.23}, {"u", 678.1}, {"v", 0.0}, {"p", 1.01e5}};
            j["schedule"] = schedule_json(5000, 2000);
            j["decomposition"] = {{"interface_points", 300}, {"split", 0.5}};
            break;
        case Experiment::Oblique:
            j["network"]["hidden"] = {30, 30, 30, 30, 30, 30, 30};
            j["method"]["xpinn"] = true;
            j["method"]["global_conservation"] = true;
            j["method"]["flux_continuity"] = true;
            j["sampling"]["residual"] = 3900;
            j["sampling"]["gradient"] = 1200;
            j["sampling"]["inflow"] = 120;
            j["sampling"]["pressure"] = 1;
            j["sampling"]["gradient_method"] = "fd";
            j["inlet"] = {{"rho", oracles::kObliquePre.rho},
                          {"u", oracles::kObliquePre.u},
                          {"v", oracles::kObliquePre.v},
                          {"p", oracles::kObliquePre.p}};
            j["schedule"] = schedule_json(8000, 2000);
            j["decomposition"] = {{"interface_points", 200}, {"split", 0.1}};
            break;
        case Experiment::Bow:
            j["network"]["hidden"] = {160, 160, 160, 160, 160};
            j["method"]["dynamic_weights"] = true;
            j["method"]["global_conservation"] = true;
            j["method"]["wall_slip"] = true;
            j["sampling"]["residual"] = 5600;
            j["sampling"]["gradient"] = 700;
            j["sampling"]["inflow"] = 300;
            j["sampling"]["pressure"] = 50;
            j["sampling"]["wall_slip"] = 100;
            j["geometry"]["box"] = {-1.5, 0.0, -1.25, 1.25};
            j["geometry"]["region_d"] = {{-1.4, -1.25}, {-0.55, -1.25}, {-0.55, 1.25}, {-1.4, 1.25}};
            j["inlet"] = {{"rho", 1.225}, {"u", 1360.6963}, {"v", 0.0}, {"p", 101253.6}};
            j["schedule"] = schedule_json(1000, 200);
            j["decomposition"] = {{"interface_points", 200}, {"split", 0.08}};
            break;
    }
    return j;
}

ExperimentConfig preset(Experiment e) { return from_json(json{{"experiment", to_string(e)}}); }

// --- JSON conversion --------------------------------------------------------------

namespace {

std::string strategy_name(sampling::Strategy s) { return s == sampling::Strategy::Uniform ? "uniform" : "grid"; }

std::string gradient_method_name(sampling::GradientMethod m) {
    return m == sampling::GradientMethod::Analytic ? "analytic" : "fd";
}

sampling::GradientMethod parse_gradient_method(const std::string& s) {
    if (s == "analytic") return sampling::GradientMethod::Analytic;
    if (s == "fd") return sampling::GradientMethod::FiniteDifference;
    throw ConfigError("unknown gradient method '" + s + "' (expected analytic or fd)");
}

std::string wall_name(oracles::WallCurve w) { return w == oracles::WallCurve::Tangent ? "tangent" : "tanh"; }

oracles::WallCurve parse_wall(const std::string& s) {
    if (s == "tangent") return oracles::WallCurve::Tangent;
    if (s == "tanh") return oracles::WallCurve::HyperbolicTangent;
    throw ConfigError("unknown wall curve '" + s + "' (expected tangent or tanh)");
}

void merge_strict(json& base, const json& patch, const std::string& path) {
    if (!patch.is_object()) throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
    for (const auto& [key, value] : patch.items()) {
        const std::string here = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) throw ConfigError("unknown configuration key '" + here + "'");
        if (base[key].is_object())
            merge_strict(base[key], value, here);
        else
            base[key] = value;
    }
}

class Reader {
public:
    explicit Reader(const json& root) : root_(root) {}

    const json& at(const std::string& dotted) const {
        const json* node = &root_;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = dotted.find('.', start);
            const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            node = &node->at(key);
            if (dot == std::string::npos) return *node;
            start = dot + 1;
        }
    }
    double number(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_number()) throw ConfigError("'" + k + "' must be a number");
        return v.get<double>();
    }
    std::size_t count(const std::string& k) const {
        const json& v = at(k);
        if (v.is_number_unsigned()) return v.get<std::size_t>();
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw ConfigError("'" + k + "' must be a non-negative integer");
        return static_cast<std::size_t>(v.get<std::int64_t>());
    }
    bool flag(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_boolean()) throw ConfigError("'" + k + "' must be true or false");
        return v.get<bool>();
    }
    std::string text(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_string()) throw ConfigError("'" + k + "' must be a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_array()) throw ConfigError("'" + k + "' must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError("'" + k + "' must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    Point point(const std::string& k) const {
        const auto v = numbers(k);
        if (v.size() != 2) throw ConfigError("'" + k + "' must be [x, y]");
        return {v[0], v[1]};
    }

private:
    const json& root_;
};

}  // namespace

std::string group_key(loss::Group g) {
    static constexpr const char* keys[loss::kGroupCount] = {"residual",          "grad_rho",           "inflow",
                                                           "p_star",            "global",             "wall_slip",
                                                           "interface_average", "interface_residual", "interface_flux"};
    return keys[loss::index(g)];
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["output"] = c.output;
    j["checkpoint_every"] = c.checkpoint_every;
    j["network"] = {{"hidden", c.network.hidden},
                    {"scale_n", c.network.scale_n},
                    {"adaptive", c.network.adaptive},
                    {"alpha_clamp", c.network.alpha_clamp},
                    {"inlet_bias", c.network.inlet_bias}};
    const auto& m = c.method;
    j["method"] = {{"xpinn", m.xpinn},
                   {"dynamic_weights", m.dynamic_weights},
                   {"entropy", m.entropy},
                   {"entropy_mode", physics::to_string(m.entropy_mode)},
                   {"epsilon", m.epsilon},
                   {"global_conservation", m.global_conservation},
                   {"wall_slip", m.wall_slip},
                   {"interface_average", m.interface_average},
                   {"interface_residual", m.interface_residual},
                   {"flux_continuity", m.flux_continuity}};
    j["weights"] = json::object();
    for (std::size_t g = 0; g < loss::kGroupCount; ++g) j["weights"][group_key(static_cast<loss::Group>(g))] = c.weights.w[g];
    j["dynamic"] = {{"lambda", c.dw_lambda}, {"period", c.dw_period}};
    const auto& s = c.sampling;
    j["sampling"] = {{"residual", s.residual},
                     {"gradient", s.gradient},
                     {"inflow", s.inflow},
                     {"pressure", s.pressure},
                     {"wall_slip", s.wall_slip},
                     {"strategy", strategy_name(s.strategy)},
                     {"gradient_method", gradient_method_name(s.gradient_method)},
                     {"fd_h", s.fd_h},
                     {"fd_one_sided", s.fd_one_sided},
                     {"noise", s.noise},
                     {"gradient_band", s.gradient_band},
                     {"quadrature_panels", s.quadrature_panels},
                     {"quadrature_order", s.quadrature_order}};
    json region = json::array();
    for (const auto& p : c.geometry.region_d) region.push_back({p.x, p.y});
    const auto& g = c.geometry;
    j["geometry"] = {{"theta_deg", g.theta_deg},
                     {"wall_curve", wall_name(g.wall)},
                     {"box", {g.box.xmin, g.box.xmax, g.box.ymin, g.box.ymax}},
                     {"region_d", region},
                     {"radius", g.radius},
                     {"p_star", {g.p_star.x, g.p_star.y}}};
    j["inlet"] = {{"rho", c.inlet.rho}, {"u", c.inlet.u}, {"v", c.inlet.v}, {"p", c.inlet.p}};
    const auto& a = c.schedule.adam;
    const auto& l = c.schedule.lbfgs;
    j["schedule"] = {{"adam",
                      {{"iterations", a.iterations},
                       {"learning_rate", a.learning_rate},
                       {"beta1", a.beta1},
                       {"beta2", a.beta2},
                       {"epsilon", a.epsilon}}},
                     {"lbfgs",
                      {{"iterations", l.iterations},
                       {"memory", l.memory},
                       {"c1", l.c1},
                       {"c2", l.c2},
                       {"tol_grad", l.tol_grad},
                       {"tol_change", l.tol_change},
                       {"max_line_search", l.max_line_search}}}};
    j["decomposition"] = {{"interface_points", c.decomposition.interface_points}, {"split", c.decomposition.split}};
    j["analysis"] = {{"grid", c.analysis.grid}, {"norm", analysis::to_string(c.analysis.norm)}, {"times", c.analysis.times}};
    j["reference"] = {{"path", c.reference_path}};
    return j;
}

ExperimentConfig from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    if (!doc.contains("experiment") || !doc["experiment"].is_string())
        throw ConfigError("configuration needs an \"experiment\" name");
    const Experiment e = parse_experiment(doc["experiment"].get<std::string>());
    json merged = preset_json(e);
    merge_strict(merged, doc, "");
    const Reader r(merged);

    ExperimentConfig c;
    c.experiment = e;
    c.seed = r.count("seed");
    c.threads = r.count("threads");
    c.output = r.text("output");
    c.checkpoint_every = r.count("checkpoint_every");

    c.network.hidden.clear();
    for (double h : r.numbers("network.hidden")) {
        if (!(h >= 1.0) || h != std::floor(h)) throw ConfigError("'network.hidden' entries must be positive integers");
        c.network.hidden.push_back(static_cast<std::size_t>(h));
    }
    c.network.scale_n = r.number("network.scale_n");
    c.network.adaptive = r.flag("network.adaptive");
    c.network.alpha_clamp = r.number("network.alpha_clamp");
    c.network.inlet_bias = r.flag("network.inlet_bias");

    auto& m = c.method;
    m.xpinn = r.flag("method.xpinn");
    m.dynamic_weights = r.flag("method.dynamic_weights");
    m.entropy = r.flag("method.entropy");
    m.entropy_mode = physics::parse_entropy_mode(r.text("method.entropy_mode"));
    m.epsilon = r.number("method.epsilon");
    m.global_conservation = r.flag("method.global_conservation");
    m.wall_slip = r.flag("method.wall_slip");
    m.interface_average = r.flag("method.interface_average");
    m.interface_residual = r.flag("method.interface_residual");
    m.flux_continuity = r.flag("method.flux_continuity");

    for (std::size_t g = 0; g < loss::kGroupCount; ++g)
        c.weights.w[g] = r.number("weights." + group_key(static_cast<loss::Group>(g)));
    c.dw_lambda = r.number("dynamic.lambda");
    c.dw_period = r.count("dynamic.period");

    auto& s = c.sampling;
    s.residual = r.count("sampling.residual");
    s.gradient = r.count("sampling.gradient");
    s.inflow = r.count("sampling.inflow");
    s.pressure = r.count("sampling.pressure");
    s.wall_slip = r.count("sampling.wall_slip");
    s.strategy = sampling::parse_strategy(r.text("sampling.strategy"));
    s.gradient_method = parse_gradient_method(r.text("sampling.gradient_method"));
    s.fd_h = r.number("sampling.fd_h");
    s.fd_one_sided = r.flag("sampling.fd_one_sided");
    s.noise = r.number("sampling.noise");
    s.gradient_band = r.number("sampling.gradient_band");
    s.quadrature_panels = r.count("sampling.quadrature_panels");
    s.quadrature_order = r.count("sampling.quadrature_order");

    auto& g = c.geometry;
    g.theta_deg = r.number("geometry.theta_deg");
    g.wall = parse_wall(r.text("geometry.wall_curve"));
    const auto box = r.numbers("geometry.box");
    if (box.size() != 4) throw ConfigError("'geometry.box' must be [xmin, xmax, ymin, ymax]");
    g.box = {box[0], box[1], box[2], box[3]};
    g.region_d.clear();
    for (const auto& v : r.at("geometry.region_d")) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError("'geometry.region_d' must be a list of [x, y] vertices");
        g.region_d.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    g.radius = r.number("geometry.radius");
    g.p_star = r.point("geometry.p_star");

    c.inlet = {r.number("inlet.rho"), r.number("inlet.u"), r.number("inlet.v"), r.number("inlet.p")};

    auto& a = c.schedule.adam;
    a.iterations = r.count("schedule.adam.iterations");
    a.learning_rate = r.number("schedule.adam.learning_rate");
    a.beta1 = r.number("schedule.adam.beta1");
    a.beta2 = r.number("schedule.adam.beta2");
    a.epsilon = r.number("schedule.adam.epsilon");
    auto& l = c.schedule.lbfgs;
    l.iterations = r.count("schedule.lbfgs.iterations");
    l.memory = r.count("schedule.lbfgs.memory");
    l.c1 = r.number("schedule.lbfgs.c1");
    l.c2 = r.number("schedule.lbfgs.c2");
    l.tol_grad = r.number("schedule.lbfgs.tol_grad");
    l.tol_change = r.number("schedule.lbfgs.tol_change");
    l.max_line_search = r.count("schedule.lbfgs.max_line_search");

    c.decomposition.interface_points = r.count("decomposition.interface_points");
    c.decomposition.split = r.number("decomposition.split");
    c.analysis.grid = r.count("analysis.grid");
    c.analysis.norm = analysis::parse_norm_kind(r.text("analysis.norm"));
    c.analysis.times = r.numbers("analysis.times");
    c.reference_path = r.text("reference.path");

    validate(c);
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    return from_json(doc);
}

ExperimentConfig load_config(const std::string& preset_or_path) {
    for (Experiment e : kExperiments)
        if (to_string(e) == preset_or_path) return preset(e);
    std::ifstream in(preset_or_path);
    if (!in) throw ConfigError("'" + preset_or_path + "' is neither a preset name nor a readable file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

ExperimentConfig apply_override(const ExperimentConfig& c, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    if (key == "experiment") throw ConfigError("the experiment cannot be overridden; load another preset");
    json patch = value;
    std::size_t end = key.size();
    while (true) {
        const std::size_t dot = key.rfind('.', end - 1);
        const std::size_t start = dot == std::string::npos ? 0 : dot + 1;
        const std::string part = key.substr(start, end - start);
        if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
        patch = json{{part, patch}};
        if (dot == std::string::npos) break;
        end = dot;
    }
    json base = to_json(c);
    merge_strict(base, patch, "");
    return from_json(base);
}

std::string serialize(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : serialize(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate(const ExperimentConfig& c) {
    const auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(!c.network.hidden.empty(), "network.hidden needs at least one layer");
    require(c.network.scale_n > 0.0, "network.scale_n must be positive");
    require(c.network.alpha_clamp > 0.0 && c.network.alpha_clamp < 1.0, "network.alpha_clamp must lie in (0, 1)");
    require(c.threads >= 1, "threads must be at least 1");
    require(c.method.epsilon > 0.0, "method.epsilon must be positive");
    for (double w : c.weights.w) require(std::isfinite(w) && w >= 0.0, "loss weights must be finite and non-negative");
    require(c.dw_lambda > 0.0 && c.dw_lambda <= 1.0, "dynamic.lambda must lie in (0, 1]");
    require(c.dw_period >= 1, "dynamic.period must be at least 1");
    const auto& s = c.sampling;
    require(s.residual > 0, "sampling.residual must be positive");
    require(s.gradient > 0, "sampling.gradient must be positive");
    require(s.inflow > 0, "sampling.inflow must be positive");
    require(s.pressure > 0, "sampling.pressure must be positive");
    require(s.fd_h > 0.0, "sampling.fd_h must be positive");
    require(s.noise >= 0.0, "sampling.noise must be non-negative");
    require(s.gradient_band > 0.0, "sampling.gradient_band must be positive");
    require(s.quadrature_panels >= 1 && s.quadrature_order >= 1, "quadrature panels and order must be positive");
    require(c.geometry.box.xmax > c.geometry.box.xmin && c.geometry.box.ymax > c.geometry.box.ymin,
            "geometry.box must have positive extent");
    require(c.geometry.theta_deg > 0.0 && c.geometry.theta_deg < 45.0, "geometry.theta_deg must lie in (0, 45)");
    require(c.analysis.grid >= 2, "analysis.grid must be at least 2");
    require(c.inlet.admissible(), "inlet state must have positive density and pressure");
    c.schedule.validate();
    if (c.method.xpinn) require(c.decomposition.interface_points >= 2, "decomposition.interface_points must be at least 2");
    if (c.method.wall_slip) require(s.wall_slip > 0, "sampling.wall_slip must be positive when the wall-slip term is on");

    switch (c.experiment) {
        case Experiment::Smooth:
            require(!c.method.global_conservation, "global conservation terms apply to steady experiments only");
            require(!c.method.wall_slip, "the smooth experiment has no wall");
            require(!c.analysis.times.empty(), "analysis.times must list at least one time for the smooth experiment");
            for (double t : c.analysis.times) require(t >= 0.0 && t <= 1.0, "analysis.times must lie in [0, 1]");
            break;
        case Experiment::Expansion:
            require(c.geometry.region_d.size() >= 3, "geometry.region_d needs at least 3 vertices");
            break;
        case Experiment::Oblique:
            require(s.pressure == 1, "the oblique experiment uses a single pressure point (sampling.pressure = 1)");
            require(c.decomposition.split > 0.0, "decomposition.split (shock band half-width) must be positive");
            break;
        case Experiment::Bow:
            require(c.geometry.region_d.size() >= 3, "geometry.region_d needs at least 3 vertices");
            require(c.geometry.radius > 0.0, "geometry.radius must be positive");
            require(c.geometry.box.xmin < -c.geometry.radius && c.geometry.box.ymin < -c.geometry.radius &&
                        c.geometry.box.ymax > c.geometry.radius,
                    "geometry.box must contain the upstream half of the cylinder");
            break;
    }
}

// --- geometry of each experiment --------------------------------------------------------

namespace {

oracles::ExpansionCase expansion_case(const ExperimentConfig& c) {
    oracles::ExpansionCase ec;
    ec.geometry.corner = {c.geometry.box.xmin, c.geometry.box.ymin};
    ec.geometry.theta = oracles::radians(c.geometry.theta_deg);
    ec.geometry.wall = c.geometry.wall;
    ec.geometry.length = c.geometry.box.width();
    ec.geometry.top = c.geometry.box.height();
    ec.inlet = c.inlet;
    return ec;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    // splitmix64 finalizer of the combined value
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

enum SeedTag : std::uint64_t { kResidual = 1, kGradient, kInflow, kPressure, kWall, kNoise, kNetwork = 100 };

physics::ReferenceScales scales_for(const ExperimentConfig& c) {
    if (c.experiment == Experiment::Smooth) return {};
    return {c.inlet.rho, std::hypot(c.inlet.u, c.inlet.v), 1.0};
}

geom::Curve vertical_cut(double x, const geom::Box& b) {
    const double pad = b.height() + 1.0;
    return geom::Curve::segment({x, b.ymax + pad}, {x, b.ymin - pad});
}

}  // namespace

double BowShockShape::standoff() const { return 0.386 * radius * std::exp(4.67 / (mach * mach)); }

double BowShockShape::vertex_radius() const { return 1.386 * radius * std::exp(1.8 / std::pow(mach - 1.0, 0.75)); }

double BowShockShape::x_at(double y) const {
    const double mu = std::asin(1.0 / mach);
    const double rc = vertex_radius();
    const double t = std::tan(mu);
    return -radius - standoff() + rc / (t * t) * (std::sqrt(1.0 + y * y * t * t / (rc * rc)) - 1.0);
}

geom::Region experiment_domain(const ExperimentConfig& c) {
    const geom::Box& b = c.geometry.box;
    switch (c.experiment) {
        case Experiment::Smooth: return geom::Region(geom::Polygon::rectangle(b), {}, geom::TimeInterval{0.0, 1.0});
        case Experiment::Expansion: return expansion_case(c).geometry.region();
        case Experiment::Oblique: return geom::Region(geom::Polygon::rectangle(b));
        case Experiment::Bow: return geom::Region(geom::Polygon::rectangle(b), {geom::Disk{{0.0, 0.0}, c.geometry.radius}});
    }
    throw ConfigError("unknown experiment");
}

geom::Curve boundary_loop(const ExperimentConfig& c) {
    const geom::Box& b = c.geometry.box;
    switch (c.experiment) {
        case Experiment::Smooth: throw ConfigError("the smooth experiment has no steady boundary loop");
        case Experiment::Expansion: {
            const auto ec = expansion_case(c);
            const std::vector<Point> v{{b.xmin, b.ymin}, {b.xmax, ec.geometry.wall_y(b.xmax)}, {b.xmax, b.ymax},
                                       {b.xmin, b.ymax}, {b.xmin, b.ymin}};
            return geom::Curve::polyline(v);
        }
        case Experiment::Oblique: {
            const std::vector<Point> v{{b.xmin, b.ymin}, {b.xmax, b.ymin}, {b.xmax, b.ymax}, {b.xmin, b.ymax},
                                       {b.xmin, b.ymin}};
            return geom::Curve::polyline(v);
        }
        case Experiment::Bow: {
            const double R = c.geometry.radius;
            const std::vector<Point> lower{{b.xmin, b.ymin}, {b.xmax, b.ymin}, {b.xmax, -R}};
            const std::vector<Point> upper{{b.xmax, R}, {b.xmax, b.ymax}, {b.xmin, b.ymax}, {b.xmin, b.ymin}};
            geom::Curve loop = geom::Curve::polyline(lower);
            loop.append(geom::Curve::arc({0.0, 0.0}, R, -0.5 * std::numbers::pi, -1.5 * std::numbers::pi));
            loop.append(geom::Curve::polyline(upper));
            return loop;
        }
    }
    throw ConfigError("unknown experiment");
}

decomp::DecompositionLayout build_decomposition(const ExperimentConfig& c) {
    const geom::Region domain = experiment_domain(c);
    decomp::DecompositionLayout layout;
    if (!c.method.xpinn) {
        layout.decomposition = decomp::Decomposition(domain, {});
        layout.subdomains = {decomp::SubdomainSpec{0, {}, 0}};
        return layout;
    }
    const geom::Box& b = c.geometry.box;
    std::vector<geom::Curve> cuts;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    switch (c.experiment) {
        case Experiment::Smooth:
        case Experiment::Expansion:
            if (!(c.decomposition.split > b.xmin && c.decomposition.split < b.xmax))
                throw ConfigError("decomposition.split must lie inside the domain");
            cuts.push_back(vertical_cut(c.decomposition.split, b));
            pairs.emplace_back(0, 1);
            break;
        case Experiment::Oblique: {
            const auto oc = oracles::oblique_case_from_pre(c.inlet, oracles::radians(c.geometry.theta_deg));
            const Point t{std::cos(oc.beta), std::sin(oc.beta)};
            const Point n{-t.y, t.x};
            const double L = 4.0 * std::max(b.width(), b.height());
            const double d = c.decomposition.split;
            for (double offset : {-d, d}) {
                const Point o = offset * n;
                cuts.push_back(geom::Curve::segment(o - L * t, o + L * t));
            }
            pairs = {{0, 1}, {1, 2}};
            break;
        }
        case Experiment::Bow: {
            const BowShockShape shape{c.geometry.radius, std::hypot(c.inlet.u, c.inlet.v) / oracles::sound_speed(c.inlet)};
            std::vector<Point> pts;
            const double y0 = b.ymax + 0.5, y1 = b.ymin - 0.5;
            const std::size_t n = 200;
            for (std::size_t k = 0; k <= n; ++k) {
                const double y = y0 + (y1 - y0) * static_cast<double>(k) / static_cast<double>(n);
                pts.push_back({shape.x_at(y) - c.decomposition.split, y});
            }
            cuts.push_back(geom::Curve::polyline(pts));
            pairs.emplace_back(0, 1);
            break;
        }
    }
    layout.decomposition = decomp::Decomposition(domain, cuts);
    for (std::size_t q = 0; q <= cuts.size(); ++q) layout.subdomains.push_back({q, {}, 0});
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        decomp::InterfaceSpec spec;
        spec.a = pairs[k].first;
        spec.b = pairs[k].second;
        spec.curve = decomp::clip_to_domain(cuts[k], domain);
        spec.points = c.decomposition.interface_points;
        spec.average = c.method.interface_average;
        spec.residual = c.method.interface_residual;
        spec.flux = c.method.flux_continuity && c.experiment != Experiment::Smooth;
        layout.interfaces.push_back(std::move(spec));
    }
    return layout;
}

// --- point sets ------------------------------------------------------------------

namespace {

PointSet make_set(Role role, std::size_t dim, std::size_t n) {
    PointSet s;
    s.role = role;
    s.coords.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
    s.targets.resize(static_cast<Eigen::Index>(sampling::target_width(role)), static_cast<Eigen::Index>(n));
    return s;
}

/// Uniform rejection sampling of `count` points in `domain` that satisfy `keep`.
PointSet sample_where(const geom::Region& domain, const std::function<bool(Point)>& keep, std::size_t count,
                      std::uint64_t seed, Role role) {
    const geom::Box b = domain.bounds();
    PointSet s = make_set(role, 2, count);
    s.seed = seed;
    s.method = "uniform";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(b.xmin, b.xmax), uy(b.ymin, b.ymax);
    std::size_t n = 0, attempts = 0;
    while (n < count) {
        if (++attempts > 2000 * count + 100000) throw ConfigError("gradient-data region D has no area inside the domain");
        const Point p{ux(rng), uy(rng)};
        if (!domain.contains(p) || !keep(p)) continue;
        s.coords(0, static_cast<Eigen::Index>(n)) = p.x;
        s.coords(1, static_cast<Eigen::Index>(n)) = p.y;
        ++n;
    }
    return s;
}

std::vector<double> state_vector(const physics::PrimitiveState& w) { return {w.rho, w.u, w.v, w.p}; }

std::array<double, 3> point3(std::span<const double> x) {
    return {x[0], x[1], x.size() > 2 ? x[2] : 0.0};
}

/// Closed-form gradient of a density that depends only on the polar angle about `corner`.
std::array<double, 2> angular_gradient(const oracles::ExpansionCase& ec, const physics::ReferenceScales& sc, Point p) {
    const Point r = p - ec.geometry.corner;
    const double r2 = geom::dot(r, r);
    if (r2 < 1e-24) return {0.0, 0.0};
    const double phi = std::atan2(r.y, r.x);
    const auto rho_at = [&](double a) {
        return physics::nondimensionalize(oracles::expansion_exact(ec, ec.geometry.corner + Point{std::cos(a), std::sin(a)},
                                                                   false),
                                          sc)
            .rho;
    };
    const double lead = ec.lead_angle(), tail = ec.tail_angle();
    if (phi >= lead || phi <= tail) return {0.0, 0.0};
    const double h = std::min({1e-6, 0.5 * (lead - phi), 0.5 * (phi - tail)});
    const double drho = (rho_at(phi + h) - rho_at(phi - h)) / (2.0 * h);
    return {-drho * r.y / r2, drho * r.x / r2};
}

}  // namespace

nn::Locator Setup::locator() const {
    return [d = layout.decomposition](std::span<const double> x) { return d.classify({x[0], x[1]}).owners; };
}

analysis::FieldFunction Setup::predictor(std::span<const nn::NetworkParams> nets) const {
    std::vector<nn::NetworkParams> copy(nets.begin(), nets.end());
    const nn::Locator loc = locator();
    return [copy = std::move(copy), loc](std::span<const double> x) {
        const nn::NetworkOutput o = nn::stitched_forward(copy, loc, x);
        return physics::PrimitiveState{o.rho.value, o.u.value, o.v.value, o.p.value};
    };
}

std::vector<PointSet> Setup::all_point_sets() const {
    std::vector<PointSet> out;
    for (const auto& d : problem.subdomains)
        for (const auto& s : d.sets) out.push_back(s);
    for (const auto& i : problem.interfaces) out.push_back(i.points);
    return out;
}

Setup build_setup(const ExperimentConfig& c) {
    validate(c);
    Setup st;
    st.config = c;
    st.scales = scales_for(c);
    st.domain = experiment_domain(c);
    st.layout = build_decomposition(c);
    const auto& sc = st.scales;
    const auto& S = c.sampling;
    const std::uint64_t seed = c.seed;
    const bool unsteady = c.experiment == Experiment::Smooth;
    const std::size_t dim = unsteady ? 3 : 2;
    const geom::Box& box = c.geometry.box;

    // Reference solution and the density used for gradient data.
    std::function<physics::PrimitiveState(Point, double)> exact;
    sampling::SchlierenSpec schlieren;
    schlieren.method = S.gradient_method;
    schlieren.h = S.fd_h;
    switch (c.experiment) {
        case Experiment::Smooth:
            exact = [](Point p, double t) { return oracles::smooth_exact(p.x, p.y, t); };
            schlieren.analytic = [](double x, double y, double t) {
                const auto g = oracles::smooth_density_gradient(x, y, t);
                return std::array<double, 2>{g[0], g[1]};
            };
            break;
        case Experiment::Expansion: {
            st.expansion = expansion_case(c);
            const oracles::ExpansionCase ec = *st.expansion;
            exact = [ec, sc](Point p, double) { return physics::nondimensionalize(oracles::expansion_exact(ec, p, false), sc); };
            schlieren.analytic = [ec, sc](double x, double y, double) { return angular_gradient(ec, sc, {x, y}); };
            break;
        }
        case Experiment::Oblique: {
            st.oblique = oracles::oblique_case_from_pre(c.inlet, oracles::radians(c.geometry.theta_deg));
            const oracles::ObliqueShockCase oc = *st.oblique;
            exact = [oc, sc](Point p, double) { return physics::nondimensionalize(oracles::oblique_exact(oc, p), sc); };
            schlieren.analytic = [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; };
            if (S.fd_one_sided) schlieren.discontinuity = [oc](Point p) { return oc.signed_distance(p); };
            break;
        }
        case Experiment::Bow: {
            if (c.reference_path.empty())
                throw IngestionError("the bow experiment needs a reference field (set reference.path)");
            if (!std::filesystem::exists(c.reference_path))
                throw IngestionError("reference field '" + c.reference_path + "' does not exist");
            oracles::ReferenceField field = oracles::load_reference_field(c.reference_path, "csv", st.domain);
            if (field.units() == oracles::Units::SI) field = field.nondimensionalized(sc);
            st.reference_field = field;
            const auto f = std::make_shared<const oracles::ReferenceField>(std::move(field));
            exact = [f](Point p, double) { return f->interpolate(p); };
            schlieren.analytic = [f](double x, double y, double) { return f->density_gradient({x, y}); };
            schlieren.method = sampling::GradientMethod::Analytic;
            break;
        }
    }
    schlieren.density = [exact](double x, double y, double t) { return exact({x, y}, t).rho; };
    st.reference = [exact](std::span<const double> x) {
        const auto p = point3(x);
        return exact({p[0], p[1]}, p[2]);
    };

    std::vector<PointSet> sets;

    // Residual points.
    sets.push_back(sampling::sample_domain(st.domain, S.residual, derive_seed(seed, kResidual), S.strategy, Role::Residual));

    // Density-gradient data.
    {
        PointSet where;
        switch (c.experiment) {
            case Experiment::Smooth: {
                sampling::BoundarySpec spec;
                spec.role = Role::Interface;
                spec.time = geom::TimeInterval{0.0, 1.0};
                where = sampling::sample_boundary(geom::Curve::segment({box.xmin, box.ymin}, {box.xmax, box.ymax}),
                                                  S.gradient, derive_seed(seed, kGradient), spec);
                break;
            }
            case Experiment::Oblique: {
                const auto oc = *st.oblique;
                const double band = S.gradient_band;
                where = sample_where(st.domain, [&](Point p) { return std::abs(oc.signed_distance(p)) < band; },
                                     S.gradient, derive_seed(seed, kGradient), Role::GradientData);
                break;
            }
            case Experiment::Expansion:
            case Experiment::Bow: {
                const geom::Polygon d(c.geometry.region_d);
                where = sample_where(st.domain, [&](Point p) { return d.contains(p); }, S.gradient,
                                     derive_seed(seed, kGradient), Role::GradientData);
                break;
            }
        }
        PointSet g = sampling::synth_schlieren(schlieren, std::move(where));
        g.seed = derive_seed(seed, kGradient);
        sampling::add_noise(g, S.noise, derive_seed(seed, kNoise));
        sets.push_back(std::move(g));
    }

    // Inflow data.
    {
        sampling::BoundarySpec spec;
        spec.role = Role::Inflow;
        spec.targets = [&](Point p, double t) { return state_vector(exact(p, t)); };
        if (unsteady) {
            spec.time = geom::TimeInterval{0.0, 1.0};
            const std::size_t third = S.inflow / 3, rest = S.inflow - 2 * third;
            std::vector<PointSet> parts;
            if (third > 0) {
                parts.push_back(sampling::sample_boundary(geom::Curve::segment({box.xmin, box.ymin}, {box.xmin, box.ymax}),
                                                          third, derive_seed(seed, kInflow), spec));
                parts.push_back(sampling::sample_boundary(geom::Curve::segment({box.xmin, box.ymin}, {box.xmax, box.ymin}),
                                                          third, derive_seed(seed, kInflow + 10), spec));
            }
            const geom::Region plane(geom::Polygon::rectangle(box));
            PointSet initial = sampling::sample_domain(plane, rest, derive_seed(seed, kInflow + 20), S.strategy, Role::Inflow);
            PointSet lifted = make_set(Role::Inflow, 3, rest);
            lifted.coords.topRows(2) = initial.coords;
            lifted.coords.row(2).setZero();
            for (std::size_t i = 0; i < rest; ++i)
                lifted.targets.col(static_cast<Eigen::Index>(i)) =
                    Eigen::Map<const Eigen::Vector4d>(state_vector(exact(initial.point(i), 0.0)).data());
            parts.push_back(std::move(lifted));
            PointSet all = sampling::concatenate(parts);
            all.seed = derive_seed(seed, kInflow);
            all.method = "uniform";
            sets.push_back(std::move(all));
        } else {
            const geom::Curve edge = geom::Curve::segment({box.xmin, box.ymin}, {box.xmin, box.ymax});
            sets.push_back(sampling::sample_boundary(edge, S.inflow, derive_seed(seed, kInflow), spec));
        }
        sampling::add_noise(sets.back(), S.noise, derive_seed(seed, kNoise + 1));
    }

    // Pressure data.
    {
        PointSet p;
        switch (c.experiment) {
            case Experiment::Smooth: {
                p = make_set(Role::WallPressure, 3, S.pressure);
                std::mt19937_64 rng(derive_seed(seed, kPressure));
                std::uniform_real_distribution<double> u01(0.0, 1.0);
                for (std::size_t i = 0; i < S.pressure; ++i) {
                    const auto k = static_cast<Eigen::Index>(i);
                    const double t = u01(rng);
                    p.coords.col(k) << c.geometry.p_star.x, c.geometry.p_star.y, t;
                    p.targets(0, k) = exact(c.geometry.p_star, t).p;
                }
                p.method = "uniform";
                break;
            }
            case Experiment::Oblique:
                p = make_set(Role::WallPressure, 2, 1);
                p.coords.col(0) << c.geometry.p_star.x, c.geometry.p_star.y;
                p.targets(0, 0) = exact(c.geometry.p_star, 0.0).p;
                p.method = "point";
                break;
            case Experiment::Expansion:
            case Experiment::Bow: {
                sampling::BoundarySpec spec;
                spec.role = Role::WallPressure;
                spec.targets = [&](Point q, double t) { return std::vector<double>{exact(q, t).p}; };
                geom::Curve wall;
                if (c.experiment == Experiment::Expansion) {
                    const auto& g = st.expansion->geometry;
                    wall = geom::Curve::segment(g.corner, {box.xmax, g.wall_y(box.xmax)});
                } else {
                    wall = geom::Curve::arc({0.0, 0.0}, c.geometry.radius, 0.5 * std::numbers::pi, 1.5 * std::numbers::pi);
                }
                p = sampling::sample_boundary(wall, S.pressure, derive_seed(seed, kPressure), spec);
                break;
            }
        }
        p.seed = derive_seed(seed, kPressure);
        sampling::add_noise(p, S.noise, derive_seed(seed, kNoise + 2));
        sets.push_back(std::move(p));
    }

    // Wall no-penetration points.
    if (c.experiment == Experiment::Bow) {
        sampling::BoundarySpec spec;
        spec.role = Role::WallSlip;
        const double R = c.geometry.radius;
        spec.normal = [R](Point q) { return (1.0 / R) * q; };
        const geom::Curve wall =
            geom::Curve::arc({0.0, 0.0}, c.geometry.radius, 0.5 * std::numbers::pi, 1.5 * std::numbers::pi);
        st.wall = sampling::sample_boundary(wall, std::max<std::size_t>(S.wall_slip, 1), derive_seed(seed, kWall), spec);
        if (c.method.wall_slip) sets.push_back(st.wall);
    }

    // Distribute every set over the subdomains.
    const std::size_t nsub = st.layout.decomposition.subdomain_count();
    st.problem.subdomains.resize(nsub);
    for (const PointSet& s : sets) {
        std::vector<std::vector<std::size_t>> cols(nsub);
        for (std::size_t i = 0; i < s.size(); ++i)
            cols[st.layout.decomposition.classify(s.point(i)).owners.front()].push_back(i);
        for (std::size_t q = 0; q < nsub; ++q)
            if (!cols[q].empty()) {
                PointSet part = s.select(cols[q]);
                part.seed = s.seed;
                part.method = s.method;
                st.problem.subdomains[q].sets.push_back(std::move(part));
            }
    }

    // Interfaces.
    for (const auto& spec : st.layout.interfaces) {
        loss::InterfaceData I;
        I.a = spec.a;
        I.b = spec.b;
        I.points = sampling::sample_interface(spec.curve, spec.points,
                                              unsteady ? std::optional<geom::TimeInterval>(geom::TimeInterval{0.0, 1.0})
                                                       : std::nullopt);
        I.normals.resize(2, static_cast<Eigen::Index>(spec.points));
        for (std::size_t k = 0; k < spec.points; ++k) {
            const double s = spec.points == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(spec.points - 1);
            const Point n = spec.curve.right_normal(s);
            I.normals(0, static_cast<Eigen::Index>(k)) = n.x;
            I.normals(1, static_cast<Eigen::Index>(k)) = n.y;
        }
        I.average = spec.average;
        I.residual = spec.residual;
        I.flux = spec.flux;
        st.problem.interfaces.push_back(std::move(I));
    }

    if (c.method.global_conservation)
        st.problem.quadrature = loss::make_global_quadrature(boundary_loop(c), S.quadrature_panels, S.quadrature_order,
                                                             &st.layout.decomposition);

    // Networks.
    std::vector<std::size_t> sizes{dim};
    sizes.insert(sizes.end(), c.network.hidden.begin(), c.network.hidden.end());
    sizes.push_back(nn::kOutputWidth);
    for (std::size_t q = 0; q < nsub; ++q) {
        nn::NetworkParams net = nn::xavier_init(sizes, derive_seed(seed, kNetwork + q), c.network.scale_n, c.network.alpha_clamp);
        net.set_adaptive(c.network.adaptive);
        if (c.network.inlet_bias) {
            const auto w = physics::nondimensionalize(c.inlet, st.scales);
            for (std::size_t k = 0; k < nn::kOutputWidth; ++k) net.bias(net.depth() - 1)[static_cast<Eigen::Index>(k)] = w[k];
        }
        st.problem.nets.push_back(std::move(net));
    }

    auto& o = st.problem.options;
    o.unsteady = unsteady;
    o.entropy = c.method.entropy;
    o.entropy_mode = c.method.entropy_mode;
    o.epsilon = c.method.epsilon;
    o.threads = c.threads;
    o.required_roles = {Role::Residual, Role::GradientData, Role::Inflow, Role::WallPressure};
    if (c.method.wall_slip) o.required_roles.push_back(Role::WallSlip);
    st.problem.xpinn = c.method.xpinn;
    st.problem.validate();

    // Evaluation grids.
    if (unsteady) {
        for (double t : c.analysis.times) st.grids.push_back(analysis::make_grid(st.domain, c.analysis.grid, c.analysis.grid, t));
    } else {
        st.grids.push_back(analysis::make_grid(st.domain, c.analysis.grid, c.analysis.grid));
    }
    return st;
}

}  // namespace shockpinn::exp
