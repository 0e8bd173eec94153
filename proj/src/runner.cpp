#include "shockpinn/runner.hpp"

#include "shockpinn/error.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace shockpinn::run {

namespace fs = std::filesystem;
using exp::json;

namespace {

template <class F>
auto in_phase(const char* phase, F&& body) -> decltype(body()) {
    const auto tag = [phase](const std::exception& e) { return std::string(phase) + ": " + e.what(); };
    try {
        return body();
    } catch (const ConfigError& e) {
        throw ConfigError(tag(e));
    } catch (const IngestionError& e) {
        throw IngestionError(tag(e));
    } catch (const DivergenceError& e) {
        throw DivergenceError(tag(e));
    } catch (const AnalysisError& e) {
        throw AnalysisError(tag(e));
    } catch (const DomainError& e) {
        throw DomainError(tag(e));
    } catch (const ContractError& e) {
        throw ContractError(tag(e));
    } catch (const Error& e) {
        throw Error(tag(e));
    }
}

physics::PrimitiveState at(const analysis::FieldFunction& f, double x, double y) {
    const std::array<double, 2> p{x, y};
    return f(p);
}

json state_json(const physics::PrimitiveState& w) { return {{"rho", w.rho}, {"u", w.u}, {"v", w.v}, {"p", w.p}}; }

json per_variable(const std::array<double, 4>& a) {
    json j = json::object();
    for (std::size_t v = 0; v < 4; ++v) j[analysis::kVariables[v]] = a[v];
    return j;
}

std::array<double, 4> read_per_variable(const json& j) {
    std::array<double, 4> a{};
    for (std::size_t v = 0; v < 4; ++v) a[v] = j.at(analysis::kVariables[v]).get<double>();
    return a;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

json grid_signature(const exp::ExperimentConfig& c, const exp::Setup& s) {
    json times = json::array();
    std::size_t points = 0;
    for (const auto& g : s.grids) {
        if (g.time) times.push_back(*g.time);
        points += static_cast<std::size_t>(g.points.cols());
    }
    const auto& b = c.geometry.box;
    return {{"experiment", exp::to_string(c.experiment)},
            {"nx", c.analysis.grid},
            {"ny", c.analysis.grid},
            {"times", times},
            {"points", points},
            {"box", {b.xmin, b.xmax, b.ymin, b.ymax}},
            {"theta_deg", c.geometry.theta_deg},
            {"radius", c.geometry.radius}};
}

}  // namespace

ObliqueDiagnostics oblique_diagnostics(const exp::Setup& setup, const analysis::FieldFunction& predicted,
                                       double margin, std::size_t samples) {
    if (!setup.oblique) throw AnalysisError("oblique diagnostics need the oblique experiment");
    const auto& oc = *setup.oblique;
    ObliqueDiagnostics d;
    d.expected = physics::nondimensionalize(oc.post, setup.scales);
    const auto pre = physics::nondimensionalize(oc.pre, setup.scales);
    const geom::Box b = setup.domain.bounds();

    std::array<double, 4> sum{};
    const std::size_t n = 60;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const geom::Point p{b.xmin + b.width() * (static_cast<double>(i) + 0.5) / static_cast<double>(n),
                                b.ymin + b.height() * (static_cast<double>(j) + 0.5) / static_cast<double>(n)};
            if (oc.signed_distance(p) >= -margin) continue;
            const auto w = at(predicted, p.x, p.y);
            for (std::size_t v = 0; v < 4; ++v) sum[v] += w[v];
            ++d.plateau_points;
        }
    if (d.plateau_points == 0) throw AnalysisError("downstream plateau zone is empty");
    const double inv = 1.0 / static_cast<double>(d.plateau_points);
    d.plateau = {sum[0] * inv, sum[1] * inv, sum[2] * inv, sum[3] * inv};
    for (std::size_t v = 0; v < 4; ++v)
        d.plateau_relative[v] = std::abs(d.plateau[v] - d.expected[v]) / std::abs(d.expected[v]);

    const double jump = d.expected.rho - pre.rho;
    for (double x : {0.3, 0.7}) {
        ObliqueDiagnostics::Slice s;
        s.x = b.xmin + x * b.width();
        double lowest = 0.0, first = 0.0, last = 0.0;
        for (std::size_t k = 0; k < samples; ++k) {
            const double y = b.ymin + b.height() * static_cast<double>(k) / static_cast<double>(samples - 1);
            const double rho = at(predicted, s.x, y).rho;
            if (k == 0) {
                first = lowest = rho;
            } else {
                s.max_rise = std::max(s.max_rise, rho - lowest);
                lowest = std::min(lowest, rho);
            }
            last = rho;
        }
        s.drop = first - last;
        s.monotone = s.max_rise <= 0.05 * jump && s.drop >= 0.5 * jump;
        d.slices.push_back(s);
    }
    return d;
}

double wall_slip_rms(const exp::Setup& setup, const analysis::FieldFunction& predicted) {
    const auto& w = setup.wall;
    if (w.size() == 0) throw AnalysisError("experiment has no wall points");
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        const auto s = at(predicted, w.coords(0, c), w.coords(1, c));
        const double un = w.normals(0, c) * s.u + w.normals(1, c) * s.v;
        sum += un * un;
    }
    const auto inlet = physics::nondimensionalize(setup.config.inlet, setup.scales);
    return std::sqrt(sum / static_cast<double>(w.size())) / std::hypot(inlet.u, inlet.v);
}

std::string method_label(const exp::ExperimentConfig& c) {
    std::string s = c.method.xpinn ? "XPINN" : "PINN";
    if (c.network.adaptive) s += "+AA";
    if (c.method.dynamic_weights) s += "+DW";
    return s;
}

RunReport run(const exp::ExperimentConfig& config, const fs::path& directory, std::ostream* log) {
    const auto started = std::chrono::steady_clock::now();
    RunReport r;
    r.config = config;
    r.config_hash = exp::config_hash(config);
    r.directory = directory;
    const auto say = [log](const std::string& line) {
        if (log) *log << line << std::endl;
    };

    auto setup = in_phase("generate", [&] { return std::make_shared<exp::Setup>(exp::build_setup(config)); });
    r.setup = setup;
    const std::size_t nsub = setup->problem.nets.size();
    say("[generate] " + exp::to_string(config.experiment) + ", " + method_label(config) + ", " + std::to_string(nsub) +
        " network(s), " + std::to_string(setup->problem.parameter_count()) + " parameters");

    in_phase("emit", [&] {
        fs::create_directories(directory / "checkpoints");
        write_text(directory / "config.json", exp::serialize(config));
        sampling::write_point_sets(directory / "points.csv", setup->all_point_sets());
        return 0;
    });

    r.training = in_phase("train", [&] {
        std::ofstream history(directory / "loss_history.csv");
        if (!history) throw Error("cannot write loss_history.csv");
        opt::TrainOptions t;
        t.schedule = config.schedule;
        t.weights = config.weights;
        if (config.method.dynamic_weights) {
            loss::DynamicWeights dw;
            dw.weights = config.weights;
            dw.lambda = config.dw_lambda;
            dw.period = config.dw_period;
            t.dynamic = dw;
        }
        t.checkpoint_every = config.checkpoint_every;
        loss::Problem shape = setup->problem;
        t.checkpoint = [&](std::size_t iteration, std::span<const double> theta) {
            shape.unpack(theta);
            for (std::size_t q = 0; q < nsub; ++q) {
                char name[64];
                std::snprintf(name, sizeof name, "net-%zu-iter-%06zu.txt", q, iteration);
                nn::save_checkpoint(directory / "checkpoints" / name, shape.nets[q]);
            }
        };
        t.history = &history;
        say("[train] " + std::to_string(config.schedule.adam.iterations) + " Adam + " +
            std::to_string(config.schedule.lbfgs.iterations) + " L-BFGS iterations");
        return opt::train(setup->problem, setup->problem.pack(), t);
    });
    {
        loss::Problem best = setup->problem;
        best.unpack(r.training.theta);
        r.nets = best.nets;
    }
    say("[train] best loss " + std::to_string(r.training.best) + " at iteration " +
        std::to_string(r.training.best_iteration));

    in_phase("analyze", [&] {
        const analysis::FieldFunction predicted = setup->predictor(r.nets);
        r.errors = analysis::error_report(predicted, setup->reference, setup->grids, config.threads);
        r.errors.experiment = exp::to_string(config.experiment);
        r.errors.method = config.method.xpinn ? "XPINN" : "PINN";
        r.errors.adaptive_activation = config.network.adaptive;
        r.errors.dynamic_weights = config.method.dynamic_weights;
        for (const auto& I : setup->problem.interfaces) {
            const auto j = analysis::interface_jump(r.nets, I.a, I.b, I.points.coords);
            if (!j) continue;
            if (!r.interface_jump) r.interface_jump = std::array<double, 4>{};
            for (std::size_t v = 0; v < 4; ++v) (*r.interface_jump)[v] = std::max((*r.interface_jump)[v], (*j)[v]);
        }
        r.errors.interface_jump = r.interface_jump;
        if (setup->wall.size() > 0) r.wall_slip = wall_slip_rms(*setup, predicted);
        if (setup->oblique) r.oblique = oblique_diagnostics(*setup, predicted);
        return 0;
    });

    const auto finished = std::chrono::steady_clock::now();
    r.wall_seconds = std::chrono::duration<double>(finished - started).count();

    in_phase("emit", [&] {
        for (std::size_t q = 0; q < nsub; ++q)
            nn::save_checkpoint(directory / "checkpoints" / ("best-" + std::to_string(q) + ".txt"), r.nets[q]);
        analysis::write_field_csv(directory / "fields.csv", r.errors);
        write_text(directory / "summary.json", summary_json(r).dump(2) + "\n");
        return 0;
    });
    char line[160];
    std::snprintf(line, sizeof line, "[analyze] relative L2: rho %.3e  u %.3e  v %.3e  p %.3e", r.errors.relative_l2[0],
                  r.errors.relative_l2[1], r.errors.relative_l2[2], r.errors.relative_l2[3]);
    say(line);
    return r;
}

json summary_json(const RunReport& r) {
    json j;
    j["experiment"] = exp::to_string(r.config.experiment);
    j["method"] = method_label(r.config);
    j["xpinn"] = r.config.method.xpinn;
    j["adaptive_activation"] = r.config.network.adaptive;
    j["dynamic_weights"] = r.config.method.dynamic_weights;
    j["subdomains"] = r.nets.size();
    j["seed"] = r.config.seed;
    j["config_hash"] = r.config_hash;
    j["wall_seconds"] = r.wall_seconds;
    j["relative_l2"] = per_variable(r.errors.relative_l2);
    j["interface_jump"] = r.interface_jump ? per_variable(*r.interface_jump) : json(nullptr);
    j["wall_slip_rms"] = r.wall_slip ? json(*r.wall_slip) : json(nullptr);
    j["best_loss"] = r.training.best;
    j["best_iteration"] = r.training.best_iteration;
    if (r.training.lbfgs) {
        j["lbfgs"] = {{"status", opt::to_string(r.training.lbfgs->status)},
                      {"iterations", r.training.lbfgs->iterations},
                      {"evaluations", r.training.lbfgs->evaluations}};
    } else {
        j["lbfgs"] = nullptr;
    }
    json weights = json::object();
    for (std::size_t g = 0; g < loss::kGroupCount; ++g)
        weights[exp::group_key(static_cast<loss::Group>(g))] = r.training.final_weights.w[g];
    j["final_weights"] = weights;
    json norms = json::array();
    for (const auto& net : r.nets) norms.push_back(analysis::complexity_measure(net, r.config.analysis.norm));
    j["norms"] = {{"kind", analysis::to_string(r.config.analysis.norm)}, {"measures", norms}};
    if (r.oblique) {
        const auto& d = *r.oblique;
        json slices = json::array();
        for (const auto& s : d.slices)
            slices.push_back({{"x", s.x}, {"drop", s.drop}, {"max_rise", s.max_rise}, {"monotone", s.monotone}});
        j["oblique"] = {{"plateau", state_json(d.plateau)},
                        {"expected", state_json(d.expected)},
                        {"plateau_relative", per_variable(d.plateau_relative)},
                        {"plateau_points", d.plateau_points},
                        {"slices", slices}};
    }
    j["grid"] = grid_signature(r.config, *r.setup);
    j["files"] = {{"config", "config.json"},
                  {"history", "loss_history.csv"},
                  {"fields", "fields.csv"},
                  {"points", "points.csv"},
                  {"checkpoints", "checkpoints"}};
    return j;
}

Comparison compare(const std::vector<fs::path>& dirs) {
    if (dirs.size() < 2) throw AnalysisError("compare needs at least two run directories");
    Comparison c;
    json grid;
    std::optional<nn::NetworkParams> baseline;
    std::vector<nn::NetworkParams> subnets;
    std::vector<std::string> sources;
    std::optional<analysis::NormKind> kind;
    for (const auto& dir : dirs) {
        std::ifstream in(dir / "summary.json");
        if (!in) throw AnalysisError("no summary.json in " + dir.string());
        json s;
        try {
            s = json::parse(in);
        } catch (const json::parse_error& e) {
            throw AnalysisError(dir.string() + "/summary.json: " + e.what());
        }
        if (grid.is_null()) {
            grid = s.at("grid");
            c.experiment = s.at("experiment").get<std::string>();
        } else if (s.at("grid") != grid) {
            throw AnalysisError("runs use different evaluation grids: " + dirs.front().string() + " and " + dir.string());
        }
        ComparisonColumn col;
        col.label = s.at("method").get<std::string>();
        col.directory = dir;
        col.relative_l2 = read_per_variable(s.at("relative_l2"));
        c.columns.push_back(col);

        const auto k = analysis::parse_norm_kind(s.at("norms").at("kind").get<std::string>());
        if (!kind) kind = k;
        const std::size_t n = s.at("subdomains").get<std::size_t>();
        const bool xpinn = s.at("xpinn").get<bool>();
        const auto load = [&](std::size_t q) {
            return nn::load_checkpoint(dir / "checkpoints" / ("best-" + std::to_string(q) + ".txt"));
        };
        if (!xpinn && !baseline) {
            baseline = load(0);
            sources.push_back("baseline " + dir.string());
        } else if (xpinn && subnets.empty()) {
            for (std::size_t q = 0; q < n; ++q) subnets.push_back(load(q));
            sources.push_back("subnets " + dir.string());
        }
    }
    std::map<std::string, int> seen;
    for (auto& col : c.columns)
        if (++seen[col.label] > 1) col.label += " (" + col.directory.filename().string() + ")";
    if (baseline) {
        c.norms = analysis::complexity_norms(*baseline, subnets, *kind);
        for (std::size_t i = 0; i < sources.size(); ++i) c.norms_source += (i ? "; " : "") + sources[i];
    }
    return c;
}

void print_comparison(std::ostream& out, const Comparison& c) {
    char buf[64];
    out << "relative L2 error (" << c.experiment << ")\n";
    out << "var";
    for (const auto& col : c.columns) out << " | " << col.label;
    out << "\n";
    for (std::size_t v = 0; v < 4; ++v) {
        out << analysis::kVariables[v];
        for (const auto& col : c.columns) {
            std::snprintf(buf, sizeof buf, " | %.4e", col.relative_l2[v]);
            out << buf;
        }
        out << "\n";
    }
    if (c.norms) {
        out << "\nnorms (" << analysis::to_string(c.norms->kind) << " product, " << c.norms_source << ")\n";
        for (const auto& row : c.norms->rows) {
            std::snprintf(buf, sizeof buf, "%.2f%%", row.percent);
            out << row.label << " | " << buf << "\n";
        }
        if (c.norms->combined_percent) {
            std::snprintf(buf, sizeof buf, "%.2f%%", *c.norms->combined_percent);
            out << "XPINN total | " << buf << "\n";
        }
    }
}

}  // namespace shockpinn::run
