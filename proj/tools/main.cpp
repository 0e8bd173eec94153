#include "shockpinn/error.hpp"
#include "shockpinn/experiment.hpp"
#include "shockpinn/runner.hpp"
#include "shockpinn/selfcheck.hpp"
#include "shockpinn/svg.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace shockpinn;

struct RunArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::string out;
    bool quiet = false;
    bool dry = false;
};

exp::ExperimentConfig resolve(const RunArgs& a) {
    exp::ExperimentConfig c = exp::load_config(a.config);
    for (const auto& o : a.overrides) c = exp::apply_override(c, o);
    if (a.seed) c = exp::apply_override(c, "seed=" + std::to_string(*a.seed));
    if (a.threads) c = exp::apply_override(c, "threads=" + std::to_string(*a.threads));
    return c;
}

int do_run(const RunArgs& a) {
    const exp::ExperimentConfig c = resolve(a);
    if (a.dry) {
        std::cout << exp::serialize(c);
        return 0;
    }
    const std::filesystem::path dir = a.out.empty() ? std::filesystem::path(c.output) : std::filesystem::path(a.out);
    const run::RunReport r = run::run(c, dir, a.quiet ? nullptr : &std::cerr);
    std::cout << run::summary_json(r).dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-informed neural networks for inverse compressible Euler problems"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "Generate data, train, analyze and write a run directory");
    run_cmd->add_option("config", ra.config, "Preset name (smooth, expansion, oblique, bow) or JSON config path")
        ->required();
    run_cmd->add_option("--override,-o", ra.overrides, "dotted.key=value, applied in order")->take_all();
    run_cmd->add_option("--seed", ra.seed, "Base random seed");
    run_cmd->add_option("--threads", ra.threads, "Worker threads (1 gives bit-reproducible runs)");
    run_cmd->add_option("--out", ra.out, "Run directory (default: the config's output entry)");
    run_cmd->add_flag("--quiet,-q", ra.quiet, "No progress lines on stderr");
    run_cmd->add_flag("--print-config", ra.dry, "Print the resolved configuration and exit");

    std::vector<std::string> compare_dirs;
    auto* cmp_cmd = app.add_subcommand("compare", "Tabulate relative L2 errors and norms of finished runs");
    cmp_cmd->add_option("runs", compare_dirs, "Run directories")->required()->expected(2, -1);

    auto* check_cmd = app.add_subcommand("check", "Run the numerical self-test suite");

    std::string plot_dir, plot_out;
    auto* plot_cmd = app.add_subcommand("plot", "Write SVG field and loss figures for a run");
    plot_cmd->add_option("run", plot_dir, "Run directory")->required();
    plot_cmd->add_option("--out", plot_out, "Figure directory (default: <run>/figures)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ConfigError("").exit_code();
    }

    try {
        if (*run_cmd) return do_run(ra);
        if (*cmp_cmd) {
            std::vector<std::filesystem::path> dirs(compare_dirs.begin(), compare_dirs.end());
            run::print_comparison(std::cout, run::compare(dirs));
            return 0;
        }
        if (*check_cmd) return selfcheck::run_all(std::cout) ? 0 : 1;
        if (*plot_cmd) {
            const std::filesystem::path out = plot_out.empty() ? std::filesystem::path(plot_dir) / "figures" : std::filesystem::path(plot_out);
            for (const auto& f : plot::plot_run(plot_dir, out)) std::cout << f.string() << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
