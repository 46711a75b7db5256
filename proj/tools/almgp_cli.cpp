// almgp: run active-learning experiments and inspect their outputs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "almgp/benchmarks.hpp"
#include "almgp/error.hpp"
#include "almgp/harness.hpp"

namespace {

using namespace almgp;

// Single line on stderr that scripts can parse.
int report_failure(std::string_view kind, std::string_view message) {
    std::string flat(message);
    for (char& c : flat) {
        if (c == '\n') c = ' ';
    }
    std::fprintf(stderr, "almgp-error kind=%.*s message=\"%s\"\n", static_cast<int>(kind.size()), kind.data(),
                 flat.c_str());
    return 2;
}

struct RunFlags {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::size_t> repetitions;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    std::optional<std::size_t> threads;
    std::vector<std::string> strategies;
    bool no_timing = false;
};

int cmd_run(const RunFlags& flags) {
    std::ifstream probe(flags.config_path);
    if (!probe) {
        throw Error(ErrorKind::io, "cannot read config " + flags.config_path);
    }
    std::string text((std::istreambuf_iterator<char>(probe)), std::istreambuf_iterator<char>());
    for (const auto& o : flags.overrides) {
        text = apply_override(text, o);
    }
    ExperimentConfig cfg = ExperimentConfig::from_json(text);
    if (flags.repetitions) cfg.repetitions = *flags.repetitions;
    if (flags.seed) cfg.base_seed = *flags.seed;
    if (flags.output) cfg.output_dir = *flags.output;
    if (flags.threads) cfg.threads = *flags.threads;
    if (flags.no_timing) cfg.record_timing = false;
    if (!flags.strategies.empty()) {
        cfg.strategies.clear();
        for (const auto& s : flags.strategies) cfg.strategies.push_back(parse_strategy(s));
    }

    const ExperimentResult result = run_experiment(cfg);
    std::printf("output: %s\n", result.output_dir.string().c_str());
    for (auto s : cfg.strategies) {
        const auto m = result.mean_final_rmse(s);
        std::printf("%s mean final test RMSE: %s\n", std::string(to_string(s)).c_str(),
                    m ? format_number(*m).c_str() : "n/a");
    }
    std::size_t failed = 0;
    for (const auto& run : result.runs) {
        if (run.failure) {
            ++failed;
            std::fprintf(stderr, "run %zu (%s): %s\n", run.run_id, std::string(to_string(run.strategy)).c_str(),
                         run.failure->c_str());
        }
    }
    if (cfg.record_timing) std::printf("wall: %.1f s\n", result.wall_seconds);
    if (failed > 0) {
        return report_failure("run_failure", std::to_string(failed) + " run(s) failed; see summary.json");
    }
    return 0;
}

int cmd_oracle(const std::string& problem_name, const std::vector<double>& coords, bool physical) {
    const Problem p = make_problem(parse_problem(problem_name));
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size()));
    double value = 0.0;
    if (p.name == ProblemName::sphere3d && x.size() == 2) {
        value = eval_sphere3d(x(0), x(1)).value;  // (v, alpha)
    } else if (p.name == ProblemName::borehole8d && physical) {
        if (x.size() != 8) throw Error(ErrorKind::shape, "borehole takes 8 inputs");
        value = eval_borehole(x);
    } else {
        value = p.truth(x);
    }
    std::printf("%s\n", format_number(value).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active learning with manifold Gaussian processes"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", run_flags.config_path, "experiment config (JSON)")->required();
    run->add_option("--set", run_flags.overrides, "override a config value, e.g. optimizer.learning_rate=0.5");
    run->add_option("--repetitions", run_flags.repetitions, "number of repetitions");
    run->add_option("--seed", run_flags.seed, "base seed");
    run->add_option("--output", run_flags.output, "output directory");
    run->add_option("--threads", run_flags.threads, "worker threads (0 = all cores)");
    run->add_option("--strategy", run_flags.strategies, "strategies to run (alc, random)");
    run->add_flag("--no-timing", run_flags.no_timing, "write wall_ms as 0 for reproducible files");

    std::string dir;
    auto* agg = app.add_subcommand("aggregate", "recompute aggregate.csv and rmse.svg from records.csv");
    agg->add_option("dir", dir, "experiment output directory")->required();
    auto* plot = app.add_subcommand("plot", "re-emit rmse.svg from aggregate.csv");
    plot->add_option("dir", dir, "experiment output directory")->required();

    std::string problem;
    std::vector<double> coords;
    bool physical = false;
    auto* oracle = app.add_subcommand("oracle", "evaluate a benchmark function at one point");
    oracle->add_option("problem", problem, "trig1d, synthetic2d, sphere3d or borehole8d")->required();
    oracle->add_option("point", coords, "coordinates")->required();
    oracle->add_flag("--physical", physical, "borehole inputs in physical units instead of [0,1]^8");

    auto* defaults = app.add_subcommand("defaults", "print the default config of a problem");
    defaults->add_option("problem", problem, "problem name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        return report_failure("usage", e.what());
    }

    try {
        if (*run) return cmd_run(run_flags);
        if (*agg) {
            const auto rows = aggregate_directory(dir);
            std::printf("%zu aggregate rows written to %s\n", rows.size(), dir.c_str());
            return 0;
        }
        if (*plot) {
            plot_directory(dir);
            return 0;
        }
        if (*oracle) return cmd_oracle(problem, coords, physical);
        if (*defaults) {
            std::cout << ExperimentConfig::defaults(parse_problem(problem)).to_json();
            return 0;
        }
    } catch (const Error& e) {
        return report_failure(to_string(e.kind()), e.what());
    } catch (const std::exception& e) {
        return report_failure("internal", e.what());
    }
    return 0;
}
