// Command-line runner for the trust testbed experiments.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "trustbed/experiments.hpp"

namespace {

void printSummary(const trustbed::ExperimentResult& result) {
    fmt::print("experiment {} ({}), {} runs x {} rounds\n", result.config.id,
               trustbed::describeExperiment(result.config.id), result.config.nisr, result.config.sim.rounds);
    for (const auto& c : result.summary) {
        fmt::print("  {:<8} [{:>4}, {:>4}]  mean {:>9}  ({} points)\n", trustbed::nameOf(c.group), c.window.first,
                   c.window.last, c.mean ? fmt::format("{:.3f}", *c.mean) : std::string("-"), c.points);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seeded open-MAS trust testbed: CA vs FIRE vs no trust model"};

    int experiment = 1;
    bool all = false;
    bool list = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<int> rounds;
    std::string out;
    std::string configFile;
    std::vector<std::string> sets;
    std::size_t jobs = 1;
    bool quiet = false;

    app.add_option("-e,--experiment", experiment, "Experiment id (1-11)")->check(CLI::Range(1, 11));
    app.add_flag("--all", all, "Run every registered experiment");
    app.add_flag("--list", list, "List registered experiments and exit");
    app.add_option("--seed", seed, "Base seed; run i uses seed + i");
    app.add_option("--runs", runs, "Number of independent runs (NISR)");
    app.add_option("--rounds", rounds, "Simulation rounds per run");
    app.add_option("--out", out, "Output directory (default $TRUSTBED_OUT_DIR or ./results)");
    app.add_option("--config", configFile, "key=value config file applied over the registry entry");
    app.add_option("--set", sets, "Override a single config key (key=value); repeatable");
    app.add_option("-j,--jobs", jobs, "Worker threads for independent runs")->check(CLI::PositiveNumber);
    app.add_flag("-q,--quiet", quiet, "Suppress progress output");

    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (int id = trustbed::kFirstExperiment; id <= trustbed::kLastExperiment; ++id) {
            const auto c = trustbed::experimentConfig(id);
            fmt::print("{:>2}  N={:<5} NISR={:<3} {}\n", id, c.sim.rounds, c.nisr, trustbed::describeExperiment(id));
        }
        return EXIT_SUCCESS;
    }

    if (out.empty()) {
        const char* env = std::getenv("TRUSTBED_OUT_DIR");
        out = (env != nullptr && *env != '\0') ? env : "results";
    }

    std::string configText;
    if (!configFile.empty()) {
        std::ifstream in(configFile);
        if (!in) {
            fmt::print(stderr, "error: cannot read config file {}\n", configFile);
            return 2;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        configText = ss.str();
    }

    std::vector<int> ids;
    if (all) {
        for (int id = trustbed::kFirstExperiment; id <= trustbed::kLastExperiment; ++id) {
            ids.push_back(id);
        }
    } else {
        ids.push_back(experiment);
    }

    try {
        trustbed::ensureWritableDirectory(out);
        for (int id : ids) {
            auto config = trustbed::experimentConfig(id);
            trustbed::applyConfigText(config, configText);
            config.id = id;
            for (const auto& kv : sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    throw trustbed::ConfigError("--set expects key=value, got '" + kv + "'");
                }
                trustbed::applyOverride(config, kv.substr(0, eq), kv.substr(eq + 1));
            }
            if (seed) config.baseSeed = *seed;
            if (runs) config.nisr = *runs;
            if (rounds) config.sim.rounds = *rounds;
            trustbed::validate(config.sim);

            trustbed::RunOptions options;
            options.jobs = jobs;
            if (!quiet) {
                options.progress = [id](std::size_t done, std::size_t total) {
                    fmt::print(stderr, "\rexperiment {}: run {}/{}", id, done, total);
                    if (done == total) {
                        fmt::print(stderr, "\n");
                    }
                };
            }
            const auto result = trustbed::computeExperiment(config, options);
            const auto files = trustbed::writeOutputs(result, out);
            if (!quiet) {
                printSummary(result);
                fmt::print("  wrote {}\n", files.interactions.string());
            }
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return EXIT_SUCCESS;
}
