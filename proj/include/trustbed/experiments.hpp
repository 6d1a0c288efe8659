#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trustbed/analysis.hpp"
#include "trustbed/engine.hpp"

namespace trustbed {

inline constexpr std::string_view kVersion = "1.0.0";

struct ExperimentConfig {
    int id = 1;
    std::size_t nisr = 30;
    std::uint64_t baseSeed = 1;
    SimulationConfig sim;

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kFirstExperiment = 1;
inline constexpr int kLastExperiment = 11;

// Registry entry for experiment `id`; throws ConfigError for unknown ids.
ExperimentConfig experimentConfig(int id);

// Registry entry with `key=value` overrides applied in order.
ExperimentConfig experimentConfig(int id, const std::map<std::string, std::string>& overrides);

std::string describeExperiment(int id);

// Flat key=value text, one field per line, in a fixed order.
std::string serialize(const ExperimentConfig& config);

// Applies every `key=value` line of `text` to `config`. Blank lines and lines
// starting with '#' are ignored. Throws ConfigError on unknown keys or bad
// values.
void applyConfigText(ExperimentConfig& config, std::string_view text);
void applyOverride(ExperimentConfig& config, const std::string& key, const std::string& value);

// Parses text produced by serialize(); starts from the registry entry named
// by its `id` line.
ExperimentConfig parseConfig(std::string_view text);

std::vector<std::string> configKeys();

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<analysis::SeriesPoint> points;
    std::vector<analysis::RankedRow> rows;
    std::vector<analysis::SummaryCell> summary;
    // Per-round service counts summed over all runs.
    std::vector<RoundStats> roundTotals;
    std::vector<std::uint64_t> seeds;
};

struct RunOptions {
    std::size_t jobs = 1;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

// Summary windows {[1,50], [51,200], [201,maxInteraction]} plus the overall
// window [1,maxInteraction].
std::vector<analysis::Window> summaryWindows(std::uint32_t maxInteraction);

// Runs all NISR seeds and aggregates them; writes nothing.
ExperimentResult computeExperiment(const ExperimentConfig& config, const RunOptions& options = {});

struct OutputFiles {
    std::filesystem::path interactions;
    std::filesystem::path summary;
    std::filesystem::path rounds;
    std::filesystem::path manifest;
};

// Throws ConfigError if `dir` cannot be created or written.
void ensureWritableDirectory(const std::filesystem::path& dir);

OutputFiles writeOutputs(const ExperimentResult& result, const std::filesystem::path& dir);

// Checks the output directory, runs the experiment, writes the CSVs and the
// manifest.
OutputFiles runExperiment(const ExperimentConfig& config, const std::filesystem::path& dir,
                          const RunOptions& options = {});

inline constexpr std::string_view kInteractionsHeader =
    "interaction,mean_ug_notrust,mean_ug_fire,mean_ug_ca,rank_notrust,rank_fire,rank_ca,"
    "n_runs_notrust,n_runs_fire,n_runs_ca";

std::string interactionsCsv(std::span<const analysis::RankedRow> rows);
std::string summaryCsv(std::span<const analysis::SummaryCell> cells);
std::string roundsCsv(std::span<const RoundStats> totals);
std::string manifestText(const ExperimentResult& result);

}  // namespace trustbed
