#include "trustbed/experiments.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace trustbed {

namespace {

struct Field {
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, std::string_view)> set;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parseNumber(std::string_view key, std::string_view text) {
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError(fmt::format("invalid value '{}' for {}", text, key));
    }
    return value;
}

// Builds a field bound to a member reached through `access`.
template <class T, class Access>
Field field(std::string key, Access access) {
    Field f;
    f.key = key;
    f.get = [access](const ExperimentConfig& c) { return fmt::format("{}", access(c)); };
    f.set = [access, key](ExperimentConfig& c, std::string_view text) {
        access(c) = parseNumber<T>(key, text);
    };
    return f;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(field<int>("id", [](auto& c) -> auto& { return c.id; }));
        f.push_back(field<int>("rounds", [](auto& c) -> auto& { return c.sim.rounds; }));
        f.push_back(field<std::size_t>("nisr", [](auto& c) -> auto& { return c.nisr; }));
        f.push_back(field<std::uint64_t>("seed", [](auto& c) -> auto& { return c.baseSeed; }));

        f.push_back(field<std::size_t>("population.good", [](auto& c) -> auto& { return c.sim.population.good; }));
        f.push_back(field<std::size_t>("population.ordinary", [](auto& c) -> auto& { return c.sim.population.ordinary; }));
        f.push_back(field<std::size_t>("population.intermittent", [](auto& c) -> auto& { return c.sim.population.intermittent; }));
        f.push_back(field<std::size_t>("population.bad", [](auto& c) -> auto& { return c.sim.population.bad; }));
        f.push_back(field<std::size_t>("population.consumers", [](auto& c) -> auto& { return c.sim.population.consumers; }));

        f.push_back(field<double>("dynamics.pPPC", [](auto& c) -> auto& { return c.sim.dynamics.pPPC; }));
        f.push_back(field<double>("dynamics.pCPC", [](auto& c) -> auto& { return c.sim.dynamics.pCPC; }));
        f.push_back(field<double>("dynamics.pPLC", [](auto& c) -> auto& { return c.sim.dynamics.pPLC; }));
        f.push_back(field<double>("dynamics.pCLC", [](auto& c) -> auto& { return c.sim.dynamics.pCLC; }));
        f.push_back(field<double>("dynamics.deltaPhiMax", [](auto& c) -> auto& { return c.sim.dynamics.deltaPhiMax; }));
        f.push_back(field<double>("dynamics.pMuC", [](auto& c) -> auto& { return c.sim.dynamics.pMuC; }));
        f.push_back(field<double>("dynamics.M", [](auto& c) -> auto& { return c.sim.dynamics.driftMagnitude; }));
        f.push_back(field<double>("dynamics.pProfileSwitch", [](auto& c) -> auto& { return c.sim.dynamics.pProfileSwitch; }));
        f.push_back(field<double>("dynamics.WT", [](auto& c) -> auto& { return c.sim.dynamics.waitingTimeMs; }));

        f.push_back(field<double>("ca.threshold", [](auto& c) -> auto& { return c.sim.ca.threshold; }));
        f.push_back(field<double>("ca.alpha", [](auto& c) -> auto& { return c.sim.ca.alpha; }));
        f.push_back(field<double>("ca.beta", [](auto& c) -> auto& { return c.sim.ca.beta; }));
        f.push_back(field<std::size_t>("ca.iterationsPerWave", [](auto& c) -> auto& { return c.sim.caIterationsPerWave; }));

        f.push_back(field<std::size_t>("fire.H", [](auto& c) -> auto& { return c.sim.fire.historySize; }));
        f.push_back(field<double>("fire.lambda", [](auto& c) -> auto& { return c.sim.fire.recencyScale; }));
        f.push_back(field<std::size_t>("fire.nBF", [](auto& c) -> auto& { return c.sim.fire.branchingFactor; }));
        f.push_back(field<std::size_t>("fire.nRL", [](auto& c) -> auto& { return c.sim.fire.referralLength; }));
        f.push_back(field<double>("fire.W_I", [](auto& c) -> auto& { return c.sim.fire.weightInteraction; }));
        f.push_back(field<double>("fire.W_R", [](auto& c) -> auto& { return c.sim.fire.weightRole; }));
        f.push_back(field<double>("fire.W_W", [](auto& c) -> auto& { return c.sim.fire.weightWitness; }));
        f.push_back(field<double>("fire.W_C", [](auto& c) -> auto& { return c.sim.fire.weightCertified; }));
        f.push_back(field<double>("fire.gamma_I", [](auto& c) -> auto& { return c.sim.fire.gammaInteraction; }));
        f.push_back(field<double>("fire.gamma_R", [](auto& c) -> auto& { return c.sim.fire.gammaRole; }));
        f.push_back(field<double>("fire.gamma_W", [](auto& c) -> auto& { return c.sim.fire.gammaWitness; }));
        f.push_back(field<double>("fire.gamma_C", [](auto& c) -> auto& { return c.sim.fire.gammaCertified; }));
        f.push_back(field<std::size_t>("fire.certifiedCapacity", [](auto& c) -> auto& { return c.sim.fire.certifiedCapacity; }));
        f.push_back(field<double>("fire.explorationRate", [](auto& c) -> auto& { return c.sim.fire.explorationRate; }));
        f.push_back(field<double>("fire.temperature", [](auto& c) -> auto& { return c.sim.fire.initialTemperature; }));
        f.push_back(field<double>("fire.coolingInteractions", [](auto& c) -> auto& { return c.sim.fire.coolingInteractions; }));

        f.push_back(field<double>("world.consumerRadius", [](auto& c) -> auto& { return c.sim.world.consumerRadius; }));
        f.push_back(field<double>("world.providerRadius", [](auto& c) -> auto& { return c.sim.world.providerRadius; }));
        f.push_back(field<double>("world.degradationSlope", [](auto& c) -> auto& { return c.sim.world.degradationSlope; }));
        return f;
    }();
    return table;
}

const Field* findField(std::string_view key) {
    for (const auto& f : fields()) {
        if (f.key == key) {
            return &f;
        }
    }
    return nullptr;
}

}  // namespace

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    for (const auto& f : fields()) {
        if (f.get(a) != f.get(b)) {
            return false;
        }
    }
    return true;
}

ExperimentConfig experimentConfig(int id) {
    if (id < kFirstExperiment || id > kLastExperiment) {
        throw ConfigError(fmt::format("unknown experiment {}; valid ids are {}..{}", id, kFirstExperiment,
                                      kLastExperiment));
    }
    ExperimentConfig c;
    c.id = id;
    auto& d = c.sim.dynamics;
    switch (id) {
        case 1: break;
        case 2: d.pPPC = 0.02; break;
        case 3: d.pPPC = 0.05; break;
        case 4: d.pPPC = 0.10; break;
        case 5: d.pCPC = 0.02; break;
        case 6: d.pCPC = 0.05; break;
        case 7: d.pCPC = 0.10; break;
        case 8: d.pPPC = 0.02; d.pCPC = 0.05; break;
        case 9: d.pPPC = 0.10; d.pCPC = 0.10; break;
        case 10: d.pMuC = 0.10; d.driftMagnitude = 1.0; break;
        case 11: d.pProfileSwitch = 0.02; break;
        default: break;
    }
    switch (id) {
        case 3: case 4: case 5: case 7: c.nisr = 10; break;
        case 9: c.nisr = 12; break;
        default: c.nisr = 30; break;
    }
    c.sim.rounds = (id >= 7 && id <= 9) ? 1000 : 500;
    return c;
}

ExperimentConfig experimentConfig(int id, const std::map<std::string, std::string>& overrides) {
    ExperimentConfig c = experimentConfig(id);
    for (const auto& [key, value] : overrides) {
        applyOverride(c, key, value);
    }
    validate(c.sim);
    return c;
}

std::string describeExperiment(int id) {
    switch (id) {
        case 1: return "static setting, no dynamic factors";
        case 2: return "provider population change pPPC = 2%";
        case 3: return "provider population change pPPC = 5%";
        case 4: return "provider population change pPPC = 10%";
        case 5: return "consumer population change pCPC = 2%";
        case 6: return "consumer population change pCPC = 5%";
        case 7: return "consumer population change pCPC = 10%";
        case 8: return "pPPC = 2% and pCPC = 5%";
        case 9: return "pPPC = 10% and pCPC = 10%";
        case 10: return "performance drift pMuC = 10%, M = 1.0";
        case 11: return "profile switching pProfileSwitch = 2%";
        default: return "unknown";
    }
}

std::string serialize(const ExperimentConfig& config) {
    std::string out;
    for (const auto& f : fields()) {
        out += f.key;
        out += '=';
        out += f.get(config);
        out += '\n';
    }
    return out;
}

void applyOverride(ExperimentConfig& config, const std::string& key, const std::string& value) {
    const Field* f = findField(trim(key));
    if (f == nullptr) {
        throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
    f->set(config, value);
}

void applyConfigText(ExperimentConfig& config, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto content = trim(line);
        if (content.empty() || content.front() == '#') {
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("line {}: expected key=value", lineNo));
        }
        applyOverride(config, std::string(trim(content.substr(0, eq))), std::string(trim(content.substr(eq + 1))));
    }
}

ExperimentConfig parseConfig(std::string_view text) {
    ExperimentConfig probe;
    applyConfigText(probe, text);
    ExperimentConfig config = experimentConfig(probe.id);
    applyConfigText(config, text);
    validate(config.sim);
    return config;
}

std::vector<std::string> configKeys() {
    std::vector<std::string> keys;
    for (const auto& f : fields()) {
        keys.push_back(f.key);
    }
    return keys;
}

std::vector<analysis::Window> summaryWindows(std::uint32_t maxInteraction) {
    const std::uint32_t last = std::max<std::uint32_t>(maxInteraction, 1);
    return {{1, 50}, {51, 200}, {201, std::max<std::uint32_t>(last, 201)}, {1, last}};
}

namespace {

void addStats(RoundStats& into, const RoundStats& s) {
    into.activeDirect += s.activeDirect;
    into.reachableDirect += s.reachableDirect;
    into.servedDirect += s.servedDirect;
    into.activeCa += s.activeCa;
    into.reachableCa += s.reachableCa;
    into.servedCa += s.servedCa;
    for (std::size_t i = 0; i < into.caServedPerWave.size(); ++i) {
        into.caServedPerWave[i] += s.caServedPerWave[i];
    }
}

}  // namespace

ExperimentResult computeExperiment(const ExperimentConfig& config, const RunOptions& options) {
    validate(config.sim);
    ExperimentResult result;
    result.config = config;
    for (std::size_t run = 0; run < config.nisr; ++run) {
        result.seeds.push_back(config.baseSeed + run);
    }

    std::vector<analysis::RunTally> tallies(config.nisr);
    std::vector<std::vector<RoundStats>> stats(config.nisr);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> finished{0};
    std::mutex progressMutex;
    auto worker = [&] {
        for (std::size_t run = next++; run < config.nisr; run = next++) {
            RunResult r = runSimulation(config.sim, result.seeds[run], static_cast<std::uint32_t>(run));
            for (const auto& rec : r.records) {
                tallies[run].add(rec);
            }
            stats[run] = std::move(r.stats);
            const std::size_t done = ++finished;
            if (options.progress) {
                std::lock_guard lock(progressMutex);
                options.progress(done, config.nisr);
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, config.nisr));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
    }

    result.points = analysis::aggregate(tallies);
    result.rows = analysis::rankSeries(result.points);
    const std::uint32_t maxK = result.rows.empty() ? 0 : result.rows.back().interaction;
    const auto windows = summaryWindows(maxK);
    result.summary = analysis::summarize(result.rows, windows);

    result.roundTotals.resize(static_cast<std::size_t>(config.sim.rounds));
    for (std::size_t r = 0; r < result.roundTotals.size(); ++r) {
        result.roundTotals[r].round = static_cast<int>(r);
    }
    for (const auto& runStats : stats) {
        for (const auto& s : runStats) {
            addStats(result.roundTotals[static_cast<std::size_t>(s.round)], s);
        }
    }
    return result;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string(); }
std::string cell(const std::optional<int>& v) { return v ? fmt::format("{}", *v) : std::string(); }

void writeFile(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw ConfigError(fmt::format("cannot write {}", path.string()));
    }
}

}  // namespace

std::string interactionsCsv(std::span<const analysis::RankedRow> rows) {
    std::string out(kInteractionsHeader);
    out += '\n';
    for (const auto& row : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", row.interaction, cell(row.means[0]),
                           cell(row.means[1]), cell(row.means[2]), cell(row.ranks[0]), cell(row.ranks[1]),
                           cell(row.ranks[2]), row.runs[0], row.runs[1], row.runs[2]);
    }
    return out;
}

std::string summaryCsv(std::span<const analysis::SummaryCell> cells) {
    std::string out = "group,window_first,window_last,mean_ug,points\n";
    for (const auto& c : cells) {
        out += fmt::format("{},{},{},{},{}\n", nameOf(c.group), c.window.first, c.window.last, cell(c.mean),
                           c.points);
    }
    return out;
}

std::string roundsCsv(std::span<const RoundStats> totals) {
    std::string out =
        "round,active_direct,reachable_direct,served_direct,active_ca,reachable_ca,served_ca,unserved_ca,"
        "ca_perfect,ca_good,ca_ok,ca_bad,ca_worst\n";
    for (const auto& s : totals) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.round, s.activeDirect, s.reachableDirect,
                           s.servedDirect, s.activeCa, s.reachableCa, s.servedCa, s.unservedCa(),
                           s.caServedPerWave[0], s.caServedPerWave[1], s.caServedPerWave[2],
                           s.caServedPerWave[3], s.caServedPerWave[4]);
    }
    return out;
}

std::string manifestText(const ExperimentResult& result) {
    std::string out = fmt::format("# trustbed {}\n# experiment {}: {}\n", kVersion, result.config.id,
                                  describeExperiment(result.config.id));
    out += "# seeds ";
    for (std::size_t i = 0; i < result.seeds.size(); ++i) {
        out += fmt::format("{}{}", i == 0 ? "" : ",", result.seeds[i]);
    }
    out += "\n";
    // The remaining lines are valid --config input.
    out += serialize(result.config);
    return out;
}

void ensureWritableDirectory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
    }
    const auto probe = dir / ".trustbed_write_probe";
    {
        std::ofstream out(probe);
        if (!out) {
            throw ConfigError(fmt::format("output directory {} is not writable", dir.string()));
        }
    }
    std::filesystem::remove(probe, ec);
}

OutputFiles writeOutputs(const ExperimentResult& result, const std::filesystem::path& dir) {
    ensureWritableDirectory(dir);
    const std::string stem = fmt::format("exp{:02}", result.config.id);
    OutputFiles files{dir / (stem + "_interactions.csv"), dir / (stem + "_summary.csv"),
                      dir / (stem + "_rounds.csv"), dir / (stem + "_manifest.txt")};
    writeFile(files.interactions, interactionsCsv(result.rows));
    writeFile(files.summary, summaryCsv(result.summary));
    writeFile(files.rounds, roundsCsv(result.roundTotals));
    writeFile(files.manifest, manifestText(result));
    return files;
}

OutputFiles runExperiment(const ExperimentConfig& config, const std::filesystem::path& dir,
                          const RunOptions& options) {
    ensureWritableDirectory(dir);
    return writeOutputs(computeExperiment(config, options), dir);
}

}  // namespace trustbed
