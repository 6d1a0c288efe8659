#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "trustbed/ca_model.hpp"
#include "trustbed/fire_model.hpp"
#include "trustbed/population.hpp"
#include "trustbed/random.hpp"
#include "trustbed/types.hpp"

namespace trustbed {

struct WorldParams {
    double consumerRadius = 0.5;
    double providerRadius = 0.5;
    double degradationSlope = 10.0;  // UG lost per world unit beyond range
};

struct PopulationCounts {
    std::size_t good = 10;
    std::size_t ordinary = 40;
    std::size_t intermittent = 5;
    std::size_t bad = 45;
    std::size_t consumers = 500;

    std::size_t providers() const { return good + ordinary + intermittent + bad; }
};

struct DynamicsConfig {
    double pPPC = 0.0;             // provider population change limit
    double pCPC = 0.0;             // consumer population change limit
    double pPLC = 0.0;             // provider location change probability
    double pCLC = 0.0;             // consumer location change probability
    double deltaPhiMax = 0.0;      // radians
    double pMuC = 0.0;             // performance drift probability
    double driftMagnitude = 0.0;   // M
    double pProfileSwitch = 0.0;
    double waitingTimeMs = 1000.0; // informational; waves are logical barriers
};

struct SimulationConfig {
    int rounds = 500;
    PopulationCounts population;
    DynamicsConfig dynamics;
    ca::Params ca;
    fire::Params fire;
    WorldParams world;
    // Alg. 1 iterations a provider runs per CA wave; 0 drains its pending list.
    std::size_t caIterationsPerWave = 0;
    std::vector<fire::RoleRule> roleRules;
};

// Throws std::invalid_argument describing the first problem found.
void validate(const SimulationConfig& config);

struct InteractionRecord {
    std::uint32_t runId = 0;
    ConsumerGroup group = ConsumerGroup::NoTrustModel;
    AgentId consumer{};
    std::uint32_t interactionIndex = 0;  // 1-based, per consumer lifetime
    int round = 0;
    double ug = 0.0;
};

struct RoundStats {
    int round = 0;
    std::size_t activeDirect = 0;     // active NoTrustModel + FIRE consumers
    std::size_t reachableDirect = 0;  // ... with at least one nearby provider
    std::size_t servedDirect = 0;
    std::size_t activeCa = 0;
    std::size_t reachableCa = 0;
    std::size_t servedCa = 0;
    std::array<std::size_t, 5> caServedPerWave{};

    std::size_t unservedCa() const { return reachableCa - servedCa; }
};

// One Alg. 1 iteration observed during a CA wave.
struct WaveDecision {
    AgentId provider{};
    AgentId consumer{};
    PerformanceLevel level = PerformanceLevel::Perfect;
    double weight = 0.0;
    bool taskDone = false;
    bool attempted = false;
};

struct RoundTrace {
    int round = 0;
    std::vector<WaveDecision> decisions;
    std::vector<AgentId> unservedCa;  // reachable but never served
    std::unordered_map<AgentId, std::vector<AgentId>> nearbyProviders;
};

struct RunResult {
    std::vector<InteractionRecord> records;
    std::vector<RoundStats> stats;
    std::vector<RoundTrace> traces;
};

class Simulation {
public:
    Simulation(SimulationConfig config, std::uint64_t seed, std::uint32_t runId = 0);

    void runRound();
    void run();

    // Individual round stages, exposed for tests.
    std::optional<InteractionRecord> serveDirect(std::size_t consumerSlot);
    std::vector<InteractionRecord> caWaves(std::span<const std::size_t> activeCaSlots);
    void applyDynamics();

    void traceRounds(std::set<int> rounds) { traceRounds_ = std::move(rounds); }

    int round() const { return round_; }
    const SimulationConfig& config() const { return config_; }
    const std::vector<Provider>& providers() const { return providers_; }
    const std::vector<Consumer>& consumers() const { return consumers_; }
    const ca::Trustee& trustee(std::size_t providerSlot) const { return trustees_[providerSlot]; }
    const fire::RatingHistory& history(std::size_t consumerSlot) const { return histories_[consumerSlot]; }
    const std::vector<InteractionRecord>& records() const { return records_; }
    const std::vector<RoundStats>& stats() const { return stats_; }
    const std::vector<RoundTrace>& traces() const { return traces_; }
    std::vector<std::size_t> nearbyProviderSlots(std::size_t consumerSlot);

    // Direct state access for scenario tests.
    std::vector<Provider>& mutableProviders();
    std::vector<Consumer>& mutableConsumers();
    ca::Trustee& mutableTrustee(std::size_t providerSlot) { return trustees_[providerSlot]; }

    RunResult takeResult();

private:
    void refreshGeometry();
    InteractionRecord emit(std::size_t consumerSlot, double ug);
    void replaceProviders();
    void replaceConsumers();

    SimulationConfig config_;
    Rng rng_;
    std::uint32_t runId_;
    IdSource ids_;
    int round_ = 0;

    std::vector<Provider> providers_;
    std::vector<Consumer> consumers_;
    std::vector<ca::Trustee> trustees_;
    std::vector<fire::RatingHistory> histories_;
    std::unordered_map<AgentId, std::size_t> consumerSlot_;

    bool geometryDirty_ = true;
    std::vector<std::vector<std::size_t>> nearbyProviders_;
    fire::AcquaintanceGraph acquaintances_;

    std::vector<InteractionRecord> records_;
    std::vector<RoundStats> stats_;
    std::set<int> traceRounds_;
    std::vector<RoundTrace> traces_;
    RoundTrace* activeTrace_ = nullptr;
    RoundStats* activeStats_ = nullptr;
};

// Population layout used at start-up: provider kinds in blocks
// (good, ordinary, intermittent, bad) and consumer groups split as evenly as
// possible, earlier groups taking the remainder.
std::array<std::size_t, 3> groupSizes(std::size_t consumers);

RunResult runSimulation(const SimulationConfig& config, std::uint64_t seed, std::uint32_t runId = 0);

}  // namespace trustbed
