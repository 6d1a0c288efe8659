#include "trustbed/engine.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace trustbed {

namespace {

void requireProbability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
    }
}

}  // namespace

void validate(const SimulationConfig& config) {
    if (config.rounds < 0) {
        throw std::invalid_argument("rounds must be non-negative");
    }
    if (config.population.providers() == 0) {
        throw std::invalid_argument("provider population must be positive");
    }
    if (config.population.consumers == 0) {
        throw std::invalid_argument("consumer population must be positive");
    }
    const auto& d = config.dynamics;
    requireProbability(d.pPPC, "pPPC");
    requireProbability(d.pCPC, "pCPC");
    requireProbability(d.pPLC, "pPLC");
    requireProbability(d.pCLC, "pCLC");
    requireProbability(d.pMuC, "pMuC");
    requireProbability(d.pProfileSwitch, "pProfileSwitch");
    if (d.deltaPhiMax < 0.0 || d.driftMagnitude < 0.0) {
        throw std::invalid_argument("deltaPhiMax and driftMagnitude must be non-negative");
    }
    requireProbability(config.ca.threshold, "ca.threshold");
    if (config.ca.alpha <= 0.0 || config.ca.beta <= 0.0) {
        throw std::invalid_argument("ca.alpha and ca.beta must be positive");
    }
    requireProbability(config.fire.explorationRate, "fire.explorationRate");
    if (config.fire.historySize == 0 || config.fire.recencyScale <= 0.0) {
        throw std::invalid_argument("fire.historySize and fire.recencyScale must be positive");
    }
    if (config.world.consumerRadius < 0.0 || config.world.providerRadius < 0.0 ||
        config.world.degradationSlope < 0.0) {
        throw std::invalid_argument("world radii and degradation slope must be non-negative");
    }
}

std::array<std::size_t, 3> groupSizes(std::size_t consumers) {
    std::array<std::size_t, 3> sizes{};
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        sizes[g] = consumers / 3 + (g < consumers % 3 ? 1 : 0);
    }
    return sizes;
}

Simulation::Simulation(SimulationConfig config, std::uint64_t seed, std::uint32_t runId)
    : config_(std::move(config)), rng_(seed), runId_(runId) {
    validate(config_);
    const auto& counts = config_.population;
    const std::array<std::pair<ProfileKind, std::size_t>, 4> layout = {
        std::pair{ProfileKind::Good, counts.good}, std::pair{ProfileKind::Ordinary, counts.ordinary},
        std::pair{ProfileKind::Intermittent, counts.intermittent}, std::pair{ProfileKind::Bad, counts.bad}};
    for (auto [kind, n] : layout) {
        for (std::size_t i = 0; i < n; ++i) {
            providers_.push_back(spawnProvider(kind, ids_, rng_, config_.world.providerRadius));
        }
    }
    const auto sizes = groupSizes(counts.consumers);
    for (auto group : kAllGroups) {
        for (std::size_t i = 0; i < sizes[indexOf(group)]; ++i) {
            consumers_.push_back(spawnConsumer(group, ids_, rng_, config_.world.consumerRadius));
        }
    }
    for (const auto& p : providers_) {
        trustees_.emplace_back(p.id);
    }
    histories_.assign(consumers_.size(), fire::RatingHistory(config_.fire.historySize));
    for (std::size_t i = 0; i < consumers_.size(); ++i) {
        consumerSlot_[consumers_[i].id] = i;
    }
}

std::vector<Provider>& Simulation::mutableProviders() {
    geometryDirty_ = true;
    return providers_;
}

std::vector<Consumer>& Simulation::mutableConsumers() {
    geometryDirty_ = true;
    return consumers_;
}

void Simulation::refreshGeometry() {
    if (!geometryDirty_) {
        return;
    }
    nearbyProviders_.assign(consumers_.size(), {});
    for (std::size_t c = 0; c < consumers_.size(); ++c) {
        nearbyProviders_[c] = nearbyAgents(consumers_[c], std::span<const Provider>(providers_),
                                           consumers_[c].radiusOfOperation);
    }
    acquaintances_.assign(consumers_.size(), {});
    std::vector<std::size_t> raters;
    for (std::size_t c = 0; c < consumers_.size(); ++c) {
        if (consumers_[c].group == ConsumerGroup::Fire) {
            raters.push_back(c);
        }
    }
    for (std::size_t a : raters) {
        for (std::size_t b : raters) {
            if (a != b && distance(consumers_[a].loc, consumers_[b].loc) <= consumers_[a].radiusOfOperation) {
                acquaintances_[a].push_back(b);
            }
        }
    }
    geometryDirty_ = false;
}

std::vector<std::size_t> Simulation::nearbyProviderSlots(std::size_t consumerSlot) {
    refreshGeometry();
    return nearbyProviders_[consumerSlot];
}

InteractionRecord Simulation::emit(std::size_t consumerSlot, double ug) {
    Consumer& c = consumers_[consumerSlot];
    ++c.interactionCount;
    InteractionRecord rec{runId_, c.group, c.id, static_cast<std::uint32_t>(c.interactionCount), round_, ug};
    records_.push_back(rec);
    return rec;
}

std::optional<InteractionRecord> Simulation::serveDirect(std::size_t consumerSlot) {
    refreshGeometry();
    const Consumer& consumer = consumers_[consumerSlot];
    const auto& candidates = nearbyProviders_[consumerSlot];
    if (candidates.empty()) {
        return std::nullopt;
    }

    std::size_t chosen = 0;
    if (consumer.group == ConsumerGroup::Fire) {
        const auto& params = config_.fire;
        const auto witnesses = fire::findWitnesses(consumerSlot, acquaintances_, params, rng_);
        std::vector<std::optional<double>> trust(candidates.size());
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const Provider& p = providers_[candidates[i]];
            fire::Components parts;
            parts[static_cast<std::size_t>(fire::Component::Interaction)] =
                fire::interactionTrust(histories_[consumerSlot], p.id, round_, params);
            parts[static_cast<std::size_t>(fire::Component::Role)] =
                fire::roleBasedTrust(p.id, config_.roleRules);
            parts[static_cast<std::size_t>(fire::Component::Witness)] =
                fire::witnessReputation(witnesses, histories_, p.id, round_, params);
            parts[static_cast<std::size_t>(fire::Component::Certified)] =
                fire::certifiedReputation(p.certifiedRatings, round_, params);
            trust[i] = fire::overallTrust(parts, params);
        }
        const double temperature = fire::selectionTemperature(params, consumer.interactionCount);
        chosen = candidates[*fire::selectProvider(trust, params.explorationRate, rng_, temperature)];
    } else {
        chosen = candidates[rng_.index(candidates.size())];
    }

    Provider& provider = providers_[chosen];
    const double ug = samplePerformance(provider, consumer.loc, rng_, config_.world.degradationSlope);
    if (consumer.group == ConsumerGroup::Fire) {
        const Rating rating{consumer.id, provider.id, round_, ug};
        histories_[consumerSlot].record(rating);
        fire::offerCertifiedRating(provider.certifiedRatings, rating, config_.fire.certifiedCapacity);
    }
    return emit(consumerSlot, ug);
}

std::vector<InteractionRecord> Simulation::caWaves(std::span<const std::size_t> activeCaSlots) {
    refreshGeometry();
    std::vector<InteractionRecord> served;
    std::vector<std::size_t> waiting;
    for (std::size_t slot : activeCaSlots) {
        if (!nearbyProviders_[slot].empty()) {
            waiting.push_back(slot);
        }
    }
    std::vector<bool> done(consumers_.size(), false);
    std::vector<std::size_t> order(providers_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t wave = 0; wave < kLevelsHardestFirst.size() && !waiting.empty(); ++wave) {
        const ca::Task task{0, kLevelsHardestFirst[wave]};
        for (std::size_t slot : waiting) {
            for (std::size_t p : nearbyProviders_[slot]) {
                trustees_[p].handleRequest({consumers_[slot].id, task, round_});
            }
        }
        rng_.shuffle(std::span<std::size_t>(order));
        for (std::size_t p : order) {
            ca::Trustee& trustee = trustees_[p];
            std::size_t iterations = 0;
            while (!trustee.pending().empty() &&
                   (config_.caIterationsPerWave == 0 || iterations < config_.caIterationsPerWave)) {
                ++iterations;
                const ca::RequestMessage m = *trustee.selectBestRequest();
                const std::size_t slot = consumerSlot_.at(m.trustor);
                const double w = trustee.weight(m.trustor, m.task).value_or(ca::kInitialWeight);
                const bool taskDone = done[slot];
                const ca::Decision decision = trustee.attemptTask(m, taskDone, config_.ca);
                const bool attempt = decision == ca::Decision::Attempt;
                if (activeTrace_ != nullptr) {
                    activeTrace_->decisions.push_back(
                        {providers_[p].id, m.trustor, m.task.requirement, w, taskDone, attempt});
                }
                if (!attempt) {
                    continue;
                }
                const double ug = samplePerformance(providers_[p], consumers_[slot].loc, rng_,
                                                    config_.world.degradationSlope);
                trustee.completeTask(m, ug, config_.ca);
                done[slot] = true;
                served.push_back(emit(slot, ug));
                if (activeStats_ != nullptr) {
                    ++activeStats_->caServedPerWave[wave];
                }
            }
        }
        // Requests expire with their wave.
        for (auto& trustee : trustees_) {
            trustee.clearPending();
        }
        std::erase_if(waiting, [&done](std::size_t slot) { return done[slot]; });
    }
    if (activeTrace_ != nullptr) {
        for (std::size_t slot : waiting) {
            activeTrace_->unservedCa.push_back(consumers_[slot].id);
        }
    }
    return served;
}

void Simulation::replaceProviders() {
    const auto replaced = replacePopulation(
        providers_, config_.dynamics.pPPC,
        [this](const Provider& old) { return spawnProvider(old.kind, ids_, rng_, config_.world.providerRadius); },
        rng_);
    for (const auto& r : replaced) {
        trustees_[r.index] = ca::Trustee(r.arrived);
        for (auto& h : histories_) {
            h.forgetTarget(r.departed);
        }
    }
    if (!replaced.empty()) {
        geometryDirty_ = true;
    }
}

void Simulation::replaceConsumers() {
    const auto replaced = replacePopulation(
        consumers_, config_.dynamics.pCPC,
        [this](const Consumer& old) { return spawnConsumer(old.group, ids_, rng_, config_.world.consumerRadius); },
        rng_);
    for (const auto& r : replaced) {
        consumerSlot_.erase(r.departed);
        consumerSlot_[r.arrived] = r.index;
        histories_[r.index] = fire::RatingHistory(config_.fire.historySize);
        for (auto& trustee : trustees_) {
            trustee.forgetTrustor(r.departed);
        }
    }
    if (!replaced.empty()) {
        geometryDirty_ = true;
    }
}

void Simulation::applyDynamics() {
    const auto& d = config_.dynamics;
    if (d.pPPC > 0.0) {
        replaceProviders();
    }
    if (d.pCPC > 0.0) {
        replaceConsumers();
    }
    if (d.pPLC > 0.0) {
        for (auto& p : providers_) {
            if (rng_.bernoulli(d.pPLC)) {
                p.loc = applyAngularJitter(p.loc, d.deltaPhiMax, rng_);
                geometryDirty_ = true;
            }
        }
    }
    if (d.pCLC > 0.0) {
        for (auto& c : consumers_) {
            if (rng_.bernoulli(d.pCLC)) {
                c.loc = applyAngularJitter(c.loc, d.deltaPhiMax, rng_);
                geometryDirty_ = true;
            }
        }
    }
    if (d.pMuC > 0.0) {
        for (auto& p : providers_) {
            if (rng_.bernoulli(d.pMuC)) {
                driftPerformance(p, d.driftMagnitude, rng_);
            }
        }
    }
    if (d.pProfileSwitch > 0.0) {
        for (auto& p : providers_) {
            if (rng_.bernoulli(d.pProfileSwitch)) {
                switchProfile(p, rng_);
            }
        }
    }
}

void Simulation::runRound() {
    refreshGeometry();
    RoundStats stats;
    stats.round = round_;
    activeStats_ = &stats;
    RoundTrace trace;
    trace.round = round_;
    activeTrace_ = traceRounds_.contains(round_) ? &trace : nullptr;

    std::vector<std::size_t> direct;
    std::vector<std::size_t> caSlots;
    for (std::size_t c = 0; c < consumers_.size(); ++c) {
        if (!rng_.bernoulli(consumers_[c].activity)) {
            continue;
        }
        (consumers_[c].group == ConsumerGroup::Ca ? caSlots : direct).push_back(c);
    }

    for (std::size_t slot : direct) {
        ++stats.activeDirect;
        if (!nearbyProviders_[slot].empty()) {
            ++stats.reachableDirect;
        }
        if (serveDirect(slot)) {
            ++stats.servedDirect;
        }
    }

    stats.activeCa = caSlots.size();
    for (std::size_t slot : caSlots) {
        if (!nearbyProviders_[slot].empty()) {
            ++stats.reachableCa;
            if (activeTrace_ != nullptr) {
                auto& ids = trace.nearbyProviders[consumers_[slot].id];
                for (std::size_t p : nearbyProviders_[slot]) {
                    ids.push_back(providers_[p].id);
                }
            }
        }
    }
    stats.servedCa = caWaves(caSlots).size();

    activeStats_ = nullptr;
    activeTrace_ = nullptr;
    stats_.push_back(stats);
    if (traceRounds_.contains(round_)) {
        traces_.push_back(std::move(trace));
    }

    applyDynamics();
    ++round_;
}

void Simulation::run() {
    while (round_ < config_.rounds) {
        runRound();
    }
}

RunResult Simulation::takeResult() {
    return {std::move(records_), std::move(stats_), std::move(traces_)};
}

RunResult runSimulation(const SimulationConfig& config, std::uint64_t seed, std::uint32_t runId) {
    Simulation sim(config, seed, runId);
    sim.run();
    return sim.takeResult();
}

}  // namespace trustbed
