#include "trustbed/fire_model.hpp"

#include <algorithm>
#include <limits>

namespace trustbed::fire {

double recencyWeight(int now, int ratingRound, double recencyScale) {
    return std::exp(-static_cast<double>(now - ratingRound) / recencyScale);
}

std::optional<TrustEstimate> componentTrust(std::span<const Rating> ratings, int now,
                                            double recencyScale, double gamma) {
    if (ratings.empty()) {
        return std::nullopt;
    }
    double totalWeight = 0.0;
    double weighted = 0.0;
    for (const auto& r : ratings) {
        const double w = recencyWeight(now, r.round, recencyScale);
        totalWeight += w;
        weighted += w * r.value;
    }
    if (totalWeight <= 0.0) {
        return std::nullopt;
    }
    const double trust = weighted / totalWeight;

    double spread = 0.0;
    for (const auto& r : ratings) {
        spread += recencyWeight(now, r.round, recencyScale) * std::abs(r.value - trust);
    }
    const double ratingReliability = 1.0 - std::exp(-gamma * totalWeight);
    const double deviationReliability =
        std::clamp(1.0 - (spread / totalWeight) / kRatingHalfRange, 0.0, 1.0);
    return TrustEstimate{trust, std::clamp(ratingReliability * deviationReliability, 0.0, 1.0)};
}

void RatingHistory::record(const Rating& r) {
    auto& list = byTarget_[r.target];
    list.push_back(r);
    if (list.size() > capacity_) {
        list.erase(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(list.size() - capacity_));
    }
}

std::span<const Rating> RatingHistory::ratingsFor(AgentId target) const {
    if (auto it = byTarget_.find(target); it != byTarget_.end()) {
        return it->second;
    }
    return {};
}

void offerCertifiedRating(std::vector<Rating>& store, const Rating& r, std::size_t capacity) {
    if (capacity == 0) {
        return;
    }
    if (store.size() < capacity) {
        store.push_back(r);
        return;
    }
    auto lowest = std::min_element(store.begin(), store.end(),
                                   [](const Rating& a, const Rating& b) { return a.value < b.value; });
    if (r.value >= lowest->value) {
        *lowest = r;
    }
}

std::optional<TrustEstimate> interactionTrust(const RatingHistory& evaluatorHistory, AgentId target,
                                              int now, const Params& params) {
    return componentTrust(evaluatorHistory.ratingsFor(target), now, params.recencyScale,
                          params.gammaInteraction);
}

std::vector<std::size_t> findWitnesses(std::size_t evaluator, const AcquaintanceGraph& graph,
                                       const Params& params, Rng& rng) {
    std::vector<std::size_t> visitedOrder;
    if (evaluator >= graph.size()) {
        return visitedOrder;
    }
    std::vector<bool> visited(graph.size(), false);
    visited[evaluator] = true;
    std::vector<std::size_t> frontier{evaluator};
    std::vector<std::size_t> candidates;
    for (std::size_t depth = 1; depth <= params.referralLength && !frontier.empty(); ++depth) {
        std::vector<std::size_t> next;
        for (std::size_t node : frontier) {
            candidates.clear();
            for (std::size_t peer : graph[node]) {
                if (!visited[peer]) {
                    candidates.push_back(peer);
                }
            }
            // Random n_BF-subset via partial shuffle.
            const std::size_t take = std::min(params.branchingFactor, candidates.size());
            for (std::size_t i = 0; i < take; ++i) {
                const std::size_t j = i + rng.index(candidates.size() - i);
                std::swap(candidates[i], candidates[j]);
                visited[candidates[i]] = true;
                visitedOrder.push_back(candidates[i]);
                next.push_back(candidates[i]);
            }
        }
        frontier = std::move(next);
    }
    return visitedOrder;
}

std::optional<TrustEstimate> witnessReputation(std::span<const std::size_t> witnesses,
                                               std::span<const RatingHistory> histories,
                                               AgentId target, int now, const Params& params) {
    std::vector<Rating> collected;
    for (std::size_t w : witnesses) {
        if (w >= histories.size()) {
            continue;
        }
        auto ratings = histories[w].ratingsFor(target);
        collected.insert(collected.end(), ratings.begin(), ratings.end());
    }
    return componentTrust(collected, now, params.recencyScale, params.gammaWitness);
}

std::optional<TrustEstimate> roleBasedTrust(AgentId target, std::span<const RoleRule> rules) {
    double weight = 0.0;
    double weightedValue = 0.0;
    double weightedReliability = 0.0;
    bool matched = false;
    for (const auto& rule : rules) {
        if (rule.target && *rule.target != target) {
            continue;
        }
        matched = true;
        weight += rule.reliability;
        weightedValue += rule.reliability * rule.value;
        weightedReliability += rule.reliability * rule.reliability;
    }
    if (!matched) {
        return std::nullopt;
    }
    if (weight <= 0.0) {
        return TrustEstimate{0.0, 0.0};
    }
    return TrustEstimate{weightedValue / weight, weightedReliability / weight};
}

std::optional<TrustEstimate> certifiedReputation(std::span<const Rating> certifiedStore, int now,
                                                 const Params& params) {
    return componentTrust(certifiedStore, now, params.recencyScale, params.gammaCertified);
}

std::optional<double> overallTrust(const Components& components, const Params& params) {
    const std::array<double, 4> coefficients = {params.weightInteraction, params.weightRole,
                                                params.weightWitness, params.weightCertified};
    double numerator = 0.0;
    double denominator = 0.0;
    for (std::size_t k = 0; k < components.size(); ++k) {
        if (!components[k]) {
            continue;
        }
        const double w = coefficients[k] * components[k]->reliability;
        numerator += w * components[k]->value;
        denominator += w;
    }
    if (denominator <= 0.0) {
        return std::nullopt;
    }
    return numerator / denominator;
}

double selectionTemperature(const Params& params, std::size_t interactionsSoFar) {
    if (params.initialTemperature <= 0.0) {
        return 0.0;
    }
    if (params.coolingInteractions <= 0.0) {
        return params.initialTemperature;
    }
    return params.initialTemperature /
           (1.0 + static_cast<double>(interactionsSoFar) / params.coolingInteractions);
}

std::optional<std::size_t> selectProvider(std::span<const std::optional<double>> trust,
                                          double explorationRate, Rng& rng, double temperature) {
    if (trust.empty()) {
        return std::nullopt;
    }
    std::vector<std::size_t> known;
    std::vector<std::size_t> unknown;
    for (std::size_t i = 0; i < trust.size(); ++i) {
        (trust[i] ? known : unknown).push_back(i);
    }
    if (known.empty()) {
        return unknown[rng.index(unknown.size())];
    }
    if (!unknown.empty() && rng.bernoulli(explorationRate)) {
        return unknown[rng.index(unknown.size())];
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i : known) {
        best = std::max(best, *trust[i]);
    }
    if (temperature > 0.0 && known.size() > 1) {
        std::vector<double> cumulative;
        cumulative.reserve(known.size());
        double total = 0.0;
        for (std::size_t i : known) {
            total += std::exp((*trust[i] - best) / temperature);
            cumulative.push_back(total);
        }
        const double draw = rng.uniform() * total;
        const auto pick = std::upper_bound(cumulative.begin(), cumulative.end(), draw) - cumulative.begin();
        return known[static_cast<std::size_t>(std::min<std::ptrdiff_t>(pick, static_cast<std::ptrdiff_t>(known.size()) - 1))];
    }
    std::vector<std::size_t> leaders;
    for (std::size_t i : known) {
        if (*trust[i] == best) {
            leaders.push_back(i);
        }
    }
    return leaders.size() == 1 ? leaders.front() : leaders[rng.index(leaders.size())];
}

}  // namespace trustbed::fire
