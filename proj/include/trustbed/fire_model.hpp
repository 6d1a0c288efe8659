#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "trustbed/random.hpp"
#include "trustbed/types.hpp"

namespace trustbed::fire {

struct Params {
    std::size_t historySize = 10;                     // H
    double recencyScale = -5.0 / std::log(0.5);       // lambda, in rounds
    std::size_t branchingFactor = 2;                  // n_BF
    std::size_t referralLength = 5;                   // n_RL
    double weightInteraction = 2.0;                   // W_I
    double weightRole = 2.0;                          // W_R
    double weightWitness = 1.0;                       // W_W
    double weightCertified = 0.5;                     // W_C
    double gammaInteraction = -std::log(0.5);
    double gammaRole = -std::log(0.5);
    double gammaWitness = -std::log(0.5);
    double gammaCertified = -std::log(0.5);
    std::size_t certifiedCapacity = 10;               // C_max
    double explorationRate = 0.2;                     // epsilon
    // Boltzmann selection among known providers; the temperature cools as
    // T0 / (1 + k / coolingInteractions) with the consumer's interaction
    // count k. T0 = 0 selects the argmax.
    double initialTemperature = 5.0;
    double coolingInteractions = 175.0;
};

double selectionTemperature(const Params& params, std::size_t interactionsSoFar);

struct TrustEstimate {
    double value = 0.0;
    double reliability = 0.0;
};

enum class Component : std::size_t { Interaction, Role, Witness, Certified };
using Components = std::array<std::optional<TrustEstimate>, 4>;

// Rating scale half-width used to normalise deviations.
inline constexpr double kRatingHalfRange = 10.0;

double recencyWeight(int now, int ratingRound, double recencyScale);

// Recency-weighted mean of the ratings with a reliability that grows with the
// total weight of evidence and shrinks with its spread.
std::optional<TrustEstimate> componentTrust(std::span<const Rating> ratings, int now,
                                            double recencyScale, double gamma);

// An evaluator's own ratings, at most H per target, oldest evicted first.
class RatingHistory {
public:
    explicit RatingHistory(std::size_t capacity = 10) : capacity_(capacity) {}

    void record(const Rating& r);
    std::span<const Rating> ratingsFor(AgentId target) const;
    void forgetTarget(AgentId target) { byTarget_.erase(target); }
    std::size_t targetCount() const { return byTarget_.size(); }

private:
    std::size_t capacity_;
    std::unordered_map<AgentId, std::vector<Rating>> byTarget_;
};

// Keeps the `capacity` highest-valued ratings; a newcomer displaces the lowest
// stored rating when it is at least as good.
void offerCertifiedRating(std::vector<Rating>& store, const Rating& r, std::size_t capacity);

std::optional<TrustEstimate> interactionTrust(const RatingHistory& evaluatorHistory, AgentId target,
                                              int now, const Params& params);

// Adjacency lists over consumer slots; acquaintances are other rating
// consumers within the node's radius of operation.
using AcquaintanceGraph = std::vector<std::vector<std::size_t>>;

// Referral search: each visited node forwards to at most n_BF unvisited
// acquaintances chosen at random, up to n_RL hops from the evaluator.
// Returns the visited witnesses (evaluator excluded) in visiting order.
std::vector<std::size_t> findWitnesses(std::size_t evaluator, const AcquaintanceGraph& graph,
                                       const Params& params, Rng& rng);

// `histories[w]` is the rating history of graph node w.
std::optional<TrustEstimate> witnessReputation(std::span<const std::size_t> witnesses,
                                               std::span<const RatingHistory> histories,
                                               AgentId target, int now, const Params& params);

struct RoleRule {
    std::optional<AgentId> target;  // nullopt applies to every provider
    double value = 0.0;
    double reliability = 0.0;
};

// Reliability-weighted combination of all matching rules.
std::optional<TrustEstimate> roleBasedTrust(AgentId target, std::span<const RoleRule> rules);

std::optional<TrustEstimate> certifiedReputation(std::span<const Rating> certifiedStore, int now,
                                                 const Params& params);

std::optional<double> overallTrust(const Components& components, const Params& params);

// Picks among candidate slots given their composite trust (nullopt when the
// candidate is unknown). With probability `explorationRate` a random unknown
// candidate is tried; otherwise a known one is drawn with probability
// proportional to exp(trust / temperature), which at temperature 0 is the
// argmax with ties broken at random. Returns nullopt only for an empty
// candidate list.
std::optional<std::size_t> selectProvider(std::span<const std::optional<double>> trust,
                                          double explorationRate, Rng& rng, double temperature = 0.0);

}  // namespace trustbed::fire
