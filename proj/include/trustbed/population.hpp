#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "trustbed/random.hpp"
#include "trustbed/types.hpp"
#include "trustbed/world.hpp"

namespace trustbed {

enum class ProfileKind : std::uint8_t { Good, Ordinary, Bad, Intermittent };

inline constexpr std::array<ProfileKind, 4> kAllProfiles = {
    ProfileKind::Good, ProfileKind::Ordinary, ProfileKind::Bad, ProfileKind::Intermittent};

std::string_view nameOf(ProfileKind kind);

struct ProviderProfile {
    ProfileKind kind;
    double muLow;
    double muHigh;
    double sigma;
};

// Intermittent providers carry no mean; muLow/muHigh give their uniform range.
ProviderProfile profileOf(ProfileKind kind);

struct Provider {
    AgentId id{};
    Location loc;
    double radiusOfOperation = 0.5;
    ProfileKind kind = ProfileKind::Ordinary;
    std::optional<double> mu;
    // Ratings the provider keeps to present as certified references.
    std::vector<Rating> certifiedRatings;
};

struct Consumer {
    AgentId id{};
    Location loc;
    double radiusOfOperation = 0.5;
    ConsumerGroup group = ConsumerGroup::NoTrustModel;
    double activity = 1.0;
    std::size_t interactionCount = 0;
};

inline constexpr double kMinActivity = 0.25;
inline constexpr double kMaxActivity = 1.00;

Provider spawnProvider(ProfileKind kind, IdSource& ids, Rng& rng, double radiusOfOperation = 0.5);
Consumer spawnConsumer(ConsumerGroup group, IdSource& ids, Rng& rng, double radiusOfOperation = 0.5);

// Performance delivered to a consumer at `consumerLoc` given the provider's
// undegraded draw `base`: linear loss beyond the provider's range, then
// clamped to the utility bounds.
double performanceAt(const Provider& p, const Location& consumerLoc, double base,
                     double degradationSlope);

double samplePerformance(const Provider& p, const Location& consumerLoc, Rng& rng,
                         double degradationSlope);

// Moves mu by `delta`, clamped to the utility bounds. No-op for
// intermittent providers.
void shiftMean(Provider& p, double delta);

// shiftMean by a change drawn from U[-maxChange, +maxChange].
void driftPerformance(Provider& p, double maxChange, Rng& rng);

void switchProfile(Provider& p, Rng& rng);

struct Replacement {
    std::size_t index;
    AgentId departed;
    AgentId arrived;
};

// Removes k ~ U{0..floor(pLimit * n)} uniformly chosen agents and puts a
// newcomer produced by `spawn(departed)` in each vacated slot. `spawn` is
// expected to preserve the departed agent's kind or group, which keeps the
// per-kind counts fixed.
template <class Agent, class Spawn>
std::vector<Replacement> replacePopulation(std::vector<Agent>& agents, double pLimit, Spawn&& spawn,
                                           Rng& rng) {
    std::vector<Replacement> replaced;
    const auto cap = static_cast<std::int64_t>(std::floor(pLimit * static_cast<double>(agents.size()) + 1e-9));
    if (cap <= 0 || agents.empty()) {
        return replaced;
    }
    const auto k = static_cast<std::size_t>(rng.integer(0, cap));
    std::vector<std::size_t> order(agents.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    // Partial Fisher-Yates picks k distinct slots.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.index(order.size() - i);
        std::swap(order[i], order[j]);
        const std::size_t slot = order[i];
        const AgentId departed = agents[slot].id;
        agents[slot] = spawn(agents[slot]);
        replaced.push_back({slot, departed, agents[slot].id});
    }
    return replaced;
}

}  // namespace trustbed
