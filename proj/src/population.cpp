#include "trustbed/population.hpp"

#include <algorithm>

namespace trustbed {

std::string_view nameOf(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::Good: return "good";
        case ProfileKind::Ordinary: return "ordinary";
        case ProfileKind::Bad: return "bad";
        case ProfileKind::Intermittent: return "intermittent";
    }
    return "?";
}

ProviderProfile profileOf(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::Good:
            return {kind, utilityOf(PerformanceLevel::Good), utilityOf(PerformanceLevel::Perfect), 1.0};
        case ProfileKind::Ordinary:
            return {kind, utilityOf(PerformanceLevel::Ok), utilityOf(PerformanceLevel::Good), 2.0};
        case ProfileKind::Bad:
            return {kind, utilityOf(PerformanceLevel::Worst), utilityOf(PerformanceLevel::Ok), 2.0};
        case ProfileKind::Intermittent:
            return {kind, utilityOf(PerformanceLevel::Bad), utilityOf(PerformanceLevel::Good), 0.0};
    }
    return {kind, 0.0, 0.0, 0.0};
}

namespace {

std::optional<double> sampleMu(ProfileKind kind, Rng& rng) {
    if (kind == ProfileKind::Intermittent) {
        return std::nullopt;
    }
    const ProviderProfile profile = profileOf(kind);
    return rng.uniform(profile.muLow, profile.muHigh);
}

}  // namespace

Provider spawnProvider(ProfileKind kind, IdSource& ids, Rng& rng, double radiusOfOperation) {
    Provider p;
    p.id = ids.next();
    p.loc = randomLocation(rng);
    p.radiusOfOperation = radiusOfOperation;
    p.kind = kind;
    p.mu = sampleMu(kind, rng);
    return p;
}

Consumer spawnConsumer(ConsumerGroup group, IdSource& ids, Rng& rng, double radiusOfOperation) {
    Consumer c;
    c.id = ids.next();
    c.loc = randomLocation(rng);
    c.radiusOfOperation = radiusOfOperation;
    c.group = group;
    c.activity = rng.uniform(kMinActivity, kMaxActivity);
    return c;
}

double performanceAt(const Provider& p, const Location& consumerLoc, double base,
                     double degradationSlope) {
    double value = base;
    const double d = distance(p.loc, consumerLoc);
    if (d > p.radiusOfOperation) {
        value -= degradationSlope * (d - p.radiusOfOperation);
    }
    return std::clamp(value, kMinUtility, kMaxUtility);
}

double samplePerformance(const Provider& p, const Location& consumerLoc, Rng& rng,
                         double degradationSlope) {
    const ProviderProfile profile = profileOf(p.kind);
    const double base = p.mu ? rng.normal(*p.mu, profile.sigma) : rng.uniform(profile.muLow, profile.muHigh);
    return performanceAt(p, consumerLoc, base, degradationSlope);
}

void shiftMean(Provider& p, double delta) {
    if (p.mu) {
        p.mu = std::clamp(*p.mu + delta, kMinUtility, kMaxUtility);
    }
}

void driftPerformance(Provider& p, double maxChange, Rng& rng) {
    if (!p.mu) {
        return;
    }
    shiftMean(p, rng.uniform(-maxChange, maxChange));
}

void switchProfile(Provider& p, Rng& rng) {
    std::array<ProfileKind, 3> others{};
    std::size_t n = 0;
    for (auto kind : kAllProfiles) {
        if (kind != p.kind) {
            others[n++] = kind;
        }
    }
    p.kind = others[rng.index(others.size())];
    p.mu = sampleMu(p.kind, rng);
}

}  // namespace trustbed
