#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trustbed/random.hpp"
#include "trustbed/types.hpp"

namespace trustbed {

// Polar position inside the unit ball. phi is the azimuth in [0, 2pi),
// theta the inclination in [0, pi].
struct Location {
    double r = 0.0;
    double phi = 0.0;
    double theta = 0.0;

    friend bool operator==(const Location&, const Location&) = default;
};

struct Cartesian {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline constexpr double kWorldRadius = 1.0;

Cartesian toCartesian(const Location& loc);

bool isValid(const Location& loc);

// Wraps phi into [0, 2pi) and reflects theta at the poles; r is clamped.
Location normalized(Location loc);

// Maps three unit-interval draws onto a volume-uniform point of the ball.
Location locationFromUnits(double u_radius, double u_azimuth, double u_inclination);

Location randomLocation(Rng& rng);

double distance(const Location& a, const Location& b);

Location applyAngularJitter(const Location& loc, double deltaPhiMax, Rng& rng);

// Indices of the candidates within `radius` of `center`, in candidate order.
// Any candidate sharing the center's id is skipped.
template <class Center, class Agent>
std::vector<std::size_t> nearbyAgents(const Center& center, std::span<const Agent> candidates,
                                      double radius) {
    std::vector<std::size_t> found;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].id == center.id) {
            continue;
        }
        if (distance(center.loc, candidates[i].loc) <= radius) {
            found.push_back(i);
        }
    }
    return found;
}

}  // namespace trustbed
