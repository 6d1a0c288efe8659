#include "trustbed/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace trustbed {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Cartesian toCartesian(const Location& loc) {
    const double s = std::sin(loc.theta);
    return {loc.r * s * std::cos(loc.phi), loc.r * s * std::sin(loc.phi), loc.r * std::cos(loc.theta)};
}

bool isValid(const Location& loc) {
    return loc.r >= 0.0 && loc.r <= kWorldRadius && loc.phi >= 0.0 && loc.phi < kTwoPi &&
           loc.theta >= 0.0 && loc.theta <= std::numbers::pi;
}

Location normalized(Location loc) {
    loc.r = std::clamp(loc.r, 0.0, kWorldRadius);

    loc.phi = std::fmod(loc.phi, kTwoPi);
    if (loc.phi < 0.0) {
        loc.phi += kTwoPi;
    }
    // fmod of a tiny negative value can round back up to exactly 2pi.
    if (loc.phi >= kTwoPi) {
        loc.phi = 0.0;
    }

    double t = std::fmod(loc.theta, kTwoPi);
    if (t < 0.0) {
        t += kTwoPi;
    }
    if (t > std::numbers::pi) {
        t = kTwoPi - t;
    }
    loc.theta = std::clamp(t, 0.0, std::numbers::pi);
    return loc;
}

Location locationFromUnits(double u_radius, double u_azimuth, double u_inclination) {
    Location loc;
    loc.r = kWorldRadius * std::cbrt(u_radius);
    loc.phi = kTwoPi * u_azimuth;
    loc.theta = std::acos(std::clamp(1.0 - 2.0 * u_inclination, -1.0, 1.0));
    return normalized(loc);
}

Location randomLocation(Rng& rng) {
    const double ur = rng.uniform();
    const double uphi = rng.uniform();
    const double utheta = rng.uniform();
    return locationFromUnits(ur, uphi, utheta);
}

double distance(const Location& a, const Location& b) {
    const Cartesian p = toCartesian(a);
    const Cartesian q = toCartesian(b);
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    const double dz = p.z - q.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Location applyAngularJitter(const Location& loc, double deltaPhiMax, Rng& rng) {
    if (deltaPhiMax <= 0.0) {
        return loc;
    }
    const double dphi = rng.uniform(-deltaPhiMax, deltaPhiMax);
    const double dtheta = rng.uniform(-deltaPhiMax, deltaPhiMax);
    return normalized({loc.r, loc.phi + dphi, loc.theta + dtheta});
}

}  // namespace trustbed
