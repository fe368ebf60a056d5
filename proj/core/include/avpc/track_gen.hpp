#pragma once

#include <string>
#include <vector>

#include "avpc/geometry.hpp"

namespace avpc {

/// One piece of a generated track: a straight or a constant-radius arc.
/// Joins are tangent-continuous.
struct TrackSegment {
    enum class Kind { Straight, Arc };
    Kind kind = Kind::Straight;
    double length = 0.0;     ///< straight length [m]
    double radius = 0.0;     ///< arc radius [m]
    double sweep_rad = 0.0;  ///< signed arc sweep, positive = left turn [rad]

    static TrackSegment straight(double length) { return {Kind::Straight, length, 0.0, 0.0}; }
    static TrackSegment arc(double radius, double sweep_rad) {
        return {Kind::Arc, 0.0, radius, sweep_rad};
    }
};

struct TrackSpec {
    std::vector<TrackSegment> segments;
    double spacing = 1.0;  ///< waypoint spacing [m]
};

/// Emits waypoints for the segment chain, starting at the origin heading +x.
std::vector<Vec2> generate_track(const std::vector<TrackSegment>& segments, double spacing = 1.0);

/// Parses a track spec file: one directive per line,
///   spacing <m> | straight <m> | arc <radius_m> <sweep_deg>
/// '#' starts a comment. Sweep sign: positive turns left.
TrackSpec load_track_spec(const std::string& filename);

/// Built-in demo layout: long straights joined by constant-radius curves
/// with radii down to 10 m.
TrackSpec hairpin_track();

}  // namespace avpc
