#pragma once

#include <string>
#include <vector>

#include "avpc/geometry.hpp"

namespace avpc {

/// One resampled point of the centerline.
struct PathSample {
    Vec2 position;
    double s = 0.0;          ///< cumulative arc length [m]
    double heading = 0.0;    ///< tangent direction [rad]
    double curvature = 0.0;  ///< signed, left turn positive [1/m]
};

/// Result of projecting a ground-frame point onto the path.
struct PathProjection {
    double s = 0.0;               ///< arc length of the closest point [m]
    double lateral_offset = 0.0;  ///< signed distance, left of path positive [m]
    double heading_error = 0.0;   ///< query heading minus path tangent, wrapped [rad]
    double path_heading = 0.0;    ///< tangent direction at the closest point [rad]
    Vec2 segment_tangent;         ///< unit tangent of the matched polyline segment
};

/**
 * @brief Arc-length-parameterized road centerline.
 *
 * Built from an ordered waypoint polyline, resampled at (near) uniform
 * spacing. Heading comes from central differences, curvature from the
 * three-point circumscribed-circle formula, which is exact for circular
 * arcs. Immutable after construction and safe to share between threads.
 */
class ReferencePath {
public:
    /// Builds a path from ordered waypoints. Throws std::invalid_argument on
    /// fewer than 3 points, consecutive duplicates, or non-positive spacing.
    static ReferencePath build(const std::vector<Vec2>& points, double resample_spacing = 1.0);

    /// Reads a waypoint CSV with mandatory header "x,y" (meters) and builds the path.
    static ReferencePath from_csv(const std::string& filename, double resample_spacing = 1.0);

    /**
     * @brief Closest-point projection with a locally monotone search around hint_s.
     *
     * The search window spans +-search_window() of arc length around the hint
     * so nearby track sections (e.g. the far side of a hairpin) are ignored.
     * Ties resolve toward smaller s.
     */
    PathProjection project(Vec2 point, double hint_s, double query_heading = 0.0) const;

    /// Projection scanning the whole path (used for one-off queries such as obstacles).
    PathProjection project_global(Vec2 point, double query_heading = 0.0) const;

    /// Maximum |curvature| over [s0, s0 + lookahead], clamped to the path end.
    double max_curvature_ahead(double s0, double lookahead) const;

    double total_length() const { return samples_.back().s; }
    Vec2 position_at(double s) const;
    double heading_at(double s) const;
    double curvature_at(double s) const;
    Vec2 tangent_at(double s) const;

    const std::vector<PathSample>& samples() const { return samples_; }
    double spacing() const { return spacing_; }
    double search_window() const { return search_window_; }

private:
    ReferencePath() = default;
    PathProjection project_range(Vec2 point, std::size_t first_seg, std::size_t last_seg,
                                 double query_heading) const;
    std::size_t segment_index_at(double s) const;

    std::vector<PathSample> samples_;
    double spacing_ = 1.0;
    double search_window_ = 30.0;
};

/// Parses the waypoint CSV format (header "x,y") without building a path.
std::vector<Vec2> load_waypoints_csv(const std::string& filename);

/// Writes waypoints in the same CSV format.
void write_waypoints_csv(const std::vector<Vec2>& points, const std::string& filename);

}  // namespace avpc
