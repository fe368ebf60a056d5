#pragma once

#include <string>
#include <vector>

#include "avpc/geometry.hpp"
#include "avpc/reference_path.hpp"

namespace avpc {

/// Static convex obstacle in the ground frame.
struct Obstacle {
    int id = 0;
    std::vector<Vec2> vertices;
};

struct ObstacleConfig {
    double margin = 0.5;  ///< safety inflation toward the road [m]
    double p_min = 0.5;   ///< focal parameter floor [m]
};

/**
 * @brief Parabolic forbidden region around an obstacle.
 *
 * The directrix is parallel to the reference path at the point closest to the
 * obstacle and the axis is the path normal pointing away from the path, so
 * the region opens away from traffic. The vertex sits `margin` before the
 * obstacle's nearest extent along the axis, which inflates the region toward
 * the road by the safety margin.
 */
struct ParabolaRegion {
    Vec2 vertex_point;
    Vec2 axis;       ///< unit, away from the path
    Vec2 directrix;  ///< unit, parallel to the local path tangent
    double focal = 0.5;  ///< p [m]
    /// Arc length of the obstacle's path projection. The region only
    /// constrains the planner near this abscissa: the parabola interior is
    /// unbounded along its axis and would otherwise leak onto unrelated
    /// track sections of a winding course.
    double anchor_s = 0.0;
};

/// Minimal parabola containing all obstacle vertices; see ParabolaRegion.
ParabolaRegion fit_parabola(const Obstacle& obstacle, const ReferencePath& path,
                            const ObstacleConfig& cfg = {});

/// Signed interior measure at a point: a - b^2 / (2 p) - margin in
/// parabola-local coordinates (a along axis, b along directrix). Positive
/// means inside the forbidden region; smooth everywhere.
double interior_value(const ParabolaRegion& region, Vec2 point, double margin = 0.0);

/// Gradient of interior_value with respect to the query point.
Vec2 interior_gradient(const ParabolaRegion& region, Vec2 point);

/// Euclidean distance from a point to the obstacle polygon (0 when inside).
double distance_to_polygon(const Obstacle& obstacle, Vec2 point);

/// Loads `obstacle_id,x,y` rows grouped by id; enforces convexity.
std::vector<Obstacle> load_obstacles_csv(const std::string& filename);

void write_obstacles_csv(const std::vector<Obstacle>& obstacles, const std::string& filename);

/// Throws std::invalid_argument if the vertex loop is not convex.
void require_convex(const Obstacle& obstacle);

}  // namespace avpc
