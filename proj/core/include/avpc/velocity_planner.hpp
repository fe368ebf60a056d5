#pragma once

#include <vector>

#include "avpc/reference_path.hpp"

namespace avpc {

struct VelocityPlannerConfig {
    double v_max = 20.0;      ///< global speed cap [m/s]
    double delta_v = 1.0;     ///< per planner cycle speed increment [m/s]
    double t_preview = 4.0;   ///< curvature preview window [s]
    double mu = 1.0;
    double g = 9.81;
    double min_preview = 5.0; ///< preview distance floor at low speed [m]
};

/// Heuristic target speed: min of the curvature-limited speed over the
/// preview window (v_current * t_preview ahead of s0, floored at
/// min_preview), the global cap, and the ramp limit V + delta_v.
double heuristic_speed(double v_current, double s0, const ReferencePath& path,
                       const VelocityPlannerConfig& cfg);

/// Straight-line cap: the speed from which maximum braking reaches a full
/// stop within the prediction horizon. u1_min is negative.
double straight_line_vmax(const VelocityPlannerConfig& cfg, double u1_min, double horizon);

/// Per-stage heuristic speed profile: the heuristic evaluated at each
/// predicted stage position. The speed entering the preview length and the
/// ramp term is the measured speed in every stage; a preview scaled by the
/// predicted (slowing) stage speeds would release the curve cap as soon as
/// the plan starts braking.
std::vector<double> heuristic_speed_profile(double v_current, const std::vector<double>& stage_s,
                                            const ReferencePath& path,
                                            const VelocityPlannerConfig& cfg);

}  // namespace avpc
