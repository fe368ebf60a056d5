#include "avpc/velocity_planner.hpp"

#include <algorithm>
#include <cmath>

namespace avpc {

double heuristic_speed(double v_current, double s0, const ReferencePath& path,
                       const VelocityPlannerConfig& cfg) {
    const double preview = std::max(v_current * cfg.t_preview, cfg.min_preview);
    const double curvature = path.max_curvature_ahead(s0, preview);
    double v = std::min(cfg.v_max, v_current + cfg.delta_v);
    if (curvature > 1e-9) {
        v = std::min(v, std::sqrt(0.5 * cfg.mu * cfg.g / curvature));
    }
    return std::max(v, 0.0);
}

double straight_line_vmax(const VelocityPlannerConfig& cfg, double u1_min, double horizon) {
    return std::min(cfg.v_max, std::abs(u1_min) * horizon);
}

std::vector<double> heuristic_speed_profile(double v_current, const std::vector<double>& stage_s,
                                            const ReferencePath& path,
                                            const VelocityPlannerConfig& cfg) {
    std::vector<double> profile(stage_s.size());
    for (std::size_t k = 0; k < stage_s.size(); ++k) {
        profile[k] = heuristic_speed(v_current, stage_s[k], path, cfg);
    }
    return profile;
}

}  // namespace avpc
