#include "avpc/tire_model.hpp"

#include <algorithm>
#include <cmath>

namespace avpc {

double magic_formula(double slip, const MagicFormulaAxis& axis) {
    const double bs = axis.stiffness * slip;
    return std::sin(axis.shape * std::atan(bs - axis.curvature * (bs - std::atan(bs))));
}

double effective_friction(double f_z, double mu, const TireConfig& cfg) {
    const double rel = (f_z - cfg.nominal_load) / cfg.nominal_load;
    return std::clamp(mu * (1.0 - cfg.load_sensitivity * rel), 0.0, mu);
}

TireForce tire_forces(double slip_ratio, double slip_angle, double f_z, double mu,
                      const TireConfig& cfg) {
    if (f_z <= 0.0) return {};
    const double peak = effective_friction(f_z, mu, cfg) * f_z;
    TireForce f;
    f.f_xp = peak * magic_formula(slip_ratio, cfg.longitudinal);
    f.f_yp = peak * magic_formula(slip_angle, cfg.lateral);
    const double resultant = std::hypot(f.f_xp, f.f_yp);
    if (resultant > peak) {
        const double scale = peak / resultant;
        f.f_xp *= scale;
        f.f_yp *= scale;
    }
    return f;
}

double slip_ratio(double omega, double v_xp, double r_eff, double eps) {
    const double wheel_speed = r_eff * omega;
    if (wheel_speed >= v_xp) {
        return (wheel_speed - v_xp) / std::max(r_eff * std::abs(omega), eps);
    }
    return (wheel_speed - v_xp) / std::max(std::abs(v_xp), eps);
}

}  // namespace avpc
