#pragma once

namespace avpc {

/// Magic Formula shape factors for one slip axis. The peak factor D is
/// mu_eff * F_z and is applied outside the normalized curve.
struct MagicFormulaAxis {
    double stiffness = 10.0;  ///< B
    double shape = 1.9;       ///< C
    double curvature = 0.97;  ///< E
};

struct TireConfig {
    MagicFormulaAxis longitudinal{10.0, 1.9, 0.97};
    MagicFormulaAxis lateral{9.0, 1.3, 0.97};
    /// Relative drop of the normalized peak per unit of relative overload.
    /// Makes the axle grip fall under lateral load transfer, which is what
    /// differentiates the plant from the kinematic model near the limit.
    double load_sensitivity = 0.1;
    double nominal_load = 3678.75;  ///< reference wheel load [N]
};

struct TireForce {
    double f_xp = 0.0;  ///< longitudinal force, tire frame [N]
    double f_yp = 0.0;  ///< lateral force, tire frame [N]
};

/// Normalized pure-slip Magic Formula curve, in [-1, 1].
double magic_formula(double slip, const MagicFormulaAxis& axis);

/// Effective friction coefficient at a given load, capped at mu so the
/// friction circle ||F|| <= mu * F_z always holds.
double effective_friction(double f_z, double mu, const TireConfig& cfg);

/// Combined-slip tire forces: pure-slip curves per axis scaled onto the
/// friction circle (radial projection when the resultant exceeds mu_eff*F_z).
TireForce tire_forces(double slip_ratio, double slip_angle, double f_z, double mu,
                      const TireConfig& cfg);

/// Longitudinal slip ratio, regularized near standstill by eps [m/s].
double slip_ratio(double omega, double v_xp, double r_eff, double eps = 1e-3);

}  // namespace avpc
