#pragma once

#include <array>

namespace avpc {

/// Planning state [s, X, Y, V, psi, delta].
struct KbmState {
    double s = 0.0;      ///< curvilinear abscissa [m]
    double x = 0.0;      ///< ground frame X [m]
    double y = 0.0;      ///< ground frame Y [m]
    double v = 0.0;      ///< speed [m/s], forward driving only
    double psi = 0.0;    ///< yaw angle [rad]
    double delta = 0.0;  ///< front steering angle [rad]
};

/// Planning inputs: acceleration and steering rate.
struct KbmInput {
    double accel = 0.0;       ///< u1 [m/s^2]
    double steer_rate = 0.0;  ///< u2 [rad/s]
};

struct KbmParams {
    double l_f = 1.2;         ///< CoG to front axle [m]
    double l_r = 1.7;         ///< CoG to rear axle [m]
    double delta_mech = 0.55; ///< mechanical steering limit [rad]
    double mu = 1.0;          ///< road friction coefficient
    double g = 9.81;          ///< gravity [m/s^2]
};

/// Discrete one-step Jacobians of integrate_step, row/column order [s,x,y,v,psi,delta].
struct KbmStepJacobian {
    std::array<std::array<double, 6>, 6> d_state{};  ///< d(next)/d(state)
    std::array<std::array<double, 2>, 6> d_input{};  ///< d(next)/d(input)
};

/// Slip angle at the center of gravity, beta = atan(tan(delta) * l_r / (l_f + l_r)).
/// Throws std::domain_error for |delta| >= pi/2.
double slip_angle_beta(double delta, const KbmParams& p);

/// d(beta)/d(delta).
double slip_angle_beta_deriv(double delta, const KbmParams& p);

/// Continuous-time state derivative of the kinematic bicycle model,
/// augmented with s_dot = V.
KbmState kbm_derivative(const KbmState& state, const KbmInput& input, const KbmParams& p);

/// Classical RK4 step with the input held constant (zero-order hold).
/// V is clamped at 0 from below (no reverse) and delta at +-delta_mech.
KbmState integrate_step(const KbmState& state, const KbmInput& input, double dt, const KbmParams& p);

/// Same step, also returning the exact discrete Jacobians. The returned
/// state is bit-identical to integrate_step.
KbmState integrate_step_with_jacobian(const KbmState& state, const KbmInput& input, double dt,
                                      const KbmParams& p, KbmStepJacobian& jac);

/// Steering angle that produces turn radius R (throws std::domain_error if R <= l_r).
double delta_for_radius(double radius, const KbmParams& p);

/// Speed-dependent steering limit keeping lateral acceleration below 0.5*mu*g.
/// Returns delta_mech below the speed where the bound is unreachable.
double delta_max(double v, const KbmParams& p);

/// d(delta_max)/dV; zero wherever the mechanical limit is active.
double delta_max_deriv(double v, const KbmParams& p);

}  // namespace avpc
