#include "avpc/low_level_control.hpp"

#include <algorithm>
#include <cmath>

#include "avpc/geometry.hpp"

namespace avpc {

ReferenceSample interpolate_reference(const PlannedTrajectory& traj, double t) {
    ReferenceSample out;
    const auto& states = traj.states;
    if (t <= states.front().t) {
        out.v_ref = states.front().state.v;
        out.heading_ref = states.front().state.psi;
        return out;
    }
    if (t >= states.back().t) {
        out.v_ref = states.back().state.v;
        out.heading_ref = states.back().state.psi;
        out.stale = t > states.back().t + 1e-9;
        return out;
    }
    std::size_t i = 1;
    while (states[i].t < t) ++i;
    const auto& a = states[i - 1];
    const auto& b = states[i];
    const double w = (t - a.t) / (b.t - a.t);
    out.v_ref = a.state.v + (b.state.v - a.state.v) * w;
    out.heading_ref = a.state.psi + wrap_angle(b.state.psi - a.state.psi) * w;
    return out;
}

std::array<double, 4> dispatch_torques(double force_demand, double r_eff) {
    const double total = force_demand * r_eff;
    if (total >= 0.0) {
        return {0.5 * total, 0.5 * total, 0.0, 0.0};
    }
    return {0.25 * total, 0.25 * total, 0.25 * total, 0.25 * total};
}

double Pid::update(double error, double measurement, double dt) {
    integral_ = std::clamp(integral_ + error * dt, -gains_.integrator_limit, gains_.integrator_limit);
    if (!primed_) {
        prev_measurement_ = measurement;
        primed_ = true;
    }
    const double raw_rate = (measurement - prev_measurement_) / dt;
    prev_measurement_ = measurement;
    const double blend = dt / (gains_.derivative_filter_tau + dt);
    filtered_rate_ += blend * (raw_rate - filtered_rate_);
    return -(gains_.kp * error + gains_.ki * integral_ + gains_.kd * filtered_rate_);
}

void Pid::reset() {
    integral_ = 0.0;
    filtered_rate_ = 0.0;
    prev_measurement_ = 0.0;
    primed_ = false;
}

LowLevelController::LowLevelController(const ControlGains& gains, double wheel_radius,
                                       double delta_mech, double u2_abs, double mpc_stage_dt)
    : gains_(gains),
      wheel_radius_(wheel_radius),
      delta_mech_(delta_mech),
      max_steer_rate_(gains.steering_rate_scale * u2_abs),
      stage_dt_(mpc_stage_dt),
      speed_pid_(gains.longitudinal),
      yaw_pid_(gains.lateral) {}

void LowLevelController::set_trajectory(const PlannedTrajectory& traj) {
    trajectory_ = traj;
    has_trajectory_ = true;
    stale_ = false;
}

ActuatorCommand LowLevelController::update(const Dyn9State& plant, double t, double dt) {
    ActuatorCommand cmd;
    if (!has_trajectory_) return cmd;

    // Longitudinal: PID on speed error in force units, then torque dispatch.
    const ReferenceSample now = interpolate_reference(trajectory_, t);
    stale_ = now.stale;
    v_ref_ = now.v_ref;
    const double speed = std::hypot(plant.v_x, plant.v_y);
    const double force = speed_pid_.update(speed - now.v_ref, speed, dt);
    cmd.wheel_torque = dispatch_torques(force, wheel_radius_);
    for (double& torque : cmd.wheel_torque) {
        torque = std::clamp(torque, -gains_.torque_limit, gains_.torque_limit);
    }

    // Lateral: open-loop integration of the plan's first steering rate,
    // plus yaw-error PID projected one MPC stage ahead.
    delta_ol_ = trajectory_.initial_steering() +
                trajectory_.first_steer_rate() * (t - trajectory_.creation_time);
    const ReferenceSample ahead = interpolate_reference(trajectory_, t + stage_dt_);
    const double yaw_error = wrap_angle(plant.yaw + plant.yaw_rate * stage_dt_ - ahead.heading_ref);
    delta_cl_ = yaw_pid_.update(yaw_error, yaw_error, dt);

    double steering = std::clamp(delta_ol_ + delta_cl_, -delta_mech_, delta_mech_);
    const double max_change = max_steer_rate_ * dt;
    steering = std::clamp(steering, prev_steering_ - max_change, prev_steering_ + max_change);
    cmd.steering = steering;
    prev_steering_ = steering;
    return cmd;
}

}  // namespace avpc
