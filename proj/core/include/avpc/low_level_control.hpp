#pragma once

#include <array>

#include "avpc/mpc_planner.hpp"
#include "avpc/vehicle_9dof.hpp"

namespace avpc {

/// What the controllers hand to the plant each cycle: wheel torques plus a
/// range- and slew-limited steering angle.
using ActuatorCommand = PlantInput;

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double integrator_limit = 1.0;      ///< |integral| clamp (anti-windup)
    double derivative_filter_tau = 0.05;  ///< first-order filter time constant [s]
};

struct ControlGains {
    /// Output in force units [N]. The proportional gain must be stiff enough
    /// to track the plan's full-braking ramps: each 10 Hz replan re-anchors
    /// the speed reference at the measured speed, so only the within-cycle
    /// error is available to the loop.
    PidGains longitudinal{20000.0, 2000.0, 0.0, 2.0, 0.05};
    PidGains lateral{2.0, 0.05, 0.0, 0.5, 0.05};
    double steering_rate_scale = 2.0;  ///< steering slew bound = scale * u2_abs
    double torque_limit = 2000.0;      ///< per-wheel torque bound [N m]
};

/// Interpolated reference at time t; stale is set when t runs past the
/// trajectory end (values then hold the last knot).
struct ReferenceSample {
    double v_ref = 0.0;
    double heading_ref = 0.0;
    bool stale = false;
};

/// Linear interpolation of the planned speed and yaw; yaw interpolates
/// through the shorter arc across +-pi.
ReferenceSample interpolate_reference(const PlannedTrajectory& traj, double t);

/// Splits a drive/brake force demand into wheel torques: acceleration goes
/// to the two front wheels, braking to all four.
std::array<double, 4> dispatch_torques(double force_demand, double r_eff);

/// PID with clamped integrator; the derivative acts on the measurement
/// through a first-order filter so planner refreshes cause no kick.
class Pid {
public:
    explicit Pid(const PidGains& gains) : gains_(gains) {}

    double update(double error, double measurement, double dt);
    void reset();
    double integral() const { return integral_; }

private:
    PidGains gains_;
    double integral_ = 0.0;
    double filtered_rate_ = 0.0;
    double prev_measurement_ = 0.0;
    bool primed_ = false;
};

/**
 * @brief 100 Hz tracking of the planned trajectory.
 *
 * Longitudinal: PID on speed error -> force -> torque dispatch.
 * Lateral: open-loop steering integrates the plan's first-stage steering
 * rate from the plan's initial steering angle; a yaw-error PID projected one
 * MPC stage ahead closes the loop. The sum is slew- and range-limited.
 */
class LowLevelController {
public:
    LowLevelController(const ControlGains& gains, double wheel_radius, double delta_mech,
                       double u2_abs, double mpc_stage_dt);

    /// Installs a fresh plan and re-anchors the open-loop steering.
    void set_trajectory(const PlannedTrajectory& traj);
    bool has_trajectory() const { return has_trajectory_; }

    ActuatorCommand update(const Dyn9State& plant, double t, double dt);

    /// True once the reference has run past the trajectory end.
    bool reference_stale() const { return stale_; }
    double last_open_loop() const { return delta_ol_; }
    double last_closed_loop() const { return delta_cl_; }
    double last_v_ref() const { return v_ref_; }
    double last_steering() const { return prev_steering_; }

private:
    ControlGains gains_;
    double wheel_radius_;
    double delta_mech_;
    double max_steer_rate_;
    double stage_dt_;

    PlannedTrajectory trajectory_;
    bool has_trajectory_ = false;
    Pid speed_pid_;
    Pid yaw_pid_;
    double delta_ol_ = 0.0;
    double delta_cl_ = 0.0;
    double v_ref_ = 0.0;
    double prev_steering_ = 0.0;
    bool stale_ = false;
};

}  // namespace avpc
