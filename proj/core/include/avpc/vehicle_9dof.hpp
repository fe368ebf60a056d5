#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "avpc/tire_model.hpp"

namespace avpc {

/// Wheel index order used everywhere: 0 = front left, 1 = front right,
/// 2 = rear left, 3 = rear right.
inline constexpr int kFrontLeft = 0;
inline constexpr int kFrontRight = 1;
inline constexpr int kRearLeft = 2;
inline constexpr int kRearRight = 3;

/// 9-DoF plant state: 3 chassis DoF, 2 carbody DoF, 4 wheel spins, plus pose.
struct Dyn9State {
    double v_x = 0.0;        ///< longitudinal speed, vehicle frame [m/s]
    double v_y = 0.0;        ///< lateral speed, vehicle frame [m/s]
    double yaw = 0.0;        ///< psi [rad]
    double yaw_rate = 0.0;   ///< psi_dot [rad/s]
    double roll = 0.0;       ///< theta [rad]
    double roll_rate = 0.0;  ///< theta_dot [rad/s]
    double pitch = 0.0;      ///< phi [rad], positive nose down
    double pitch_rate = 0.0; ///< phi_dot [rad/s]
    std::array<double, 4> wheel_speed{};  ///< omega_i [rad/s]
    double x = 0.0;          ///< ground frame X [m]
    double y = 0.0;          ///< ground frame Y [m]
};

/// Wheel torques and front steering angle.
struct PlantInput {
    std::array<double, 4> wheel_torque{};  ///< T_i [N m]
    double steering = 0.0;                 ///< delta [rad]
};

struct PlantParams {
    double m_total = 1500.0;     ///< M_T [kg]
    double i_roll = 550.0;       ///< I_x [kg m^2]
    double i_pitch = 2400.0;     ///< I_y [kg m^2]
    double i_yaw = 2700.0;       ///< I_z [kg m^2]
    double i_wheel = 1.2;        ///< I_r [kg m^2]
    double l_f = 1.2;            ///< CoG to front axle [m]
    double l_r = 1.7;            ///< CoG to rear axle [m]
    double half_track = 0.8;     ///< l_w [m]
    double cg_height = 0.5;      ///< h [m]
    double wheel_radius = 0.31;  ///< r_eff [m]
    double spring_rate = 30000.0;   ///< k_s [N/m]
    double damper_rate = 3000.0;    ///< d_s [N s/m]
    double air_density = 1.225;     ///< rho_air [kg/m^3]
    double drag_coeff = 0.35;       ///< C_x
    double frontal_area = 2.2;      ///< S [m^2]
    double mu = 1.0;                ///< road friction coefficient
    double g = 9.81;
    double slip_eps = 1e-3;         ///< slip-ratio regularization [m/s]
    TireConfig tire;

    void validate() const;  ///< throws std::invalid_argument on bad values
    double wheelbase() const { return l_f + l_r; }
    /// Static normal load on one wheel of the given axle.
    double static_load_front() const { return m_total * g * l_r / (2.0 * wheelbase()); }
    double static_load_rear() const { return m_total * g * l_f / (2.0 * wheelbase()); }
};

/// Per-wheel force snapshot, evaluated at the start of a step.
struct PlantDiagnostics {
    std::array<double, 4> f_xp{};       ///< tire frame longitudinal [N]
    std::array<double, 4> f_yp{};       ///< tire frame lateral [N]
    std::array<double, 4> f_z{};        ///< normal load [N]
    std::array<double, 4> slip_ratio{};
    std::array<double, 4> slip_angle{};
    bool wheel_lift = false;
    /// max over wheels of ||(f_xp, f_yp)|| / (mu * f_z)
    double friction_utilization = 0.0;
};

/// Thrown when an integration step produces a non-finite state.
class PlantDivergence : public std::runtime_error {
public:
    explicit PlantDivergence(const std::string& what) : std::runtime_error(what) {}
};

/// Side-slip angles per wheel; the track-width sign convention puts the
/// left wheels at V_x - l_w * yaw_rate in the denominator.
std::array<double, 4> slip_angles(const Dyn9State& state, double steering, const PlantParams& p);

/// Normal loads: static axle distribution plus spring/damper increments from
/// the small-angle suspension levers. Negative loads are clamped to zero and
/// reported through *lift.
std::array<double, 4> normal_forces(double roll, double roll_rate, double pitch, double pitch_rate,
                                    const PlantParams& p, bool* lift = nullptr);

/// Tire-frame to vehicle-frame force rotation including the load projection
/// terms from roll and pitch.
void tire_to_vehicle_frame(double f_xp, double f_yp, double f_z, double steer_i, double roll,
                           double pitch, double& f_x, double& f_y);

/// Full state derivative; optionally records the force snapshot.
Dyn9State plant_derivative(const Dyn9State& state, const PlantInput& input, const PlantParams& p,
                           PlantDiagnostics* diag = nullptr);

/// Fixed-step RK4 with zero-order-held inputs. Throws PlantDivergence when
/// the resulting state is non-finite. Diagnostics reflect the step start.
Dyn9State plant_step(const Dyn9State& state, const PlantInput& input, double dt,
                     const PlantParams& p, PlantDiagnostics* diag = nullptr);

/// Owns a state and steps it; snapshots are plain values.
class VehiclePlant {
public:
    VehiclePlant(const PlantParams& params, const Dyn9State& initial)
        : params_(params), state_(initial) {
        params_.validate();
    }

    const Dyn9State& state() const { return state_; }
    const PlantParams& params() const { return params_; }

    PlantDiagnostics step(const PlantInput& input, double dt) {
        PlantDiagnostics diag;
        state_ = plant_step(state_, input, dt, params_, &diag);
        return diag;
    }

private:
    PlantParams params_;
    Dyn9State state_;
};

}  // namespace avpc
