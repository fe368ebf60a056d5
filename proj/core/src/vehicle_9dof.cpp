#include "avpc/vehicle_9dof.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace avpc {
namespace {

constexpr int kStateSize = 14;

std::array<double, kStateSize> to_array(const Dyn9State& s) {
    return {s.v_x, s.v_y, s.yaw, s.yaw_rate, s.roll, s.roll_rate, s.pitch, s.pitch_rate,
            s.wheel_speed[0], s.wheel_speed[1], s.wheel_speed[2], s.wheel_speed[3], s.x, s.y};
}

Dyn9State from_array(const std::array<double, kStateSize>& a) {
    Dyn9State s;
    s.v_x = a[0];
    s.v_y = a[1];
    s.yaw = a[2];
    s.yaw_rate = a[3];
    s.roll = a[4];
    s.roll_rate = a[5];
    s.pitch = a[6];
    s.pitch_rate = a[7];
    s.wheel_speed = {a[8], a[9], a[10], a[11]};
    s.x = a[12];
    s.y = a[13];
    return s;
}

// Sign-preserving regularization of a near-zero denominator.
double regularize(double d, double eps) {
    if (d >= 0.0) return std::max(d, eps);
    return std::min(d, -eps);
}

}  // namespace

void PlantParams::validate() const {
    const bool positive = m_total > 0 && i_roll > 0 && i_pitch > 0 && i_yaw > 0 && i_wheel > 0 &&
                          l_f > 0 && l_r > 0 && half_track > 0 && cg_height > 0 &&
                          wheel_radius > 0 && spring_rate > 0 && damper_rate > 0 &&
                          air_density > 0 && drag_coeff > 0 && frontal_area > 0 && g > 0 &&
                          slip_eps > 0 && tire.nominal_load > 0;
    if (!positive) throw std::invalid_argument("plant parameters must be positive");
    if (mu <= 0.0 || mu > 1.2) throw std::invalid_argument("mu must lie in (0, 1.2]");
}

std::array<double, 4> slip_angles(const Dyn9State& st, double steering, const PlantParams& p) {
    const double num_front = st.v_y + p.l_f * st.yaw_rate;
    const double num_rear = st.v_y - p.l_r * st.yaw_rate;
    const double den_left = regularize(st.v_x - p.half_track * st.yaw_rate, p.slip_eps);
    const double den_right = regularize(st.v_x + p.half_track * st.yaw_rate, p.slip_eps);
    return {steering - std::atan(num_front / den_left), steering - std::atan(num_front / den_right),
            -std::atan(num_rear / den_left), -std::atan(num_rear / den_right)};
}

std::array<double, 4> normal_forces(double roll, double roll_rate, double pitch, double pitch_rate,
                                    const PlantParams& p, bool* lift) {
    const double s_roll = std::sin(roll);
    const double s_pitch = std::sin(pitch);
    const double c_roll = std::cos(roll);
    const double c_pitch = std::cos(pitch);

    // Suspension travel per corner, small-angle lever geometry. Positive roll
    // compresses the right side, positive pitch (nose down) the front.
    const std::array<double, 4> travel = {
        p.half_track * s_roll - p.l_f * s_pitch, -p.half_track * s_roll - p.l_f * s_pitch,
        p.half_track * s_roll + p.l_r * s_pitch, -p.half_track * s_roll + p.l_r * s_pitch};
    const std::array<double, 4> travel_rate = {
        p.half_track * c_roll * roll_rate - p.l_f * c_pitch * pitch_rate,
        -p.half_track * c_roll * roll_rate - p.l_f * c_pitch * pitch_rate,
        p.half_track * c_roll * roll_rate + p.l_r * c_pitch * pitch_rate,
        -p.half_track * c_roll * roll_rate + p.l_r * c_pitch * pitch_rate};

    const std::array<double, 4> statics = {p.static_load_front(), p.static_load_front(),
                                           p.static_load_rear(), p.static_load_rear()};
    std::array<double, 4> f_z{};
    for (int i = 0; i < 4; ++i) {
        f_z[i] = statics[i] - p.spring_rate * travel[i] - p.damper_rate * travel_rate[i];
        if (f_z[i] < 0.0) {
            f_z[i] = 0.0;
            if (lift) *lift = true;
        }
    }
    return f_z;
}

void tire_to_vehicle_frame(double f_xp, double f_yp, double f_z, double steer_i, double roll,
                           double pitch, double& f_x, double& f_y) {
    const double c_d = std::cos(steer_i);
    const double s_d = std::sin(steer_i);
    const double longitudinal = f_xp * c_d - f_yp * s_d;
    const double lateral = f_yp * c_d + f_xp * s_d;
    f_x = longitudinal * std::cos(pitch) - f_z * std::sin(pitch);
    f_y = longitudinal * std::sin(roll) * std::sin(pitch) + lateral * std::cos(roll) +
          f_z * std::sin(roll) * std::cos(pitch);
}

Dyn9State plant_derivative(const Dyn9State& st, const PlantInput& input, const PlantParams& p,
                           PlantDiagnostics* diag) {
    bool lift = false;
    const std::array<double, 4> f_z =
        normal_forces(st.roll, st.roll_rate, st.pitch, st.pitch_rate, p, &lift);
    const std::array<double, 4> alpha = slip_angles(st, input.steering, p);

    // Wheel-center velocities in the vehicle frame; lateral component per axle.
    const double v_lat_front = st.v_y + p.l_f * st.yaw_rate;
    const double v_lat_rear = st.v_y - p.l_r * st.yaw_rate;
    const double v_lon_left = st.v_x - p.half_track * st.yaw_rate;
    const double v_lon_right = st.v_x + p.half_track * st.yaw_rate;

    std::array<double, 4> f_x{};
    std::array<double, 4> f_y{};
    std::array<double, 4> f_xp{};
    std::array<double, 4> tau{};
    for (int i = 0; i < 4; ++i) {
        const bool front = i < 2;
        const double steer_i = front ? input.steering : 0.0;
        const double v_lon = (i % 2 == 0) ? v_lon_left : v_lon_right;
        const double v_lat = front ? v_lat_front : v_lat_rear;
        const double v_xp = v_lon * std::cos(steer_i) + v_lat * std::sin(steer_i);
        tau[i] = slip_ratio(st.wheel_speed[i], v_xp, p.wheel_radius, p.slip_eps);
        const TireForce f = tire_forces(tau[i], alpha[i], f_z[i], p.mu, p.tire);
        f_xp[i] = f.f_xp;
        tire_to_vehicle_frame(f.f_xp, f.f_yp, f_z[i], steer_i, st.roll, st.pitch, f_x[i], f_y[i]);
        if (diag) {
            diag->f_xp[i] = f.f_xp;
            diag->f_yp[i] = f.f_yp;
            diag->f_z[i] = f_z[i];
            diag->slip_ratio[i] = tau[i];
            diag->slip_angle[i] = alpha[i];
            if (f_z[i] > 0.0) {
                diag->friction_utilization = std::max(
                    diag->friction_utilization, std::hypot(f.f_xp, f.f_yp) / (p.mu * f_z[i]));
            }
        }
    }
    if (diag) diag->wheel_lift = lift;

    const double sum_f_x = (f_x[0] + f_x[1]) + (f_x[2] + f_x[3]);
    const double sum_f_y = (f_y[0] + f_y[1]) + (f_y[2] + f_y[3]);
    const double f_aero = 0.5 * p.air_density * p.drag_coeff * p.frontal_area * st.v_x * std::abs(st.v_x);

    Dyn9State d;
    d.v_x = st.yaw_rate * st.v_y + (sum_f_x - f_aero) / p.m_total;
    d.v_y = -st.yaw_rate * st.v_x + sum_f_y / p.m_total;
    d.yaw = st.yaw_rate;
    d.yaw_rate = (p.l_f * (f_y[0] + f_y[1]) - p.l_r * (f_y[2] + f_y[3]) +
                  p.half_track * ((f_x[1] + f_x[3]) - (f_x[0] + f_x[2]))) /
                 p.i_yaw;
    d.roll = st.roll_rate;
    d.roll_rate = (p.half_track * ((f_z[0] + f_z[2]) - (f_z[1] + f_z[3])) + p.cg_height * sum_f_y) /
                  p.i_roll;
    d.pitch = st.pitch_rate;
    d.pitch_rate = (p.l_r * (f_z[2] + f_z[3]) - p.l_f * (f_z[0] + f_z[1]) - p.cg_height * sum_f_x) /
                   p.i_pitch;
    for (int i = 0; i < 4; ++i) {
        d.wheel_speed[i] = (input.wheel_torque[i] - p.wheel_radius * f_xp[i]) / p.i_wheel;
    }
    d.x = st.v_x * std::cos(st.yaw) - st.v_y * std::sin(st.yaw);
    d.y = st.v_x * std::sin(st.yaw) + st.v_y * std::cos(st.yaw);
    return d;
}

Dyn9State plant_step(const Dyn9State& state, const PlantInput& input, double dt,
                     const PlantParams& p, PlantDiagnostics* diag) {
    const Dyn9State k1 = plant_derivative(state, input, p, diag);
    const auto x0 = to_array(state);
    const auto a1 = to_array(k1);

    std::array<double, kStateSize> tmp;
    for (int i = 0; i < kStateSize; ++i) tmp[i] = x0[i] + 0.5 * dt * a1[i];
    const auto a2 = to_array(plant_derivative(from_array(tmp), input, p));
    for (int i = 0; i < kStateSize; ++i) tmp[i] = x0[i] + 0.5 * dt * a2[i];
    const auto a3 = to_array(plant_derivative(from_array(tmp), input, p));
    for (int i = 0; i < kStateSize; ++i) tmp[i] = x0[i] + dt * a3[i];
    const auto a4 = to_array(plant_derivative(from_array(tmp), input, p));

    std::array<double, kStateSize> next;
    for (int i = 0; i < kStateSize; ++i) {
        next[i] = x0[i] + dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
    }
    for (int i = 0; i < kStateSize; ++i) {
        if (!std::isfinite(next[i])) {
            std::ostringstream msg;
            msg << "plant state diverged (component " << i << "):";
            for (double v : next) msg << ' ' << v;
            throw PlantDivergence(msg.str());
        }
    }
    return from_array(next);
}

}  // namespace avpc
