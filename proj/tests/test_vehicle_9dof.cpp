#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "avpc/geometry.hpp"
#include "avpc/kinematic_model.hpp"
#include "avpc/vehicle_9dof.hpp"

using namespace avpc;

namespace {

const PlantParams kParams{};

Dyn9State rolling_straight(double v) {
    Dyn9State s;
    s.v_x = v;
    for (double& w : s.wheel_speed) w = v / kParams.wheel_radius;
    return s;
}

Dyn9State mirror_state(const Dyn9State& s) {
    Dyn9State m = s;
    m.v_y = -s.v_y;
    m.yaw = -s.yaw;
    m.yaw_rate = -s.yaw_rate;
    m.roll = -s.roll;
    m.roll_rate = -s.roll_rate;
    m.wheel_speed = {s.wheel_speed[1], s.wheel_speed[0], s.wheel_speed[3], s.wheel_speed[2]};
    m.y = -s.y;
    return m;
}

PlantInput mirror_input(const PlantInput& in) {
    PlantInput m;
    m.wheel_torque = {in.wheel_torque[1], in.wheel_torque[0], in.wheel_torque[3], in.wheel_torque[2]};
    m.steering = -in.steering;
    return m;
}

}  // namespace

TEST_CASE("static normal loads") {
    bool lift = false;
    const auto f_z = normal_forces(0.0, 0.0, 0.0, 0.0, kParams, &lift);
    CHECK(!lift);
    // 1500 * 9.81 * 1.7 / (2 * 2.9), frozen from direct evaluation
    CHECK(f_z[0] == doctest::Approx(4313.017241379311).epsilon(1e-12));
    CHECK(f_z[1] == f_z[0]);
    CHECK(f_z[2] == doctest::Approx(3044.4827586206898).epsilon(1e-12));
    CHECK(f_z[3] == f_z[2]);
    CHECK(f_z[0] + f_z[1] + f_z[2] + f_z[3] ==
          doctest::Approx(kParams.m_total * kParams.g).epsilon(1e-14));
}

TEST_CASE("pure roll shifts load left-right but keeps axle sums") {
    const double roll = 0.05;
    const auto f_z = normal_forces(roll, 0.0, 0.0, 0.0, kParams);
    const auto stat = normal_forces(0.0, 0.0, 0.0, 0.0, kParams);
    // right side gains what the left loses
    CHECK(f_z[1] - stat[1] == doctest::Approx(stat[0] - f_z[0]).epsilon(1e-12));
    CHECK(f_z[0] + f_z[1] == doctest::Approx(stat[0] + stat[1]).epsilon(1e-12));
    CHECK(f_z[2] + f_z[3] == doctest::Approx(stat[2] + stat[3]).epsilon(1e-12));
    CHECK(f_z[1] > f_z[0]);  // positive roll compresses the right side
}

TEST_CASE("wheel lift clamps to zero and raises the flag") {
    bool lift = false;
    const auto f_z = normal_forces(0.5, 0.0, 0.0, 0.0, kParams, &lift);
    CHECK(lift);
    for (double f : f_z) CHECK(f >= 0.0);
}

TEST_CASE("slip angles, frozen example with both track signs") {
    Dyn9State s;
    s.v_x = 20.0;
    s.v_y = 0.5;
    s.yaw_rate = 0.2;
    const auto alpha = slip_angles(s, 0.0, kParams);
    CHECK(alpha[kFrontLeft] == doctest::Approx(-0.037281105391139074).epsilon(1e-12));
    CHECK(alpha[kFrontRight] == doctest::Approx(-0.036689877013150414).epsilon(1e-12));
    CHECK(alpha[kRearLeft] == doctest::Approx(-0.00806434130676701).epsilon(1e-12));
    CHECK(alpha[kRearRight] == doctest::Approx(-0.007936341307466063).epsilon(1e-12));

    SUBCASE("steering adds directly to the front") {
        const auto steered = slip_angles(s, 0.05, kParams);
        CHECK(steered[kFrontLeft] == doctest::Approx(alpha[kFrontLeft] + 0.05).epsilon(1e-12));
        CHECK(steered[kRearLeft] == alpha[kRearLeft]);
    }
    SUBCASE("straight rolling gives zero everywhere") {
        const auto zero = slip_angles(rolling_straight(15.0), 0.0, kParams);
        for (double a : zero) CHECK(a == 0.0);
    }
}

TEST_CASE("tire frame to vehicle frame matches the independent transcription") {
    const double f_xp = 1000.0, f_yp = 500.0, f_z = 4000.0;
    const double d = 0.1, th = 0.02, ph = 0.01;
    double f_x = 0.0, f_y = 0.0;
    tire_to_vehicle_frame(f_xp, f_yp, f_z, d, th, ph, f_x, f_y);
    CHECK(f_x == doctest::Approx(905.0408696388824).epsilon(1e-12));
    CHECK(f_y == doctest::Approx(677.3957049819031).epsilon(1e-12));

    SUBCASE("identity at zero angles") {
        tire_to_vehicle_frame(f_xp, f_yp, f_z, 0.0, 0.0, 0.0, f_x, f_y);
        CHECK(f_x == f_xp);
        CHECK(f_y == f_yp);
    }
    SUBCASE("quarter turn swaps the components") {
        tire_to_vehicle_frame(f_xp, f_yp, f_z, 0.5 * kPi, 0.0, 0.0, f_x, f_y);
        CHECK(f_x == doctest::Approx(-f_yp).epsilon(1e-12));
        CHECK(f_y == doctest::Approx(f_xp).epsilon(1e-12));
    }
}

TEST_CASE("at rest with zero input every derivative vanishes") {
    const Dyn9State rest;
    const Dyn9State d = plant_derivative(rest, {}, kParams);
    CHECK(d.v_x == 0.0);
    CHECK(d.v_y == 0.0);
    CHECK(d.yaw_rate == 0.0);
    CHECK(d.roll_rate == 0.0);
    // static pitch moment cancels up to rounding of the lever products
    CHECK(std::abs(d.pitch_rate) < 1e-12);
    for (double w : d.wheel_speed) CHECK(w == 0.0);
}

TEST_CASE("coasting straight decelerates symmetrically") {
    const Dyn9State s = rolling_straight(20.0);
    const Dyn9State d = plant_derivative(s, {}, kParams);
    CHECK(d.v_x < 0.0);  // drag + tire rolling losses
    CHECK(d.v_y == 0.0);
    CHECK(d.yaw_rate == 0.0);
    CHECK(d.roll_rate == 0.0);
    const double aero = 0.5 * kParams.air_density * kParams.drag_coeff * kParams.frontal_area * 400.0;
    CHECK(d.v_x <= doctest::Approx(-aero / kParams.m_total).epsilon(1e-9));
}

TEST_CASE("left-right mirror symmetry over 10 seconds") {
    Dyn9State a = rolling_straight(15.0);
    Dyn9State b = mirror_state(a);
    PlantInput input;
    input.steering = 0.06;
    input.wheel_torque = {40.0, 40.0, 0.0, 0.0};
    const PlantInput mirrored = mirror_input(input);
    for (int i = 0; i < 10000; ++i) {
        a = plant_step(a, input, 1e-3, kParams);
        b = plant_step(b, mirrored, 1e-3, kParams);
    }
    const Dyn9State bm = mirror_state(b);
    CHECK(std::abs(a.x - bm.x) < 1e-9);
    CHECK(std::abs(a.y - bm.y) < 1e-9);
    CHECK(std::abs(a.yaw - bm.yaw) < 1e-9);
    CHECK(std::abs(a.v_y - bm.v_y) < 1e-9);
    CHECK(std::abs(a.roll - bm.roll) < 1e-9);
    CHECK(std::abs(a.wheel_speed[0] - bm.wheel_speed[0]) < 1e-9);
}

TEST_CASE("friction circle holds at every wheel along a hard maneuver") {
    Dyn9State s = rolling_straight(18.0);
    PlantInput input;
    PlantDiagnostics diag;
    for (int i = 0; i < 4000; ++i) {
        // aggressive sine steer plus braking
        input.steering = 0.25 * std::sin(2.0 * kPi * i / 1500.0);
        input.wheel_torque = {-150.0, -150.0, -150.0, -150.0};
        s = plant_step(s, input, 1e-3, kParams, &diag);
        for (int w = 0; w < 4; ++w) {
            const double bound = kParams.mu * diag.f_z[w] * (1.0 + 1e-6);
            CHECK(std::hypot(diag.f_xp[w], diag.f_yp[w]) <= bound);
        }
        CHECK(diag.friction_utilization <= 1.0 + 1e-6);
        if (std::hypot(s.v_x, s.v_y) < 1.0) break;
    }
}

TEST_CASE("steady state circle tracks the kinematic radius at low lateral g") {
    const double radius = 30.0;
    const double speed = 8.0;
    KbmParams kin;
    const double steer = delta_for_radius(radius, kin);

    Dyn9State s = rolling_straight(speed);
    PlantInput input;
    input.steering = steer;
    double yaw_rate_acc = 0.0;
    long samples = 0;
    for (int i = 0; i < 20000; ++i) {
        // hold speed with a front-axle torque loop (test-side controller)
        const double err = speed - s.v_x;
        const double torque = std::clamp(400.0 * err, -300.0, 300.0);
        input.wheel_torque = {torque, torque, 0.0, 0.0};
        s = plant_step(s, input, 1e-3, kParams);
        if (i > 12000) {
            yaw_rate_acc += s.yaw_rate;
            ++samples;
        }
    }
    const double measured_radius = std::hypot(s.v_x, s.v_y) / (yaw_rate_acc / samples);
    CHECK(measured_radius == doctest::Approx(radius).epsilon(0.05));
}

TEST_CASE("plant RK4 order is about 4") {
    // Settle onto the braking branch of the slip-ratio definition first; the
    // traction/braking switch at exact free rolling is a C0 kink that would
    // mask the integrator order.
    PlantInput in;
    in.steering = 0.05;
    in.wheel_torque = {-20.0, -20.0, -20.0, -20.0};
    Dyn9State settled = rolling_straight(15.0);
    for (int i = 0; i < 3000; ++i) settled = plant_step(settled, in, 1e-4, kParams);

    auto integrate_to = [&](double dt, double t_end) {
        Dyn9State s = settled;
        const long n = std::lround(t_end / dt);
        for (long i = 0; i < n; ++i) s = plant_step(s, in, dt, kParams);
        return s;
    };
    const Dyn9State ref = integrate_to(2e-5, 0.4);
    auto err = [&ref](const Dyn9State& s) {
        return std::hypot(s.x - ref.x, s.y - ref.y) + std::abs(s.v_y - ref.v_y) +
               std::abs(s.yaw - ref.yaw);
    };
    const double e1 = err(integrate_to(4e-3, 0.4));
    const double e2 = err(integrate_to(2e-3, 0.4));
    const double ratio = e1 / e2;
    CHECK(ratio > 10.0);
    CHECK(ratio < 26.0);
}

TEST_CASE("divergence raises a structured error") {
    Dyn9State s = rolling_straight(10.0);
    s.v_x = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(plant_step(s, {}, 1e-3, kParams), PlantDivergence);
}

TEST_CASE("parameter validation") {
    PlantParams bad = kParams;
    bad.mu = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = kParams;
    bad.m_total = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("load transfer only redistributes: total normal load within 2 percent") {
    // mild braking maneuver; the pitch lever asymmetry (l_f != l_r) is the
    // only source of total-load change
    Dyn9State s = rolling_straight(20.0);
    PlantInput in;
    in.wheel_torque = {-280.0, -280.0, -280.0, -280.0};
    PlantDiagnostics diag;
    const double weight = kParams.m_total * kParams.g;
    for (int i = 0; i < 3000; ++i) {
        s = plant_step(s, in, 1e-3, kParams, &diag);
        const double total = (diag.f_z[0] + diag.f_z[1]) + (diag.f_z[2] + diag.f_z[3]);
        CHECK(std::abs(total - weight) / weight < 0.02);
    }
}
