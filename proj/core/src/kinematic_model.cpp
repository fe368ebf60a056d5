#include "avpc/kinematic_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "avpc/geometry.hpp"

namespace avpc {
namespace {

using Mat6 = std::array<std::array<double, 6>, 6>;
using Mat62 = std::array<std::array<double, 2>, 6>;

// Continuous Jacobians of kbm_derivative, order [s, x, y, v, psi, delta].
void continuous_jacobian(const KbmState& st, const KbmParams& p, Mat6& fx, Mat62& fu) {
    fx = {};
    fu = {};
    const double beta = slip_angle_beta(st.delta, p);
    const double dbeta = slip_angle_beta_deriv(st.delta, p);
    const double c = std::cos(st.psi + beta);
    const double s = std::sin(st.psi + beta);
    fx[0][3] = 1.0;
    fx[1][3] = c;
    fx[1][4] = -st.v * s;
    fx[1][5] = -st.v * s * dbeta;
    fx[2][3] = s;
    fx[2][4] = st.v * c;
    fx[2][5] = st.v * c * dbeta;
    fx[4][3] = std::sin(beta) / p.l_r;
    fx[4][5] = st.v / p.l_r * std::cos(beta) * dbeta;
    fu[3][0] = 1.0;
    fu[5][1] = 1.0;
}

KbmState axpy(const KbmState& a, const KbmState& k, double h) {
    return {a.s + h * k.s, a.x + h * k.x, a.y + h * k.y,
            a.v + h * k.v, a.psi + h * k.psi, a.delta + h * k.delta};
}

// dM = fx(at) * (I + h * dK_prev) for the state part, plus input chain.
void stage_jacobian(const Mat6& fx, const Mat62& fu, const Mat6& dk_prev_x, const Mat62& dk_prev_u,
                    double h, Mat6& dk_x, Mat62& dk_u) {
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
            double acc = fx[r][c];
            for (int m = 0; m < 6; ++m) acc += fx[r][m] * h * dk_prev_x[m][c];
            dk_x[r][c] = acc;
        }
        for (int c = 0; c < 2; ++c) {
            double acc = fu[r][c];
            for (int m = 0; m < 6; ++m) acc += fx[r][m] * h * dk_prev_u[m][c];
            dk_u[r][c] = acc;
        }
    }
}

KbmState rk4(const KbmState& st, const KbmInput& u, double dt, const KbmParams& p,
             KbmStepJacobian* jac) {
    const KbmState k1 = kbm_derivative(st, u, p);
    const KbmState x2 = axpy(st, k1, 0.5 * dt);
    const KbmState k2 = kbm_derivative(x2, u, p);
    const KbmState x3 = axpy(st, k2, 0.5 * dt);
    const KbmState k3 = kbm_derivative(x3, u, p);
    const KbmState x4 = axpy(st, k3, dt);
    const KbmState k4 = kbm_derivative(x4, u, p);

    KbmState next;
    next.s = st.s + dt / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    next.x = st.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    next.y = st.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    next.v = st.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    next.psi = st.psi + dt / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
    next.delta = st.delta + dt / 6.0 * (k1.delta + 2.0 * k2.delta + 2.0 * k3.delta + k4.delta);

    if (jac) {
        Mat6 fx1, fx2, fx3, fx4;
        Mat62 fu1, fu2, fu3, fu4;
        continuous_jacobian(st, p, fx1, fu1);
        continuous_jacobian(x2, p, fx2, fu2);
        continuous_jacobian(x3, p, fx3, fu3);
        continuous_jacobian(x4, p, fx4, fu4);

        Mat6 dk1x = fx1, dk2x, dk3x, dk4x;
        Mat62 dk1u = fu1, dk2u, dk3u, dk4u;
        stage_jacobian(fx2, fu2, dk1x, dk1u, 0.5 * dt, dk2x, dk2u);
        stage_jacobian(fx3, fu3, dk2x, dk2u, 0.5 * dt, dk3x, dk3u);
        stage_jacobian(fx4, fu4, dk3x, dk3u, dt, dk4x, dk4u);

        for (int r = 0; r < 6; ++r) {
            for (int c = 0; c < 6; ++c) {
                jac->d_state[r][c] = (r == c ? 1.0 : 0.0) +
                                     dt / 6.0 * (dk1x[r][c] + 2.0 * dk2x[r][c] + 2.0 * dk3x[r][c] + dk4x[r][c]);
            }
            for (int c = 0; c < 2; ++c) {
                jac->d_input[r][c] =
                    dt / 6.0 * (dk1u[r][c] + 2.0 * dk2u[r][c] + 2.0 * dk3u[r][c] + dk4u[r][c]);
            }
        }
    }

    // Forward driving only, and the steering hardware limit.
    if (next.v < 0.0) {
        next.v = 0.0;
        if (jac) {
            jac->d_state[3] = {};
            jac->d_input[3] = {};
        }
    }
    if (next.delta > p.delta_mech || next.delta < -p.delta_mech) {
        next.delta = next.delta > 0.0 ? p.delta_mech : -p.delta_mech;
        if (jac) {
            jac->d_state[5] = {};
            jac->d_input[5] = {};
        }
    }
    return next;
}

}  // namespace

double slip_angle_beta(double delta, const KbmParams& p) {
    if (std::abs(delta) >= 0.5 * kPi) throw std::domain_error("slip_angle_beta: |delta| >= pi/2");
    return std::atan(std::tan(delta) * p.l_r / (p.l_f + p.l_r));
}

double slip_angle_beta_deriv(double delta, const KbmParams& p) {
    const double ratio = p.l_r / (p.l_f + p.l_r);
    const double t = std::tan(delta);
    const double sec2 = 1.0 + t * t;
    const double u = ratio * t;
    return ratio * sec2 / (1.0 + u * u);
}

KbmState kbm_derivative(const KbmState& state, const KbmInput& input, const KbmParams& p) {
    const double beta = slip_angle_beta(state.delta, p);
    KbmState d;
    d.s = state.v;
    d.x = state.v * std::cos(state.psi + beta);
    d.y = state.v * std::sin(state.psi + beta);
    d.v = input.accel;
    d.psi = state.v / p.l_r * std::sin(beta);
    d.delta = input.steer_rate;
    return d;
}

KbmState integrate_step(const KbmState& state, const KbmInput& input, double dt, const KbmParams& p) {
    return rk4(state, input, dt, p, nullptr);
}

KbmState integrate_step_with_jacobian(const KbmState& state, const KbmInput& input, double dt,
                                      const KbmParams& p, KbmStepJacobian& jac) {
    return rk4(state, input, dt, p, &jac);
}

double delta_for_radius(double radius, const KbmParams& p) {
    if (radius <= p.l_r) throw std::domain_error("delta_for_radius: R must exceed l_r");
    return std::atan((p.l_f / p.l_r + 1.0) * std::tan(std::asin(p.l_r / radius)));
}

double delta_max(double v, const KbmParams& p) {
    const double bound = 0.5 * p.mu * p.g * p.l_r;
    if (v * v <= bound) return p.delta_mech;  // low speed: the lateral bound is unreachable
    const double z = bound / (v * v);
    const double d = std::atan((p.l_f / p.l_r + 1.0) * std::tan(std::asin(z)));
    return std::min(p.delta_mech, d);
}

double delta_max_deriv(double v, const KbmParams& p) {
    const double bound = 0.5 * p.mu * p.g * p.l_r;
    if (v * v <= bound) return 0.0;
    const double z = bound / (v * v);
    const double k = p.l_f / p.l_r + 1.0;
    const double root = std::sqrt(1.0 - z * z);
    const double m = k * z / root;
    if (std::atan(m) >= p.delta_mech) return 0.0;  // mechanical limit active
    const double dm_dz = k / (root * root * root);
    const double dz_dv = -2.0 * z / v;
    return dm_dz * dz_dv / (1.0 + m * m);
}

}  // namespace avpc
