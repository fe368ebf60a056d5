#include "avpc/mpc_planner.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace avpc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kStateDim = 6;
// State component indices within KbmState.
constexpr int kS = 0, kX = 1, kY = 2, kV = 3, kDelta = 5;

std::array<double, 6> state_to_array(const KbmState& s) {
    return {s.s, s.x, s.y, s.v, s.psi, s.delta};
}

struct Linearization {
    double cost = 0.0;
    VectorXd residual;
    MatrixXd jacobian;
    std::vector<KbmState> states;
    std::vector<MpcControl> slacks;
    bool finite = true;
};

/// Rollout plus residual/Jacobian assembly. `with_jacobian` controls whether
/// the sensitivity chain is propagated; the cost path is shared either way.
void linearize(const MpcProblem& pb, const VectorXd& z, bool with_jacobian, Linearization& out) {
    const MpcConfig& cfg = pb.config;
    const int n_stages = cfg.stage_count();
    const int n_dec = 2 * n_stages;
    const double dt = cfg.control_dt;

    // Row layout: per predicted stage k = 1..N eight rows
    // [vel, steer, devx, devy, hardx, hardy, obs, dtol], then N steering-rate rows.
    const int rows = 8 * n_stages + n_stages;
    out.residual = VectorXd::Zero(rows);
    if (with_jacobian) out.jacobian = MatrixXd::Zero(rows, n_dec);
    out.states.assign(static_cast<std::size_t>(n_stages) + 1, KbmState{});
    out.slacks.assign(n_stages, MpcControl{});
    out.finite = true;

    const double w_v = std::sqrt(cfg.q_v);
    const double w_delta = std::sqrt(cfg.q_delta);
    const double w_rate = std::sqrt(cfg.q_delta_rate);
    const double w_x = std::sqrt(cfg.q_x);
    const double w_y = std::sqrt(cfg.q_y);
    const double w_obs = std::sqrt(cfg.q_obs);
    const double w_dtol = std::sqrt(cfg.q_delta_tol);
    const double w_hard = std::sqrt(cfg.hard_margin_weight);

    KbmState state = pb.initial_state;
    out.states[0] = state;
    MatrixXd sens = MatrixXd::Zero(kStateDim, n_dec);  // d(state_k)/dz
    MatrixXd next_sens(kStateDim, n_dec);
    MatrixXd prev_sens;
    const bool sample_obstacles = !pb.obstacles.empty() && cfg.obstacle_substeps > 1;
    // The projection hint chains along the previous stage's match so the
    // local search window follows the geometry, not the decision-coupled s
    // state; a window tied to s would make the cost discontinuous in z.
    double hint = pb.initial_state.s;

    for (int k = 1; k <= n_stages; ++k) {
        const KbmInput u{z[2 * (k - 1)], z[2 * (k - 1) + 1]};
        const KbmState prev_state = state;
        if (with_jacobian && sample_obstacles) prev_sens = sens;
        if (with_jacobian) {
            KbmStepJacobian jac;
            state = integrate_step_with_jacobian(state, u, dt, pb.model, jac);
            for (int r = 0; r < kStateDim; ++r) {
                for (int c = 0; c < n_dec; ++c) {
                    double acc = 0.0;
                    for (int m = 0; m < kStateDim; ++m) acc += jac.d_state[r][m] * sens(m, c);
                    next_sens(r, c) = acc;
                }
                next_sens(r, 2 * (k - 1)) += jac.d_input[r][0];
                next_sens(r, 2 * (k - 1) + 1) += jac.d_input[r][1];
            }
            sens.swap(next_sens);
        } else {
            state = integrate_step(state, u, dt, pb.model);
        }
        out.states[k] = state;

        const auto sa = state_to_array(state);
        if (!std::isfinite(sa[kX]) || !std::isfinite(sa[kY]) || !std::isfinite(sa[kV])) {
            out.finite = false;
            out.cost = std::numeric_limits<double>::infinity();
            return;
        }

        const int row0 = 8 * (k - 1);
        MpcControl& slack = out.slacks[k - 1];
        slack.u1 = u.accel;
        slack.u2 = u.steer_rate;

        // Speed tracking against the heuristic profile.
        out.residual[row0 + 0] = w_v * (state.v - pb.v_heur[k - 1]);
        if (with_jacobian) out.jacobian.row(row0 + 0) = w_v * sens.row(kV);

        // Steering effort.
        out.residual[row0 + 1] = w_delta * state.delta;
        if (with_jacobian) out.jacobian.row(row0 + 1) = w_delta * sens.row(kDelta);

        // Road deviations through the path projection.
        const PathProjection proj = pb.path->project({state.x, state.y}, hint);
        hint = proj.s;
        const Vec2 tang = proj.segment_tangent;
        const Vec2 norm = tang.left_normal();
        const double dev_x = state.s - proj.s;
        const double dev_y = proj.lateral_offset;
        slack.x_tol = std::abs(dev_x);
        slack.y_tol = std::abs(dev_y);

        out.residual[row0 + 2] = w_x * dev_x;
        out.residual[row0 + 3] = w_y * dev_y;
        if (with_jacobian) {
            out.jacobian.row(row0 + 2) =
                w_x * (sens.row(kS) - tang.x * sens.row(kX) - tang.y * sens.row(kY));
            out.jacobian.row(row0 + 3) = w_y * (norm.x * sens.row(kX) + norm.y * sens.row(kY));
        }

        // Hard corridor margins, quadratic beyond the configured half width.
        if (slack.x_tol > cfg.x_tol_max) {
            const double sign = dev_x > 0.0 ? 1.0 : -1.0;
            out.residual[row0 + 4] = w_hard * (slack.x_tol - cfg.x_tol_max);
            if (with_jacobian) {
                out.jacobian.row(row0 + 4) =
                    w_hard * sign * (sens.row(kS) - tang.x * sens.row(kX) - tang.y * sens.row(kY));
            }
        }
        if (slack.y_tol > cfg.y_tol_max) {
            const double sign = dev_y > 0.0 ? 1.0 : -1.0;
            out.residual[row0 + 5] = w_hard * (slack.y_tol - cfg.y_tol_max);
            if (with_jacobian) {
                out.jacobian.row(row0 + 5) =
                    w_hard * sign * (norm.x * sens.row(kX) + norm.y * sens.row(kY));
            }
        }

        // Obstacle regions: one slack per stage bounding the worst interior
        // value across intra-stage samples; the binding sample and region
        // decide the Jacobian row.
        if (!pb.obstacles.empty()) {
            double worst = -std::numeric_limits<double>::infinity();
            std::size_t worst_idx = 0;
            Vec2 worst_point{state.x, state.y};
            Eigen::RowVectorXd worst_row_x, worst_row_y;
            auto consider = [&](const KbmState& sample, const MatrixXd& sample_sens) {
                for (std::size_t m = 0; m < pb.obstacles.size(); ++m) {
                    const double c = interior_value(pb.obstacles[m], {sample.x, sample.y});
                    if (c > worst) {
                        worst = c;
                        worst_idx = m;
                        worst_point = {sample.x, sample.y};
                        if (with_jacobian) {
                            worst_row_x = sample_sens.row(kX);
                            worst_row_y = sample_sens.row(kY);
                        }
                    }
                }
            };
            consider(state, sens);
            if (sample_obstacles) {
                const double sub_dt = dt / cfg.obstacle_substeps;
                KbmState sub = prev_state;
                MatrixXd sub_sens;
                if (with_jacobian) sub_sens = prev_sens;
                for (int j = 1; j < cfg.obstacle_substeps; ++j) {
                    if (with_jacobian) {
                        KbmStepJacobian sj;
                        sub = integrate_step_with_jacobian(sub, u, sub_dt, pb.model, sj);
                        for (int r = 0; r < kStateDim; ++r) {
                            for (int c = 0; c < n_dec; ++c) {
                                double acc = 0.0;
                                for (int m = 0; m < kStateDim; ++m) acc += sj.d_state[r][m] * sub_sens(m, c);
                                next_sens(r, c) = acc;
                            }
                            next_sens(r, 2 * (k - 1)) += sj.d_input[r][0];
                            next_sens(r, 2 * (k - 1) + 1) += sj.d_input[r][1];
                        }
                        sub_sens = next_sens;
                    } else {
                        sub = integrate_step(sub, u, sub_dt, pb.model);
                    }
                    consider(sub, sub_sens);
                }
            }
            slack.obs_tol = std::max(0.0, worst);
            if (worst > 0.0) {
                out.residual[row0 + 6] = w_obs * worst;
                if (with_jacobian) {
                    const Vec2 grad = interior_gradient(pb.obstacles[worst_idx], worst_point);
                    out.jacobian.row(row0 + 6) = w_obs * (grad.x * worst_row_x + grad.y * worst_row_y);
                }
            }
        }

        // Model validity: |delta| <= delta_max(V) + slack.
        const double dmax = delta_max(state.v, pb.model);
        const double excess = std::abs(state.delta) - dmax;
        slack.delta_tol = std::max(0.0, excess);
        if (excess > 0.0) {
            const double sign = state.delta > 0.0 ? 1.0 : -1.0;
            out.residual[row0 + 7] = w_dtol * excess;
            if (with_jacobian) {
                out.jacobian.row(row0 + 7) =
                    w_dtol * (sign * sens.row(kDelta) - delta_max_deriv(state.v, pb.model) * sens.row(kV));
            }
        }
    }

    // Steering-rate effort, one row per control.
    for (int k = 0; k < n_stages; ++k) {
        const int row = 8 * n_stages + k;
        out.residual[row] = w_rate * z[2 * k + 1];
        if (with_jacobian) out.jacobian(row, 2 * k + 1) = w_rate;
    }

    out.cost = out.residual.squaredNorm();
    if (!std::isfinite(out.cost)) out.finite = false;
}

/// Primal active-set solver for min 0.5 x'Hx + g'x, lo <= x <= hi, H positive
/// definite. Starts from the origin, which is always feasible here.
VectorXd solve_box_qp(const MatrixXd& h, const VectorXd& g, const VectorXd& lo, const VectorXd& hi) {
    const int n = static_cast<int>(g.size());
    VectorXd x = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) x[i] = std::clamp(0.0, lo[i], hi[i]);
    std::vector<int> status(n, 0);  // 0 free, -1 at lo, +1 at hi
    for (int i = 0; i < n; ++i) {
        if (hi[i] - lo[i] < 1e-14) status[i] = -1;
    }

    const double tol = 1e-11 * (1.0 + g.cwiseAbs().maxCoeff());
    for (int pass = 0; pass < 30 * n; ++pass) {
        std::vector<int> free_idx;
        for (int i = 0; i < n; ++i) {
            if (status[i] == 0) free_idx.push_back(i);
        }

        VectorXd step = VectorXd::Zero(n);
        if (!free_idx.empty()) {
            const int nf = static_cast<int>(free_idx.size());
            MatrixXd hf(nf, nf);
            VectorXd rhs(nf);
            const VectorXd grad = g + h * x;
            for (int a = 0; a < nf; ++a) {
                rhs[a] = -grad[free_idx[a]];
                for (int b = 0; b < nf; ++b) hf(a, b) = h(free_idx[a], free_idx[b]);
            }
            const VectorXd df = hf.llt().solve(rhs);
            for (int a = 0; a < nf; ++a) step[free_idx[a]] = df[a];
        }

        if (step.lpNorm<Eigen::Infinity>() > 1e-13) {
            double alpha = 1.0;
            int blocker = -1;
            int blocker_dir = 0;
            for (int i : free_idx) {
                if (step[i] > 0.0 && x[i] + step[i] > hi[i]) {
                    const double a = (hi[i] - x[i]) / step[i];
                    if (a < alpha) {
                        alpha = a;
                        blocker = i;
                        blocker_dir = +1;
                    }
                } else if (step[i] < 0.0 && x[i] + step[i] < lo[i]) {
                    const double a = (lo[i] - x[i]) / step[i];
                    if (a < alpha) {
                        alpha = a;
                        blocker = i;
                        blocker_dir = -1;
                    }
                }
            }
            x += alpha * step;
            if (blocker >= 0) {
                x[blocker] = blocker_dir > 0 ? hi[blocker] : lo[blocker];
                status[blocker] = blocker_dir;
                continue;
            }
        }

        // Working-set optimum: check bound multipliers.
        const VectorXd grad = g + h * x;
        int worst = -1;
        double worst_val = -tol;
        for (int i = 0; i < n; ++i) {
            if (status[i] == -1 && hi[i] - lo[i] >= 1e-14 && grad[i] < worst_val) {
                worst = i;
                worst_val = grad[i];
            } else if (status[i] == +1 && -grad[i] < worst_val) {
                worst = i;
                worst_val = -grad[i];
            }
        }
        if (worst < 0) return x;
        status[worst] = 0;
    }
    return x;
}

double projected_gradient_norm(const VectorXd& g, const VectorXd& z, const VectorXd& lo,
                               const VectorXd& hi) {
    double worst = 0.0;
    for (int i = 0; i < z.size(); ++i) {
        double pg = g[i];
        if (z[i] <= lo[i] + 1e-12) {
            pg = std::min(g[i], 0.0);
        } else if (z[i] >= hi[i] - 1e-12) {
            pg = std::max(g[i], 0.0);
        }
        worst = std::max(worst, std::abs(pg));
    }
    return worst;
}

}  // namespace

void MpcConfig::validate() const {
    if (horizon <= 0.0 || control_dt <= 0.0) throw std::invalid_argument("mpc horizon and dt must be positive");
    const bool weights_ok = q_v >= 0 && q_delta >= 0 && q_delta_rate >= 0 && q_x >= 0 && q_y >= 0 &&
                            q_obs >= 0 && q_delta_tol >= 0 && hard_margin_weight >= 0;
    if (!weights_ok) throw std::invalid_argument("mpc weights must be non-negative");
    if (u1_min >= u1_max || u2_abs <= 0.0) throw std::invalid_argument("bad mpc actuator bounds");
    if (max_iterations < 1 || kkt_tolerance <= 0.0) throw std::invalid_argument("bad mpc solver settings");
    if (x_tol_max <= 0.0 || y_tol_max <= 0.0) throw std::invalid_argument("bad mpc road margins");
    if (obstacle_substeps < 1 || obstacle_activation_margin < 0.0) {
        throw std::invalid_argument("bad mpc obstacle settings");
    }
}

std::pair<double, double> first_stage_controls(const PlannedTrajectory& traj) {
    if (traj.controls.empty()) throw PlanningError("empty trajectory");
    return {traj.controls.front().u1, traj.controls.front().u2};
}

MpcProblem build_problem(const KbmState& initial_state, const ReferencePath& path,
                         std::vector<double> v_heur_profile, std::vector<ParabolaRegion> obstacles,
                         const MpcConfig& config, const KbmParams& model) {
    config.validate();
    const int n = config.stage_count();
    if (static_cast<int>(v_heur_profile.size()) != n) {
        throw PlanningError("v_heur profile size must equal the stage count");
    }
    const double span = n * config.control_dt;
    const double reach = initial_state.s + initial_state.v * span + 0.5 * config.u1_max * span * span;
    if (reach > path.total_length()) {
        throw PlanningError("reference path too short to cover the prediction horizon");
    }

    MpcProblem pb;
    pb.initial_state = initial_state;
    pb.path = &path;
    pb.v_heur = std::move(v_heur_profile);
    // Only regions anchored near the horizon constrain this cycle; far-away
    // parabolas are unbounded along their axis and could otherwise reach
    // across the map onto unrelated track sections.
    const double margin = config.obstacle_activation_margin;
    for (const ParabolaRegion& region : obstacles) {
        if (region.anchor_s >= initial_state.s - margin && region.anchor_s <= reach + margin) {
            pb.obstacles.push_back(region);
        }
    }
    pb.config = config;
    pb.model = model;
    return pb;
}

std::vector<KbmState> rollout(const MpcProblem& problem, std::span<const KbmInput> controls) {
    std::vector<KbmState> states;
    states.reserve(controls.size() + 1);
    states.push_back(problem.initial_state);
    for (const KbmInput& u : controls) {
        states.push_back(integrate_step(states.back(), u, problem.config.control_dt, problem.model));
    }
    return states;
}

double evaluate_cost(const MpcProblem& problem, std::span<const KbmInput> controls) {
    VectorXd z(2 * controls.size());
    for (std::size_t k = 0; k < controls.size(); ++k) {
        z[2 * k] = controls[k].accel;
        z[2 * k + 1] = controls[k].steer_rate;
    }
    Linearization lin;
    linearize(problem, z, false, lin);
    return lin.cost;
}

std::vector<double> cost_gradient(const MpcProblem& problem, std::span<const KbmInput> controls) {
    VectorXd z(2 * controls.size());
    for (std::size_t k = 0; k < controls.size(); ++k) {
        z[2 * k] = controls[k].accel;
        z[2 * k + 1] = controls[k].steer_rate;
    }
    Linearization lin;
    linearize(problem, z, true, lin);
    const VectorXd g = 2.0 * lin.jacobian.transpose() * lin.residual;
    return {g.data(), g.data() + g.size()};
}

std::vector<MpcControl> recover_slacks(const MpcProblem& problem, std::span<const KbmInput> controls) {
    VectorXd z(2 * controls.size());
    for (std::size_t k = 0; k < controls.size(); ++k) {
        z[2 * k] = controls[k].accel;
        z[2 * k + 1] = controls[k].steer_rate;
    }
    Linearization lin;
    linearize(problem, z, false, lin);
    return lin.slacks;
}

PlannedTrajectory solve(const MpcProblem& problem, std::span<const KbmInput> warm_start,
                        double creation_time) {
    const auto t_start = std::chrono::steady_clock::now();
    const MpcConfig& cfg = problem.config;
    const int n_stages = cfg.stage_count();
    const int n_dec = 2 * n_stages;

    VectorXd lo(n_dec), hi(n_dec);
    for (int k = 0; k < n_stages; ++k) {
        lo[2 * k] = cfg.u1_min;
        hi[2 * k] = cfg.u1_max;
        lo[2 * k + 1] = -cfg.u2_abs;
        hi[2 * k + 1] = cfg.u2_abs;
    }

    VectorXd z = VectorXd::Zero(n_dec);
    for (std::size_t k = 0; k < warm_start.size() && k < static_cast<std::size_t>(n_stages); ++k) {
        z[2 * k] = std::clamp(warm_start[k].accel, cfg.u1_min, cfg.u1_max);
        z[2 * k + 1] = std::clamp(warm_start[k].steer_rate, -cfg.u2_abs, cfg.u2_abs);
    }

    Linearization lin;
    linearize(problem, z, true, lin);
    if (!lin.finite) throw SolverError("non-finite cost at the warm start");

    double lambda = cfg.levenberg_initial;
    int accepted = 0;
    bool converged = false;
    double kkt = std::numeric_limits<double>::infinity();

    // Failed line searches escalate lambda without consuming the accepted
    // iteration budget; the attempt cap keeps the worst case bounded.
    const int max_attempts = 4 * cfg.max_iterations;
    for (int attempt = 0; attempt < max_attempts && accepted < cfg.max_iterations; ++attempt) {
        const VectorXd g = 2.0 * lin.jacobian.transpose() * lin.residual;
        kkt = projected_gradient_norm(g, z, lo, hi);
        if (kkt < cfg.kkt_tolerance) {
            converged = true;
            break;
        }

        MatrixXd h = 2.0 * lin.jacobian.transpose() * lin.jacobian;
        const double scale = std::max(h.trace() / n_dec, 1e-8);
        h.diagonal().array() += lambda * scale;

        const VectorXd step = solve_box_qp(h, g, lo - z, hi - z);
        const double slope = g.dot(step);
        bool accept = false;
        VectorXd z_try;
        if (slope < 0.0) {
            double alpha = 1.0;
            for (int ls = 0; ls < 15; ++ls, alpha *= 0.5) {
                z_try = z + alpha * step;
                Linearization probe;
                linearize(problem, z_try, false, probe);
                if (probe.finite && probe.cost <= lin.cost + 1e-4 * alpha * slope) {
                    accept = true;
                    break;
                }
            }
        }

        if (accept) {
            z = z_try;
            linearize(problem, z, true, lin);
            if (!lin.finite) throw SolverError("non-finite iterate during solve");
            lambda = std::max(lambda / 3.0, 1e-10);
            ++accepted;
        } else {
            lambda *= 10.0;
            if (lambda > 1e10) break;  // stalled; return the best iterate so far
        }
    }

    if (!converged) {
        const VectorXd g = 2.0 * lin.jacobian.transpose() * lin.residual;
        kkt = projected_gradient_norm(g, z, lo, hi);
        converged = kkt < cfg.kkt_tolerance;
    }

    PlannedTrajectory traj;
    traj.creation_time = creation_time;
    traj.states.reserve(lin.states.size());
    for (std::size_t k = 0; k < lin.states.size(); ++k) {
        traj.states.push_back({creation_time + static_cast<double>(k) * cfg.control_dt, lin.states[k]});
    }
    traj.controls = lin.slacks;
    traj.diagnostics.iterations = accepted;
    traj.diagnostics.kkt_residual = kkt;
    traj.diagnostics.converged = converged;
    traj.diagnostics.cost = lin.cost;
    traj.diagnostics.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
    return traj;
}

}  // namespace avpc
