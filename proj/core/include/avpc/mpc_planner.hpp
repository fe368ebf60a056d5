#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "avpc/kinematic_model.hpp"
#include "avpc/obstacle.hpp"
#include "avpc/reference_path.hpp"

namespace avpc {

struct MpcConfig {
    double horizon = 3.0;     ///< T_H [s]
    double control_dt = 0.2;  ///< stage duration [s]
    // Cost weights.
    double q_v = 4.0;
    double q_delta = 10.0;
    double q_delta_rate = 0.2;
    double q_x = 5.0;
    double q_y = 5.0;
    double q_obs = 100.0;
    double q_delta_tol = 100.0;
    // Actuator bounds.
    double u1_min = -8.0;
    double u1_max = 6.0;
    double u2_abs = 0.5;
    // Road corridor hard margins and their penalty weight.
    double x_tol_max = 3.0;
    double y_tol_max = 3.0;
    double hard_margin_weight = 1e4;
    // Obstacle handling: intra-stage samples of the obstacle constraint
    // (the stage spacing at speed can step over a narrow region), and the
    // arc-length slack around the horizon within which a region is active.
    int obstacle_substeps = 4;
    double obstacle_activation_margin = 15.0;
    // Solver settings.
    int max_iterations = 10;
    double kkt_tolerance = 1e-6;
    double levenberg_initial = 1e-8;

    /// Number of control stages, N_u = N_y = T_H / dt + 1.
    int stage_count() const { return static_cast<int>(std::lround(horizon / control_dt)) + 1; }
    void validate() const;  ///< throws std::invalid_argument
};

/// Per-stage decision record: applied controls plus the slack values of the
/// soft constraints attached to the state this control produces.
struct MpcControl {
    double u1 = 0.0;         ///< acceleration [m/s^2]
    double u2 = 0.0;         ///< steering rate [rad/s]
    double obs_tol = 0.0;    ///< obstacle constraint slack [m]
    double x_tol = 0.0;      ///< longitudinal deviation slack [m]
    double y_tol = 0.0;      ///< lateral deviation slack [m]
    double delta_tol = 0.0;  ///< steering validity slack [rad]
};

struct StampedKbmState {
    double t = 0.0;
    KbmState state;
};

struct SolveDiagnostics {
    int iterations = 0;
    double kkt_residual = 0.0;
    bool converged = false;
    double cost = 0.0;
    double wall_time_ms = 0.0;  ///< measured, never fed back into the loop
};

/// Immutable planner output consumed by the low-level controllers.
struct PlannedTrajectory {
    std::vector<StampedKbmState> states;  ///< k = 0..N
    std::vector<MpcControl> controls;     ///< k = 0..N-1, slack k describes state k+1
    double creation_time = 0.0;
    SolveDiagnostics diagnostics;

    double start_time() const { return states.front().t; }
    double end_time() const { return states.back().t; }
    double initial_steering() const { return states.front().state.delta; }
    double first_steer_rate() const { return controls.front().u2; }
};

/// First-stage (u1, u2) of a trajectory.
std::pair<double, double> first_stage_controls(const PlannedTrajectory& traj);

class PlanningError : public std::runtime_error {
public:
    explicit PlanningError(const std::string& what) : std::runtime_error(what) {}
};

class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Finite-horizon soft-constrained problem description. States are
/// eliminated by forward rollout, so a control sequence fully determines a
/// candidate trajectory.
struct MpcProblem {
    KbmState initial_state;
    const ReferencePath* path = nullptr;
    std::vector<double> v_heur;  ///< per predicted stage 1..N (size N)
    std::vector<ParabolaRegion> obstacles;
    MpcConfig config;
    KbmParams model;
};

/// Assembles the problem; throws PlanningError when the path cannot cover
/// the horizon from the initial state.
MpcProblem build_problem(const KbmState& initial_state, const ReferencePath& path,
                         std::vector<double> v_heur_profile,
                         std::vector<ParabolaRegion> obstacles, const MpcConfig& config,
                         const KbmParams& model);

/// Rolls a control sequence out with integrate_step; returns states 0..N.
std::vector<KbmState> rollout(const MpcProblem& problem, std::span<const KbmInput> controls);

/// Soft-constrained objective of a control sequence (slack variables at
/// their analytic optimum).
double evaluate_cost(const MpcProblem& problem, std::span<const KbmInput> controls);

/// Gradient of evaluate_cost with respect to the stacked (u1, u2) sequence.
std::vector<double> cost_gradient(const MpcProblem& problem, std::span<const KbmInput> controls);

/// Optimal slack values for a control sequence (closed form).
std::vector<MpcControl> recover_slacks(const MpcProblem& problem,
                                       std::span<const KbmInput> controls);

/// Gauss-Newton SQP with box-constrained QP subproblems. Always returns the
/// best dynamically-feasible rollout found; throws SolverError if the
/// iterates become non-finite.
PlannedTrajectory solve(const MpcProblem& problem, std::span<const KbmInput> warm_start,
                        double creation_time = 0.0);

}  // namespace avpc
