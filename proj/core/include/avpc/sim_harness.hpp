#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "avpc/low_level_control.hpp"
#include "avpc/mpc_planner.hpp"
#include "avpc/obstacle.hpp"
#include "avpc/scenario_config.hpp"
#include "avpc/vehicle_9dof.hpp"

namespace avpc {

/// One row per plant step.
struct PlantRecord {
    double t = 0.0;
    Dyn9State state;
    ActuatorCommand command;
    KbmState reference;  ///< planner snapshot state of the latest cycle
    double lateral_error = 0.0;       ///< plant vs path, signed [m]
    double longitudinal_error = 0.0;  ///< planned minus actual progress [m]
    PlantDiagnostics tires;
    double v_ref = 0.0;
    double v_heur = 0.0;
    double delta_ol = 0.0;
    double delta_cl = 0.0;
    double clearance = 0.0;  ///< min distance to any obstacle polygon [m]
};

/// One row per planner cycle.
struct PlannerRecord {
    double t = 0.0;
    SolveDiagnostics diagnostics;
    PlannedTrajectory trajectory;
    double v_heur = 0.0;       ///< scalar heuristic speed at the snapshot
    bool reused_previous = false;
    bool fallback = false;
};

struct SimLog {
    std::vector<PlantRecord> plant;
    std::vector<PlannerRecord> planner;
    long controller_updates = 0;
    bool aborted = false;
    std::string abort_reason;
};

struct Metrics {
    double max_lateral_error = 0.0;
    double max_lateral_accel = 0.0;      ///< a_y = V_x * yaw_rate + dV_y/dt [m/s^2]
    double max_solve_time_ms = 0.0;
    double mean_solve_time_ms = 0.0;
    double min_clearance = 0.0;          ///< +inf when the scenario has no obstacles
    double max_friction_utilization = 0.0;
    bool completed = false;
};

/// Deterministic multi-rate closed loop: plant at plant_dt, controllers at
/// control_dt, planner at planner_dt. Planner output applies at the cycle
/// boundary; solver wall time is measured but never fed back.
std::pair<SimLog, Metrics> run_scenario(const ScenarioConfig& cfg);

/// Pure reduction of a log into the reported metrics.
Metrics compute_metrics(const SimLog& log);

/// Writes log.csv, planner.csv, trajectories.csv, metrics.json and the four
/// report plots into out_dir (created if missing).
void emit_report(const SimLog& log, const Metrics& metrics, const ScenarioConfig& cfg,
                 const std::string& out_dir);

/// Reload a log written by emit_report (log.csv plus, when present, the
/// sibling planner.csv) for the metrics/plot subcommands.
SimLog load_log(const std::string& log_csv);

/// Field-by-field equality ignoring solver wall times (determinism checks).
bool logs_equal_excluding_walltime(const SimLog& a, const SimLog& b);

namespace harness_detail {

/// Planner callback signature used by the loop; the default wires the MPC.
/// Exposed so tests can inject failing planners to exercise the fallback
/// policy.
struct PlannerCycleResult {
    std::optional<PlannedTrajectory> trajectory;
    double v_heur = 0.0;
};
using PlannerFn =
    std::function<PlannerCycleResult(double t, const Dyn9State& plant, const KbmState& adapter)>;

std::pair<SimLog, Metrics> run_scenario_with_planner(const ScenarioConfig& cfg, PlannerFn planner);

}  // namespace harness_detail

/// Mapping from the plant state to the planning state: V = |(V_x, V_y)|,
/// s from path projection, delta = last commanded steering.
KbmState plant_to_kbm(const Dyn9State& plant, const ReferencePath& path, double hint_s,
                      double last_steering);

}  // namespace avpc
