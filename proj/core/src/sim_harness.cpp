#include "avpc/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "avpc/svg_plot.hpp"
#include "avpc/velocity_planner.hpp"

namespace avpc {
namespace {

double interp_planned_s(const PlannedTrajectory& traj, double t) {
    const auto& st = traj.states;
    if (t <= st.front().t) return st.front().state.s;
    if (t >= st.back().t) return st.back().state.s;
    std::size_t i = 1;
    while (st[i].t < t) ++i;
    const double w = (t - st[i - 1].t) / (st[i].t - st[i - 1].t);
    return st[i - 1].state.s + (st[i].state.s - st[i - 1].state.s) * w;
}

void write_plant_csv(const SimLog& log, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file);
    out.precision(17);
    out << "t,v_x,v_y,yaw,yaw_rate,roll,roll_rate,pitch,pitch_rate,"
           "omega_fl,omega_fr,omega_rl,omega_rr,x,y,"
           "torque_fl,torque_fr,torque_rl,torque_rr,steering,"
           "ref_s,ref_x,ref_y,ref_v,ref_psi,ref_delta,"
           "lateral_error,longitudinal_error,"
           "fxp_fl,fxp_fr,fxp_rl,fxp_rr,fyp_fl,fyp_fr,fyp_rl,fyp_rr,"
           "fz_fl,fz_fr,fz_rl,fz_rr,friction_utilization,"
           "v_ref,v_heur,delta_ol,delta_cl,clearance\n";
    for (const PlantRecord& r : log.plant) {
        const Dyn9State& s = r.state;
        out << r.t << ',' << s.v_x << ',' << s.v_y << ',' << s.yaw << ',' << s.yaw_rate << ','
            << s.roll << ',' << s.roll_rate << ',' << s.pitch << ',' << s.pitch_rate;
        for (double w : s.wheel_speed) out << ',' << w;
        out << ',' << s.x << ',' << s.y;
        for (double tq : r.command.wheel_torque) out << ',' << tq;
        out << ',' << r.command.steering;
        out << ',' << r.reference.s << ',' << r.reference.x << ',' << r.reference.y << ','
            << r.reference.v << ',' << r.reference.psi << ',' << r.reference.delta;
        out << ',' << r.lateral_error << ',' << r.longitudinal_error;
        for (double v : r.tires.f_xp) out << ',' << v;
        for (double v : r.tires.f_yp) out << ',' << v;
        for (double v : r.tires.f_z) out << ',' << v;
        out << ',' << r.tires.friction_utilization;
        out << ',' << r.v_ref << ',' << r.v_heur << ',' << r.delta_ol << ',' << r.delta_cl << ','
            << r.clearance << '\n';
    }
}

void write_planner_csv(const SimLog& log, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file);
    out.precision(17);
    // wall_time_ms is deliberately the last column; determinism comparisons drop it.
    out << "t,iterations,kkt_residual,converged,cost,reused,fallback,v_heur,wall_time_ms\n";
    for (const PlannerRecord& r : log.planner) {
        out << r.t << ',' << r.diagnostics.iterations << ',' << r.diagnostics.kkt_residual << ','
            << (r.diagnostics.converged ? 1 : 0) << ',' << r.diagnostics.cost << ','
            << (r.reused_previous ? 1 : 0) << ',' << (r.fallback ? 1 : 0) << ',' << r.v_heur << ','
            << r.diagnostics.wall_time_ms << '\n';
    }
}

void write_trajectories_csv(const SimLog& log, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file);
    out.precision(17);
    out << "cycle_t,k,t,s,x,y,v,psi,delta,u1,u2,obs_tol,x_tol,y_tol,delta_tol\n";
    for (const PlannerRecord& r : log.planner) {
        if (r.reused_previous || r.fallback) continue;
        for (std::size_t k = 0; k < r.trajectory.states.size(); ++k) {
            const auto& st = r.trajectory.states[k];
            out << r.t << ',' << k << ',' << st.t << ',' << st.state.s << ',' << st.state.x << ','
                << st.state.y << ',' << st.state.v << ',' << st.state.psi << ',' << st.state.delta;
            if (k < r.trajectory.controls.size()) {
                const MpcControl& c = r.trajectory.controls[k];
                out << ',' << c.u1 << ',' << c.u2 << ',' << c.obs_tol << ',' << c.x_tol << ','
                    << c.y_tol << ',' << c.delta_tol;
            } else {
                out << ",0,0,0,0,0,0";
            }
            out << '\n';
        }
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

KbmState plant_to_kbm(const Dyn9State& plant, const ReferencePath& path, double hint_s,
                      double last_steering) {
    KbmState kbm;
    const PathProjection proj = path.project({plant.x, plant.y}, hint_s);
    kbm.s = proj.s;
    kbm.x = plant.x;
    kbm.y = plant.y;
    kbm.v = std::hypot(plant.v_x, plant.v_y);
    kbm.psi = plant.yaw;
    kbm.delta = last_steering;
    return kbm;
}

namespace harness_detail {

std::pair<SimLog, Metrics> run_scenario_with_planner(const ScenarioConfig& cfg, PlannerFn planner) {
    cfg.validate();
    const ReferencePath path = ReferencePath::build(cfg.track_points, cfg.resample_spacing);

    Dyn9State init;
    init.v_x = cfg.initial_speed;
    const Vec2 p0 = path.position_at(cfg.initial_s);
    init.x = p0.x;
    init.y = p0.y;
    init.yaw = path.heading_at(cfg.initial_s);
    for (double& w : init.wheel_speed) w = cfg.initial_speed / cfg.plant.wheel_radius;
    VehiclePlant plant(cfg.plant, init);

    LowLevelController controller(cfg.gains, cfg.plant.wheel_radius, cfg.kinematic.delta_mech,
                                  cfg.mpc.u2_abs, cfg.mpc.control_dt);

    SimLog log;
    const long steps = std::lround(cfg.duration / cfg.plant_dt);
    const long plan_every = std::lround(cfg.planner_dt / cfg.plant_dt);
    const long ctrl_every = std::lround(cfg.control_dt / cfg.plant_dt);
    log.plant.reserve(steps);

    KbmState last_adapter;
    PlannedTrajectory current_traj;
    bool have_traj = false;
    double adapter_hint = cfg.initial_s;
    double error_hint = cfg.initial_s;
    double last_v_heur = 0.0;
    int consecutive_failures = 0;
    bool fallback = false;
    bool path_exhausted = false;
    ActuatorCommand cmd;

    for (long i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * cfg.plant_dt;

        if (!fallback && i % plan_every == 0) {
            const KbmState adapter =
                plant_to_kbm(plant.state(), path, adapter_hint, controller.last_steering());
            adapter_hint = adapter.s;
            last_adapter = adapter;
            PlannerRecord rec;
            rec.t = t;
            try {
                PlannerCycleResult res = planner(t, plant.state(), adapter);
                last_v_heur = res.v_heur;
                rec.v_heur = res.v_heur;
                if (res.trajectory) {
                    consecutive_failures = 0;
                    controller.set_trajectory(*res.trajectory);
                    current_traj = *res.trajectory;
                    have_traj = true;
                    rec.trajectory = std::move(*res.trajectory);
                    rec.diagnostics = rec.trajectory.diagnostics;
                } else {
                    ++consecutive_failures;
                    rec.reused_previous = true;
                    if (consecutive_failures >= 2 || !controller.has_trajectory()) {
                        fallback = true;
                        rec.fallback = true;
                        log.aborted = true;
                        log.abort_reason = "consecutive planner failures; braking fallback";
                    }
                }
            } catch (const PlanningError&) {
                // The path cannot cover the horizon any more: stop cleanly
                // without logging a cycle.
                path_exhausted = true;
                break;
            }
            log.planner.push_back(std::move(rec));
        }

        if (i % ctrl_every == 0) {
            ++log.controller_updates;
            if (fallback) {
                const double brake_force = cfg.plant.m_total * cfg.mpc.u1_min;
                cmd.wheel_torque = dispatch_torques(brake_force, cfg.plant.wheel_radius);
                for (double& tq : cmd.wheel_torque) {
                    tq = std::clamp(tq, -cfg.gains.torque_limit, cfg.gains.torque_limit);
                }
                cmd.steering = 0.0;
            } else {
                cmd = controller.update(plant.state(), t, cfg.control_dt);
            }
        }

        PlantRecord rec;
        rec.t = t;
        rec.state = plant.state();
        rec.command = cmd;
        rec.reference = last_adapter;
        try {
            rec.tires = plant.step(cmd, cfg.plant_dt);
        } catch (const PlantDivergence& e) {
            log.aborted = true;
            log.abort_reason = e.what();
            log.plant.push_back(rec);
            break;
        }

        const PathProjection proj = path.project({rec.state.x, rec.state.y}, error_hint);
        error_hint = proj.s;
        rec.lateral_error = proj.lateral_offset;
        rec.longitudinal_error = have_traj ? interp_planned_s(current_traj, t) - proj.s : 0.0;
        rec.v_ref = controller.last_v_ref();
        rec.v_heur = last_v_heur;
        rec.delta_ol = fallback ? 0.0 : controller.last_open_loop();
        rec.delta_cl = fallback ? 0.0 : controller.last_closed_loop();

        double clearance = std::numeric_limits<double>::infinity();
        for (const Obstacle& o : cfg.obstacles) {
            clearance = std::min(clearance, distance_to_polygon(o, {rec.state.x, rec.state.y}));
        }
        rec.clearance = clearance;
        log.plant.push_back(std::move(rec));

        if (fallback && std::hypot(plant.state().v_x, plant.state().v_y) < 0.2) break;
        if (plant.state().v_x < -0.5) {
            log.aborted = true;
            log.abort_reason = "plant moving backwards";
            break;
        }
        if (std::abs(plant.state().roll) > 0.15 || std::abs(plant.state().pitch) > 0.15) {
            log.aborted = true;
            log.abort_reason = "roll/pitch sanity bound exceeded";
            break;
        }
    }

    (void)path_exhausted;  // a clean stop keeps completed = true
    return {log, compute_metrics(log)};
}

}  // namespace harness_detail

std::pair<SimLog, Metrics> run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    // Shared immutable inputs for the planner cycles.
    auto path = std::make_shared<ReferencePath>(ReferencePath::build(cfg.track_points, cfg.resample_spacing));
    auto regions = std::make_shared<std::vector<ParabolaRegion>>();
    for (const Obstacle& o : cfg.obstacles) {
        regions->push_back(fit_parabola(o, *path, cfg.obstacle_manager));
    }

    VelocityPlannerConfig vp = cfg.velocity;
    vp.mu = cfg.kinematic.mu;
    vp.g = cfg.kinematic.g;
    vp.v_max = straight_line_vmax(vp, cfg.mpc.u1_min, cfg.mpc.horizon);

    auto warm = std::make_shared<std::vector<KbmInput>>();
    const MpcConfig mpc_cfg = cfg.mpc;
    const KbmParams model = cfg.kinematic;

    harness_detail::PlannerFn planner = [path, regions, vp, warm, mpc_cfg, model](
                                            double t, const Dyn9State&, const KbmState& adapter)
        -> harness_detail::PlannerCycleResult {
        harness_detail::PlannerCycleResult out;
        out.v_heur = heuristic_speed(adapter.v, adapter.s, *path, vp);

        const int n = mpc_cfg.stage_count();
        // Predicted stage positions from the warm-start rollout feed the
        // per-stage heuristic profile.
        std::vector<double> stage_s(n);
        KbmState rolled = adapter;
        for (int k = 0; k < n; ++k) {
            const KbmInput u = k < static_cast<int>(warm->size()) ? (*warm)[k] : KbmInput{};
            rolled = integrate_step(rolled, u, mpc_cfg.control_dt, model);
            stage_s[k] = rolled.s;
        }
        const std::vector<double> profile = heuristic_speed_profile(adapter.v, stage_s, *path, vp);

        const MpcProblem problem = build_problem(adapter, *path, profile, *regions, mpc_cfg, model);
        try {
            PlannedTrajectory traj = solve(problem, *warm, t);
            warm->assign(traj.controls.size(), KbmInput{});
            for (std::size_t k = 0; k < traj.controls.size(); ++k) {
                (*warm)[k] = {traj.controls[k].u1, traj.controls[k].u2};
            }
            out.trajectory = std::move(traj);
        } catch (const SolverError&) {
            // reuse previous trajectory; the loop counts consecutive failures
        }
        return out;
    };

    return harness_detail::run_scenario_with_planner(cfg, planner);
}

Metrics compute_metrics(const SimLog& log) {
    Metrics m;
    m.min_clearance = std::numeric_limits<double>::infinity();
    for (const PlantRecord& r : log.plant) {
        m.max_lateral_error = std::max(m.max_lateral_error, std::abs(r.lateral_error));
        m.max_friction_utilization =
            std::max(m.max_friction_utilization, r.tires.friction_utilization);
        m.min_clearance = std::min(m.min_clearance, r.clearance);
    }
    for (std::size_t i = 1; i + 1 < log.plant.size(); ++i) {
        const PlantRecord& prev = log.plant[i - 1];
        const PlantRecord& next = log.plant[i + 1];
        const PlantRecord& cur = log.plant[i];
        const double dvy = (next.state.v_y - prev.state.v_y) / (next.t - prev.t);
        const double ay = cur.state.v_x * cur.state.yaw_rate + dvy;
        m.max_lateral_accel = std::max(m.max_lateral_accel, std::abs(ay));
    }
    double total = 0.0;
    long solves = 0;
    for (const PlannerRecord& r : log.planner) {
        if (r.reused_previous || r.fallback) continue;
        m.max_solve_time_ms = std::max(m.max_solve_time_ms, r.diagnostics.wall_time_ms);
        total += r.diagnostics.wall_time_ms;
        ++solves;
    }
    m.mean_solve_time_ms = solves > 0 ? total / static_cast<double>(solves) : 0.0;
    m.completed = !log.aborted;
    return m;
}

void emit_report(const SimLog& log, const Metrics& metrics, const ScenarioConfig& cfg,
                 const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " + ec.message());

    write_plant_csv(log, out_dir + "/log.csv");
    write_planner_csv(log, out_dir + "/planner.csv");
    write_trajectories_csv(log, out_dir + "/trajectories.csv");

    nlohmann::json j;
    j["max_lateral_error_m"] = metrics.max_lateral_error;
    j["max_lateral_accel_mps2"] = metrics.max_lateral_accel;
    j["max_solve_time_ms"] = metrics.max_solve_time_ms;
    j["mean_solve_time_ms"] = metrics.mean_solve_time_ms;
    j["min_clearance_m"] =
        std::isfinite(metrics.min_clearance) ? nlohmann::json(metrics.min_clearance) : nlohmann::json();
    j["max_friction_utilization"] = metrics.max_friction_utilization;
    j["completed"] = metrics.completed;
    if (log.aborted) j["abort_reason"] = log.abort_reason;
    std::ofstream mj(out_dir + "/metrics.json");
    mj << j.dump(2) << '\n';

    std::vector<double> t, v, v_ref, v_heur, steer, d_cl, torque_fl, traj_x, traj_y;
    for (const PlantRecord& r : log.plant) {
        t.push_back(r.t);
        v.push_back(std::hypot(r.state.v_x, r.state.v_y));
        v_ref.push_back(r.v_ref);
        v_heur.push_back(r.v_heur);
        steer.push_back(r.command.steering);
        d_cl.push_back(r.delta_cl);
        torque_fl.push_back(r.command.wheel_torque[0]);
        traj_x.push_back(r.state.x);
        traj_y.push_back(r.state.y);
    }

    SvgPlot overlay("Planned vs driven trajectory", "x [m]", "y [m]", 960, 720);
    overlay.set_equal_aspect(true);
    {
        try {
            std::vector<double> px, py;
            const ReferencePath path = ReferencePath::build(cfg.track_points, cfg.resample_spacing);
            for (const PathSample& sample : path.samples()) {
                px.push_back(sample.position.x);
                py.push_back(sample.position.y);
            }
            overlay.add_series("reference path", px, py, "#bbbbbb");
        } catch (const std::exception&) {
            // no usable track geometry (e.g. plots regenerated from a bare log)
        }
        std::size_t shown = 0;
        for (std::size_t i = 0; i < log.planner.size(); i += 5) {
            const PlannerRecord& r = log.planner[i];
            if (r.reused_previous || r.fallback) continue;
            std::vector<double> gx, gy;
            for (const auto& st : r.trajectory.states) {
                gx.push_back(st.state.x);
                gy.push_back(st.state.y);
            }
            overlay.add_series(shown++ == 0 ? "planned" : "", gx, gy, "#2ca02c");
        }
        overlay.add_series("driven", traj_x, traj_y, "#1f77b4");
        for (const Obstacle& o : cfg.obstacles) overlay.add_polygon(o.vertices, "#d62728");
    }
    overlay.write(out_dir + "/trajectory.svg");

    SvgPlot speeds("Speed tracking", "t [s]", "speed [m/s]");
    speeds.add_series("V_heur", t, v_heur, "#d62728");
    speeds.add_series("V_ref", t, v_ref, "#2ca02c");
    speeds.add_series("V", t, v, "#1f77b4");
    speeds.write(out_dir + "/speeds.svg");

    SvgPlot steering("Steering decomposition", "t [s]", "angle [rad]");
    steering.add_series("delta", t, steer, "#1f77b4");
    steering.add_series("delta_cl", t, d_cl, "#2ca02c");
    steering.write(out_dir + "/steering.svg");

    SvgPlot torques("Front-left wheel torque", "t [s]", "torque [N m]");
    torques.add_series("T_fl", t, torque_fl, "#1f77b4");
    torques.write(out_dir + "/torques.svg");
}

SimLog load_log(const std::string& log_csv) {
    std::ifstream in(log_csv);
    if (!in) throw std::runtime_error("cannot open log: " + log_csv);
    SimLog log;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty log: " + log_csv);
    const auto header = split_csv(line);
    if (header.empty() || header.front() != "t") throw std::runtime_error("unexpected log header");

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) throw std::runtime_error("ragged log row");
        PlantRecord r;
        std::size_t c = 0;
        auto next = [&]() { return std::stod(cells.at(c++)); };
        r.t = next();
        r.state.v_x = next();
        r.state.v_y = next();
        r.state.yaw = next();
        r.state.yaw_rate = next();
        r.state.roll = next();
        r.state.roll_rate = next();
        r.state.pitch = next();
        r.state.pitch_rate = next();
        for (double& w : r.state.wheel_speed) w = next();
        r.state.x = next();
        r.state.y = next();
        for (double& tq : r.command.wheel_torque) tq = next();
        r.command.steering = next();
        r.reference.s = next();
        r.reference.x = next();
        r.reference.y = next();
        r.reference.v = next();
        r.reference.psi = next();
        r.reference.delta = next();
        r.lateral_error = next();
        r.longitudinal_error = next();
        for (double& f : r.tires.f_xp) f = next();
        for (double& f : r.tires.f_yp) f = next();
        for (double& f : r.tires.f_z) f = next();
        r.tires.friction_utilization = next();
        r.v_ref = next();
        r.v_heur = next();
        r.delta_ol = next();
        r.delta_cl = next();
        r.clearance = next();
        log.plant.push_back(r);
    }

    const std::filesystem::path planner_csv =
        std::filesystem::path(log_csv).parent_path() / "planner.csv";
    if (std::ifstream pin(planner_csv); pin) {
        std::string pline;
        std::getline(pin, pline);  // header
        while (std::getline(pin, pline)) {
            if (pline.empty()) continue;
            const auto cells = split_csv(pline);
            PlannerRecord r;
            r.t = std::stod(cells.at(0));
            r.diagnostics.iterations = static_cast<int>(std::stol(cells.at(1)));
            r.diagnostics.kkt_residual = std::stod(cells.at(2));
            r.diagnostics.converged = cells.at(3) == "1";
            r.diagnostics.cost = std::stod(cells.at(4));
            r.reused_previous = cells.at(5) == "1";
            r.fallback = cells.at(6) == "1";
            r.v_heur = std::stod(cells.at(7));
            r.diagnostics.wall_time_ms = std::stod(cells.at(8));
            log.planner.push_back(std::move(r));
        }
    }
    return log;
}

bool logs_equal_excluding_walltime(const SimLog& a, const SimLog& b) {
    if (a.plant.size() != b.plant.size() || a.planner.size() != b.planner.size()) return false;
    if (a.aborted != b.aborted || a.controller_updates != b.controller_updates) return false;
    for (std::size_t i = 0; i < a.plant.size(); ++i) {
        const PlantRecord& x = a.plant[i];
        const PlantRecord& y = b.plant[i];
        const bool same =
            x.t == y.t && x.state.v_x == y.state.v_x && x.state.v_y == y.state.v_y &&
            x.state.yaw == y.state.yaw && x.state.yaw_rate == y.state.yaw_rate &&
            x.state.roll == y.state.roll && x.state.roll_rate == y.state.roll_rate &&
            x.state.pitch == y.state.pitch && x.state.pitch_rate == y.state.pitch_rate &&
            x.state.wheel_speed == y.state.wheel_speed && x.state.x == y.state.x &&
            x.state.y == y.state.y && x.command.wheel_torque == y.command.wheel_torque &&
            x.command.steering == y.command.steering && x.lateral_error == y.lateral_error &&
            x.longitudinal_error == y.longitudinal_error && x.tires.f_xp == y.tires.f_xp &&
            x.tires.f_yp == y.tires.f_yp && x.tires.f_z == y.tires.f_z &&
            x.v_ref == y.v_ref && x.v_heur == y.v_heur && x.delta_ol == y.delta_ol &&
            x.delta_cl == y.delta_cl && x.clearance == y.clearance;
        if (!same) return false;
    }
    for (std::size_t i = 0; i < a.planner.size(); ++i) {
        const PlannerRecord& x = a.planner[i];
        const PlannerRecord& y = b.planner[i];
        if (x.t != y.t || x.v_heur != y.v_heur || x.reused_previous != y.reused_previous ||
            x.fallback != y.fallback || x.diagnostics.iterations != y.diagnostics.iterations ||
            x.diagnostics.kkt_residual != y.diagnostics.kkt_residual ||
            x.diagnostics.cost != y.diagnostics.cost ||
            x.diagnostics.converged != y.diagnostics.converged) {
            return false;
        }
        if (x.trajectory.states.size() != y.trajectory.states.size()) return false;
        for (std::size_t k = 0; k < x.trajectory.states.size(); ++k) {
            const KbmState& sx = x.trajectory.states[k].state;
            const KbmState& sy = y.trajectory.states[k].state;
            if (sx.s != sy.s || sx.x != sy.x || sx.y != sy.y || sx.v != sy.v || sx.psi != sy.psi ||
                sx.delta != sy.delta) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace avpc
