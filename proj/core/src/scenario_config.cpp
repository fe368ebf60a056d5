#include "avpc/scenario_config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace avpc {
namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& where) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("scenario config: bad number for " + where);
    }
    if (used != v.size()) throw std::invalid_argument("scenario config: bad number for " + where);
    return out;
}

int to_int(const std::string& v, const std::string& where) {
    const double d = to_double(v, where);
    if (std::abs(d - std::round(d)) > 1e-9) {
        throw std::invalid_argument("scenario config: expected integer for " + where);
    }
    return static_cast<int>(std::lround(d));
}

bool divides_evenly(double coarse, double fine) {
    const double ratio = coarse / fine;
    return std::abs(ratio - std::round(ratio)) < 1e-9 && ratio >= 1.0;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_file(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open scenario file: " + filename);
    const std::filesystem::path base = std::filesystem::path(filename).parent_path();

    ScenarioConfig cfg;
    bool saw_nominal_load = false;

    // setter table: section -> key -> assignment
    using Setter = std::function<void(const std::string&, const std::string&)>;
    std::map<std::string, std::map<std::string, Setter>> schema;
    auto num = [](double& target) {
        return [&target](const std::string& v, const std::string& w) { target = to_double(v, w); };
    };
    auto integer = [](int& target) {
        return [&target](const std::string& v, const std::string& w) { target = to_int(v, w); };
    };
    auto text = [](std::string& target) {
        return [&target](const std::string& v, const std::string&) { target = v; };
    };

    schema["scenario"] = {{"track", text(cfg.track_file)},
                          {"obstacles", text(cfg.obstacle_file)},
                          {"duration", num(cfg.duration)},
                          {"seed", integer(cfg.seed)}};
    schema["initial"] = {{"speed", num(cfg.initial_speed)}, {"s", num(cfg.initial_s)}};
    schema["rates"] = {{"plant_dt", num(cfg.plant_dt)},
                       {"control_dt", num(cfg.control_dt)},
                       {"planner_dt", num(cfg.planner_dt)}};
    schema["path"] = {{"resample_spacing", num(cfg.resample_spacing)}};
    schema["kinematic"] = {{"l_f", num(cfg.kinematic.l_f)},
                           {"l_r", num(cfg.kinematic.l_r)},
                           {"delta_mech", num(cfg.kinematic.delta_mech)},
                           {"mu", num(cfg.kinematic.mu)}};
    schema["plant"] = {{"m_total", num(cfg.plant.m_total)},
                       {"i_roll", num(cfg.plant.i_roll)},
                       {"i_pitch", num(cfg.plant.i_pitch)},
                       {"i_yaw", num(cfg.plant.i_yaw)},
                       {"i_wheel", num(cfg.plant.i_wheel)},
                       {"l_f", num(cfg.plant.l_f)},
                       {"l_r", num(cfg.plant.l_r)},
                       {"half_track", num(cfg.plant.half_track)},
                       {"cg_height", num(cfg.plant.cg_height)},
                       {"wheel_radius", num(cfg.plant.wheel_radius)},
                       {"spring_rate", num(cfg.plant.spring_rate)},
                       {"damper_rate", num(cfg.plant.damper_rate)},
                       {"air_density", num(cfg.plant.air_density)},
                       {"drag_coeff", num(cfg.plant.drag_coeff)},
                       {"frontal_area", num(cfg.plant.frontal_area)},
                       {"mu", num(cfg.plant.mu)},
                       {"slip_eps", num(cfg.plant.slip_eps)}};
    schema["tire"] = {
        {"bx", num(cfg.plant.tire.longitudinal.stiffness)},
        {"cx", num(cfg.plant.tire.longitudinal.shape)},
        {"ex", num(cfg.plant.tire.longitudinal.curvature)},
        {"by", num(cfg.plant.tire.lateral.stiffness)},
        {"cy", num(cfg.plant.tire.lateral.shape)},
        {"ey", num(cfg.plant.tire.lateral.curvature)},
        {"load_sensitivity", num(cfg.plant.tire.load_sensitivity)},
        {"nominal_load", [&cfg, &saw_nominal_load](const std::string& v, const std::string& w) {
             cfg.plant.tire.nominal_load = to_double(v, w);
             saw_nominal_load = true;
         }}};
    schema["mpc"] = {{"horizon", num(cfg.mpc.horizon)},
                     {"control_dt", num(cfg.mpc.control_dt)},
                     {"q_v", num(cfg.mpc.q_v)},
                     {"q_delta", num(cfg.mpc.q_delta)},
                     {"q_delta_rate", num(cfg.mpc.q_delta_rate)},
                     {"q_x", num(cfg.mpc.q_x)},
                     {"q_y", num(cfg.mpc.q_y)},
                     {"q_obs", num(cfg.mpc.q_obs)},
                     {"q_delta_tol", num(cfg.mpc.q_delta_tol)},
                     {"u1_min", num(cfg.mpc.u1_min)},
                     {"u1_max", num(cfg.mpc.u1_max)},
                     {"u2_abs", num(cfg.mpc.u2_abs)},
                     {"x_tol_max", num(cfg.mpc.x_tol_max)},
                     {"y_tol_max", num(cfg.mpc.y_tol_max)},
                     {"hard_margin_weight", num(cfg.mpc.hard_margin_weight)},
                     {"obstacle_substeps", integer(cfg.mpc.obstacle_substeps)},
                     {"obstacle_activation_margin", num(cfg.mpc.obstacle_activation_margin)},
                     {"max_iterations", integer(cfg.mpc.max_iterations)},
                     {"kkt_tolerance", num(cfg.mpc.kkt_tolerance)}};
    schema["pid"] = {{"lon_kp", num(cfg.gains.longitudinal.kp)},
                     {"lon_ki", num(cfg.gains.longitudinal.ki)},
                     {"lon_kd", num(cfg.gains.longitudinal.kd)},
                     {"lon_integrator_limit", num(cfg.gains.longitudinal.integrator_limit)},
                     {"lat_kp", num(cfg.gains.lateral.kp)},
                     {"lat_ki", num(cfg.gains.lateral.ki)},
                     {"lat_kd", num(cfg.gains.lateral.kd)},
                     {"lat_integrator_limit", num(cfg.gains.lateral.integrator_limit)},
                     {"derivative_filter_tau",
                      [&cfg](const std::string& v, const std::string& w) {
                          const double tau = to_double(v, w);
                          cfg.gains.longitudinal.derivative_filter_tau = tau;
                          cfg.gains.lateral.derivative_filter_tau = tau;
                      }},
                     {"steering_rate_scale", num(cfg.gains.steering_rate_scale)},
                     {"torque_limit", num(cfg.gains.torque_limit)}};
    schema["velocity_planner"] = {{"v_max", num(cfg.velocity.v_max)},
                                  {"delta_v", num(cfg.velocity.delta_v)},
                                  {"t_preview", num(cfg.velocity.t_preview)},
                                  {"min_preview", num(cfg.velocity.min_preview)}};
    schema["obstacle_manager"] = {{"margin", num(cfg.obstacle_manager.margin)},
                                  {"p_min", num(cfg.obstacle_manager.p_min)}};

    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = filename + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument("scenario config: bad section at " + where);
            section = trim(line.substr(1, line.size() - 2));
            if (!schema.count(section)) {
                throw std::invalid_argument("scenario config: unknown section [" + section + "] at " + where);
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("scenario config: expected key = value at " + where);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw std::invalid_argument("scenario config: key outside a section at " + where);
        auto& keys = schema[section];
        const auto it = keys.find(key);
        if (it == keys.end()) {
            throw std::invalid_argument("scenario config: unknown key '" + key + "' in [" + section +
                                        "] at " + where);
        }
        it->second(value, where);
    }

    if (!saw_nominal_load) {
        cfg.plant.tire.nominal_load = cfg.plant.m_total * cfg.plant.g / 4.0;
    }
    if (cfg.track_file.empty()) throw std::invalid_argument("scenario config: [scenario] track is required");

    auto resolve = [&base](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    cfg.track_points = load_waypoints_csv(resolve(cfg.track_file));
    if (!cfg.obstacle_file.empty()) {
        cfg.obstacles = load_obstacles_csv(resolve(cfg.obstacle_file));
    }
    cfg.validate();
    return cfg;
}

void ScenarioConfig::validate() const {
    if (duration <= 0.0) throw std::invalid_argument("scenario duration must be positive");
    if (plant_dt <= 0.0 || control_dt <= 0.0 || planner_dt <= 0.0) {
        throw std::invalid_argument("scenario rates must be positive");
    }
    if (!divides_evenly(control_dt, plant_dt) || !divides_evenly(planner_dt, control_dt)) {
        throw std::invalid_argument("rates must divide evenly (plant | control | planner)");
    }
    if (track_points.size() < 3) throw std::invalid_argument("scenario track needs at least 3 points");
    if (initial_speed < 0.0) throw std::invalid_argument("initial speed must be non-negative");
    if (resample_spacing <= 0.0) throw std::invalid_argument("resample spacing must be positive");
    if (velocity.v_max <= 0.0 || velocity.delta_v <= 0.0 || velocity.t_preview <= 0.0) {
        throw std::invalid_argument("velocity planner settings must be positive");
    }
    if (kinematic.l_f <= 0.0 || kinematic.l_r <= 0.0 || kinematic.mu <= 0.0 ||
        kinematic.delta_mech <= 0.0 || kinematic.delta_mech >= 0.5 * kPi) {
        throw std::invalid_argument("bad kinematic parameters");
    }
    plant.validate();
    mpc.validate();
    for (const Obstacle& o : obstacles) require_convex(o);
}

}  // namespace avpc
