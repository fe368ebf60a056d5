// Command-line front end: scenario runs, metric recomputation, report plots
// and track generation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

#include "avpc/reference_path.hpp"
#include "avpc/scenario_config.hpp"
#include "avpc/sim_harness.hpp"
#include "avpc/track_gen.hpp"

namespace {

nlohmann::json metrics_to_json(const avpc::Metrics& m) {
    nlohmann::json j;
    j["max_lateral_error_m"] = m.max_lateral_error;
    j["max_lateral_accel_mps2"] = m.max_lateral_accel;
    j["max_solve_time_ms"] = m.max_solve_time_ms;
    j["mean_solve_time_ms"] = m.mean_solve_time_ms;
    j["min_clearance_m"] =
        std::isfinite(m.min_clearance) ? nlohmann::json(m.min_clearance) : nlohmann::json();
    j["max_friction_utilization"] = m.max_friction_utilization;
    j["completed"] = m.completed;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kinematic-bicycle MPC planning and control stack"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a closed-loop scenario and write a report");
    std::string scenario_file, out_dir;
    double duration_override = -1.0;
    bool no_obstacles = false;
    run->add_option("--scenario", scenario_file, "scenario config file")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--duration", duration_override, "override scenario duration [s]");
    run->add_flag("--no-obstacles", no_obstacles, "ignore the scenario obstacle file");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "recompute metrics from a log CSV");
    std::string log_file;
    metrics_cmd->add_option("--log", log_file, "log.csv written by 'run'")->required();

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "regenerate plots from a log CSV");
    std::string plot_log, plot_out;
    plot_cmd->add_option("--log", plot_log, "log.csv written by 'run'")->required();
    plot_cmd->add_option("--out", plot_out, "output directory")->required();

    // track gen
    auto* track = app.add_subcommand("track", "track utilities");
    auto* gen = track->add_subcommand("gen", "generate a waypoint CSV from a segment spec");
    std::string spec_file, track_out;
    double spacing_override = -1.0;
    bool hairpins = false;
    gen->add_option("--spec", spec_file, "segment spec file");
    gen->add_option("--out", track_out, "output waypoint CSV")->required();
    gen->add_option("--spacing", spacing_override, "override waypoint spacing [m]");
    gen->add_flag("--hairpins", hairpins, "use the built-in straights+hairpins layout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            avpc::ScenarioConfig cfg = avpc::ScenarioConfig::from_file(scenario_file);
            if (duration_override > 0.0) cfg.duration = duration_override;
            if (no_obstacles) cfg.obstacles.clear();
            const auto [log, metrics] = avpc::run_scenario(cfg);
            avpc::emit_report(log, metrics, cfg, out_dir);
            std::cout << metrics_to_json(metrics).dump(2) << '\n';
            if (log.aborted) {
                std::cerr << "scenario aborted: " << log.abort_reason << '\n';
                return 2;
            }
        } else if (*metrics_cmd) {
            const avpc::SimLog log = avpc::load_log(log_file);
            std::cout << metrics_to_json(avpc::compute_metrics(log)).dump(2) << '\n';
        } else if (*plot_cmd) {
            const avpc::SimLog log = avpc::load_log(plot_log);
            const avpc::Metrics m = avpc::compute_metrics(log);
            avpc::ScenarioConfig cfg;  // plots degrade gracefully without scenario geometry
            for (const avpc::PlantRecord& r : log.plant) cfg.track_points.push_back({r.state.x, r.state.y});
            avpc::emit_report(log, m, cfg, plot_out);
        } else if (*gen) {
            avpc::TrackSpec spec;
            if (hairpins) {
                spec = avpc::hairpin_track();
            } else if (!spec_file.empty()) {
                spec = avpc::load_track_spec(spec_file);
            } else {
                std::cerr << "track gen: provide --spec or --hairpins\n";
                return 1;
            }
            if (spacing_override > 0.0) spec.spacing = spacing_override;
            avpc::write_waypoints_csv(avpc::generate_track(spec.segments, spec.spacing), track_out);
            std::cout << "wrote " << track_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
