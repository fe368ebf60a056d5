#include <benchmark/benchmark.h>

#include "avpc/mpc_planner.hpp"
#include "avpc/track_gen.hpp"
#include "avpc/velocity_planner.hpp"

namespace {

struct Fixture {
    avpc::ReferencePath path;
    avpc::MpcConfig cfg;
    avpc::KbmParams model;
    avpc::KbmState start;
    std::vector<double> profile;

    Fixture() : path(make_path()) {
        start.s = 120.0;  // approaching the first hairpin at speed
        const avpc::Vec2 p = path.position_at(start.s);
        start.x = p.x;
        start.y = p.y;
        start.psi = path.heading_at(start.s);
        start.v = 15.0;
        avpc::VelocityPlannerConfig vp;
        for (int k = 1; k <= cfg.stage_count(); ++k) {
            profile.push_back(
                avpc::heuristic_speed(start.v, start.s + start.v * cfg.control_dt * k, path, vp));
        }
    }

    static avpc::ReferencePath make_path() {
        const avpc::TrackSpec spec = avpc::hairpin_track();
        return avpc::ReferencePath::build(avpc::generate_track(spec.segments, spec.spacing), 1.0);
    }
};

void BM_mpc_solve_cold(benchmark::State& state) {
    const Fixture f;
    const avpc::MpcProblem problem =
        avpc::build_problem(f.start, f.path, f.profile, {}, f.cfg, f.model);
    for (auto _ : state) {
        benchmark::DoNotOptimize(avpc::solve(problem, {}));
    }
}
BENCHMARK(BM_mpc_solve_cold)->Unit(benchmark::kMillisecond);

void BM_mpc_solve_warm(benchmark::State& state) {
    const Fixture f;
    const avpc::MpcProblem problem =
        avpc::build_problem(f.start, f.path, f.profile, {}, f.cfg, f.model);
    const avpc::PlannedTrajectory first = avpc::solve(problem, {});
    std::vector<avpc::KbmInput> warm;
    for (const avpc::MpcControl& c : first.controls) warm.push_back({c.u1, c.u2});
    for (auto _ : state) {
        benchmark::DoNotOptimize(avpc::solve(problem, warm));
    }
}
BENCHMARK(BM_mpc_solve_warm)->Unit(benchmark::kMillisecond);

}  // namespace
