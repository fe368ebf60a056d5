#include <benchmark/benchmark.h>

#include "avpc/vehicle_9dof.hpp"

namespace {

void BM_plant_step(benchmark::State& state) {
    avpc::PlantParams params;
    avpc::Dyn9State s;
    s.v_x = 15.0;
    for (double& w : s.wheel_speed) w = s.v_x / params.wheel_radius;
    avpc::PlantInput input;
    input.steering = 0.05;
    input.wheel_torque = {120.0, 120.0, 0.0, 0.0};
    for (auto _ : state) {
        s = avpc::plant_step(s, input, 1e-3, params);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_plant_step);

void BM_plant_derivative(benchmark::State& state) {
    avpc::PlantParams params;
    avpc::Dyn9State s;
    s.v_x = 15.0;
    s.v_y = 0.3;
    s.yaw_rate = 0.4;
    for (double& w : s.wheel_speed) w = s.v_x / params.wheel_radius;
    avpc::PlantInput input;
    input.steering = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(avpc::plant_derivative(s, input, params));
    }
}
BENCHMARK(BM_plant_derivative);

}  // namespace
