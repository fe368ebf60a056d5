#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "avpc/velocity_planner.hpp"

using namespace avpc;

namespace {

ReferencePath straight_path(double length) {
    std::vector<Vec2> pts;
    for (double x = 0.0; x <= length; x += 5.0) pts.push_back({x, 0.0});
    return ReferencePath::build(pts, 1.0);
}

ReferencePath straight_into_arc(double straight, double radius) {
    std::vector<Vec2> pts;
    for (double x = 0.0; x <= straight; x += 1.0) pts.push_back({x, 0.0});
    for (int i = 1; i <= 150; ++i) {
        const double a = i * kPi / 180.0;
        pts.push_back({straight + radius * std::sin(a), radius * (1.0 - std::cos(a))});
    }
    return ReferencePath::build(pts, 1.0);
}

}  // namespace

TEST_CASE("straight road: ramp limit binds") {
    const ReferencePath path = straight_path(500.0);
    VelocityPlannerConfig cfg;
    cfg.v_max = 20.0;
    cfg.delta_v = 1.0;
    CHECK(heuristic_speed(15.0, 0.0, path, cfg) == doctest::Approx(16.0));
    CHECK(heuristic_speed(20.0, 0.0, path, cfg) == doctest::Approx(20.0));  // cap binds
    CHECK(heuristic_speed(0.0, 0.0, path, cfg) == doctest::Approx(1.0));
}

TEST_CASE("curvature term binds approaching a 10 m curve") {
    const ReferencePath path = straight_into_arc(60.0, 10.0);
    VelocityPlannerConfig cfg;
    // sqrt(0.5 * 9.81 * 10), frozen from direct evaluation
    const double curve_speed = 7.003570517957251;
    const double v = heuristic_speed(15.0, 30.0, path, cfg);  // preview reaches the curve
    CHECK(v == doctest::Approx(curve_speed).epsilon(0.02));
    CHECK(v <= 16.0);
}

TEST_CASE("low speed preview floor keeps the planner seeing ahead") {
    const ReferencePath path = straight_into_arc(3.0, 10.0);
    VelocityPlannerConfig cfg;
    const double v = heuristic_speed(0.0, 0.0, path, cfg);  // preview = min_preview = 5 m
    CHECK(v < cfg.delta_v + 1e-12);  // curve within 5 m caps even the ramp
}

TEST_CASE("straight line vmax stopping cap") {
    VelocityPlannerConfig cfg;
    cfg.v_max = 30.0;
    CHECK(straight_line_vmax(cfg, -8.0, 3.0) == doctest::Approx(24.0));
    cfg.v_max = 20.0;
    CHECK(straight_line_vmax(cfg, -8.0, 3.0) == doctest::Approx(20.0));
    CHECK(straight_line_vmax(cfg, -8.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("invariants: rate limit, cap, lateral budget, monotonicity") {
    const ReferencePath path = straight_into_arc(80.0, 12.0);
    VelocityPlannerConfig cfg;
    for (double v = 0.0; v <= 22.0; v += 1.7) {
        for (double s = 0.0; s < path.total_length(); s += 7.0) {
            const double out = heuristic_speed(v, s, path, cfg);
            CHECK(out <= std::min(cfg.v_max, v + cfg.delta_v) + 1e-12);
            CHECK(out >= 0.0);
            const double preview = std::max(v * cfg.t_preview, cfg.min_preview);
            const double kappa = path.max_curvature_ahead(s, preview);
            CHECK(kappa * out * out <= 0.5 * cfg.mu * cfg.g * 1.02 + 1e-9);
        }
    }

    SUBCASE("smaller radius never raises the answer") {
        const ReferencePath tight = straight_into_arc(80.0, 9.0);
        const ReferencePath wide = straight_into_arc(80.0, 25.0);
        for (double s = 0.0; s < 80.0; s += 10.0) {
            CHECK(heuristic_speed(18.0, s, tight, cfg) <= heuristic_speed(18.0, s, wide, cfg) + 1e-12);
        }
    }
}

TEST_CASE("per-stage profile pins the ramp and preview to the measured speed") {
    const ReferencePath path = straight_into_arc(100.0, 10.0);
    VelocityPlannerConfig cfg;
    const std::vector<double> stage_s = {10.0, 40.0, 70.0, 95.0};
    const auto profile = heuristic_speed_profile(15.0, stage_s, path, cfg);
    REQUIRE(profile.size() == 4);
    for (double v : profile) CHECK(v <= 16.0 + 1e-12);
    CHECK(profile[3] < profile[0]);  // stages inside the curve slow down
}
