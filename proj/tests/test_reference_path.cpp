#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "avpc/reference_path.hpp"

using avpc::ReferencePath;
using avpc::Vec2;

namespace {

std::vector<Vec2> straight_line(int n, double spacing = 1.0) {
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) pts.push_back({i * spacing, 0.0});
    return pts;
}

// winding > 0 samples counter-clockwise.
std::vector<Vec2> circle(double radius, int n, double winding = 1.0) {
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        const double a = winding * 2.0 * avpc::kPi * i / n;
        pts.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    pts.push_back(pts.front());  // closed polyline, first point repeated
    return pts;
}

}  // namespace

TEST_CASE("straight line has zero curvature everywhere") {
    const ReferencePath path = ReferencePath::build(straight_line(100), 1.0);
    for (const auto& s : path.samples()) CHECK(s.curvature == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(path.total_length() == doctest::Approx(99.0).epsilon(1e-9));
}

TEST_CASE("circle of radius 10 has curvature 0.1 within 2 percent") {
    const ReferencePath path = ReferencePath::build(circle(10.0, 360), 1.0);
    const auto& samples = path.samples();
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        CHECK(std::abs(samples[i].curvature - 0.1) <= 0.002);
    }
    // CCW circle turns left: positive curvature.
    CHECK(samples[samples.size() / 2].curvature > 0.0);
}

TEST_CASE("three collinear points give length 2 and constant heading") {
    const ReferencePath path = ReferencePath::build({{0, 0}, {1, 0}, {2, 0}}, 0.5);
    CHECK(path.total_length() == doctest::Approx(2.0).epsilon(1e-12));
    for (const auto& s : path.samples()) CHECK(s.heading == doctest::Approx(0.0));
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(ReferencePath::build({{0, 0}, {1, 0}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ReferencePath::build({{0, 0}, {0, 0}, {1, 0}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ReferencePath::build(straight_line(10), -1.0), std::invalid_argument);
}

TEST_CASE("resampling preserves total length within 0.1 percent") {
    const auto pts = circle(10.0, 720);
    double input_len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) input_len += (pts[i] - pts[i - 1]).norm();
    const ReferencePath path = ReferencePath::build(pts, 1.0);
    CHECK(std::abs(path.total_length() - input_len) / input_len < 1e-3);
}

TEST_CASE("projection of on-path and offset points") {
    const ReferencePath path = ReferencePath::build(straight_line(50), 1.0);

    const auto on_path = path.project({5.0, 0.0}, 5.0);
    CHECK(on_path.lateral_offset == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(on_path.s == doctest::Approx(5.0).epsilon(1e-12));

    const auto left = path.project({5.0, 1.0}, 3.0);
    CHECK(left.s == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(left.lateral_offset == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(left.heading_error == doctest::Approx(0.0));
}

TEST_CASE("projection from the circle center") {
    // Clockwise circle: the center lies to the right of travel -> offset -10
    // (up to the chord sagitta of the 1 m resampling). Any s is valid.
    const ReferencePath cw = ReferencePath::build(circle(10.0, 360, -1.0), 1.0);
    const auto proj = cw.project_global({0.0, 0.0});
    CHECK(proj.lateral_offset == doctest::Approx(-10.0).epsilon(2e-3));

    const ReferencePath ccw = ReferencePath::build(circle(10.0, 360, 1.0), 1.0);
    CHECK(ccw.project_global({0.0, 0.0}).lateral_offset == doctest::Approx(10.0).epsilon(2e-3));
}

TEST_CASE("exact ties resolve toward smaller s") {
    // U-shaped path; (5, 5) is exactly 5 m from three different sections.
    const ReferencePath path =
        ReferencePath::build({{0, 0}, {10, 0}, {10, 10}, {0, 10}}, 1.0);
    const auto proj = path.project_global({5.0, 5.0});
    CHECK(proj.s == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(proj.lateral_offset == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("offset along the normal is recovered as lateral offset") {
    const ReferencePath path = ReferencePath::build(circle(20.0, 720), 0.5);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> pick_s(5.0, path.total_length() - 5.0);
    std::uniform_real_distribution<double> pick_d(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double s = pick_s(rng);
        const double d = pick_d(rng);
        const double h = path.heading_at(s);
        const Vec2 q = path.position_at(s) + Vec2{-std::sin(h), std::cos(h)} * d;
        const auto proj = path.project(q, s);
        CHECK(proj.lateral_offset == doctest::Approx(d).epsilon(2e-3));
    }
}

TEST_CASE("max_curvature_ahead") {
    // 40 m straight into a 10 m radius arc.
    std::vector<Vec2> pts = straight_line(41);
    const Vec2 join = pts.back();
    for (int i = 1; i <= 90; ++i) {
        const double a = i * avpc::kPi / 180.0;
        pts.push_back({join.x + 10.0 * std::sin(a), join.y + 10.0 * (1.0 - std::cos(a))});
    }
    const ReferencePath path = ReferencePath::build(pts, 0.5);

    CHECK(path.max_curvature_ahead(0.0, 10.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(path.max_curvature_ahead(5.0, 60.0) == doctest::Approx(0.1).epsilon(0.02));
    CHECK(path.max_curvature_ahead(45.0, 0.0) == doctest::Approx(0.1).epsilon(0.03));

    SUBCASE("monotone in lookahead") {
        double prev = 0.0;
        for (double look = 0.0; look < 80.0; look += 2.5) {
            const double cur = path.max_curvature_ahead(2.0, look);
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("csv round trip requires the x,y header") {
    const std::string file = "test_path.csv";
    {
        std::ofstream out(file);
        out << "x,y\n0,0\n10,0\n20,0\n30,0.5\n";
    }
    const ReferencePath path = ReferencePath::from_csv(file, 1.0);
    CHECK(path.total_length() > 29.0);

    {
        std::ofstream out(file);
        out << "a,b\n0,0\n10,0\n";
    }
    CHECK_THROWS(ReferencePath::from_csv(file, 1.0));
    std::remove(file.c_str());
}
