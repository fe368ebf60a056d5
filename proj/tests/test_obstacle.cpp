#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "avpc/obstacle.hpp"

using namespace avpc;

namespace {

ReferencePath straight_path() {
    std::vector<Vec2> pts;
    for (double x = 0.0; x <= 100.0; x += 1.0) pts.push_back({x, 0.0});
    return ReferencePath::build(pts, 1.0);
}

Obstacle square_at(double cx, double cy, double half) {
    return {0, {{cx - half, cy - half}, {cx + half, cy - half}, {cx + half, cy + half}, {cx - half, cy + half}}};
}

// Independent oracle: golden-section search for the smallest focal parameter
// that still contains every vertex, given the fitted frame and vertex point.
double golden_section_min_focal(const ParabolaRegion& region, const Obstacle& obstacle) {
    auto contains_all = [&](double p) {
        ParabolaRegion r = region;
        r.focal = p;
        for (const Vec2& v : obstacle.vertices) {
            if (interior_value(r, v) < -1e-12) return false;
        }
        return true;
    };
    double lo = 1e-3, hi = 100.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (contains_all(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

TEST_CASE("square left of a straight path: minimal parabola puts the near corners on the boundary") {
    const ReferencePath path = straight_path();
    const Obstacle square = square_at(50.0, 3.0, 1.0);  // side 2, centered 3 m left
    const ParabolaRegion region = fit_parabola(square, path, {0.5, 0.5});

    // axis points away from the path (left), vertex 0.5 m before the near face
    CHECK(region.axis.y == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(region.vertex_point.y == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(region.vertex_point.x == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(region.focal == doctest::Approx(1.0).epsilon(1e-9));

    // the two path-side corners lie exactly on the margin-zero boundary
    CHECK(interior_value(region, {49.0, 2.0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(interior_value(region, {51.0, 2.0}) == doctest::Approx(0.0).epsilon(1e-12));

    SUBCASE("matches the golden-section containment oracle") {
        CHECK(golden_section_min_focal(region, square) == doctest::Approx(region.focal).epsilon(1e-6));
    }
    SUBCASE("containment invariant") {
        for (const Vec2& v : square.vertices) CHECK(interior_value(region, v) >= -1e-9);
    }
    SUBCASE("shrinking p by 1 percent breaks containment") {
        ParabolaRegion shrunk = region;
        shrunk.focal *= 0.99;
        int outside = 0;
        for (const Vec2& v : square.vertices) {
            if (interior_value(shrunk, v) < -1e-12) ++outside;
        }
        CHECK(outside >= 1);
    }
}

TEST_CASE("single point obstacle clamps to p_min with the vertex offset by the margin") {
    const ReferencePath path = straight_path();
    const Obstacle point{1, {{40.0, 2.0}}};
    const ObstacleConfig cfg{0.5, 0.5};
    const ParabolaRegion region = fit_parabola(point, path, cfg);
    CHECK(region.focal == cfg.p_min);
    CHECK(region.vertex_point.y == doctest::Approx(1.5).epsilon(1e-9));
    // the point itself sits strictly inside by the safety margin
    CHECK(interior_value(region, {40.0, 2.0}) == doctest::Approx(cfg.margin).epsilon(1e-12));
    // the boundary crosses the axis at the vertex point
    CHECK(interior_value(region, region.vertex_point) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("translation along a straight path translates the fitted parabola") {
    const ReferencePath path = straight_path();
    const ObstacleConfig cfg;
    const ParabolaRegion a = fit_parabola(square_at(30.0, -2.0, 0.7), path, cfg);
    const ParabolaRegion b = fit_parabola(square_at(55.0, -2.0, 0.7), path, cfg);
    CHECK(b.vertex_point.x - a.vertex_point.x == doctest::Approx(25.0).epsilon(1e-9));
    CHECK(b.vertex_point.y == doctest::Approx(a.vertex_point.y).epsilon(1e-9));
    CHECK(b.focal == doctest::Approx(a.focal).epsilon(1e-9));
    // right-side obstacle opens right
    CHECK(a.axis.y == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("interior value geometry") {
    ParabolaRegion region;
    region.vertex_point = {0.0, 0.0};
    region.axis = {1.0, 0.0};
    region.directrix = {0.0, 1.0};
    region.focal = 2.0;

    CHECK(interior_value(region, {0.0, 0.0}) == 0.0);              // vertex on boundary
    CHECK(interior_value(region, {-50.0, 0.0}) < -40.0);           // far behind: strongly safe
    CHECK(interior_value(region, {3.0, 2.0}) == doctest::Approx(2.0));  // a - b^2/(2p) = 3 - 1
    CHECK(interior_value(region, {3.0, 2.0}, 0.5) == doctest::Approx(1.5));

    SUBCASE("finite-difference gradient matches everywhere sampled") {
        const double h = 1e-7;
        for (double x = -3.0; x <= 3.0; x += 0.7) {
            for (double y = -3.0; y <= 3.0; y += 0.7) {
                const Vec2 g = interior_gradient(region, {x, y});
                const double fx = (interior_value(region, {x + h, y}) - interior_value(region, {x - h, y})) / (2 * h);
                const double fy = (interior_value(region, {x, y + h}) - interior_value(region, {x, y - h})) / (2 * h);
                CHECK(g.x == doctest::Approx(fx).epsilon(1e-6));
                CHECK(g.y == doctest::Approx(fy).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("distance to polygon") {
    const Obstacle square = square_at(0.0, 0.0, 1.0);
    CHECK(distance_to_polygon(square, {0.0, 0.0}) == 0.0);    // inside
    CHECK(distance_to_polygon(square, {2.0, 0.0}) == doctest::Approx(1.0));
    CHECK(distance_to_polygon(square, {2.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));
    const Obstacle point{0, {{1.0, 1.0}}};
    CHECK(distance_to_polygon(point, {1.0, 2.0}) == doctest::Approx(1.0));
}

TEST_CASE("convexity enforcement and CSV loading") {
    Obstacle bad{0, {{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}};
    CHECK_THROWS_AS(require_convex(bad), std::invalid_argument);

    const std::string file = "test_obstacles.csv";
    {
        std::ofstream out(file);
        out << "obstacle_id,x,y\n";
        out << "1,0,0\n1,2,0\n1,2,2\n1,0,2\n";
        out << "2,10,0\n2,11,0\n2,10.5,1\n";
    }
    const auto obstacles = load_obstacles_csv(file);
    REQUIRE(obstacles.size() == 2);
    CHECK(obstacles[0].vertices.size() == 4);
    CHECK(obstacles[1].vertices.size() == 3);

    {
        std::ofstream out(file);
        out << "id,x,y\n1,0,0\n";
    }
    CHECK_THROWS(load_obstacles_csv(file));
    std::remove(file.c_str());
}
