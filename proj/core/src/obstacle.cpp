#include "avpc/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace avpc {

void require_convex(const Obstacle& obstacle) {
    const auto& v = obstacle.vertices;
    if (v.empty()) throw std::invalid_argument("obstacle needs at least one vertex");
    if (v.size() <= 3) return;
    double sign = 0.0;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[(i + 1) % n] - v[i];
        const Vec2 b = v[(i + 2) % n] - v[(i + 1) % n];
        const double c = a.cross(b);
        if (std::abs(c) < 1e-12) continue;  // collinear edge
        if (sign == 0.0) {
            sign = c;
        } else if (sign * c < 0.0) {
            throw std::invalid_argument("obstacle " + std::to_string(obstacle.id) + " is not convex");
        }
    }
}

ParabolaRegion fit_parabola(const Obstacle& obstacle, const ReferencePath& path,
                            const ObstacleConfig& cfg) {
    require_convex(obstacle);
    Vec2 centroid;
    for (const Vec2& v : obstacle.vertices) centroid = centroid + v;
    centroid = centroid * (1.0 / static_cast<double>(obstacle.vertices.size()));

    const PathProjection proj = path.project_global(centroid);
    const Vec2 tangent = path.tangent_at(proj.s);
    Vec2 axis = tangent.left_normal();
    if (proj.lateral_offset < 0.0) axis = -axis;  // point away from the path
    const Vec2 foot = path.position_at(proj.s);

    double a_near = std::numeric_limits<double>::infinity();
    for (const Vec2& v : obstacle.vertices) a_near = std::min(a_near, (v - foot).dot(axis));

    ParabolaRegion region;
    region.axis = axis;
    region.directrix = tangent;
    region.vertex_point = foot + axis * (a_near - cfg.margin);
    region.anchor_s = proj.s;

    double focal = 0.0;
    for (const Vec2& v : obstacle.vertices) {
        const Vec2 rel = v - region.vertex_point;
        const double a = rel.dot(axis);
        const double b = rel.dot(tangent);
        focal = std::max(focal, b * b / (2.0 * std::max(a, 1e-9)));
    }
    region.focal = std::max(focal, cfg.p_min);
    return region;
}

double interior_value(const ParabolaRegion& region, Vec2 point, double margin) {
    const Vec2 rel = point - region.vertex_point;
    const double a = rel.dot(region.axis);
    const double b = rel.dot(region.directrix);
    return a - b * b / (2.0 * region.focal) - margin;
}

Vec2 interior_gradient(const ParabolaRegion& region, Vec2 point) {
    const Vec2 rel = point - region.vertex_point;
    const double b = rel.dot(region.directrix);
    return region.axis - region.directrix * (b / region.focal);
}

double distance_to_polygon(const Obstacle& obstacle, Vec2 point) {
    const auto& v = obstacle.vertices;
    if (v.size() == 1) return (point - v[0]).norm();

    const std::size_t n = v.size();
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) area2 += v[i].cross(v[(i + 1) % n]);
    const double winding = area2 >= 0.0 ? 1.0 : -1.0;

    double best = std::numeric_limits<double>::infinity();
    bool inside = n >= 3;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[i];
        const Vec2 seg = v[(i + 1) % n] - a;
        const double len2 = seg.squared_norm();
        const double t = len2 > 0.0 ? std::clamp((point - a).dot(seg) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (point - (a + seg * t)).norm());
        if (winding * seg.cross(point - a) < 0.0) inside = false;
    }
    return inside ? 0.0 : best;
}

std::vector<Obstacle> load_obstacles_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open obstacle file: " + filename);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty obstacle file: " + filename);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line != "obstacle_id,x,y") {
        throw std::runtime_error("obstacle file must start with header 'obstacle_id,x,y': " + filename);
    }

    std::vector<Obstacle> obstacles;
    std::map<int, std::size_t> index_by_id;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int id = 0;
        char c1 = 0, c2 = 0;
        Vec2 p;
        if (!(ss >> id >> c1 >> p.x >> c2 >> p.y) || c1 != ',' || c2 != ',') {
            throw std::runtime_error("bad obstacle row at line " + std::to_string(line_no) + " in " +
                                     filename);
        }
        auto [it, inserted] = index_by_id.try_emplace(id, obstacles.size());
        if (inserted) obstacles.push_back({id, {}});
        obstacles[it->second].vertices.push_back(p);
    }
    for (const Obstacle& o : obstacles) require_convex(o);
    return obstacles;
}

void write_obstacles_csv(const std::vector<Obstacle>& obstacles, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw std::runtime_error("cannot write obstacle file: " + filename);
    out << "obstacle_id,x,y\n";
    out.precision(17);
    for (const Obstacle& o : obstacles) {
        for (const Vec2& v : o.vertices) out << o.id << ',' << v.x << ',' << v.y << '\n';
    }
}

}  // namespace avpc
