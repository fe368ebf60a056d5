#include "avpc/track_gen.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace avpc {

std::vector<Vec2> generate_track(const std::vector<TrackSegment>& segments, double spacing) {
    if (spacing <= 0.0) throw std::invalid_argument("track spacing must be positive");
    std::vector<Vec2> points;
    Vec2 pos{0.0, 0.0};
    double heading = 0.0;
    points.push_back(pos);

    for (const TrackSegment& seg : segments) {
        if (seg.kind == TrackSegment::Kind::Straight) {
            if (seg.length <= 0.0) throw std::invalid_argument("straight length must be positive");
            const Vec2 dir{std::cos(heading), std::sin(heading)};
            const int n = std::max(1, static_cast<int>(std::ceil(seg.length / spacing)));
            for (int i = 1; i <= n; ++i) {
                points.push_back(pos + dir * (seg.length * i / n));
            }
            pos = points.back();
        } else {
            if (seg.radius <= 0.0 || seg.sweep_rad == 0.0) {
                throw std::invalid_argument("arc needs positive radius and non-zero sweep");
            }
            const double turn = seg.sweep_rad > 0.0 ? 1.0 : -1.0;
            const Vec2 normal{-std::sin(heading) * turn, std::cos(heading) * turn};
            const Vec2 center = pos + normal * seg.radius;
            const double start_angle = std::atan2(pos.y - center.y, pos.x - center.x);
            const double arc_len = std::abs(seg.sweep_rad) * seg.radius;
            const int n = std::max(2, static_cast<int>(std::ceil(arc_len / spacing)));
            for (int i = 1; i <= n; ++i) {
                const double a = start_angle + seg.sweep_rad * i / n;
                points.push_back(center + Vec2{std::cos(a), std::sin(a)} * seg.radius);
            }
            pos = points.back();
            heading += seg.sweep_rad;
        }
    }
    return points;
}

TrackSpec load_track_spec(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open track spec: " + filename);
    TrackSpec spec;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        std::string word;
        if (!(ss >> word)) continue;
        const std::string where = filename + ":" + std::to_string(line_no);
        if (word == "spacing") {
            if (!(ss >> spec.spacing) || spec.spacing <= 0.0) {
                throw std::runtime_error("bad spacing at " + where);
            }
        } else if (word == "straight") {
            double length = 0.0;
            if (!(ss >> length) || length <= 0.0) throw std::runtime_error("bad straight at " + where);
            spec.segments.push_back(TrackSegment::straight(length));
        } else if (word == "arc") {
            double radius = 0.0;
            double sweep_deg = 0.0;
            if (!(ss >> radius >> sweep_deg) || radius <= 0.0 || sweep_deg == 0.0) {
                throw std::runtime_error("bad arc at " + where);
            }
            spec.segments.push_back(TrackSegment::arc(radius, sweep_deg * kPi / 180.0));
        } else {
            throw std::runtime_error("unknown track directive '" + word + "' at " + where);
        }
    }
    if (spec.segments.empty()) throw std::runtime_error("track spec has no segments: " + filename);
    return spec;
}

TrackSpec hairpin_track() {
    TrackSpec spec;
    spec.spacing = 1.0;
    const double deg = kPi / 180.0;
    spec.segments = {
        TrackSegment::straight(150.0), TrackSegment::arc(10.0, 180.0 * deg),
        TrackSegment::straight(60.0),  TrackSegment::arc(15.0, -150.0 * deg),
        TrackSegment::straight(70.0),  TrackSegment::arc(10.0, 120.0 * deg),
        TrackSegment::straight(60.0),  TrackSegment::arc(20.0, -90.0 * deg),
        TrackSegment::straight(150.0),
    };
    return spec;
}

}  // namespace avpc
