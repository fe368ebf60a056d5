#include "avpc/reference_path.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace avpc {
namespace {

// Signed Menger curvature of the circle through three points.
double three_point_curvature(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 ab = b - a;
    const Vec2 bc = c - b;
    const Vec2 ac = c - a;
    const double denom = ab.norm() * bc.norm() * ac.norm();
    if (denom < 1e-12) return 0.0;
    return 2.0 * ab.cross(bc) / denom;
}

}  // namespace

ReferencePath ReferencePath::build(const std::vector<Vec2>& points, double resample_spacing) {
    if (points.size() < 3) throw std::invalid_argument("reference path needs at least 3 points");
    if (resample_spacing <= 0.0) throw std::invalid_argument("resample spacing must be positive");

    std::vector<double> cum(points.size(), 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double d = (points[i] - points[i - 1]).norm();
        if (d < 1e-9) throw std::invalid_argument("consecutive duplicate waypoints");
        cum[i] = cum[i - 1] + d;
    }
    const double total = cum.back();

    // Resample at uniform spacing; the final input point is always kept so the
    // total length is preserved.
    ReferencePath path;
    path.spacing_ = resample_spacing;
    std::size_t seg = 0;
    for (double s = 0.0; s < total; s += resample_spacing) {
        while (seg + 2 < points.size() && cum[seg + 1] <= s) ++seg;
        const double t = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
        PathSample sample;
        sample.position = points[seg] + (points[seg + 1] - points[seg]) * t;
        path.samples_.push_back(sample);
    }
    if ((points.back() - path.samples_.back().position).norm() > 1e-9) {
        path.samples_.push_back({points.back(), 0.0, 0.0, 0.0});
    }
    if (path.samples_.size() < 3) throw std::invalid_argument("path too short for chosen spacing");

    auto& samples = path.samples_;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        samples[i].s = samples[i - 1].s + (samples[i].position - samples[i - 1].position).norm();
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = std::min(i + 1, samples.size() - 1);
        const Vec2 d = samples[hi].position - samples[lo].position;
        samples[i].heading = std::atan2(d.y, d.x);
        if (i > 0 && i + 1 < samples.size()) {
            samples[i].curvature = three_point_curvature(samples[i - 1].position, samples[i].position,
                                                         samples[i + 1].position);
        }
    }
    samples.front().curvature = samples[1].curvature;
    samples.back().curvature = samples[samples.size() - 2].curvature;
    return path;
}

ReferencePath ReferencePath::from_csv(const std::string& filename, double resample_spacing) {
    return build(load_waypoints_csv(filename), resample_spacing);
}

std::vector<Vec2> load_waypoints_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open track file: " + filename);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty track file: " + filename);
    // Tolerate a UTF-8 BOM and trailing whitespace in the header.
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line = line.substr(3);
    if (line != "x,y") throw std::runtime_error("track file must start with header 'x,y': " + filename);

    std::vector<Vec2> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Vec2 p;
        char comma = 0;
        if (!(ss >> p.x >> comma >> p.y) || comma != ',') {
            throw std::runtime_error("bad track row at line " + std::to_string(line_no) + " in " + filename);
        }
        points.push_back(p);
    }
    return points;
}

void write_waypoints_csv(const std::vector<Vec2>& points, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw std::runtime_error("cannot write track file: " + filename);
    out << "x,y\n";
    out.precision(17);
    for (const Vec2& p : points) out << p.x << ',' << p.y << '\n';
}

std::size_t ReferencePath::segment_index_at(double s) const {
    if (s <= 0.0) return 0;
    if (s >= total_length()) return samples_.size() - 2;
    // Uniform spacing makes this a direct lookup; the trailing remainder
    // segment is handled by the clamp below.
    std::size_t i = static_cast<std::size_t>(s / spacing_);
    i = std::min(i, samples_.size() - 2);
    while (i > 0 && samples_[i].s > s) --i;
    while (i + 2 < samples_.size() && samples_[i + 1].s <= s) ++i;
    return i;
}

Vec2 ReferencePath::position_at(double s) const {
    const std::size_t i = segment_index_at(s);
    const double len = samples_[i + 1].s - samples_[i].s;
    const double t = std::clamp((s - samples_[i].s) / len, 0.0, 1.0);
    return samples_[i].position + (samples_[i + 1].position - samples_[i].position) * t;
}

double ReferencePath::heading_at(double s) const {
    const std::size_t i = segment_index_at(s);
    const double len = samples_[i + 1].s - samples_[i].s;
    const double t = std::clamp((s - samples_[i].s) / len, 0.0, 1.0);
    return samples_[i].heading + wrap_angle(samples_[i + 1].heading - samples_[i].heading) * t;
}

double ReferencePath::curvature_at(double s) const {
    const std::size_t i = segment_index_at(s);
    const double len = samples_[i + 1].s - samples_[i].s;
    const double t = std::clamp((s - samples_[i].s) / len, 0.0, 1.0);
    return samples_[i].curvature + (samples_[i + 1].curvature - samples_[i].curvature) * t;
}

Vec2 ReferencePath::tangent_at(double s) const {
    const double h = heading_at(s);
    return {std::cos(h), std::sin(h)};
}

PathProjection ReferencePath::project_range(Vec2 point, std::size_t first_seg, std::size_t last_seg,
                                            double query_heading) const {
    double best_d2 = std::numeric_limits<double>::max();
    double best_s = 0.0;
    double best_offset = 0.0;
    std::size_t best_seg = first_seg;
    // Ascending scan with strict improvement keeps ties at the smallest s.
    for (std::size_t i = first_seg; i <= last_seg; ++i) {
        const Vec2 a = samples_[i].position;
        const Vec2 seg = samples_[i + 1].position - a;
        const double len2 = seg.squared_norm();
        const double t = len2 > 0.0 ? std::clamp((point - a).dot(seg) / len2, 0.0, 1.0) : 0.0;
        const Vec2 foot = a + seg * t;
        const double d2 = (point - foot).squared_norm();
        // Relative slack keeps numerically tied candidates at the smaller s.
        if (d2 < best_d2 - 1e-12 * (1.0 + best_d2)) {
            best_d2 = d2;
            best_seg = i;
            best_s = samples_[i].s + std::sqrt(len2) * t;
            best_offset = seg.normalized().cross(point - foot);
        }
    }
    PathProjection proj;
    proj.s = best_s;
    proj.lateral_offset = best_offset;
    proj.segment_tangent = (samples_[best_seg + 1].position - samples_[best_seg].position).normalized();
    const double len = samples_[best_seg + 1].s - samples_[best_seg].s;
    const double t = std::clamp((best_s - samples_[best_seg].s) / std::max(len, 1e-12), 0.0, 1.0);
    proj.path_heading = samples_[best_seg].heading +
                        wrap_angle(samples_[best_seg + 1].heading - samples_[best_seg].heading) * t;
    proj.heading_error = wrap_angle(query_heading - proj.path_heading);
    return proj;
}

PathProjection ReferencePath::project(Vec2 point, double hint_s, double query_heading) const {
    const double lo = std::max(0.0, hint_s - search_window_);
    const double hi = std::min(total_length(), hint_s + search_window_);
    return project_range(point, segment_index_at(lo), segment_index_at(hi), query_heading);
}

PathProjection ReferencePath::project_global(Vec2 point, double query_heading) const {
    return project_range(point, 0, samples_.size() - 2, query_heading);
}

double ReferencePath::max_curvature_ahead(double s0, double lookahead) const {
    const double a = std::clamp(s0, 0.0, total_length());
    const double b = std::clamp(s0 + std::max(lookahead, 0.0), 0.0, total_length());
    double best = std::abs(curvature_at(a));
    best = std::max(best, std::abs(curvature_at(b)));
    for (std::size_t i = segment_index_at(a); i < samples_.size() && samples_[i].s <= b; ++i) {
        if (samples_[i].s >= a) best = std::max(best, std::abs(samples_[i].curvature));
    }
    return best;
}

}  // namespace avpc
