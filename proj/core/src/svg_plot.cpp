#include "avpc/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace avpc {
namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;
constexpr std::size_t kMaxPointsPerSeries = 2500;

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, int width, int height)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)),
      width_(width),
      height_(height) {}

void SvgPlot::add_series(const std::string& name, const std::vector<double>& x,
                         const std::vector<double>& y, const std::string& color) {
    if (x.size() != y.size()) throw std::invalid_argument("svg series size mismatch");
    Series s;
    s.name = name;
    s.color = color;
    const std::size_t stride = std::max<std::size_t>(1, x.size() / kMaxPointsPerSeries);
    for (std::size_t i = 0; i < x.size(); i += stride) {
        s.x.push_back(x[i]);
        s.y.push_back(y[i]);
    }
    if (!x.empty() && (x.size() - 1) % stride != 0) {
        s.x.push_back(x.back());
        s.y.push_back(y.back());
    }
    series_.push_back(std::move(s));
}

void SvgPlot::add_polygon(const std::vector<Vec2>& vertices, const std::string& color) {
    polygons_.emplace_back(vertices, color);
}

void SvgPlot::write(const std::string& filename) const {
    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    double y_min = x_min;
    double y_max = -x_min;
    for (const Series& s : series_) {
        for (double v : s.x) {
            x_min = std::min(x_min, v);
            x_max = std::max(x_max, v);
        }
        for (double v : s.y) {
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    for (const auto& [poly, color] : polygons_) {
        for (const Vec2& p : poly) {
            x_min = std::min(x_min, p.x);
            x_max = std::max(x_max, p.x);
            y_min = std::min(y_min, p.y);
            y_max = std::max(y_max, p.y);
        }
    }
    if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
        x_min = y_min = 0.0;
        x_max = y_max = 1.0;
    }
    if (x_max - x_min < 1e-12) x_max = x_min + 1.0;
    if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
    const double pad_x = 0.03 * (x_max - x_min);
    const double pad_y = 0.06 * (y_max - y_min);
    x_min -= pad_x;
    x_max += pad_x;
    y_min -= pad_y;
    y_max += pad_y;

    const double plot_w = width_ - kMarginLeft - kMarginRight;
    const double plot_h = height_ - kMarginTop - kMarginBottom;
    double sx = plot_w / (x_max - x_min);
    double sy = plot_h / (y_max - y_min);
    if (equal_aspect_) {
        const double s = std::min(sx, sy);
        sx = sy = s;
    }
    const auto px = [&](double x) { return kMarginLeft + (x - x_min) * sx; };
    const auto py = [&](double y) { return kMarginTop + plot_h - (y - y_min) * sy; };

    std::ofstream out(filename);
    if (!out) throw std::runtime_error("cannot write plot: " + filename);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width_ << "' height='" << height_
        << "' viewBox='0 0 " << width_ << ' ' << height_ << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << width_ / 2 << "' y='22' text-anchor='middle' font-size='15' "
        << "font-family='sans-serif'>" << title_ << "</text>\n";

    // Axes with ~5 ticks each.
    out << "<g font-size='11' font-family='sans-serif' fill='black'>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_min + (x_max - x_min) * i / 5.0;
        const double yv = y_min + (y_max - y_min) * i / 5.0;
        const double gx = px(xv);
        const double gy = py(yv);
        out << "<line x1='" << gx << "' y1='" << kMarginTop << "' x2='" << gx << "' y2='"
            << kMarginTop + plot_h << "' stroke='#dddddd'/>\n"
            << "<text x='" << gx << "' y='" << kMarginTop + plot_h + 16
            << "' text-anchor='middle'>" << fmt(xv) << "</text>\n";
        if (gy >= kMarginTop - 1 && gy <= kMarginTop + plot_h + 1) {
            out << "<line x1='" << kMarginLeft << "' y1='" << gy << "' x2='" << kMarginLeft + plot_w
                << "' y2='" << gy << "' stroke='#dddddd'/>\n"
                << "<text x='" << kMarginLeft - 6 << "' y='" << gy + 4
                << "' text-anchor='end'>" << fmt(yv) << "</text>\n";
        }
    }
    out << "</g>\n"
        << "<rect x='" << kMarginLeft << "' y='" << kMarginTop << "' width='" << plot_w
        << "' height='" << plot_h << "' fill='none' stroke='black'/>\n"
        << "<text x='" << kMarginLeft + plot_w / 2 << "' y='" << height_ - 10
        << "' text-anchor='middle' font-size='12' font-family='sans-serif'>" << x_label_
        << "</text>\n"
        << "<text x='16' y='" << kMarginTop + plot_h / 2
        << "' text-anchor='middle' font-size='12' font-family='sans-serif' transform='rotate(-90 16 "
        << kMarginTop + plot_h / 2 << ")'>" << y_label_ << "</text>\n";

    out << "<g clip-path='url(#plotclip)'>\n<defs><clipPath id='plotclip'><rect x='" << kMarginLeft
        << "' y='" << kMarginTop << "' width='" << plot_w << "' height='" << plot_h
        << "'/></clipPath></defs>\n";
    for (const auto& [poly, color] : polygons_) {
        out << "<polygon fill='" << color << "' fill-opacity='0.5' stroke='" << color << "' points='";
        for (const Vec2& p : poly) out << px(p.x) << ',' << py(p.y) << ' ';
        out << "'/>\n";
    }
    for (const Series& s : series_) {
        out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.2' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        out << "'/>\n";
    }
    out << "</g>\n";

    int legend_y = kMarginTop + 14;
    for (const Series& s : series_) {
        out << "<line x1='" << kMarginLeft + plot_w - 150 << "' y1='" << legend_y - 4 << "' x2='"
            << kMarginLeft + plot_w - 125 << "' y2='" << legend_y - 4 << "' stroke='" << s.color
            << "' stroke-width='2'/>\n"
            << "<text x='" << kMarginLeft + plot_w - 120 << "' y='" << legend_y
            << "' font-size='11' font-family='sans-serif'>" << s.name << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
}

}  // namespace avpc
