#pragma once

#include <string>
#include <vector>

#include "avpc/geometry.hpp"

namespace avpc {

/// Minimal SVG line-chart writer for the report plots. Series are decimated
/// to keep files small; axes auto-scale with a small padding.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label, int width = 960,
            int height = 420);

    void add_series(const std::string& name, const std::vector<double>& x,
                    const std::vector<double>& y, const std::string& color);

    /// Closed outline drawn in the data coordinate system (e.g. obstacles).
    void add_polygon(const std::vector<Vec2>& vertices, const std::string& color);

    /// Forces identical x/y scales (trajectory overlays).
    void set_equal_aspect(bool equal) { equal_aspect_ = equal; }

    void write(const std::string& filename) const;

private:
    struct Series {
        std::string name;
        std::vector<double> x;
        std::vector<double> y;
        std::string color;
    };

    std::string title_;
    std::string x_label_;
    std::string y_label_;
    int width_;
    int height_;
    bool equal_aspect_ = false;
    std::vector<Series> series_;
    std::vector<std::pair<std::vector<Vec2>, std::string>> polygons_;
};

}  // namespace avpc
