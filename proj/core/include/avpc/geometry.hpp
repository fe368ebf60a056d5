#pragma once

#include <cmath>
#include <numbers>

namespace avpc {

/// 2-D vector in the ground frame, meters unless noted otherwise.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    Vec2 operator-() const { return {-x, -y}; }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }

    Vec2 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{};
    }

    /// 90 degree counter-clockwise rotation (left normal of a tangent).
    Vec2 left_normal() const { return {-y, x}; }
};

inline Vec2 operator*(double k, Vec2 v) { return v * k; }

inline constexpr double kPi = std::numbers::pi_v<double>;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a <= 0.0) a += 2.0 * kPi;
    return a - kPi;
}

}  // namespace avpc
