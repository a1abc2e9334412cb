#pragma once

#include <cmath>

namespace torsmink {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    // z-component of the cross product; > 0 when o is CCW from *this
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }
    // rotate by +90 degrees (CCW)
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// A direction on the unit circle. Construction normalizes; near-zero input throws.
struct UnitVector {
    double x = 1.0;
    double y = 0.0;

    UnitVector() = default;
    UnitVector(double x_, double y_);
    static UnitVector from_angle(double theta) {
        UnitVector u;
        u.x = std::cos(theta);
        u.y = std::sin(theta);
        return u;
    }

    Vec2 vec() const { return {x, y}; }
    double dot(Vec2 v) const { return x * v.x + y * v.y; }
    double dot(UnitVector v) const { return x * v.x + y * v.y; }
    double angle() const { return std::atan2(y, x); }
};

// Smallest angle between two directions, in [0, pi].
double angular_distance(UnitVector a, UnitVector b);

} // namespace torsmink
