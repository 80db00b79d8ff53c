#pragma once

#include <cmath>
#include <numbers>

namespace geosynth {

struct Vec2 {
    double x = 0;
    double y = 0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return { a.x + b.x, a.y + b.y }; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return { a.x - b.x, a.y - b.y }; }
    friend Vec2 operator*(double s, Vec2 v) { return { s * v.x, s * v.y }; }
    friend Vec2 operator*(Vec2 v, double s) { return { s * v.x, s * v.y }; }
    friend Vec2 operator/(Vec2 v, double s) { return { v.x / s, v.y / s }; }
    friend bool operator==(Vec2, Vec2) = default;

    double norm() const { return std::hypot(x, y); }
    Vec2 unit() const { return *this / norm(); }
    /// Rotated 90 degrees counterclockwise.
    Vec2 perp() const { return { -y, x }; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Unit vector at `deg` degrees from +x, counterclockwise.
inline Vec2 dir(double deg) { return { std::cos(deg2rad(deg)), std::sin(deg2rad(deg)) }; }

inline Vec2 rotate(Vec2 v, double deg)
{
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    return { c * v.x - s * v.y, s * v.x + c * v.y };
}

/// Unsigned angle PQR in degrees, in [0, 180].
inline double angle_deg(Vec2 p, Vec2 q, Vec2 r)
{
    const Vec2 u = p - q;
    const Vec2 v = r - q;
    return rad2deg(std::atan2(std::abs(cross(u, v)), dot(u, v)));
}

/// Direction of `v` in degrees, normalized to [0, 360).
inline double heading_deg(Vec2 v)
{
    double d = rad2deg(std::atan2(v.y, v.x));
    return d < 0 ? d + 360.0 : d;
}

} // namespace geosynth
