#pragma once

// Quaternion and vector primitives.
//
// Quaternions are stored (x, y, z, w); the animation string lists them in
// that order as (q0, q1, q2, q3). Composition is the Hamilton product and
// `a * b` applies b first, then a.

#include <algorithm>
#include <cmath>

namespace rigmotion {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr bool operator==(const Vec3&) const = default;

  double length() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 lerp(const Vec3& a, const Vec3& b, double alpha) {
  return {a.x + (b.x - a.x) * alpha, a.y + (b.y - a.y) * alpha, a.z + (b.z - a.z) * alpha};
}

struct Quaternion {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;

  static constexpr Quaternion identity() { return {0.0, 0.0, 0.0, 1.0}; }

  // Rotation of `angle` radians about `axis` (need not be unit length).
  static Quaternion from_axis_angle(const Vec3& axis, double angle) {
    const double len = axis.length();
    if (len == 0.0) return identity();
    const double s = std::sin(angle * 0.5) / len;
    return {axis.x * s, axis.y * s, axis.z * s, std::cos(angle * 0.5)};
  }

  constexpr Quaternion operator-() const { return {-x, -y, -z, -w}; }
  constexpr bool operator==(const Quaternion&) const = default;

  constexpr Quaternion operator*(const Quaternion& o) const {
    return {w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w,
            w * o.w - x * o.x - y * o.y - z * o.z};
  }

  constexpr Quaternion conjugate() const { return {-x, -y, -z, w}; }
  constexpr double norm_squared() const { return x * x + y * y + z * z + w * w; }
  double norm() const { return std::sqrt(norm_squared()); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(w);
  }
};

constexpr double dot(const Quaternion& a, const Quaternion& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z + a.w * b.w;
}

// Unit-length copy. Inputs already unit to within a few ulps are returned
// unchanged so that renormalization is idempotent bit for bit.
inline Quaternion normalized(const Quaternion& q) {
  const double n2 = q.norm_squared();
  if (std::abs(n2 - 1.0) <= 1e-14) return q;
  const double inv = 1.0 / std::sqrt(n2);
  return {q.x * inv, q.y * inv, q.z * inv, q.w * inv};
}

inline Vec3 rotate(const Quaternion& q, const Vec3& v) {
  // v' = v + 2w(u x v) + 2 u x (u x v)
  const Vec3 u{q.x, q.y, q.z};
  const Vec3 t = cross(u, v) * 2.0;
  return v + t * q.w + cross(u, t);
}

// Angle in radians of the rotation taking a to b, in [0, pi]. Treats q and -q
// as the same rotation.
inline double geodesic_angle(const Quaternion& a, const Quaternion& b) {
  const Quaternion rel = normalized(a).conjugate() * normalized(b);
  const double v = std::sqrt(rel.x * rel.x + rel.y * rel.y + rel.z * rel.z);
  return 2.0 * std::atan2(v, std::abs(rel.w));
}

// Shortest-path spherical interpolation. Falls back to normalized lerp when
// the endpoints are nearly parallel.
inline Quaternion slerp(const Quaternion& a, Quaternion b, double alpha) {
  double cos_theta = dot(a, b);
  if (cos_theta < 0.0) {
    b = -b;
    cos_theta = -cos_theta;
  }
  if (cos_theta > 1.0 - 1e-8) {
    const Quaternion mix{a.x + (b.x - a.x) * alpha, a.y + (b.y - a.y) * alpha,
                         a.z + (b.z - a.z) * alpha, a.w + (b.w - a.w) * alpha};
    return normalized(mix);
  }
  const double theta = std::acos(std::min(cos_theta, 1.0));
  const double sin_theta = std::sin(theta);
  const double s0 = std::sin((1.0 - alpha) * theta) / sin_theta;
  const double s1 = std::sin(alpha * theta) / sin_theta;
  return {s0 * a.x + s1 * b.x, s0 * a.y + s1 * b.y, s0 * a.z + s1 * b.z, s0 * a.w + s1 * b.w};
}

}  // namespace rigmotion
