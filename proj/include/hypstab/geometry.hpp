#pragma once

#include <array>
#include <cmath>

namespace hypstab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return s * a; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

// Affine map x = origin + J * ref from the reference triangle
// {(0,0),(1,0),(0,1)} onto a physical triangle. det_j equals twice the
// signed area and is positive for counterclockwise vertex order.
struct AffineMap {
  Vec2 origin;
  double j00, j01, j10, j11;
  double det_j;

  static AffineMap from_triangle(Vec2 a, Vec2 b, Vec2 c) {
    AffineMap m;
    m.origin = a;
    m.j00 = b.x - a.x;
    m.j01 = c.x - a.x;
    m.j10 = b.y - a.y;
    m.j11 = c.y - a.y;
    m.det_j = m.j00 * m.j11 - m.j01 * m.j10;
    return m;
  }

  [[nodiscard]] Vec2 to_physical(Vec2 ref) const {
    return {origin.x + j00 * ref.x + j01 * ref.y,
            origin.y + j10 * ref.x + j11 * ref.y};
  }

  [[nodiscard]] Vec2 to_reference(Vec2 phys) const {
    const Vec2 d = phys - origin;
    return {(j11 * d.x - j01 * d.y) / det_j, (-j10 * d.x + j00 * d.y) / det_j};
  }

  // Maps a gradient on the reference triangle to the physical one: J^{-T} g.
  [[nodiscard]] Vec2 grad_to_physical(Vec2 ref_grad) const {
    return {(j11 * ref_grad.x - j10 * ref_grad.y) / det_j,
            (-j01 * ref_grad.x + j00 * ref_grad.y) / det_j};
  }
};

inline double triangle_area(Vec2 a, Vec2 b, Vec2 c) {
  return 0.5 * cross(b - a, c - a);
}

inline double triangle_diameter(Vec2 a, Vec2 b, Vec2 c) {
  return std::max({norm(b - a), norm(c - b), norm(a - c)});
}

}  // namespace hypstab
