#pragma once

// Shared helpers for the test suite: a self-contained random generator (so
// expected values are reproducible and independent of library internals) and
// quadrature oracles that integrate discrete functions directly, bypassing
// the assembly code under test.

#include <cstdint>
#include <functional>

#include "hypstab/fields.hpp"
#include "hypstab/quadrature.hpp"
#include "hypstab/space.hpp"

namespace testutil {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  double uniform() {  // in [0, 1)
    state_ = state_ * 2862933555777941757ULL + 3037000493ULL;
    return static_cast<double>(state_ >> 11) * 0x1.0p-53;
  }

  double symmetric() { return 2.0 * uniform() - 1.0; }

 private:
  std::uint64_t state_;
};

inline hypstab::VectorField constant_velocity(double bx, double by) {
  return {[bx, by](hypstab::Vec2) { return hypstab::Vec2{bx, by}; },
          [](hypstab::Vec2) { return 0.0; }};
}

// Integral over all elements of `f(x, elem, ref)` with a degree-8 rule.
inline double integrate_mesh(
    const hypstab::FiniteElementSpace& space,
    const std::function<double(hypstab::Vec2, int, hypstab::Vec2)>& f) {
  const auto rule = hypstab::triangle_quadrature(8);
  double acc = 0.0;
  const auto& mesh = *space.mesh;
  for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e) {
    const hypstab::AffineMap map = mesh.map_of(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      acc += rule.weights[q] * map.det_j *
             f(map.to_physical(rule.points[q]), e, rule.points[q]);
  }
  return acc;
}

// Integral over the domain boundary of `f(face, x, ref)` with a 5-point
// Gauss rule per face; `ref` is the reference point in the adjacent element.
inline double integrate_boundary(
    const hypstab::FiniteElementSpace& space, const hypstab::FaceSet& faces,
    const std::function<double(const hypstab::BoundaryFace&, hypstab::Vec2,
                               hypstab::Vec2)>& f) {
  const auto rule = hypstab::segment_quadrature(9);
  double acc = 0.0;
  for (const auto& face : faces.boundary) {
    const hypstab::AffineMap map = space.mesh->map_of(face.elem);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const hypstab::Vec2 x = face.p0 + rule.points[q] * (face.p1 - face.p0);
      acc += rule.weights[q] * face.length * f(face, x, map.to_reference(x));
    }
  }
  return acc;
}

}  // namespace testutil
