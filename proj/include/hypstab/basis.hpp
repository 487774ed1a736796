#pragma once

#include <array>
#include <stdexcept>

#include "hypstab/geometry.hpp"

namespace hypstab {

// Lagrange basis values and reference gradients at one reference point.
// Local node order: the three vertices (0,0), (1,0), (0,1), then for the
// quadratic element the edge midpoints (1/2,0), (1/2,1/2), (0,1/2).
struct BasisValues {
  std::array<double, 6> value{};
  std::array<Vec2, 6> grad{};
  int count = 0;
};

inline int basis_size(int degree) {
  if (degree == 1) return 3;
  if (degree == 2) return 6;
  throw std::invalid_argument("basis_size: degree must be 1 or 2");
}

inline BasisValues eval_basis(int degree, Vec2 ref) {
  BasisValues out;
  const double l0 = 1.0 - ref.x - ref.y;
  const double l1 = ref.x;
  const double l2 = ref.y;
  constexpr Vec2 g0{-1.0, -1.0}, g1{1.0, 0.0}, g2{0.0, 1.0};

  if (degree == 1) {
    out.count = 3;
    out.value = {l0, l1, l2, 0.0, 0.0, 0.0};
    out.grad = {g0, g1, g2, Vec2{}, Vec2{}, Vec2{}};
    return out;
  }
  if (degree != 2) throw std::invalid_argument("eval_basis: degree must be 1 or 2");

  out.count = 6;
  out.value = {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0),
               l2 * (2.0 * l2 - 1.0), 4.0 * l0 * l1, 4.0 * l1 * l2,
               4.0 * l2 * l0};
  out.grad = {(4.0 * l0 - 1.0) * g0,
              (4.0 * l1 - 1.0) * g1,
              (4.0 * l2 - 1.0) * g2,
              4.0 * (l1 * g0 + l0 * g1),
              4.0 * (l2 * g1 + l1 * g2),
              4.0 * (l0 * g2 + l2 * g0)};
  return out;
}

}  // namespace hypstab
