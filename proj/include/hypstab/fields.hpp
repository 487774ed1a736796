#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "hypstab/geometry.hpp"

namespace hypstab {

using ScalarField = std::function<double(Vec2)>;

// Velocity field with its analytic divergence; both are plain callables so
// problem definitions stay closed-form (no symbolic machinery anywhere).
struct VectorField {
  std::function<Vec2(Vec2)> value;
  ScalarField divergence;
};

constexpr double kSpeedFloor = 1e-10;

// |beta(x)| clamped away from zero so weights with 1/|beta| stay finite at
// stagnation points.
inline double clamped_speed(const VectorField& beta, Vec2 x,
                            double floor = kSpeedFloor) {
  return std::max(norm(beta.value(x)), floor);
}

}  // namespace hypstab
