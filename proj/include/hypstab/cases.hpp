#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypstab/fields.hpp"

namespace hypstab {

enum class DataSide { Inflow, Outflow };

// One transport problem beta.grad(u) + sigma*u = f on the unit square with
// boundary data g prescribed weakly on one side of the boundary (where the
// flow enters, or where it leaves for the reconstruction-from-outflow-data
// setting). `exact` and `exact_grad` are present for manufactured cases.
struct ProblemCase {
  std::string name;
  VectorField velocity;
  ScalarField sigma;
  ScalarField source;
  ScalarField boundary_data;
  std::optional<ScalarField> exact;
  std::optional<std::function<Vec2(Vec2)>> exact_grad;
  DataSide data_side = DataSide::Inflow;
  double speed_floor = kSpeedFloor;
};

// The three built-in velocity fields. All have strongly negative divergence
// somewhere, so sigma - div(beta)/2 is not bounded below by a positive
// constant and the associated transport operator has no coercivity to lean
// on. Field 3 depends on a sharpness parameter eps > 0.
inline VectorField velocity_field(int id, double eps = 0.0) {
  switch (id) {
    case 1:
      return {[](Vec2 p) {
                return Vec2{-std::pow(p.x + 1.0, 4) + p.y, -8.0 * (p.y - p.x)};
              },
              [](Vec2 p) { return -4.0 * std::pow(p.x + 1.0, 3) - 8.0; }};
    case 2:
      return {[](Vec2 p) {
                return Vec2{-100.0 * (p.x + p.y), -100.0 * (p.y - p.x)};
              },
              [](Vec2) { return -200.0; }};
    case 3:
      if (!(eps > 0.0))
        throw std::invalid_argument("velocity_field: field 3 needs eps > 0");
      return {[eps](Vec2 p) {
                return Vec2{10.0 * std::atan((p.y - 0.5) / eps) -
                                p.x * p.x / eps,
                            std::sin(p.x / eps) + std::sin(p.y / eps)};
              },
              [eps](Vec2 p) {
                return -2.0 * p.x / eps + std::cos(p.y / eps) / eps;
              }};
    default:
      throw std::invalid_argument("velocity_field: id must be 1, 2 or 3");
  }
}

// Builds a case from an exact solution: sigma is taken as given and the
// source is the closed form beta.grad(u) + sigma*u evaluated pointwise, so
// the case is consistent with its exact solution by construction.
inline ProblemCase manufactured_case(std::string name, VectorField beta,
                                     ScalarField sigma, ScalarField u,
                                     std::function<Vec2(Vec2)> grad_u,
                                     DataSide side = DataSide::Inflow) {
  ProblemCase c;
  c.name = std::move(name);
  c.velocity = beta;
  c.sigma = sigma;
  c.source = [beta, sigma, u, grad_u](Vec2 p) {
    return dot(beta.value(p), grad_u(p)) + sigma(p) * u(p);
  };
  c.boundary_data = u;
  c.exact = u;
  c.exact_grad = std::move(grad_u);
  c.data_side = side;
  return c;
}

// Smooth benchmark: exact solution 30x(1-x)y(1-y), which vanishes on the
// whole boundary and has unit L2 norm; sigma = div(beta) puts the equation
// in conservation form.
inline ProblemCase smooth_case(int velocity_id, double eps = 0.0) {
  const VectorField beta = velocity_field(velocity_id, eps);
  auto u = [](Vec2 p) {
    return 30.0 * p.x * (1.0 - p.x) * p.y * (1.0 - p.y);
  };
  auto grad_u = [](Vec2 p) {
    return Vec2{30.0 * (1.0 - 2.0 * p.x) * p.y * (1.0 - p.y),
                30.0 * p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y)};
  };
  ProblemCase c = manufactured_case("smooth" + std::to_string(velocity_id),
                                    beta, beta.divergence, u, grad_u);
  c.boundary_data = [](Vec2) { return 0.0; };
  return c;
}

// Pure transport of a piecewise-constant inflow profile with velocity field
// 2: no source, data 1 on the inflow portion with x > 0.8, y < 0.5. No
// closed-form solution is tracked.
inline ProblemCase discontinuous_case() {
  ProblemCase c;
  c.name = "discontinuous";
  c.velocity = velocity_field(2);
  c.sigma = c.velocity.divergence;
  c.source = [](Vec2) { return 0.0; };
  c.boundary_data = [](Vec2 p) {
    return (p.x > 0.8 && p.y < 0.5) ? 1.0 : 0.0;
  };
  c.data_side = DataSide::Inflow;
  return c;
}

// All-zero data; the exact solution is zero. Handy for smoke tests.
inline ProblemCase zero_case(int velocity_id = 1, double eps = 0.0) {
  const VectorField beta = velocity_field(velocity_id, eps);
  return manufactured_case(
      "zero", beta, beta.divergence, [](Vec2) { return 0.0; },
      [](Vec2) { return Vec2{0.0, 0.0}; });
}

struct CaseInfo {
  std::string name;
  std::string summary;
};

inline std::vector<CaseInfo> case_catalog() {
  return {
      {"smooth", "manufactured solution 30x(1-x)y(1-y) (unit L2 norm, zero "
                 "boundary trace); velocity selected by velocity=1|2|3, "
                 "velocity 3 takes epsilon"},
      {"discontinuous", "velocity 2, f=0, inflow data 1 on {x>0.8, y<0.5}; "
                        "no exact solution"},
      {"zero", "all-zero data, exact solution zero; velocity selectable"},
  };
}

}  // namespace hypstab
