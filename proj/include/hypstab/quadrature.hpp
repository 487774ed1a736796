#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hypstab/geometry.hpp"

namespace hypstab {

// Gauss-Legendre rule mapped to [0,1]; weights sum to one. Exact for
// polynomials of degree <= 2*npoints - 1. Nodes up to five points are in
// closed form, which covers every exactness requested in this library.
struct SegmentQuadrature {
  std::vector<double> points;
  std::vector<double> weights;
};

inline SegmentQuadrature segment_quadrature(int exactness) {
  if (exactness < 0 || exactness > 9)
    throw std::invalid_argument("segment_quadrature: exactness must be 0..9");
  const int m = std::max(1, (exactness + 2) / 2);

  std::vector<double> x, w;  // on [-1,1]
  switch (m) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      x = {-a, a};
      w = {1.0, 1.0};
      break;
    }
    case 3: {
      const double a = std::sqrt(3.0 / 5.0);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    case 4: {
      const double c = 2.0 / 7.0 * std::sqrt(6.0 / 5.0);
      const double a = std::sqrt(3.0 / 7.0 - c);
      const double b = std::sqrt(3.0 / 7.0 + c);
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      break;
    }
    default: {
      const double c = 2.0 * std::sqrt(10.0 / 7.0);
      const double a = std::sqrt(5.0 - c) / 3.0;
      const double b = std::sqrt(5.0 + c) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      x = {-b, -a, 0.0, a, b};
      w = {wb, wa, 128.0 / 225.0, wa, wb};
      break;
    }
  }

  SegmentQuadrature q;
  for (std::size_t i = 0; i < x.size(); ++i) {
    q.points.push_back(0.5 * (x[i] + 1.0));
    q.weights.push_back(0.5 * w[i]);
  }
  return q;
}

// Rule on the reference triangle {x,y >= 0, x+y <= 1}; weights sum to the
// triangle area 1/2 and are all positive. Built by collapsing a tensor
// Gauss-Legendre rule through the substitution (x,y) = (u, v(1-u)), whose
// Jacobian 1-u raises the u-degree of a monomial x^a y^b to a+b+1; the
// per-direction point count is chosen so every total degree <= `exactness`
// integrates exactly.
struct TriangleQuadrature {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exactness = 0;
};

inline TriangleQuadrature triangle_quadrature(int exactness) {
  if (exactness < 1 || exactness > 8)
    throw std::invalid_argument("triangle_quadrature: exactness must be 1..8");
  const int needed_1d = exactness + 1;  // u-degree after the Jacobian
  const SegmentQuadrature g = segment_quadrature(needed_1d);

  TriangleQuadrature q;
  q.exactness = exactness;
  for (std::size_t i = 0; i < g.points.size(); ++i)
    for (std::size_t j = 0; j < g.points.size(); ++j) {
      const double u = g.points[i];
      const double v = g.points[j];
      q.points.push_back({u, v * (1.0 - u)});
      q.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  return q;
}

}  // namespace hypstab
