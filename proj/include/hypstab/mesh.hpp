#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypstab/geometry.hpp"

namespace hypstab {

enum class BoundarySide { Left, Right, Bottom, Top };

inline const char* to_string(BoundarySide s) {
  switch (s) {
    case BoundarySide::Left: return "left";
    case BoundarySide::Right: return "right";
    case BoundarySide::Bottom: return "bottom";
    case BoundarySide::Top: return "top";
  }
  return "?";
}

// Triangulation of the unit square. Triangles are counterclockwise vertex
// index triples; boundary_edges lists each boundary edge as a sorted vertex
// pair with the square side it lies on.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::pair<std::array<int, 2>, BoundarySide>> boundary_edges;
  int cells_per_side = 0;

  [[nodiscard]] AffineMap map_of(int elem) const {
    const auto& t = triangles[static_cast<std::size_t>(elem)];
    return AffineMap::from_triangle(vertices[static_cast<std::size_t>(t[0])],
                                    vertices[static_cast<std::size_t>(t[1])],
                                    vertices[static_cast<std::size_t>(t[2])]);
  }
};

// Deterministic perturbation of interior vertices. The generator is a plain
// 64-bit LCG, state <- 6364136223846793005*state + 1442695040888963407 mod
// 2^64, seeded with `seed` and advanced once per draw *before* using the
// state; a draw maps the top 53 bits to u in [0,1) and returns 2u-1.
// Interior vertices are visited row by row (y index outer, x index inner),
// drawing the x offset before the y offset; each offset is
// amplitude/n * draw. Boundary vertices never move, so two implementations
// following this recipe produce identical meshes.
struct Perturbation {
  double amplitude = 0.0;
  std::uint64_t seed = 1;
};

namespace detail {

class Lcg {
 public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}

  // Uniform draw in [-1, 1).
  double next_symmetric() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    const double u = static_cast<double>(state_ >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
  }

 private:
  std::uint64_t state_;
};

}  // namespace detail

// Crisscross mesh: n x n cells, each split along the diagonal from its
// upper-left to its lower-right corner. This orientation keeps the split
// edges transversal to fields whose characteristics run along y = x, which
// would otherwise trace unbroken edge paths and cap L2 convergence at
// h^{k+1/2} (Peterson-type alignment). With perturbation, interior vertices
// move by at most amplitude/n per coordinate; amplitude < 0.3 keeps all
// triangle areas positive (checked after construction regardless).
inline Mesh build_structured(int n, std::optional<Perturbation> perturb = {}) {
  if (n < 1) throw std::invalid_argument("build_structured: need n >= 1");
  if (perturb && (perturb->amplitude < 0.0 || perturb->amplitude >= 0.3))
    throw std::invalid_argument(
        "build_structured: perturbation amplitude must lie in [0, 0.3)");

  Mesh mesh;
  mesh.cells_per_side = n;
  const int nv = n + 1;
  mesh.vertices.resize(static_cast<std::size_t>(nv) * nv);
  const double h = 1.0 / n;
  for (int iy = 0; iy < nv; ++iy)
    for (int ix = 0; ix < nv; ++ix)
      mesh.vertices[static_cast<std::size_t>(iy) * nv + ix] = {ix * h, iy * h};

  if (perturb && perturb->amplitude > 0.0) {
    detail::Lcg rng(perturb->seed);
    const double scale = perturb->amplitude * h;
    for (int iy = 1; iy < n; ++iy)
      for (int ix = 1; ix < n; ++ix) {
        const double dx = scale * rng.next_symmetric();
        const double dy = scale * rng.next_symmetric();
        auto& v = mesh.vertices[static_cast<std::size_t>(iy) * nv + ix];
        v.x += dx;
        v.y += dy;
      }
  }

  mesh.triangles.reserve(static_cast<std::size_t>(2) * n * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int v00 = iy * nv + ix;
      const int v10 = v00 + 1;
      const int v01 = v00 + nv;
      const int v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v01});
      mesh.triangles.push_back({v10, v11, v01});
    }

  auto sorted = [](int a, int b) {
    return std::array<int, 2>{std::min(a, b), std::max(a, b)};
  };
  for (int i = 0; i < n; ++i) {
    mesh.boundary_edges.emplace_back(sorted(i, i + 1), BoundarySide::Bottom);
    mesh.boundary_edges.emplace_back(sorted(n * nv + i, n * nv + i + 1),
                                     BoundarySide::Top);
    mesh.boundary_edges.emplace_back(sorted(i * nv, (i + 1) * nv),
                                     BoundarySide::Left);
    mesh.boundary_edges.emplace_back(sorted(i * nv + n, (i + 1) * nv + n),
                                     BoundarySide::Right);
  }

  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    if (triangle_area(mesh.vertices[static_cast<std::size_t>(t[0])],
                      mesh.vertices[static_cast<std::size_t>(t[1])],
                      mesh.vertices[static_cast<std::size_t>(t[2])]) <= 0.0)
      throw std::runtime_error("build_structured: degenerate triangle " +
                               std::to_string(e));
  }
  return mesh;
}

// Largest element diameter (longest edge over all triangles).
inline double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (const auto& t : mesh.triangles)
    h = std::max(h, triangle_diameter(
                        mesh.vertices[static_cast<std::size_t>(t[0])],
                        mesh.vertices[static_cast<std::size_t>(t[1])],
                        mesh.vertices[static_cast<std::size_t>(t[2])]));
  return h;
}

// Interior face between elem_minus < elem_plus; the unit normal points from
// elem_minus into elem_plus. p0 -> p1 follows the edge as directed in
// elem_minus, so (p1-p0) rotated by -90 degrees gives the normal.
struct InteriorFace {
  int elem_minus = -1;
  int elem_plus = -1;
  Vec2 p0, p1;
  Vec2 normal;
  double length = 0.0;
};

// Boundary face with outward unit normal and the square side it lies on.
struct BoundaryFace {
  int elem = -1;
  Vec2 p0, p1;
  Vec2 normal;
  double length = 0.0;
  BoundarySide side = BoundarySide::Left;
};

struct FaceSet {
  std::vector<InteriorFace> interior;
  std::vector<BoundaryFace> boundary;
};

// Enumerates mesh edges and orients them. Throws if any edge is shared by
// more than two triangles or a boundary edge does not lie on the unit
// square's boundary (nonconforming input).
inline FaceSet build_faces(const Mesh& mesh) {
  struct Incidence {
    int elem;
    int a, b;  // directed edge as the element traverses it
  };
  std::map<std::array<int, 2>, std::vector<Incidence>> edges;
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)];
      const int b = t[static_cast<std::size_t>((k + 1) % 3)];
      edges[{std::min(a, b), std::max(a, b)}].push_back(
          {static_cast<int>(e), a, b});
    }
  }

  auto outward_normal = [](Vec2 pa, Vec2 pb) {
    // For a counterclockwise triangle the outward normal of directed edge
    // a->b is (b-a) rotated clockwise.
    const Vec2 d = pb - pa;
    const double len = norm(d);
    return Vec2{d.y / len, -d.x / len};
  };

  FaceSet faces;
  for (const auto& [key, inc] : edges) {
    if (inc.size() > 2)
      throw std::runtime_error("build_faces: edge shared by " +
                               std::to_string(inc.size()) + " triangles");
    if (inc.size() == 2) {
      const Incidence& lo = inc[0].elem < inc[1].elem ? inc[0] : inc[1];
      const Incidence& hi = inc[0].elem < inc[1].elem ? inc[1] : inc[0];
      if (lo.elem == hi.elem)
        throw std::runtime_error("build_faces: degenerate element adjacency");
      InteriorFace f;
      f.elem_minus = lo.elem;
      f.elem_plus = hi.elem;
      f.p0 = mesh.vertices[static_cast<std::size_t>(lo.a)];
      f.p1 = mesh.vertices[static_cast<std::size_t>(lo.b)];
      f.length = norm(f.p1 - f.p0);
      f.normal = outward_normal(f.p0, f.p1);
      faces.interior.push_back(f);
    } else {
      const Incidence& only = inc[0];
      BoundaryFace f;
      f.elem = only.elem;
      f.p0 = mesh.vertices[static_cast<std::size_t>(only.a)];
      f.p1 = mesh.vertices[static_cast<std::size_t>(only.b)];
      f.length = norm(f.p1 - f.p0);
      f.normal = outward_normal(f.p0, f.p1);
      constexpr double tol = 1e-12;
      if (std::abs(f.p0.x) < tol && std::abs(f.p1.x) < tol)
        f.side = BoundarySide::Left;
      else if (std::abs(f.p0.x - 1.0) < tol && std::abs(f.p1.x - 1.0) < tol)
        f.side = BoundarySide::Right;
      else if (std::abs(f.p0.y) < tol && std::abs(f.p1.y) < tol)
        f.side = BoundarySide::Bottom;
      else if (std::abs(f.p0.y - 1.0) < tol && std::abs(f.p1.y - 1.0) < tol)
        f.side = BoundarySide::Top;
      else
        throw std::runtime_error(
            "build_faces: boundary edge off the unit-square boundary");
      faces.boundary.push_back(f);
    }
  }
  return faces;
}

}  // namespace hypstab
