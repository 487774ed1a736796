#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "hypstab/basis.hpp"
#include "hypstab/mesh.hpp"

namespace hypstab {

enum class Continuity { Continuous, Discontinuous };

inline std::array<Vec2, 6> reference_nodes(int degree) {
  if (degree == 1)
    return {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}, Vec2{}, Vec2{}, Vec2{}};
  if (degree == 2)
    return {Vec2{0, 0},   Vec2{1, 0},     Vec2{0, 1},
            Vec2{0.5, 0}, Vec2{0.5, 0.5}, Vec2{0, 0.5}};
  throw std::invalid_argument("reference_nodes: degree must be 1 or 2");
}

// Scalar Lagrange space of degree 1 or 2 on a triangulation, either with a
// shared node set (continuous) or with element-local copies of every node
// (discontinuous). The mesh pointer is non-owning; the caller keeps the mesh
// alive for the lifetime of the space.
struct FiniteElementSpace {
  const Mesh* mesh = nullptr;
  Continuity continuity = Continuity::Continuous;
  int degree = 1;
  int num_dofs = 0;
  std::vector<std::array<int, 6>> element_dofs;
  std::vector<Vec2> dof_coords;

  [[nodiscard]] int dofs_per_element() const { return basis_size(degree); }
};

inline FiniteElementSpace build_space(const Mesh& mesh, Continuity continuity,
                                      int degree) {
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("build_space: degree must be 1 or 2");
  if (mesh.triangles.empty())
    throw std::invalid_argument("build_space: empty mesh");

  FiniteElementSpace sp;
  sp.mesh = &mesh;
  sp.continuity = continuity;
  sp.degree = degree;
  const int per_elem = basis_size(degree);
  const int num_elems = static_cast<int>(mesh.triangles.size());
  sp.element_dofs.resize(static_cast<std::size_t>(num_elems));

  if (continuity == Continuity::Discontinuous) {
    sp.num_dofs = num_elems * per_elem;
    sp.dof_coords.resize(static_cast<std::size_t>(sp.num_dofs));
    const auto nodes = reference_nodes(degree);
    for (int e = 0; e < num_elems; ++e) {
      const AffineMap map = mesh.map_of(e);
      for (int k = 0; k < per_elem; ++k) {
        const int dof = e * per_elem + k;
        sp.element_dofs[static_cast<std::size_t>(e)][static_cast<std::size_t>(
            k)] = dof;
        sp.dof_coords[static_cast<std::size_t>(dof)] =
            map.to_physical(nodes[static_cast<std::size_t>(k)]);
      }
    }
    return sp;
  }

  const int num_verts = static_cast<int>(mesh.vertices.size());
  sp.dof_coords = mesh.vertices;
  if (degree == 1) {
    sp.num_dofs = num_verts;
    for (int e = 0; e < num_elems; ++e) {
      const auto& t = mesh.triangles[static_cast<std::size_t>(e)];
      sp.element_dofs[static_cast<std::size_t>(e)] = {t[0], t[1], t[2],
                                                      -1,   -1,   -1};
    }
    return sp;
  }

  // Quadratic: vertex nodes keep their vertex index, each geometric edge gets
  // one midpoint node numbered after the vertices in sorted-pair order.
  std::map<std::array<int, 2>, int> edge_ids;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[static_cast<std::size_t>(k)];
      const int b = t[static_cast<std::size_t>((k + 1) % 3)];
      edge_ids.try_emplace({std::min(a, b), std::max(a, b)}, 0);
    }
  int next = num_verts;
  for (auto& [key, id] : edge_ids) {
    id = next++;
    sp.dof_coords.push_back(0.5 *
                            (mesh.vertices[static_cast<std::size_t>(key[0])] +
                             mesh.vertices[static_cast<std::size_t>(key[1])]));
  }
  sp.num_dofs = next;
  for (int e = 0; e < num_elems; ++e) {
    const auto& t = mesh.triangles[static_cast<std::size_t>(e)];
    auto edge = [&](int a, int b) {
      return edge_ids.at({std::min(a, b), std::max(a, b)});
    };
    sp.element_dofs[static_cast<std::size_t>(e)] = {
        t[0], t[1], t[2], edge(t[0], t[1]), edge(t[1], t[2]), edge(t[2], t[0])};
  }
  return sp;
}

// Nodal interpolant: coefficient i is f at the i-th node.
inline Eigen::VectorXd interpolate(const FiniteElementSpace& space,
                                   const std::function<double(Vec2)>& f) {
  if (!f) throw std::invalid_argument("interpolate: empty function");
  Eigen::VectorXd out(space.num_dofs);
  for (int i = 0; i < space.num_dofs; ++i)
    out[i] = f(space.dof_coords[static_cast<std::size_t>(i)]);
  return out;
}

// Value of a discrete function on one element at a reference point.
inline double eval_value(const FiniteElementSpace& space,
                         const Eigen::VectorXd& coeffs, int elem, Vec2 ref) {
  const BasisValues b = eval_basis(space.degree, ref);
  const auto& dofs = space.element_dofs[static_cast<std::size_t>(elem)];
  double v = 0.0;
  for (int k = 0; k < b.count; ++k)
    v += coeffs[dofs[static_cast<std::size_t>(k)]] *
         b.value[static_cast<std::size_t>(k)];
  return v;
}

// Physical gradient of a discrete function on one element.
inline Vec2 eval_gradient(const FiniteElementSpace& space,
                          const Eigen::VectorXd& coeffs, int elem, Vec2 ref) {
  const BasisValues b = eval_basis(space.degree, ref);
  const AffineMap map = space.mesh->map_of(elem);
  const auto& dofs = space.element_dofs[static_cast<std::size_t>(elem)];
  Vec2 g{};
  for (int k = 0; k < b.count; ++k) {
    const Vec2 pg = map.grad_to_physical(b.grad[static_cast<std::size_t>(k)]);
    g = g + coeffs[dofs[static_cast<std::size_t>(k)]] * pg;
  }
  return g;
}

}  // namespace hypstab
