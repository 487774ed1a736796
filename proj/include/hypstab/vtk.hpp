#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include "hypstab/space.hpp"

namespace hypstab {

namespace detail {

inline void vtk_header(std::ofstream& out, const Mesh& mesh,
                       const std::string& title) {
  char buf[80];
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.16e %.16e 0.0\n", v.x, v.y);
    out << buf;
  }
  out << "CELLS " << mesh.triangles.size() << " "
      << 4 * mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.triangles.size() << "\n";
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) out << "5\n";
}

inline void vtk_point_scalars(std::ofstream& out, const FiniteElementSpace& sp,
                              const Eigen::VectorXd& coeffs,
                              const std::string& name) {
  // Vertex values; discontinuous functions are averaged over the elements
  // meeting at the vertex (display only, the dof vector stays untouched).
  const Mesh& mesh = *sp.mesh;
  std::vector<double> val(mesh.vertices.size(), 0.0);
  std::vector<int> mult(mesh.vertices.size(), 0);
  constexpr Vec2 corners[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e) {
    const auto& t = mesh.triangles[static_cast<std::size_t>(e)];
    for (int k = 0; k < 3; ++k) {
      val[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])] +=
          eval_value(sp, coeffs, e, corners[k]);
      ++mult[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])];
    }
  }
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  char buf[40];
  for (std::size_t i = 0; i < val.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.16e\n", val[i] / mult[i]);
    out << buf;
  }
}

}  // namespace detail

inline void write_mesh_vtk(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_mesh_vtk: cannot open " + path);
  detail::vtk_header(out, mesh, "triangulation");
}

// Solution export: vertex-sampled primal field (and dual field when present)
// plus per-cell means, which keep discontinuous solutions honest in viewers.
inline void write_solution_vtk(const FiniteElementSpace& space,
                               const Eigen::VectorXd& u,
                               const std::optional<Eigen::VectorXd>& z,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_solution_vtk: cannot open " + path);
  const Mesh& mesh = *space.mesh;
  detail::vtk_header(out, mesh, "solution");
  out << "POINT_DATA " << mesh.vertices.size() << "\n";
  detail::vtk_point_scalars(out, space, u, "u");
  if (z && z->size() == space.num_dofs)
    detail::vtk_point_scalars(out, space, *z, "z");

  out << "CELL_DATA " << mesh.triangles.size() << "\n";
  out << "SCALARS u_cell double 1\nLOOKUP_TABLE default\n";
  char buf[40];
  constexpr Vec2 centroid{1.0 / 3.0, 1.0 / 3.0};
  for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e) {
    std::snprintf(buf, sizeof buf, "%.16e\n",
                  eval_value(space, u, e, centroid));
    out << buf;
  }
}

}  // namespace hypstab
