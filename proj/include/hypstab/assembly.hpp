#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hypstab/cases.hpp"
#include "hypstab/fields.hpp"
#include "hypstab/linalg.hpp"
#include "hypstab/quadrature.hpp"
#include "hypstab/space.hpp"

namespace hypstab {

enum class Method { GLS, CIP, DG };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::GLS: return "gls";
    case Method::CIP: return "cip";
    case Method::DG: return "dg";
  }
  return "?";
}

// Which residual operator a least-squares term uses: the transport operator
// itself or its formal adjoint (for the dual variable's stabilizer).
enum class GlsVariant { Primal, Adjoint };

enum class PenaltySide { Inflow, Outflow, Whole };

enum class RhsTarget { PrimalEq, DualEq };

struct AssemblyOptions {
  int element_exactness = 4;
  int face_exactness = 4;
  double speed_floor = kSpeedFloor;

  static AssemblyOptions defaults(int degree) {
    AssemblyOptions o;
    o.element_exactness = 2 * degree + 2;
    o.face_exactness = 2 * degree + 2;
    return o;
  }
};

namespace detail {

inline void require_same_mesh(const FiniteElementSpace& a,
                              const FiniteElementSpace& b,
                              const char* where) {
  if (a.mesh != b.mesh)
    throw std::invalid_argument(std::string(where) +
                                ": trial and test spaces live on different meshes");
}

inline void require_continuous(const FiniteElementSpace& s, const char* what) {
  if (s.continuity != Continuity::Continuous)
    throw std::invalid_argument(std::string(what) +
                                " requires a continuous space");
}

inline void require_discontinuous(const FiniteElementSpace& s,
                                  const char* what) {
  if (s.continuity != Continuity::Discontinuous)
    throw std::invalid_argument(std::string(what) +
                                " requires a discontinuous space");
}

// Basis data of one element's trace on a straight face at one quad point.
struct Trace {
  const std::array<int, 6>* dofs = nullptr;
  BasisValues basis;
  std::array<Vec2, 6> phys_grad{};
  int count = 0;
};

inline Trace trace_at(const FiniteElementSpace& space, int elem, Vec2 x,
                      bool with_grad) {
  Trace t;
  const AffineMap map = space.mesh->map_of(elem);
  t.basis = eval_basis(space.degree, map.to_reference(x));
  t.count = t.basis.count;
  t.dofs = &space.element_dofs[static_cast<std::size_t>(elem)];
  if (with_grad)
    for (int k = 0; k < t.count; ++k)
      t.phys_grad[static_cast<std::size_t>(k)] =
          map.grad_to_physical(t.basis.grad[static_cast<std::size_t>(k)]);
  return t;
}

inline double boundary_weight(Vec2 beta_val, Vec2 normal, PenaltySide side) {
  const double bn = dot(beta_val, normal);
  switch (side) {
    case PenaltySide::Inflow: return std::max(-bn, 0.0);
    case PenaltySide::Outflow: return std::max(bn, 0.0);
    case PenaltySide::Whole: return std::abs(bn);
  }
  return 0.0;
}

}  // namespace detail

// Discrete transport form: the volume part (beta.grad(u) + sigma*u, v) per
// element plus, for discontinuous trial functions, the centred interelement
// flux -sum_F (beta.n_F, [u]{v})_F with the jump taken from the minus to the
// plus element. Continuous trial spaces have no jumps, so the face loop is
// skipped. Boundary conditions do not appear here; they are enforced by the
// penalty operators below.
inline AssembledOperator assemble_advection(
    const FiniteElementSpace& trial, const FiniteElementSpace& test,
    const VectorField& beta, const ScalarField& sigma, const FaceSet& faces,
    const AssemblyOptions& opts) {
  detail::require_same_mesh(trial, test, "assemble_advection");
  if (!beta.value || !sigma)
    throw std::invalid_argument("assemble_advection: missing coefficient");

  const Mesh& mesh = *trial.mesh;
  const TriangleQuadrature rule =
      triangle_quadrature(opts.element_exactness);
  std::vector<BasisValues> trial_b, test_b;
  trial_b.reserve(rule.points.size());
  test_b.reserve(rule.points.size());
  for (const Vec2 p : rule.points) {
    trial_b.push_back(eval_basis(trial.degree, p));
    test_b.push_back(eval_basis(test.degree, p));
  }

  std::vector<Triplet> tris;
  const int num_elems = static_cast<int>(mesh.triangles.size());
  for (int e = 0; e < num_elems; ++e) {
    const AffineMap map = mesh.map_of(e);
    const auto& cdofs = trial.element_dofs[static_cast<std::size_t>(e)];
    const auto& rdofs = test.element_dofs[static_cast<std::size_t>(e)];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = map.to_physical(rule.points[q]);
      const double w = rule.weights[q] * map.det_j;
      const Vec2 b = beta.value(x);
      const double s = sigma(x);
      const BasisValues& tb = trial_b[q];
      const BasisValues& vb = test_b[q];
      for (int j = 0; j < tb.count; ++j) {
        const Vec2 gj =
            map.grad_to_physical(tb.grad[static_cast<std::size_t>(j)]);
        const double lu = dot(b, gj) + s * tb.value[static_cast<std::size_t>(j)];
        for (int i = 0; i < vb.count; ++i)
          tris.emplace_back(rdofs[static_cast<std::size_t>(i)],
                            cdofs[static_cast<std::size_t>(j)],
                            w * lu * vb.value[static_cast<std::size_t>(i)]);
      }
    }
  }

  if (trial.continuity == Continuity::Discontinuous) {
    const SegmentQuadrature srule = segment_quadrature(opts.face_exactness);
    for (const InteriorFace& f : faces.interior) {
      for (std::size_t q = 0; q < srule.points.size(); ++q) {
        const Vec2 x = f.p0 + srule.points[q] * (f.p1 - f.p0);
        const double w = srule.weights[q] * f.length;
        const double bn = dot(beta.value(x), f.normal);
        const detail::Trace tm[2] = {
            detail::trace_at(trial, f.elem_minus, x, false),
            detail::trace_at(trial, f.elem_plus, x, false)};
        const detail::Trace vm[2] = {
            detail::trace_at(test, f.elem_minus, x, false),
            detail::trace_at(test, f.elem_plus, x, false)};
        for (int sj = 0; sj < 2; ++sj) {
          const double sign_j = sj == 0 ? 1.0 : -1.0;
          for (int j = 0; j < tm[sj].count; ++j) {
            const double uj =
                sign_j * tm[sj].basis.value[static_cast<std::size_t>(j)];
            for (int si = 0; si < 2; ++si)
              for (int i = 0; i < vm[si].count; ++i)
                tris.emplace_back(
                    (*vm[si].dofs)[static_cast<std::size_t>(i)],
                    (*tm[sj].dofs)[static_cast<std::size_t>(j)],
                    -w * bn * uj * 0.5 *
                        vm[si].basis.value[static_cast<std::size_t>(i)]);
          }
        }
      }
    }
  }

  return AssembledOperator(test.num_dofs, trial.num_dofs, tris);
}

// Least-squares residual stabilizer gamma*(h/|beta| Ru, Rw) with the global
// mesh size h, the speed clamped away from zero, and R either the transport
// operator or its formal adjoint -beta.grad + (sigma - div beta). Symmetric
// positive semidefinite for gamma > 0; defined for continuous spaces only.
inline AssembledOperator assemble_gls(const FiniteElementSpace& space,
                                      const VectorField& beta,
                                      const ScalarField& sigma, double gamma,
                                      GlsVariant variant,
                                      const AssemblyOptions& opts) {
  detail::require_continuous(space, "assemble_gls: least-squares stabilization");
  if (variant == GlsVariant::Adjoint && !beta.divergence)
    throw std::invalid_argument(
        "assemble_gls: adjoint variant needs the velocity divergence");

  const Mesh& mesh = *space.mesh;
  const double h = mesh_size(mesh);
  const TriangleQuadrature rule =
      triangle_quadrature(opts.element_exactness);
  std::vector<BasisValues> basis;
  for (const Vec2 p : rule.points) basis.push_back(eval_basis(space.degree, p));

  std::vector<Triplet> tris;
  std::array<double, 6> res{};
  for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e) {
    const AffineMap map = mesh.map_of(e);
    const auto& dofs = space.element_dofs[static_cast<std::size_t>(e)];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = map.to_physical(rule.points[q]);
      const double speed = clamped_speed(beta, x, opts.speed_floor);
      const double w = rule.weights[q] * map.det_j * gamma * h / speed;
      const Vec2 b = beta.value(x);
      const double zeroth = variant == GlsVariant::Primal
                                ? sigma(x)
                                : sigma(x) - beta.divergence(x);
      const double bsign = variant == GlsVariant::Primal ? 1.0 : -1.0;
      const BasisValues& bv = basis[q];
      for (int k = 0; k < bv.count; ++k) {
        const Vec2 g =
            map.grad_to_physical(bv.grad[static_cast<std::size_t>(k)]);
        res[static_cast<std::size_t>(k)] =
            bsign * dot(b, g) + zeroth * bv.value[static_cast<std::size_t>(k)];
      }
      for (int j = 0; j < bv.count; ++j)
        for (int i = 0; i < bv.count; ++i)
          tris.emplace_back(dofs[static_cast<std::size_t>(i)],
                            dofs[static_cast<std::size_t>(j)],
                            w * res[static_cast<std::size_t>(j)] *
                                res[static_cast<std::size_t>(i)]);
    }
  }
  return AssembledOperator(space.num_dofs, space.num_dofs, tris);
}

// Gradient-jump stabilizer: per interior face
//   gamma * h_F^2 * max_F |beta_h . n_F| * ([grad u], [grad w])_F
// where beta_h is the piecewise-affine vertex interpolant of the velocity.
// On a face that interpolant is the segment-affine function through the
// endpoint velocities (the same from both sides), so its maximum over the
// face is scanned at the endpoints plus the quad points. Continuous spaces
// only; the gradient jump of a continuous function is what it penalizes.
inline AssembledOperator assemble_cip(const FiniteElementSpace& space,
                                      const VectorField& beta, double gamma,
                                      const FaceSet& faces,
                                      const AssemblyOptions& opts) {
  detail::require_continuous(space, "assemble_cip: gradient-jump stabilization");
  if (!beta.value)
    throw std::invalid_argument("assemble_cip: missing velocity");

  const SegmentQuadrature srule = segment_quadrature(opts.face_exactness);
  std::vector<Triplet> tris;
  for (const InteriorFace& f : faces.interior) {
    const double bn0 = dot(beta.value(f.p0), f.normal);
    const double bn1 = dot(beta.value(f.p1), f.normal);
    double bn_max = std::max(std::abs(bn0), std::abs(bn1));
    for (const double t : srule.points)
      bn_max = std::max(bn_max, std::abs((1.0 - t) * bn0 + t * bn1));
    const double coef = gamma * f.length * f.length * bn_max;

    for (std::size_t q = 0; q < srule.points.size(); ++q) {
      const Vec2 x = f.p0 + srule.points[q] * (f.p1 - f.p0);
      const double w = srule.weights[q] * f.length * coef;
      const detail::Trace tr[2] = {
          detail::trace_at(space, f.elem_minus, x, true),
          detail::trace_at(space, f.elem_plus, x, true)};
      for (int sj = 0; sj < 2; ++sj) {
        const double sign_j = sj == 0 ? 1.0 : -1.0;
        for (int j = 0; j < tr[sj].count; ++j) {
          const Vec2 gj = sign_j * tr[sj].phys_grad[static_cast<std::size_t>(j)];
          for (int si = 0; si < 2; ++si) {
            const double sign_i = si == 0 ? 1.0 : -1.0;
            for (int i = 0; i < tr[si].count; ++i)
              tris.emplace_back(
                  (*tr[si].dofs)[static_cast<std::size_t>(i)],
                  (*tr[sj].dofs)[static_cast<std::size_t>(j)],
                  w * dot(gj, sign_i * tr[si].phys_grad[
                                  static_cast<std::size_t>(i)]));
          }
        }
      }
    }
  }
  return AssembledOperator(space.num_dofs, space.num_dofs, tris);
}

// Solution-jump stabilizer gamma * (|beta.n_F| [u], [w])_F over interior
// faces; gamma = 1/2 reproduces the classical upwind flux when added to the
// centred transport form. Discontinuous spaces only.
inline AssembledOperator assemble_dg_jump(const FiniteElementSpace& space,
                                          const VectorField& beta,
                                          double gamma, const FaceSet& faces,
                                          const AssemblyOptions& opts) {
  detail::require_discontinuous(space, "assemble_dg_jump: solution-jump stabilization");
  if (!beta.value)
    throw std::invalid_argument("assemble_dg_jump: missing velocity");

  const SegmentQuadrature srule = segment_quadrature(opts.face_exactness);
  std::vector<Triplet> tris;
  for (const InteriorFace& f : faces.interior) {
    for (std::size_t q = 0; q < srule.points.size(); ++q) {
      const Vec2 x = f.p0 + srule.points[q] * (f.p1 - f.p0);
      const double w =
          srule.weights[q] * f.length * gamma * std::abs(dot(beta.value(x), f.normal));
      const detail::Trace tr[2] = {
          detail::trace_at(space, f.elem_minus, x, false),
          detail::trace_at(space, f.elem_plus, x, false)};
      for (int sj = 0; sj < 2; ++sj) {
        const double sign_j = sj == 0 ? 1.0 : -1.0;
        for (int j = 0; j < tr[sj].count; ++j)
          for (int si = 0; si < 2; ++si) {
            const double sign_i = si == 0 ? 1.0 : -1.0;
            for (int i = 0; i < tr[si].count; ++i)
              tris.emplace_back(
                  (*tr[si].dofs)[static_cast<std::size_t>(i)],
                  (*tr[sj].dofs)[static_cast<std::size_t>(j)],
                  w * sign_j * tr[sj].basis.value[static_cast<std::size_t>(j)] *
                      sign_i * tr[si].basis.value[static_cast<std::size_t>(i)]);
          }
      }
    }
  }
  return AssembledOperator(space.num_dofs, space.num_dofs, tris);
}

// Weak boundary operator gamma_bc * (w_side(x) u, v)_{dOmega} with
// w_inflow = (beta.n)_-'s magnitude, w_outflow = (beta.n)_+, and their sum
// for the whole boundary. The sign of beta.n is evaluated pointwise, so
// faces where the flow direction changes along the boundary are weighted
// correctly.
inline AssembledOperator assemble_boundary_penalty(
    const FiniteElementSpace& space, const VectorField& beta, double gamma_bc,
    PenaltySide side, const FaceSet& faces, const AssemblyOptions& opts) {
  if (!beta.value)
    throw std::invalid_argument("assemble_boundary_penalty: missing velocity");

  const SegmentQuadrature srule = segment_quadrature(opts.face_exactness);
  std::vector<Triplet> tris;
  for (const BoundaryFace& f : faces.boundary) {
    for (std::size_t q = 0; q < srule.points.size(); ++q) {
      const Vec2 x = f.p0 + srule.points[q] * (f.p1 - f.p0);
      const double w = srule.weights[q] * f.length * gamma_bc *
                       detail::boundary_weight(beta.value(x), f.normal, side);
      if (w == 0.0) continue;
      const detail::Trace tr = detail::trace_at(space, f.elem, x, false);
      for (int j = 0; j < tr.count; ++j)
        for (int i = 0; i < tr.count; ++i)
          tris.emplace_back((*tr.dofs)[static_cast<std::size_t>(i)],
                            (*tr.dofs)[static_cast<std::size_t>(j)],
                            w * tr.basis.value[static_cast<std::size_t>(j)] *
                                tr.basis.value[static_cast<std::size_t>(i)]);
    }
  }
  return AssembledOperator(space.num_dofs, space.num_dofs, tris);
}

// Right-hand sides. The primal equation carries only the load (f, w). The
// dual equation carries minus the data representation of the primal
// stabilizer applied to the exact solution: the least-squares data term
// (f, gamma*h/|beta| * R w) when the method is GLS (jump stabilizers have no
// interior data term for a solution without interelement jumps) plus the
// boundary term gamma_bc*(w_side g, w). The single-equation stabilized
// system uses rhs(PrimalEq) - rhs(DualEq).
inline Eigen::VectorXd assemble_rhs(const FiniteElementSpace& space,
                                    const ProblemCase& pc, Method method,
                                    double gamma_method, double gamma_bc,
                                    DataSide data_side, RhsTarget target,
                                    const FaceSet& faces,
                                    const AssemblyOptions& opts) {
  if (!pc.source)
    throw std::invalid_argument("assemble_rhs: case has no source term");

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_dofs);
  const Mesh& mesh = *space.mesh;

  if (target == RhsTarget::PrimalEq) {
    const TriangleQuadrature rule =
        triangle_quadrature(opts.element_exactness);
    std::vector<BasisValues> basis;
    for (const Vec2 p : rule.points)
      basis.push_back(eval_basis(space.degree, p));
    for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e) {
      const AffineMap map = mesh.map_of(e);
      const auto& dofs = space.element_dofs[static_cast<std::size_t>(e)];
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2 x = map.to_physical(rule.points[q]);
        const double w = rule.weights[q] * map.det_j * pc.source(x);
        const BasisValues& bv = basis[q];
        for (int i = 0; i < bv.count; ++i)
          rhs[dofs[static_cast<std::size_t>(i)]] +=
              w * bv.value[static_cast<std::size_t>(i)];
      }
    }
    return rhs;
  }

  // DualEq: minus the stabilizer's data terms.
  if (method == Method::GLS) {
    detail::require_continuous(space, "assemble_rhs: least-squares stabilization");
    const double h = mesh_size(mesh);
    const TriangleQuadrature rule =
        triangle_quadrature(opts.element_exactness);
    std::vector<BasisValues> basis;
    for (const Vec2 p : rule.points)
      basis.push_back(eval_basis(space.degree, p));
    for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e) {
      const AffineMap map = mesh.map_of(e);
      const auto& dofs = space.element_dofs[static_cast<std::size_t>(e)];
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2 x = map.to_physical(rule.points[q]);
        const double speed = clamped_speed(pc.velocity, x, opts.speed_floor);
        const double w = rule.weights[q] * map.det_j * gamma_method * h /
                         speed * pc.source(x);
        const Vec2 b = pc.velocity.value(x);
        const double s = pc.sigma(x);
        const BasisValues& bv = basis[q];
        for (int i = 0; i < bv.count; ++i) {
          const Vec2 g =
              map.grad_to_physical(bv.grad[static_cast<std::size_t>(i)]);
          rhs[dofs[static_cast<std::size_t>(i)]] -=
              w * (dot(b, g) + s * bv.value[static_cast<std::size_t>(i)]);
        }
      }
    }
  }

  if (!pc.boundary_data)
    throw std::invalid_argument(
        "assemble_rhs: boundary penalty is active but the case has no "
        "boundary data");
  const PenaltySide pside = data_side == DataSide::Inflow
                                ? PenaltySide::Inflow
                                : PenaltySide::Outflow;
  const SegmentQuadrature srule = segment_quadrature(opts.face_exactness);
  for (const BoundaryFace& f : faces.boundary) {
    for (std::size_t q = 0; q < srule.points.size(); ++q) {
      const Vec2 x = f.p0 + srule.points[q] * (f.p1 - f.p0);
      const double w =
          srule.weights[q] * f.length * gamma_bc *
          detail::boundary_weight(pc.velocity.value(x), f.normal, pside) *
          pc.boundary_data(x);
      if (w == 0.0) continue;
      const detail::Trace tr = detail::trace_at(space, f.elem, x, false);
      for (int i = 0; i < tr.count; ++i)
        rhs[(*tr.dofs)[static_cast<std::size_t>(i)]] -=
            w * tr.basis.value[static_cast<std::size_t>(i)];
    }
  }
  return rhs;
}

}  // namespace hypstab
