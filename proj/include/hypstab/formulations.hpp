#pragma once

#include <stdexcept>
#include <utility>

#include "hypstab/assembly.hpp"

namespace hypstab {

enum class Formulation { Standard, PrimalDual };

inline const char* to_string(Formulation f) {
  return f == Formulation::Standard ? "standard" : "primal_dual";
}

inline Continuity required_continuity(Method m) {
  return m == Method::DG ? Continuity::Discontinuous : Continuity::Continuous;
}

// Stabilization weights that reproduce the reference experiments: the
// gradient-jump weight shrinks by 10 for quadratic elements, the
// solution-jump weight 1/2 is the upwind value, and the boundary weight is
// 1 for the single-equation method and 1/2 for the two-field method.
inline double default_gamma(Method m, int degree) {
  switch (m) {
    case Method::CIP: return degree == 2 ? 0.001 : 0.01;
    case Method::DG: return 0.5;
    case Method::GLS: return 0.01;
  }
  return 0.0;
}

inline double default_gamma_bc(Formulation f) {
  return f == Formulation::Standard ? 1.0 : 0.5;
}

struct StabilizationConfig {
  Method method = Method::CIP;
  Formulation formulation = Formulation::PrimalDual;
  double gamma_method = 0.01;
  double gamma_bc = 0.5;
  DataSide data_side = DataSide::Inflow;
  double solver_tol = 1e-12;
};

inline StabilizationConfig make_config(Method m, Formulation f, int degree) {
  StabilizationConfig c;
  c.method = m;
  c.formulation = f;
  c.gamma_method = default_gamma(m, degree);
  c.gamma_bc = default_gamma_bc(f);
  return c;
}

// Discrete solution together with the operators and right-hand sides that
// produced it, so identities of the discrete system can be checked after the
// fact. `z` and `sa` are empty for the single-equation method. rhs_dual is
// the dual equation's right-hand side, i.e. minus the data representation of
// s_p applied to the exact solution.
struct Solution {
  Formulation formulation = Formulation::Standard;
  Eigen::VectorXd u;
  Eigen::VectorXd z;
  AssembledOperator advection;
  AssembledOperator sp;
  AssembledOperator sa;
  Eigen::VectorXd rhs_primal;
  Eigen::VectorXd rhs_dual;
  double residual = 0.0;
};

namespace detail {

inline AssembledOperator method_matrix(const FiniteElementSpace& space,
                                       const ProblemCase& pc,
                                       const StabilizationConfig& cfg,
                                       GlsVariant variant, const FaceSet& faces,
                                       const AssemblyOptions& opts) {
  switch (cfg.method) {
    case Method::GLS:
      return assemble_gls(space, pc.velocity, pc.sigma, cfg.gamma_method,
                          variant, opts);
    case Method::CIP:
      return assemble_cip(space, pc.velocity, cfg.gamma_method, faces, opts);
    case Method::DG:
      return assemble_dg_jump(space, pc.velocity, cfg.gamma_method, faces,
                              opts);
  }
  throw std::logic_error("method_matrix: unreachable");
}

inline double relative_residual(const AssembledOperator& m,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd& b) {
  const double scale = b.norm() > 0.0 ? b.norm() : 1.0;
  return (m.apply(x) - b).norm() / scale;
}

}  // namespace detail

// Assembles and solves one of the two formulations:
//  - Standard:   (A + S_p) U = (f,.) + s_p data terms
//  - PrimalDual: [ A  S_a ; -S_p  A^T ] (U;Z) = ((f,.); -s_p data terms)
// S_p penalizes the boundary on the data side only; S_a always penalizes the
// whole boundary. The primal unknowns come first in the monolithic system.
inline Solution solve_case(const ProblemCase& pc,
                           const FiniteElementSpace& space,
                           const FaceSet& faces,
                           const StabilizationConfig& cfg) {
  if (space.continuity != required_continuity(cfg.method))
    throw std::invalid_argument(
        std::string("solve_case: method ") + to_string(cfg.method) +
        (cfg.method == Method::DG ? " requires a discontinuous space"
                                  : " requires a continuous space"));

  AssemblyOptions opts = AssemblyOptions::defaults(space.degree);
  opts.speed_floor = pc.speed_floor;

  Solution sol;
  sol.formulation = cfg.formulation;
  sol.advection = assemble_advection(space, space, pc.velocity, pc.sigma,
                                     faces, opts);
  const PenaltySide data_penalty = cfg.data_side == DataSide::Inflow
                                       ? PenaltySide::Inflow
                                       : PenaltySide::Outflow;
  sol.sp = add(detail::method_matrix(space, pc, cfg, GlsVariant::Primal, faces,
                                     opts),
               assemble_boundary_penalty(space, pc.velocity, cfg.gamma_bc,
                                         data_penalty, faces, opts));
  sol.rhs_primal = assemble_rhs(space, pc, cfg.method, cfg.gamma_method,
                                cfg.gamma_bc, cfg.data_side,
                                RhsTarget::PrimalEq, faces, opts);
  sol.rhs_dual = assemble_rhs(space, pc, cfg.method, cfg.gamma_method,
                              cfg.gamma_bc, cfg.data_side, RhsTarget::DualEq,
                              faces, opts);

  if (cfg.formulation == Formulation::Standard) {
    const AssembledOperator m = add(sol.advection, sol.sp);
    const Eigen::VectorXd f = sol.rhs_primal - sol.rhs_dual;
    sol.u = solve(m, f, cfg.solver_tol);
    sol.residual = detail::relative_residual(m, sol.u, f);
    return sol;
  }

  sol.sa = add(detail::method_matrix(space, pc, cfg, GlsVariant::Adjoint,
                                     faces, opts),
               assemble_boundary_penalty(space, pc.velocity, cfg.gamma_bc,
                                         PenaltySide::Whole, faces, opts));
  const AssembledOperator block =
      compose_block(sol.advection, sol.sa, sol.sp);
  const int n = space.num_dofs;
  Eigen::VectorXd rhs(2 * n);
  rhs.head(n) = sol.rhs_primal;
  rhs.tail(n) = sol.rhs_dual;
  const Eigen::VectorXd x = solve(block, rhs, cfg.solver_tol);
  sol.u = x.head(n);
  sol.z = x.tail(n);
  sol.residual = detail::relative_residual(block, x, rhs);
  return sol;
}

inline Solution solve_standard(const ProblemCase& pc,
                               const FiniteElementSpace& space,
                               const FaceSet& faces, StabilizationConfig cfg) {
  cfg.formulation = Formulation::Standard;
  return solve_case(pc, space, faces, cfg);
}

inline Solution solve_primal_dual(const ProblemCase& pc,
                                  const FiniteElementSpace& space,
                                  const FaceSet& faces,
                                  StabilizationConfig cfg) {
  cfg.formulation = Formulation::PrimalDual;
  return solve_case(pc, space, faces, cfg);
}

// Reconstruction from outflow data: the same machinery with the primal
// boundary penalty moved to the outflow portion. Works for either
// formulation, including destabilizing (negative) weights.
inline Solution solve_data_assimilation(const ProblemCase& pc,
                                        const FiniteElementSpace& space,
                                        const FaceSet& faces,
                                        StabilizationConfig cfg) {
  if (cfg.data_side != DataSide::Outflow)
    throw std::invalid_argument(
        "solve_data_assimilation: config must have data_side = outflow");
  return solve_case(pc, space, faces, cfg);
}

// Energy balance of the two-field system: testing its two equations with the
// solution itself gives |z|_{S_a}^2 + |u|_{S_p}^2 = (f, z) + s_p(u_exact, u),
// the right side evaluated through the assembled data representation.
// Returns the identity's residual relative to the right side, floored at
// one so the measure stays absolute once both sides shrink below unity.
inline double check_partial_coercivity(const Solution& sol) {
  if (sol.formulation != Formulation::PrimalDual)
    throw std::invalid_argument(
        "check_partial_coercivity: needs a two-field solution");
  const double lhs =
      sol.z.dot(sol.sa.apply(sol.z)) + sol.u.dot(sol.sp.apply(sol.u));
  const double rhs = sol.rhs_primal.dot(sol.z) - sol.rhs_dual.dot(sol.u);
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

// Orthogonality of the two-field error: with the exact solution representable
// in the space, a_h(u - u_h, w) = s_a(z_h, w) and a_h(v, z_h) = s_p(u_h - u, v)
// must hold for every basis function, up to the linear solver's residual.
// Returns the max-norm defects of the two relations.
inline std::pair<double, double> check_galerkin_orthogonality(
    const Solution& sol, const ProblemCase& pc,
    const FiniteElementSpace& space) {
  if (sol.formulation != Formulation::PrimalDual)
    throw std::invalid_argument(
        "check_galerkin_orthogonality: needs a two-field solution");
  if (!pc.exact)
    throw std::invalid_argument(
        "check_galerkin_orthogonality: case has no exact solution");

  const Eigen::VectorXd u_exact = interpolate(space, *pc.exact);
  double umax = 1.0;
  for (int i = 0; i < u_exact.size(); ++i)
    umax = std::max(umax, std::abs(u_exact[i]));
  const Vec2 probes[4] = {{0.25, 0.25}, {0.5, 0.25}, {0.25, 0.5},
                          {1.0 / 3.0, 1.0 / 3.0}};
  for (int e = 0; e < static_cast<int>(space.mesh->triangles.size()); ++e) {
    const AffineMap map = space.mesh->map_of(e);
    for (const Vec2 ref : probes) {
      const double diff = std::abs(eval_value(space, u_exact, e, ref) -
                                   (*pc.exact)(map.to_physical(ref)));
      if (diff > 1e-10 * umax)
        throw std::invalid_argument(
            "check_galerkin_orthogonality: exact solution is not "
            "representable in the space");
    }
  }

  const Eigen::VectorXd diff = u_exact - sol.u;
  const double r1 =
      (sol.advection.apply(diff) - sol.sa.apply(sol.z)).lpNorm<Eigen::Infinity>();
  const double r2 = (sol.advection.matrix().transpose() * sol.z +
                     sol.sp.apply(diff))
                        .lpNorm<Eigen::Infinity>();
  return {r1, r2};
}

}  // namespace hypstab
