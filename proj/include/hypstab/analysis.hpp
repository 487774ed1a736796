#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hypstab/formulations.hpp"

namespace hypstab {

namespace detail {

// Sum of w * integrand over all elements with a rule of the given exactness;
// the callback receives the physical point, element index and reference point.
template <typename F>
double integrate_elements(const FiniteElementSpace& space, int exactness,
                          F&& integrand) {
  const TriangleQuadrature rule = triangle_quadrature(exactness);
  const Mesh& mesh = *space.mesh;
  double acc = 0.0;
  for (int e = 0; e < static_cast<int>(mesh.triangles.size()); ++e) {
    const AffineMap map = mesh.map_of(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 ref = rule.points[q];
      acc += rule.weights[q] * map.det_j * integrand(map.to_physical(ref), e, ref);
    }
  }
  return acc;
}

inline int error_exactness(int degree) { return 2 * degree + 4; }

}  // namespace detail

// L2 norm of u_exact - u_h, by element quadrature two degrees above the
// assembly rule.
inline double l2_error(const FiniteElementSpace& space,
                       const Eigen::VectorXd& u, const ProblemCase& pc) {
  if (!pc.exact)
    throw std::invalid_argument("l2_error: case has no exact solution");
  const ScalarField& exact = *pc.exact;
  const double val = detail::integrate_elements(
      space, detail::error_exactness(space.degree),
      [&](Vec2 x, int e, Vec2 ref) {
        const double d = exact(x) - eval_value(space, u, e, ref);
        return d * d;
      });
  return std::sqrt(std::max(val, 0.0));
}

// Streamline-derivative error || sqrt(h/|beta|) beta.grad(u_exact - u_h) ||
// with the global mesh size h and the clamped speed.
inline double sd_error(const FiniteElementSpace& space,
                       const Eigen::VectorXd& u, const ProblemCase& pc) {
  if (!pc.exact_grad)
    throw std::invalid_argument("sd_error: case has no exact gradient");
  const auto& exact_grad = *pc.exact_grad;
  const double h = mesh_size(*space.mesh);
  const double val = detail::integrate_elements(
      space, detail::error_exactness(space.degree),
      [&](Vec2 x, int e, Vec2 ref) {
        const Vec2 diff = exact_grad(x) - eval_gradient(space, u, e, ref);
        const double deriv = dot(pc.velocity.value(x), diff);
        return h * deriv * deriv / clamped_speed(pc.velocity, x, pc.speed_floor);
      });
  return std::sqrt(std::max(val, 0.0));
}

// Boundary-flux-weighted trace error || |beta.n|^{1/2} (u_exact - u_h) ||
// over the whole boundary.
inline double boundary_error(const FiniteElementSpace& space,
                             const Eigen::VectorXd& u, const ProblemCase& pc,
                             const FaceSet& faces) {
  if (!pc.exact)
    throw std::invalid_argument("boundary_error: case has no exact solution");
  const ScalarField& exact = *pc.exact;
  const SegmentQuadrature rule =
      segment_quadrature(detail::error_exactness(space.degree));
  double acc = 0.0;
  for (const BoundaryFace& f : faces.boundary) {
    const AffineMap map = space.mesh->map_of(f.elem);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = f.p0 + rule.points[q] * (f.p1 - f.p0);
      const double d =
          exact(x) - eval_value(space, u, f.elem, map.to_reference(x));
      acc += rule.weights[q] * f.length *
             std::abs(dot(pc.velocity.value(x), f.normal)) * d * d;
    }
  }
  return std::sqrt(std::max(acc, 0.0));
}

// L2 norm of a discrete function.
inline double discrete_l2_norm(const FiniteElementSpace& space,
                               const Eigen::VectorXd& coeffs) {
  const double val = detail::integrate_elements(
      space, detail::error_exactness(space.degree),
      [&](Vec2, int e, Vec2 ref) {
        const double v = eval_value(space, coeffs, e, ref);
        return v * v;
      });
  return std::sqrt(std::max(val, 0.0));
}

// Seminorm induced by an assembled stabilizer, clamped at zero so roundoff
// (or a deliberately negative weight) cannot produce NaN.
inline double stab_seminorm(const Eigen::VectorXd& x,
                            const AssembledOperator& s) {
  return std::sqrt(std::max(x.dot(s.apply(x)), 0.0));
}

// |u_exact - u_h|_{S_p} evaluated by direct quadrature rather than through
// the matrix: the least-squares part uses f - (beta.grad + sigma)u_h (which
// is the residual of the error for a manufactured case), the jump parts see
// only u_h since the exact solution is smooth, and the boundary part
// integrates g - u_h on the data side. Negative quadratic forms (possible
// with negative weights) are clamped at zero.
inline double sp_error_seminorm(const FiniteElementSpace& space,
                                const Eigen::VectorXd& u,
                                const ProblemCase& pc,
                                const StabilizationConfig& cfg,
                                const FaceSet& faces) {
  if (!pc.exact)
    throw std::invalid_argument("sp_error_seminorm: case has no exact solution");
  double acc = 0.0;
  const int fx = detail::error_exactness(space.degree);
  const SegmentQuadrature srule = segment_quadrature(fx);

  if (cfg.method == Method::GLS) {
    const double h = mesh_size(*space.mesh);
    acc += detail::integrate_elements(
        space, fx, [&](Vec2 x, int e, Vec2 ref) {
          const double lres =
              pc.source(x) - dot(pc.velocity.value(x),
                                 eval_gradient(space, u, e, ref)) -
              pc.sigma(x) * eval_value(space, u, e, ref);
          return cfg.gamma_method * h /
                 clamped_speed(pc.velocity, x, pc.speed_floor) * lres * lres;
        });
  } else if (cfg.method == Method::CIP) {
    for (const InteriorFace& f : faces.interior) {
      const double bn0 = dot(pc.velocity.value(f.p0), f.normal);
      const double bn1 = dot(pc.velocity.value(f.p1), f.normal);
      double bn_max = std::max(std::abs(bn0), std::abs(bn1));
      for (const double t : srule.points)
        bn_max = std::max(bn_max, std::abs((1.0 - t) * bn0 + t * bn1));
      const AffineMap mm = space.mesh->map_of(f.elem_minus);
      const AffineMap mp = space.mesh->map_of(f.elem_plus);
      double face_acc = 0.0;
      for (std::size_t q = 0; q < srule.points.size(); ++q) {
        const Vec2 x = f.p0 + srule.points[q] * (f.p1 - f.p0);
        const Vec2 jump =
            eval_gradient(space, u, f.elem_minus, mm.to_reference(x)) -
            eval_gradient(space, u, f.elem_plus, mp.to_reference(x));
        face_acc += srule.weights[q] * f.length * dot(jump, jump);
      }
      acc += cfg.gamma_method * f.length * f.length * bn_max * face_acc;
    }
  } else {
    for (const InteriorFace& f : faces.interior) {
      const AffineMap mm = space.mesh->map_of(f.elem_minus);
      const AffineMap mp = space.mesh->map_of(f.elem_plus);
      for (std::size_t q = 0; q < srule.points.size(); ++q) {
        const Vec2 x = f.p0 + srule.points[q] * (f.p1 - f.p0);
        const double jump =
            eval_value(space, u, f.elem_minus, mm.to_reference(x)) -
            eval_value(space, u, f.elem_plus, mp.to_reference(x));
        acc += srule.weights[q] * f.length * cfg.gamma_method *
               std::abs(dot(pc.velocity.value(x), f.normal)) * jump * jump;
      }
    }
  }

  const PenaltySide pside = cfg.data_side == DataSide::Inflow
                                ? PenaltySide::Inflow
                                : PenaltySide::Outflow;
  for (const BoundaryFace& f : faces.boundary) {
    const AffineMap map = space.mesh->map_of(f.elem);
    for (std::size_t q = 0; q < srule.points.size(); ++q) {
      const Vec2 x = f.p0 + srule.points[q] * (f.p1 - f.p0);
      const double d = pc.boundary_data(x) -
                       eval_value(space, u, f.elem, map.to_reference(x));
      acc += srule.weights[q] * f.length * cfg.gamma_bc *
             detail::boundary_weight(pc.velocity.value(x), f.normal, pside) *
             d * d;
    }
  }
  return std::sqrt(std::max(acc, 0.0));
}

struct LevelRecord {
  int level = 0;  // 2^level cells per side
  double h = 0.0;
  long long dofs = 0;  // unknowns actually solved (both fields if present)
  std::optional<double> l2_error;
  std::optional<double> sd_error;
  std::optional<double> boundary_error;
  std::optional<double> sp_seminorm;  // |u_exact - u_h|_{S_p}
  std::optional<double> z_l2;
  std::optional<std::string> failure;
};

struct ErrorReport {
  std::vector<LevelRecord> levels;
  // rate[i] compares levels[i-1] and levels[i]; rate[0] is always absent.
  std::vector<std::optional<double>> l2_rate;
  std::vector<std::optional<double>> sd_rate;

  [[nodiscard]] std::optional<double> mean_l2_rate() const {
    return mean(l2_rate);
  }
  [[nodiscard]] std::optional<double> mean_sd_rate() const {
    return mean(sd_rate);
  }

 private:
  static std::optional<double> mean(
      const std::vector<std::optional<double>>& v) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : v)
      if (r) {
        sum += *r;
        ++n;
      }
    if (n == 0) return std::nullopt;
    return sum / n;
  }
};

namespace detail {

inline std::vector<std::optional<double>> consecutive_rates(
    const std::vector<LevelRecord>& levels,
    std::optional<double> LevelRecord::* field) {
  std::vector<std::optional<double>> rates(levels.size());
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const auto& prev = levels[i - 1].*field;
    const auto& cur = levels[i].*field;
    const int gap = levels[i].level - levels[i - 1].level;
    if (prev && cur && *prev > 0.0 && *cur > 0.0 && gap > 0)
      rates[i] = std::log2(*prev / *cur) / gap;
  }
  return rates;
}

}  // namespace detail

// Solves the case on meshes with 2^N cells per side for each requested N and
// tabulates errors and consecutive rates. Solver failures are recorded in
// the level's `failure` field and leave gaps instead of aborting the study.
// `on_solution` (optional) sees every successful solve, e.g. for file output.
inline ErrorReport convergence_study(
    const ProblemCase& pc, const StabilizationConfig& cfg, int degree,
    const std::vector<int>& levels, std::optional<Perturbation> perturb = {},
    const std::function<void(int, const FiniteElementSpace&, const Solution&)>&
        on_solution = {}) {
  ErrorReport report;
  for (const int level : levels) {
    if (level < 0 || level > 12)
      throw std::invalid_argument("convergence_study: level out of range");
    LevelRecord rec;
    rec.level = level;
    const Mesh mesh = build_structured(1 << level, perturb);
    const FaceSet faces = build_faces(mesh);
    const FiniteElementSpace space =
        build_space(mesh, required_continuity(cfg.method), degree);
    rec.h = mesh_size(mesh);
    rec.dofs = cfg.formulation == Formulation::PrimalDual
                   ? 2LL * space.num_dofs
                   : space.num_dofs;
    try {
      const Solution sol = solve_case(pc, space, faces, cfg);
      if (pc.exact) {
        rec.l2_error = l2_error(space, sol.u, pc);
        rec.boundary_error = boundary_error(space, sol.u, pc, faces);
        rec.sp_seminorm = sp_error_seminorm(space, sol.u, pc, cfg, faces);
      }
      if (pc.exact_grad) rec.sd_error = sd_error(space, sol.u, pc);
      if (cfg.formulation == Formulation::PrimalDual)
        rec.z_l2 = discrete_l2_norm(space, sol.z);
      if (on_solution) on_solution(level, space, sol);
    } catch (const SolveError& err) {
      rec.failure = err.what();
    }
    report.levels.push_back(std::move(rec));
  }
  report.l2_rate =
      detail::consecutive_rates(report.levels, &LevelRecord::l2_error);
  report.sd_rate =
      detail::consecutive_rates(report.levels, &LevelRecord::sd_error);
  return report;
}

struct SweepEntry {
  double epsilon = 0.0;
  double gamma = 0.0;
  Formulation formulation = Formulation::Standard;
  std::optional<double> sd_error;
  std::optional<std::string> failure;
};

// Sharp-layer robustness sweep: solves the smooth benchmark with velocity
// field 3 for every (epsilon, gamma, formulation) combination on a fixed
// n x n mesh and records the streamline-derivative error. Solver failures
// are tabulated, not thrown.
inline std::vector<SweepEntry> robustness_sweep(
    const std::vector<double>& epsilons, const std::vector<double>& gammas,
    int n, int degree, Method method = Method::CIP) {
  const Mesh mesh = build_structured(n);
  const FaceSet faces = build_faces(mesh);
  const FiniteElementSpace space =
      build_space(mesh, required_continuity(method), degree);

  std::vector<SweepEntry> out;
  for (const Formulation form :
       {Formulation::Standard, Formulation::PrimalDual})
    for (const double eps : epsilons)
      for (const double gamma : gammas) {
        SweepEntry entry;
        entry.epsilon = eps;
        entry.gamma = gamma;
        entry.formulation = form;
        const ProblemCase pc = smooth_case(3, eps);
        StabilizationConfig cfg = make_config(method, form, degree);
        cfg.gamma_method = gamma;
        try {
          const Solution sol = solve_case(pc, space, faces, cfg);
          entry.sd_error = sd_error(space, sol.u, pc);
        } catch (const SolveError& err) {
          entry.failure = err.what();
        }
        out.push_back(std::move(entry));
      }
  return out;
}

namespace detail {

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string csv_cell(const std::optional<double>& v) {
  return v ? csv_number(*v) : std::string();
}

}  // namespace detail

// One row per level; absent quantities are empty cells. Errors carry 17
// significant digits so the printed rates can be recomputed from the printed
// errors to well below 1e-12.
inline void write_table_csv(const ErrorReport& report, std::ostream& out) {
  out << "N,h,dofs,l2_error,sd_error,l2_rate,sd_rate,z_l2,sp_seminorm\n";
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const LevelRecord& r = report.levels[i];
    out << r.level << ',' << detail::csv_number(r.h) << ',' << r.dofs << ','
        << detail::csv_cell(r.l2_error) << ',' << detail::csv_cell(r.sd_error)
        << ',' << detail::csv_cell(report.l2_rate[i]) << ','
        << detail::csv_cell(report.sd_rate[i]) << ','
        << detail::csv_cell(r.z_l2) << ',' << detail::csv_cell(r.sp_seminorm)
        << '\n';
  }
}

inline void write_sweep_csv(const std::vector<SweepEntry>& entries,
                            std::ostream& out) {
  out << "epsilon,gamma,formulation,sd_error,status\n";
  for (const SweepEntry& e : entries)
    out << detail::csv_number(e.epsilon) << ',' << detail::csv_number(e.gamma)
        << ',' << to_string(e.formulation) << ','
        << detail::csv_cell(e.sd_error) << ','
        << (e.failure ? "failed" : "ok") << '\n';
}

}  // namespace hypstab
