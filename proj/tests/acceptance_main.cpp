// Acceptance harness: exercises the solver end to end and prints one
// [PASS]/[FAIL] line per criterion. Exit code 0 iff every criterion passed.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hypstab/analysis.hpp"
#include "support.hpp"
#include "upwind_reference.hpp"

using namespace hypstab;
namespace fs = std::filesystem;

namespace {

bool g_all_ok = true;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %02d %-28s %s\n", ok ? "PASS" : "FAIL", id, name,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) g_all_ok = false;
}

std::string fmt(const char* spec, double a, double b = 0.0, double c = 0.0,
                double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, spec, a, b, c, d);
  return buf;
}

struct Setup {
  Mesh mesh;
  FaceSet faces;
  FiniteElementSpace space;

  Setup(int n, Continuity c, int degree,
        std::optional<Perturbation> perturb = {})
      : mesh(build_structured(n, perturb)),
        faces(build_faces(mesh)),
        space(build_space(mesh, c, degree)) {}
};

ProblemCase affine_case() {
  VectorField beta = testutil::constant_velocity(1.0, 2.0);
  return manufactured_case(
      "affine", beta, [](Vec2) { return 1.0; },
      [](Vec2 p) { return p.x + 2.0 * p.y - 0.25; },
      [](Vec2) { return Vec2{1.0, 2.0}; });
}

ProblemCase quadratic_case() {
  VectorField beta = testutil::constant_velocity(1.0, 2.0);
  return manufactured_case(
      "quadratic", beta, [](Vec2) { return 1.0; },
      [](Vec2 p) {
        return p.x * p.x + 0.5 * p.x * p.y - p.y * p.y + p.x + 0.2;
      },
      [](Vec2 p) {
        return Vec2{2.0 * p.x + 0.5 * p.y + 1.0, 0.5 * p.x - 2.0 * p.y};
      });
}

// Two-field energy-identity residuals collected from every two-field solve
// in criteria 1-3; criterion 4 checks them in bulk.
std::vector<double> g_identity_residuals;

// ---- 01: polynomial consistency --------------------------------------------

void criterion_consistency() {
  double worst_u = 0.0;
  double worst_z = 0.0;
  for (const int degree : {1, 2}) {
    const ProblemCase pc = degree == 1 ? affine_case() : quadratic_case();
    const int n = degree == 1 ? 4 : 3;
    for (const Method m : {Method::GLS, Method::CIP, Method::DG})
      for (const Formulation f :
           {Formulation::Standard, Formulation::PrimalDual}) {
        const Setup s(n, required_continuity(m), degree);
        const Solution sol =
            solve_case(pc, s.space, s.faces, make_config(m, f, degree));
        const Eigen::VectorXd exact = interpolate(s.space, *pc.exact);
        worst_u = std::max(worst_u,
                           (sol.u - exact).lpNorm<Eigen::Infinity>());
        if (f == Formulation::PrimalDual) {
          worst_z = std::max(worst_z, sol.z.lpNorm<Eigen::Infinity>());
          g_identity_residuals.push_back(check_partial_coercivity(sol));
        }
      }
  }
  report(1, "polynomial-consistency", worst_u <= 1e-9 && worst_z <= 1e-9,
         fmt("max|u-u_ex|=%.2e max|z|=%.2e (bound 1e-9)", worst_u, worst_z));
}

// ---- 02/03: convergence-rate reproduction ----------------------------------

struct StudyOutcome {
  double mean_l2 = 0.0;
  double mean_sd = 0.0;
  double anchor = 0.0;  // L2 error at the anchor level
};

StudyOutcome run_study(Formulation f, int degree, double gamma,
                       const std::vector<int>& levels, int anchor_level) {
  StabilizationConfig cfg = make_config(Method::CIP, f, degree);
  cfg.gamma_method = gamma;
  const ErrorReport rep = convergence_study(
      smooth_case(1), cfg, degree, levels, std::nullopt,
      [&](int, const FiniteElementSpace&, const Solution& sol) {
        if (f == Formulation::PrimalDual)
          g_identity_residuals.push_back(check_partial_coercivity(sol));
      });
  StudyOutcome out;
  if (rep.mean_l2_rate()) out.mean_l2 = *rep.mean_l2_rate();
  if (rep.mean_sd_rate()) out.mean_sd = *rep.mean_sd_rate();
  for (std::size_t i = 0; i < rep.levels.size(); ++i)
    if (rep.levels[i].level == anchor_level && rep.levels[i].l2_error)
      out.anchor = *rep.levels[i].l2_error;
  return out;
}

bool within_factor(double value, double reference, double factor) {
  return value <= factor * reference && value >= reference / factor;
}

void criterion_p1_rates() {
  const std::vector<int> levels = {3, 4, 5, 6, 7};
  const StudyOutcome st = run_study(Formulation::Standard, 1, 0.01, levels, 5);
  const StudyOutcome pd = run_study(Formulation::PrimalDual, 1, 0.01, levels, 5);
  const bool ok = st.mean_l2 >= 1.9 && pd.mean_l2 >= 1.9 &&
                  st.mean_sd >= 1.35 && pd.mean_sd >= 1.35 &&
                  within_factor(st.anchor, 1.7e-3, 3.0) &&
                  within_factor(pd.anchor, 1.5e-3, 3.0);
  report(2, "p1-convergence-rates", ok,
         fmt("l2 rates %.2f/%.2f (>=1.9), sd %.2f/%.2f (>=1.35)", st.mean_l2,
             pd.mean_l2, st.mean_sd, pd.mean_sd) +
             fmt(", anchors %.1e/%.1e (refs 1.7e-3/1.5e-3 x3)", st.anchor,
                 pd.anchor));
}

void criterion_p2_rates() {
  const std::vector<int> levels = {3, 4, 5, 6};
  const StudyOutcome st =
      run_study(Formulation::Standard, 2, 0.001, levels, 5);
  const StudyOutcome pd =
      run_study(Formulation::PrimalDual, 2, 0.001, levels, 5);
  const bool ok = st.mean_l2 >= 2.7 && pd.mean_l2 >= 2.7 &&
                  st.mean_sd >= 2.2 && pd.mean_sd >= 2.2 &&
                  within_factor(st.anchor, 2.7e-5, 5.0) &&
                  within_factor(pd.anchor, 1.4e-5, 5.0);
  report(3, "p2-convergence-rates", ok,
         fmt("l2 rates %.2f/%.2f (>=2.7), sd %.2f/%.2f (>=2.2)", st.mean_l2,
             pd.mean_l2, st.mean_sd, pd.mean_sd) +
             fmt(", anchors %.1e/%.1e (refs 2.7e-5/1.4e-5 x5)", st.anchor,
                 pd.anchor));
}

// ---- 04: two-field energy identity -----------------------------------------

void criterion_energy_identity() {
  double worst = 0.0;
  for (const double r : g_identity_residuals) worst = std::max(worst, r);
  const bool ok = !g_identity_residuals.empty() && worst <= 1e-8;
  report(4, "two-field-energy-identity", ok,
         fmt("%.0f solves, max relative residual %.1e (bound 1e-8)",
             static_cast<double>(g_identity_residuals.size()), worst));
}

// ---- 05: advection energy balance ------------------------------------------

void criterion_energy_balance() {
  const VectorField beta = testutil::constant_velocity(0.8, 0.6);
  const auto sigma = [](Vec2) { return 0.4; };
  testutil::Rng rng(20240817);
  double worst = 0.0;
  for (const Continuity c :
       {Continuity::Continuous, Continuity::Discontinuous}) {
    const Setup s(3, c, 1);
    const AssembledOperator a =
        assemble_advection(s.space, s.space, beta, sigma, s.faces,
                           AssemblyOptions::defaults(1));
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd u(s.space.num_dofs);
      for (int i = 0; i < u.size(); ++i) u[i] = rng.symmetric();
      const double lhs = u.dot(a.apply(u));
      const double volume = testutil::integrate_mesh(
          s.space, [&](Vec2 x, int e, Vec2 ref) {
            const double v = eval_value(s.space, u, e, ref);
            return (sigma(x) - 0.5 * beta.divergence(x)) * v * v;
          });
      const double flux = testutil::integrate_boundary(
          s.space, s.faces, [&](const BoundaryFace& face, Vec2 x, Vec2 ref) {
            const double v = eval_value(s.space, u, face.elem, ref);
            return 0.5 * dot(beta.value(x), face.normal) * v * v;
          });
      const double rhs = flux + volume;
      worst = std::max(worst, std::abs(lhs - rhs) /
                                  std::max({1.0, std::abs(lhs),
                                            std::abs(rhs)}));
    }
  }
  report(5, "advection-energy-balance", worst <= 1e-10,
         fmt("20 random functions, max defect %.1e (bound 1e-10)", worst));
}

// ---- 06: sharp-layer robustness --------------------------------------------

void criterion_robustness() {
  const std::vector<double> eps = {0.05, 0.025, 0.0125};
  const auto entries = robustness_sweep(eps, {0.01}, 64, 1, Method::CIP);
  // Layout: standard x3 then primal_dual x3, epsilon-major.
  const double inf = std::numeric_limits<double>::infinity();
  auto value = [&](std::size_t i) {
    return entries[i].sd_error ? *entries[i].sd_error : inf;
  };
  const double std0 = value(0);
  const double pd0 = value(3), pd1 = value(4), pd2 = value(5);
  const bool bounded = pd0 < 0.12 && pd1 < 0.12 && pd2 < 0.12;
  const double cap = std::sqrt(2.0);
  const bool slow_growth = pd1 / pd0 <= cap && pd2 / pd1 <= cap;
  const bool gap = std0 / pd0 >= 10.0;
  report(6, "sharp-layer-robustness", bounded && slow_growth && gap,
         fmt("two-field sd %.3f/%.3f/%.3f (<0.12, growth<=sqrt2)", pd0, pd1,
             pd2) +
             fmt(", single-eq/two-field at eps=0.05: %.1fx (>=10)",
                 std0 / pd0));
}

// ---- 07: reconstruction from outflow data ----------------------------------

void criterion_outflow_reconstruction() {
  const ProblemCase pc = smooth_case(1);
  const std::vector<int> levels = {3, 4, 5, 6, 7};

  StabilizationConfig pd_cfg = make_config(Method::CIP,
                                           Formulation::PrimalDual, 1);
  pd_cfg.data_side = DataSide::Outflow;
  const ErrorReport pd = convergence_study(pc, pd_cfg, 1, levels);
  const double pd_rate = pd.mean_l2_rate() ? *pd.mean_l2_rate() : 0.0;

  StabilizationConfig neg_cfg = make_config(Method::CIP,
                                            Formulation::Standard, 1);
  neg_cfg.data_side = DataSide::Outflow;
  neg_cfg.gamma_bc = -1.0;
  neg_cfg.gamma_method = -0.01;
  const ErrorReport neg = convergence_study(pc, neg_cfg, 1, levels);
  const double neg_rate = neg.mean_l2_rate() ? *neg.mean_l2_rate() : 0.0;

  StabilizationConfig div_cfg = neg_cfg;
  div_cfg.gamma_method = 1e-3;
  const ErrorReport div =
      convergence_study(pc, div_cfg, 1, {3, 4, 5, 6, 7, 8});
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> e;
  for (const LevelRecord& r : div.levels)
    e.push_back(r.l2_error ? *r.l2_error : inf);
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i] < e[i0]) i0 = i;
  bool non_decreasing = i0 + 2 < e.size();
  for (std::size_t i = i0; i + 1 < e.size(); ++i)
    if (e[i + 1] < e[i] * (1.0 - 1e-12)) non_decreasing = false;
  const bool diverged = non_decreasing && e.back() >= 10.0 * e[i0];

  report(7, "outflow-reconstruction",
         pd_rate >= 1.9 && neg_rate >= 1.8 && diverged,
         fmt("two-field rate %.2f (>=1.9), negative-weight rate %.2f (>=1.8)",
             pd_rate, neg_rate) +
             fmt(", weakly-stabilized run grows %.1e -> %.1e", e[i0],
                 e.back()));
}

// ---- 08: stabilizer structure ----------------------------------------------

struct StructureStats {
  double asym = 0.0;
  double min_quotient = 0.0;  // most negative x'Sx / |x|^2, scaled
};

void fold_structure(const AssembledOperator& s, testutil::Rng& rng,
                    StructureStats& stats) {
  const Eigen::MatrixXd dense = s.matrix();
  stats.asym = std::max(
      stats.asym, (dense - dense.transpose()).cwiseAbs().maxCoeff());
  const double scale = std::max(1.0, dense.cwiseAbs().maxCoeff());
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(s.rows());
    for (int i = 0; i < x.size(); ++i) x[i] = rng.symmetric();
    const double q = x.dot(s.apply(x)) / (x.squaredNorm() * scale);
    stats.min_quotient = std::min(stats.min_quotient, q);
  }
}

void criterion_stabilizer_structure() {
  testutil::Rng rng(777);
  StructureStats stats;
  const std::optional<Perturbation> wiggle = Perturbation{0.2, 5};

  for (const int degree : {1, 2}) {
    const Setup s(3, Continuity::Continuous, degree, wiggle);
    const AssemblyOptions opts = AssemblyOptions::defaults(degree);
    for (const int field : {1, 2}) {
      const VectorField beta = velocity_field(field);
      fold_structure(assemble_gls(s.space, beta, beta.divergence, 0.01,
                                  GlsVariant::Primal, opts),
                     rng, stats);
      fold_structure(assemble_gls(s.space, beta, beta.divergence, 0.01,
                                  GlsVariant::Adjoint, opts),
                     rng, stats);
      fold_structure(assemble_cip(s.space, beta, 0.01, s.faces, opts), rng,
                     stats);
      for (const PenaltySide side :
           {PenaltySide::Inflow, PenaltySide::Outflow, PenaltySide::Whole})
        fold_structure(
            assemble_boundary_penalty(s.space, beta, 1.0, side, s.faces, opts),
            rng, stats);
    }
  }
  {
    const Setup s(3, Continuity::Discontinuous, 1, wiggle);
    const AssemblyOptions opts = AssemblyOptions::defaults(1);
    for (const int field : {1, 2})
      fold_structure(
          assemble_dg_jump(s.space, velocity_field(field), 0.5, s.faces, opts),
          rng, stats);
  }

  // Jump seminorms on globally smooth (CIP) / continuous (DG) inputs.
  const VectorField beta = velocity_field(2);
  auto kernel_case = [&](ScalarField u, std::function<Vec2(Vec2)> grad) {
    return manufactured_case("kernel", beta, beta.divergence, std::move(u),
                             std::move(grad));
  };
  const ProblemCase affine = kernel_case(
      [](Vec2 p) { return 2.0 * p.x - p.y + 0.5; },
      [](Vec2) { return Vec2{2.0, -1.0}; });
  const ProblemCase quad = kernel_case(
      [](Vec2 p) { return p.x * p.x - p.x * p.y + 0.3 * p.y; },
      [](Vec2 p) { return Vec2{2.0 * p.x - p.y, 0.3 - p.x}; });

  double worst_seminorm = 0.0;
  {
    const Setup s(4, Continuity::Continuous, 1);
    StabilizationConfig cfg = make_config(Method::CIP,
                                          Formulation::PrimalDual, 1);
    cfg.gamma_bc = 0.0;
    worst_seminorm = std::max(
        worst_seminorm,
        sp_error_seminorm(s.space, interpolate(s.space, *affine.exact), affine,
                          cfg, s.faces));
  }
  {
    const Setup s(4, Continuity::Continuous, 2);
    StabilizationConfig cfg = make_config(Method::CIP,
                                          Formulation::PrimalDual, 2);
    cfg.gamma_bc = 0.0;
    worst_seminorm = std::max(
        worst_seminorm,
        sp_error_seminorm(s.space, interpolate(s.space, *quad.exact), quad,
                          cfg, s.faces));
  }
  {
    const Setup s(4, Continuity::Discontinuous, 1);
    StabilizationConfig cfg = make_config(Method::DG,
                                          Formulation::PrimalDual, 1);
    cfg.gamma_bc = 0.0;
    worst_seminorm = std::max(
        worst_seminorm,
        sp_error_seminorm(s.space, interpolate(s.space, *affine.exact), affine,
                          cfg, s.faces));
  }

  const bool ok = stats.asym <= 1e-13 && stats.min_quotient >= -1e-12 &&
                  worst_seminorm <= 1e-10;
  report(8, "stabilizer-structure", ok,
         fmt("max asymmetry %.1e (<=1e-13), min quotient %.1e (>=-1e-12)",
             stats.asym, stats.min_quotient) +
             fmt(", kernel seminorm %.1e (<=1e-10)", worst_seminorm));
}

// ---- 09: upwind equivalence -------------------------------------------------

void criterion_upwind_equivalence() {
  const VectorField beta = testutil::constant_velocity(0.7, 0.3);
  const Setup s(1, Continuity::Discontinuous, 1);
  const auto opts = AssemblyOptions::defaults(1);
  const ScalarField sigma = [](Vec2) { return 0.2; };
  const ScalarField f = [](Vec2 p) { return p.x + p.y; };
  const ScalarField g = [](Vec2 p) { return 1.0 + p.x; };

  ProblemCase pc;
  pc.velocity = beta;
  pc.sigma = sigma;
  pc.source = f;
  pc.boundary_data = g;

  const AssembledOperator a =
      assemble_advection(s.space, s.space, beta, sigma, s.faces, opts);
  const AssembledOperator jump =
      assemble_dg_jump(s.space, beta, 0.5, s.faces, opts);
  const AssembledOperator bc = assemble_boundary_penalty(
      s.space, beta, 1.0, PenaltySide::Inflow, s.faces, opts);
  const Eigen::MatrixXd lib = Eigen::MatrixXd(a.matrix()) +
                              Eigen::MatrixXd(jump.matrix()) +
                              Eigen::MatrixXd(bc.matrix());
  const Eigen::VectorXd lib_rhs =
      assemble_rhs(s.space, pc, Method::DG, 0.5, 1.0, DataSide::Inflow,
                   RhsTarget::PrimalEq, s.faces, opts) -
      assemble_rhs(s.space, pc, Method::DG, 0.5, 1.0, DataSide::Inflow,
                   RhsTarget::DualEq, s.faces, opts);

  Eigen::MatrixXd ref;
  Eigen::VectorXd ref_rhs;
  testutil::upwind_reference(s.space, s.faces, beta, sigma, f, g, ref,
                             ref_rhs);

  const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
  const double mat_diff = (lib - ref).cwiseAbs().maxCoeff();
  const double rhs_diff = (lib_rhs - ref_rhs).lpNorm<Eigen::Infinity>();
  report(9, "upwind-equivalence",
         mat_diff <= 1e-12 * scale && rhs_diff <= 1e-12 * scale,
         fmt("matrix diff %.1e, rhs diff %.1e (bound 1e-12)", mat_diff,
             rhs_diff));
}

// ---- 10: CSV determinism -----------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / "hypstab_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  const fs::path study_cfg = root / "study.cfg";
  {
    std::ofstream out(study_cfg);
    out << "case = smooth\nmethod = cip\nformulation = primal_dual\n"
           "levels = 2:3\nperturb_amplitude = 0.1\nperturb_seed = 42\n";
  }
  const fs::path sweep_cfg = root / "sweep.cfg";
  {
    std::ofstream out(sweep_cfg);
    out << "mode = sweep\nepsilons = 0.5, 0.25\ngammas = 0.01\nsweep_n = 8\n";
  }

  auto run = [&](const fs::path& cfg, const fs::path& dir) {
    const std::string cmd = std::string(HYPSTAB_CLI_PATH) + " run " +
                            cfg.string() + " --output-dir " + dir.string() +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };

  bool ok = true;
  std::string what = "table.csv and sweep.csv byte-identical on rerun";
  for (const auto& [cfg, file] :
       {std::pair{study_cfg, std::string("table.csv")},
        std::pair{sweep_cfg, std::string("sweep.csv")}}) {
    const fs::path d1 = root / (file + ".1");
    const fs::path d2 = root / (file + ".2");
    if (run(cfg, d1) != 0 || run(cfg, d2) != 0) {
      ok = false;
      what = "CLI run failed for " + file;
      break;
    }
    const std::string t1 = slurp(d1 / file);
    const std::string t2 = slurp(d2 / file);
    if (t1.empty() || t1 != t2) {
      ok = false;
      what = file + " differs between identical runs";
      break;
    }
  }
  report(10, "csv-determinism", ok, what);
}

}  // namespace

int main() {
  std::printf("acceptance checks (transport solver)\n");
  criterion_consistency();
  criterion_p1_rates();
  criterion_p2_rates();
  criterion_energy_identity();
  criterion_energy_balance();
  criterion_robustness();
  criterion_outflow_reconstruction();
  criterion_stabilizer_structure();
  criterion_upwind_equivalence();
  criterion_determinism();
  std::printf(g_all_ok ? "all criteria passed\n"
                       : "AT LEAST ONE CRITERION FAILED\n");
  return g_all_ok ? 0 : 1;
}
