// Command-line driver: runs convergence studies and robustness sweeps
// described by a plain-text config file, writing CSV tables (and optional
// VTK snapshots) into an output directory. `list-cases` prints the built-in
// problem catalog and the default stabilization weights.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "hypstab/analysis.hpp"
#include "hypstab/config.hpp"
#include "hypstab/vtk.hpp"

namespace fs = std::filesystem;

namespace {

int run_study(const hypstab::RunConfig& cfg, const fs::path& out_dir) {
  using namespace hypstab;
  const ProblemCase pc = make_case(cfg);
  const StabilizationConfig stab = cfg.stabilization();
  std::optional<Perturbation> perturb;
  if (cfg.perturb_amplitude > 0.0)
    perturb = Perturbation{cfg.perturb_amplitude, cfg.perturb_seed};

  const auto on_solution = [&](int level, const FiniteElementSpace& space,
                               const Solution& sol) {
    if (!cfg.vtk) return;
    const fs::path path = out_dir / ("solution_" + std::to_string(level) + ".vtk");
    std::optional<Eigen::VectorXd> z;
    if (sol.z.size() > 0) z = sol.z;
    write_solution_vtk(space, sol.u, z, path.string());
  };

  const ErrorReport report = convergence_study(pc, stab, cfg.degree,
                                               cfg.levels, perturb, on_solution);

  const fs::path table_path = out_dir / "table.csv";
  {
    std::ofstream out(table_path);
    if (!out) {
      std::cerr << "error: cannot write " << table_path << "\n";
      return 2;
    }
    write_table_csv(report, out);
  }
  std::cout << "wrote " << table_path.string() << "\n";

  bool failed = false;
  char buf[64];
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const LevelRecord& r = report.levels[i];
    std::string line = "  N=" + std::to_string(r.level) +
                       " dofs=" + std::to_string(r.dofs);
    if (r.l2_error) {
      std::snprintf(buf, sizeof buf, " l2=%.3e", *r.l2_error);
      line += buf;
    }
    if (r.sd_error) {
      std::snprintf(buf, sizeof buf, " sd=%.3e", *r.sd_error);
      line += buf;
    }
    if (report.l2_rate[i]) {
      std::snprintf(buf, sizeof buf, " rate=%.2f", *report.l2_rate[i]);
      line += buf;
    }
    if (r.failure) {
      line += " FAILED: " + *r.failure;
      failed = true;
    }
    std::cout << line << "\n";
  }
  if (failed && !cfg.allow_failures) {
    std::cerr << "error: at least one level failed to solve\n";
    return 1;
  }
  return 0;
}

int run_sweep(const hypstab::RunConfig& cfg, const fs::path& out_dir) {
  using namespace hypstab;
  std::vector<double> gammas = cfg.gammas;
  if (gammas.empty()) gammas = {cfg.resolved_gamma()};
  const auto entries = robustness_sweep(cfg.epsilons, gammas, cfg.sweep_n,
                                        cfg.degree, cfg.method);
  const fs::path path = out_dir / "sweep.csv";
  {
    std::ofstream out(path);
    if (!out) {
      std::cerr << "error: cannot write " << path << "\n";
      return 2;
    }
    write_sweep_csv(entries, out);
  }
  std::cout << "wrote " << path.string() << "\n";
  bool failed = false;
  char buf[96];
  for (const SweepEntry& e : entries) {
    std::snprintf(buf, sizeof buf, "  eps=%-9g gamma=%-9g %-11s ", e.epsilon,
                  e.gamma, to_string(e.formulation));
    std::string line = buf;
    if (e.sd_error) {
      std::snprintf(buf, sizeof buf, "sd=%.3e", *e.sd_error);
      line += buf;
    }
    if (e.failure) {
      line += "FAILED: " + *e.failure;
      failed = true;
    }
    std::cout << line << "\n";
  }
  if (failed && !cfg.allow_failures) {
    std::cerr << "error: at least one sweep entry failed to solve\n";
    return 1;
  }
  return 0;
}

void list_cases() {
  using namespace hypstab;
  std::cout << "cases:\n";
  for (const CaseInfo& info : case_catalog())
    std::cout << "  " << info.name << ": " << info.summary << "\n";
  std::cout << "default stabilization weights:\n";
  std::cout << "  gamma (cip, degree 1)   = " << default_gamma(Method::CIP, 1)
            << "\n";
  std::cout << "  gamma (cip, degree 2)   = " << default_gamma(Method::CIP, 2)
            << "\n";
  std::cout << "  gamma (dg)              = " << default_gamma(Method::DG, 1)
            << "\n";
  std::cout << "  gamma (gls)             = " << default_gamma(Method::GLS, 1)
            << "\n";
  std::cout << "  gamma_bc (standard)     = "
            << default_gamma_bc(Formulation::Standard) << "\n";
  std::cout << "  gamma_bc (primal_dual)  = "
            << default_gamma_bc(Formulation::PrimalDual) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilized finite element solver for advection-reaction "
               "transport on the unit square"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir = ".";
  std::string levels_override;
  std::optional<std::uint64_t> seed_override;
  bool vtk_flag = false;

  CLI::App* run = app.add_subcommand("run", "execute a config file");
  run->add_option("config", config_path, "path to the run configuration")
      ->required();
  run->add_option("--output-dir", output_dir, "directory for generated files");
  run->add_flag("--vtk", vtk_flag, "also write VTK snapshots per level");
  run->add_option("--levels", levels_override,
                  "override the level list, e.g. 3:7 or 3,4,5");
  run->add_option("--seed", seed_override, "override the perturbation seed");

  CLI::App* list = app.add_subcommand("list-cases",
                                      "print the problem catalog and defaults");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    list_cases();
    return 0;
  }

  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config file '" << config_path << "'\n";
      return 2;
    }
    hypstab::RunConfig cfg = hypstab::parse_config(in);
    if (!levels_override.empty())
      cfg.levels = hypstab::detail::parse_levels(levels_override, 0);
    if (seed_override) cfg.perturb_seed = *seed_override;
    if (vtk_flag) cfg.vtk = true;

    const fs::path out_dir(output_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
      std::cerr << "error: cannot create output directory '" << output_dir
                << "': " << ec.message() << "\n";
      return 2;
    }
    return cfg.mode == "sweep" ? run_sweep(cfg, out_dir)
                               : run_study(cfg, out_dir);
  } catch (const hypstab::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
