#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hypstab/analysis.hpp"

namespace hypstab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One run description, read from a plain-text file of `key = value` lines
// ('#' starts a comment). Unknown keys, malformed values and incompatible
// combinations are rejected with the offending line in the message.
//
// Keys (defaults in parentheses):
//   mode           study | sweep                     (study)
//   case           smooth | discontinuous | zero     (smooth)
//   velocity       1 | 2 | 3                         (1)
//   epsilon        sharpness of velocity 3           (required for velocity 3)
//   method         gls | cip | dg                    (cip)
//   formulation    standard | primal_dual            (primal_dual)
//   degree         1 | 2                             (1)
//   space          continuous | discontinuous        (implied by method)
//   gamma          stabilization weight              (per method and degree)
//   gamma_bc       boundary penalty weight           (per formulation)
//   data_side      inflow | outflow                  (inflow)
//   levels         e.g. 3:7 or 3,4,5                 (3:6)
//   perturb_amplitude, perturb_seed                  (0, 1)
//   solver_tol     linear solve residual bound       (1e-12)
//   vtk            true | false                      (false)
//   allow_failures true | false                      (false)
//   epsilons, gammas, sweep_n   sweep mode only      (-, gamma, 64)
struct RunConfig {
  std::string mode = "study";
  std::string case_name = "smooth";
  int velocity = 1;
  std::optional<double> epsilon;
  Method method = Method::CIP;
  Formulation formulation = Formulation::PrimalDual;
  int degree = 1;
  std::optional<Continuity> space;
  std::optional<double> gamma;
  std::optional<double> gamma_bc;
  DataSide data_side = DataSide::Inflow;
  std::vector<int> levels = {3, 4, 5, 6};
  double perturb_amplitude = 0.0;
  std::uint64_t perturb_seed = 1;
  double solver_tol = 1e-12;
  bool vtk = false;
  bool allow_failures = false;
  std::vector<double> epsilons;
  std::vector<double> gammas;
  int sweep_n = 64;

  [[nodiscard]] Continuity continuity() const {
    return space ? *space : required_continuity(method);
  }
  [[nodiscard]] double resolved_gamma() const {
    return gamma ? *gamma : default_gamma(method, degree);
  }
  [[nodiscard]] double resolved_gamma_bc() const {
    return gamma_bc ? *gamma_bc : default_gamma_bc(formulation);
  }
  [[nodiscard]] StabilizationConfig stabilization() const {
    StabilizationConfig c;
    c.method = method;
    c.formulation = formulation;
    c.gamma_method = resolved_gamma();
    c.gamma_bc = resolved_gamma_bc();
    c.data_side = data_side;
    c.solver_tol = solver_tol;
    return c;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void config_fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

inline double parse_double(const std::string& v, int line) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    config_fail(line, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) config_fail(line, "trailing junk in number '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& v, int line) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    config_fail(line, "expected an integer, got '" + v + "'");
  }
  if (used != v.size())
    config_fail(line, "trailing junk in integer '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  config_fail(line, "expected true/false, got '" + v + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline std::vector<int> parse_levels(const std::string& v, int line) {
  std::vector<int> out;
  if (v.find(':') != std::string::npos) {
    const auto parts = split(v, ':');
    if (parts.size() != 2) config_fail(line, "level range must be lo:hi");
    const long long lo = parse_int(parts[0], line);
    const long long hi = parse_int(parts[1], line);
    if (lo > hi) config_fail(line, "level range must have lo <= hi");
    for (long long n = lo; n <= hi; ++n) out.push_back(static_cast<int>(n));
  } else {
    for (const auto& p : split(v, ','))
      out.push_back(static_cast<int>(parse_int(p, line)));
  }
  if (out.empty()) config_fail(line, "empty level list");
  for (const int n : out)
    if (n < 0 || n > 12) config_fail(line, "levels must lie in 0..12");
  return out;
}

inline std::vector<double> parse_double_list(const std::string& v, int line) {
  std::vector<double> out;
  for (const auto& p : split(v, ',')) out.push_back(parse_double(p, line));
  if (out.empty()) config_fail(line, "empty list");
  return out;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      detail::config_fail(lineno, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) detail::config_fail(lineno, "empty key");
    if (val.empty()) detail::config_fail(lineno, "empty value for '" + key + "'");
    if (const auto [it, fresh] = seen.emplace(key, lineno); !fresh)
      detail::config_fail(lineno, "duplicate key '" + key + "' (first on line " +
                                      std::to_string(it->second) + ")");

    if (key == "mode") {
      if (val != "study" && val != "sweep")
        detail::config_fail(lineno, "mode must be study or sweep");
      cfg.mode = val;
    } else if (key == "case") {
      if (val != "smooth" && val != "discontinuous" && val != "zero")
        detail::config_fail(lineno,
                            "case must be smooth, discontinuous or zero");
      cfg.case_name = val;
    } else if (key == "velocity") {
      const long long id = detail::parse_int(val, lineno);
      if (id < 1 || id > 3)
        detail::config_fail(lineno, "velocity must be 1, 2 or 3");
      cfg.velocity = static_cast<int>(id);
    } else if (key == "epsilon") {
      cfg.epsilon = detail::parse_double(val, lineno);
    } else if (key == "method") {
      if (val == "gls") cfg.method = Method::GLS;
      else if (val == "cip") cfg.method = Method::CIP;
      else if (val == "dg") cfg.method = Method::DG;
      else detail::config_fail(lineno, "method must be gls, cip or dg");
    } else if (key == "formulation") {
      if (val == "standard") cfg.formulation = Formulation::Standard;
      else if (val == "primal_dual") cfg.formulation = Formulation::PrimalDual;
      else detail::config_fail(lineno,
                               "formulation must be standard or primal_dual");
    } else if (key == "degree") {
      const long long d = detail::parse_int(val, lineno);
      if (d != 1 && d != 2) detail::config_fail(lineno, "degree must be 1 or 2");
      cfg.degree = static_cast<int>(d);
    } else if (key == "space") {
      if (val == "continuous") cfg.space = Continuity::Continuous;
      else if (val == "discontinuous") cfg.space = Continuity::Discontinuous;
      else detail::config_fail(lineno,
                               "space must be continuous or discontinuous");
    } else if (key == "gamma") {
      cfg.gamma = detail::parse_double(val, lineno);
    } else if (key == "gamma_bc") {
      cfg.gamma_bc = detail::parse_double(val, lineno);
    } else if (key == "data_side") {
      if (val == "inflow") cfg.data_side = DataSide::Inflow;
      else if (val == "outflow") cfg.data_side = DataSide::Outflow;
      else detail::config_fail(lineno, "data_side must be inflow or outflow");
    } else if (key == "levels") {
      cfg.levels = detail::parse_levels(val, lineno);
    } else if (key == "perturb_amplitude") {
      cfg.perturb_amplitude = detail::parse_double(val, lineno);
      if (cfg.perturb_amplitude < 0.0 || cfg.perturb_amplitude >= 0.3)
        detail::config_fail(lineno, "perturb_amplitude must lie in [0, 0.3)");
    } else if (key == "perturb_seed") {
      cfg.perturb_seed =
          static_cast<std::uint64_t>(detail::parse_int(val, lineno));
    } else if (key == "solver_tol") {
      cfg.solver_tol = detail::parse_double(val, lineno);
      if (cfg.solver_tol <= 0.0)
        detail::config_fail(lineno, "solver_tol must be positive");
    } else if (key == "vtk") {
      cfg.vtk = detail::parse_bool(val, lineno);
    } else if (key == "allow_failures") {
      cfg.allow_failures = detail::parse_bool(val, lineno);
    } else if (key == "epsilons") {
      cfg.epsilons = detail::parse_double_list(val, lineno);
    } else if (key == "gammas") {
      cfg.gammas = detail::parse_double_list(val, lineno);
    } else if (key == "sweep_n") {
      const long long n = detail::parse_int(val, lineno);
      if (n < 1 || n > 4096) detail::config_fail(lineno, "sweep_n out of range");
      cfg.sweep_n = static_cast<int>(n);
    } else {
      detail::config_fail(lineno, "unknown key '" + key + "'");
    }
  }

  // Cross-field validation.
  if (cfg.continuity() != required_continuity(cfg.method))
    throw ConfigError(
        std::string("config: method ") + to_string(cfg.method) + " with a " +
        (cfg.continuity() == Continuity::Continuous ? "continuous"
                                                    : "discontinuous") +
        " space is not a valid combination");
  const bool needs_eps =
      cfg.velocity == 3 &&
      (cfg.case_name == "smooth" || cfg.case_name == "zero") &&
      cfg.mode != "sweep";
  if (needs_eps && (!cfg.epsilon || *cfg.epsilon <= 0.0))
    throw ConfigError("config: velocity 3 requires epsilon > 0");
  if (cfg.mode == "sweep" && cfg.epsilons.empty())
    throw ConfigError("config: sweep mode requires an epsilons list");
  if (cfg.mode == "sweep")
    for (const double e : cfg.epsilons)
      if (!(e > 0.0))
        throw ConfigError("config: sweep epsilons must be positive");
  return cfg;
}

inline ProblemCase make_case(const RunConfig& cfg) {
  const double eps = cfg.epsilon.value_or(0.0);
  if (cfg.case_name == "smooth") return smooth_case(cfg.velocity, eps);
  if (cfg.case_name == "discontinuous") return discontinuous_case();
  return zero_case(cfg.velocity, eps);
}

}  // namespace hypstab
