#ifndef ANISOCRIT_CONFIG_HPP
#define ANISOCRIT_CONFIG_HPP

// Run configuration read from a YAML file:
//
//   problem: {N: 3, p: 2, q: 4, lambda: 50, require_regime: true}
//   norm:    {family: euclidean | weighted-quadratic | lr, matrix: [[..]], r: 4, delta: 0,
//             dual: analytic | numeric}
//   domain:  {type: half-ball | ball | box | cone-sector, radius: 1, lower: [..], upper: [..],
//             opening: 1.57, resolution: 16, curvatures: [..]}
//   solver:  {tolerance: 1e-6, max_iterations: 3000, knots: 21, armijo: 1e-4, max_step: 0.1,
//             respace_every: 0, C_hat: 1, seed: 7, init_eps: 1e-2, refine_resolution: 24}
//   sweep:   {eps: [..], lambda: [..]}
//   checks:  {samples: 1000, seed: 7, tolerance: 1e-10}
//   output:  {dir: out, prefix: run}

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anisocrit/anisotropy.hpp"
#include "anisocrit/discretization.hpp"
#include "anisocrit/error.hpp"
#include "anisocrit/solver.hpp"

namespace anisocrit {

/// Parse or validation failure; `line` and `column` are 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, int line, int column, const std::string& message);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

struct NormConfig {
  std::string family = "euclidean";
  Eigen::MatrixXd matrix;  // weighted-quadratic
  double r = 2.0;          // lr
  double delta = 0.0;
  std::optional<DualMode> dual;  // default: analytic when available

  Norm<double> build(int N) const;
  DualNorm<double> build_dual(int N) const;
};

struct DomainConfig {
  std::string type = "half-ball";
  double radius = 1.0;
  std::vector<double> lower;  // box
  std::vector<double> upper;
  double opening = 1.5707963267948966;  // cone sector
  int resolution = 16;
  std::optional<std::vector<double>> curvatures;  // overrides the domain's own

  DomainSpec build(int N) const;
  std::vector<double> boundary_curvatures(int N) const;
};

struct SolverConfig {
  MountainPassOptions options;
  double init_eps = 1e-2;
  int refine_resolution = 0;  // 0: no refinement check
};

struct SweepConfig {
  std::vector<double> eps{1e-1, 1e-2, 1e-3};
  std::vector<double> lambda;  // empty: the problem's lambda
};

struct ChecksConfig {
  int samples = 1000;
  std::uint64_t seed = 7;
  double tolerance = 1e-10;
};

struct OutputConfig {
  std::filesystem::path dir = ".";
  std::string prefix = "run";
};

struct RunConfig {
  std::string source = "<defaults>";
  int N = 3;
  double p = 2.0;
  double q = 4.0;
  double lambda = 50.0;
  bool require_regime = true;
  NormConfig norm;
  DomainConfig domain;
  SolverConfig solver;
  SweepConfig sweep;
  ChecksConfig checks;
  OutputConfig output;

  double critical_exponent() const { return p * N / (N - p); }
  ProblemParams params() const;
  /// The effective configuration, defaults included, as YAML.
  std::string echo() const;
};

RunConfig parse_config(const std::filesystem::path& path);
/// `source` names the text in error messages.
RunConfig parse_config_string(const std::string& text, const std::string& source = "<string>");
/// Cross-field checks; throws ConfigError at `source` without a location.
void validate_config(const RunConfig& config);

}  // namespace anisocrit

#endif  // ANISOCRIT_CONFIG_HPP
