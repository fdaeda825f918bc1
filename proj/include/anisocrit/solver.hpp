#ifndef ANISOCRIT_SOLVER_HPP
#define ANISOCRIT_SOLVER_HPP

// Fibering maps t -> J(tu), the critical-level sweep and a mountain-pass
// solver for the discrete functional.

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "anisocrit/discretization.hpp"
#include "anisocrit/extremals.hpp"

namespace anisocrit {

struct FiberingCoefficients {
  double A = 0;  // int H(grad u)^p + |u|^p
  double B = 0;  // int (u+)^q
  double C = 0;  // int (u+)^{p*}

  /// No positive part: J(tu) grows without bound and no maximizer exists.
  bool degenerate() const { return B == 0.0 && C == 0.0; }
};

FiberingCoefficients fibering_coefficients(const ProblemParams& params, const GridFunction& u);

struct FiberingMaximum {
  double t = 0;  // unique positive root of A - lambda B t^{q-p} - C t^{p*-p}
  double Y = 0;  // J(t u)
  int iterations = 0;
};

/// J(t u) from the coefficients.
double fibering_value(const FiberingCoefficients& c, const ProblemParams& params, double t);
/// Bisection on [0, 2 (A/C)^{1/(p*-p)}], then Newton to rel. 1e-12. Needs C > 0.
FiberingMaximum fibering_maximize(const FiberingCoefficients& c, const ProblemParams& params);

// ---------------------------------------------------------------------------
// Level threshold (1 / (2 N C^)) S^{N/p}

struct LevelThreshold {
  double S = 0;             // euclidean whole-space constant
  double C_hat = 1;         // configured constant
  double value = 0;         // with C_hat
  double C_hat_sampled = 1; // (C2 / C1)^p of the norm
  double value_sampled = 0;
};

LevelThreshold level_threshold(const ProblemParams& params, double C_hat = 1.0);

struct SweepRow {
  double eps = 0;
  double scale = 0;  // eps^{(p-1)/p}
  double t = 0;
  double Y = 0;
  double threshold = 0;
  double margin = 0;  // threshold - Y
  double threshold_sampled = 0;
  double margin_sampled = 0;
  double peak_error = 0;  // |max_h u - U(x0)| / U(x0)
  FiberingCoefficients coefficients;
};

/// Y_eps = sup_t J(t u_eps) for u_eps centered at the domain's concentration
/// point. Resolution error when the peak of u_eps is off by more than 10%.
std::vector<SweepRow> critical_level_sweep(const ProblemParams& params, const std::vector<double>& eps,
                                           std::shared_ptr<const Mesh> mesh, const DomainSpec& domain,
                                           double C_hat = 1.0);

// ---------------------------------------------------------------------------
// Mountain pass

struct MountainPassOptions {
  int knots = 21;
  int max_iterations = 3000;
  double tolerance = 1e-6;  // dual residual norm at the max knot
  double armijo = 1e-4;
  double max_step = 0.1;  // step length cap relative to the max knot, H^1 norm
  int max_halvings = 50;
  int respace_every = 0;  // 0: never; respacing pulls descended knots back onto chords
  double C_hat = 1.0;
  int geometry_samples = 8;
  std::uint64_t seed = 7;
};

enum class SolveStatus { Converged, Stagnation, IterationCap };

const char* to_string(SolveStatus s);

struct PSRecord {
  int iteration = 0;
  double J = 0;
  double residual = 0;
  double norm = 0;   // anisotropic norm of the max knot
  double bound = 0;  // J - <J'(u), u> / p*
};

struct MountainPassGeometry {
  double theta = 0;  // anisotropic-norm radius of the sampled sphere
  double beta = 0;   // min of J over the samples
  double endpoint_J = 0;
};

struct SolveReport {
  std::optional<GridFunction> solution;
  SolveStatus status = SolveStatus::IterationCap;
  double J = 0;
  double residual = 0;      // dual norm
  double residual_sup = 0;
  double min_u = 0;
  double sup_u = 0;         // max |u|
  double norm = 0;
  LevelThreshold threshold;
  bool below_threshold = false;
  double path_level = 0;    // largest max-knot J recorded after the first iteration
  int iterations = 0;
  int max_knot = 0;
  MountainPassGeometry geometry;
  std::vector<PSRecord> history;
  double wall_time = 0;     // seconds; kept out of result files
};

/// Endpoint e = t0 * direction, t0 doubled from the fibering maximizer until J(e) < 0.
/// Degenerate when direction has no positive part.
GridFunction mountain_pass_endpoint(const ProblemParams& params, const GridFunction& direction);

/// Checks J >= beta > 0 on a sphere ||u|| = theta below ||e||, and J(e) < 0.
/// GeometryViolation otherwise.
MountainPassGeometry validate_geometry(const ProblemParams& params, const GridFunction& endpoint,
                                       int samples, std::uint64_t seed);

/// Path t -> t e on `knots` equally spaced knots; Choi-McKenna descent on the
/// max knot with an H^1 preconditioner.
SolveReport mountain_pass_solve(const ProblemParams& params, const GridFunction& endpoint,
                                const MountainPassOptions& options = {});

struct ExistenceRun {
  DomainSpec domain;
  int resolution = 16;
  double init_eps = 1e-2;
};

/// Mesh, u_eps at the concentration point, endpoint and solve.
SolveReport solve_existence(const ProblemParams& params, const ExistenceRun& run,
                            const MountainPassOptions& options = {});

// ---------------------------------------------------------------------------
// Diagnostics

struct SolutionDiagnostics {
  double residual = 0;  // dual norm
  double residual_sup = 0;
  double min_u = 0;
  double max_u = 0;
  double sup_u = 0;
  double interior_min = 0;  // over nodes not on the mesh boundary
  double J = 0;
  bool nonnegative = false;  // min u >= -1e-8
};

SolutionDiagnostics verify_solution(const ProblemParams& params, const GridFunction& u);

struct RefinementCheck {
  SolveReport coarse;
  SolveReport fine;
  double sup_change = 0;  // |sup_fine - sup_coarse| / sup_coarse
  bool stable = false;    // sup_change < 0.1
};

RefinementCheck refinement_stability(const ProblemParams& params, const ExistenceRun& coarse, int fine_resolution,
                                     const MountainPassOptions& options = {});

}  // namespace anisocrit

#endif  // ANISOCRIT_SOLVER_HPP
