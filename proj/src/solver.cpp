#include "anisocrit/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "anisocrit/error.hpp"
#include "anisocrit/sampling.hpp"

namespace anisocrit {

namespace {

constexpr double kTieTolerance = 1e-14;
constexpr double kPeakTolerance = 0.1;

}  // namespace

FiberingCoefficients fibering_coefficients(const ProblemParams& params, const GridFunction& u) {
  if (u.values().cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorKind::ZeroFunction, "fibering coefficients of the zero function");
  }
  const EnergyTerms t = energy_terms(params, u.mesh(), u.values());
  return {t.gradient + t.p_term, t.q_term, t.critical};
}

double fibering_value(const FiberingCoefficients& c, const ProblemParams& params, double t) {
  const double ps = params.critical_exponent();
  return std::pow(t, params.p) / params.p * c.A - params.lambda * std::pow(t, params.q) / params.q * c.B -
         std::pow(t, ps) / ps * c.C;
}

FiberingMaximum fibering_maximize(const FiberingCoefficients& c, const ProblemParams& params) {
  if (c.degenerate()) {
    throw Error(ErrorKind::Degenerate, "direction has no positive part; J(tu) has no maximizer");
  }
  if (!(c.C > 0.0)) throw Error(ErrorKind::Degenerate, "fibering maximum needs C > 0");
  if (!(c.A > 0.0)) throw Error(ErrorKind::InvalidArgument, "fibering maximum needs A > 0");
  const double p = params.p;
  const double e = params.critical_exponent() - p;
  const double f = params.q - p;
  const double lambda = params.lambda;
  auto phi = [&](double t) { return c.A - lambda * c.B * std::pow(t, f) - c.C * std::pow(t, e); };
  auto dphi = [&](double t) {
    return -lambda * c.B * f * std::pow(t, f - 1.0) - c.C * e * std::pow(t, e - 1.0);
  };

  FiberingMaximum out;
  double lo = 0.0;
  double hi = 2.0 * std::pow(c.A / c.C, 1.0 / e);
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > 0.0 ? lo : hi) = mid;
    ++out.iterations;
  }
  double t = 0.5 * (lo + hi);
  for (int k = 0; k < 50; ++k) {
    const double step = phi(t) / dphi(t);
    double next = t - step;
    if (!(next >= lo && next <= hi)) next = next < lo ? lo : hi;
    if (next == t && phi(t) != 0.0) next = 0.5 * (lo + hi);
    const double value = phi(next);
    (value > 0.0 ? lo : hi) = next;
    ++out.iterations;
    const bool done = value == 0.0 || std::abs(next - t) <= 1e-14 * next;
    t = next;
    if (done) break;
  }
  out.t = t;
  out.Y = fibering_value(c, params, t);
  return out;
}

LevelThreshold level_threshold(const ProblemParams& params, double C_hat) {
  if (!(C_hat > 0.0)) throw Error(ErrorKind::InvalidArgument, "C_hat must be positive");
  LevelThreshold l;
  l.S = whole_space_constants(params.N, params.p).S;
  l.C_hat = C_hat;
  const double level = std::pow(l.S, params.N / params.p) / (2.0 * params.N);
  l.value = level / C_hat;
  const auto eq = params.norm.equivalence_constants();
  l.C_hat_sampled = std::pow(eq.upper / eq.lower, params.p);
  l.value_sampled = level / l.C_hat_sampled;
  return l;
}

std::vector<SweepRow> critical_level_sweep(const ProblemParams& params, const std::vector<double>& eps,
                                           std::shared_ptr<const Mesh> mesh, const DomainSpec& domain,
                                           double C_hat) {
  params.validate();
  if (!(params.lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "the level sweep needs lambda > 0");
  if (!params.theorem_regime()) {
    throw Error(ErrorKind::InvalidArgument, "the level sweep needs N >= p^2 or N = p^2 - p + 1");
  }
  const LevelThreshold thr = level_threshold(params, C_hat);
  auto dual = std::make_shared<const DualNorm<double>>(DualNorm<double>::best(params.norm));
  std::vector<SweepRow> rows;
  for (double e : eps) {
    const ExtremalSpec spec = u_eps(params.N, params.p, e, domain.concentration_point(), dual);
    const GridFunction u = interpolate_extremal(spec, mesh);
    SweepRow row;
    row.eps = e;
    row.scale = spec.lambda;
    const double peak = extremal_profile(spec, 0.0);
    row.peak_error = std::abs(u.values().maxCoeff() - peak) / peak;
    if (row.peak_error > kPeakTolerance) {
      std::ostringstream os;
      os << "mesh does not resolve u_eps at eps=" << e << ": peak value error " << row.peak_error;
      throw Error(ErrorKind::Resolution, os.str());
    }
    row.coefficients = fibering_coefficients(params, u);
    const FiberingMaximum m = fibering_maximize(row.coefficients, params);
    row.t = m.t;
    row.Y = m.Y;
    row.threshold = thr.value;
    row.margin = thr.value - m.Y;
    row.threshold_sampled = thr.value_sampled;
    row.margin_sampled = thr.value_sampled - m.Y;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Mountain pass

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Stagnation: return "stagnation";
    case SolveStatus::IterationCap: return "iteration-cap";
  }
  return "unknown";
}

GridFunction mountain_pass_endpoint(const ProblemParams& params, const GridFunction& direction) {
  const FiberingCoefficients c = fibering_coefficients(params, direction);
  if (c.degenerate()) throw Error(ErrorKind::Degenerate, "endpoint direction has no positive part");
  double t = fibering_maximize(c, params).t;
  for (int k = 0; k < 200; ++k, t *= 2.0) {
    if (fibering_value(c, params, t) < 0.0) return direction.with_values(t * direction.values());
  }
  throw Error(ErrorKind::Degenerate, "J(t u) stays nonnegative along the endpoint direction");
}

MountainPassGeometry validate_geometry(const ProblemParams& params, const GridFunction& endpoint, int samples,
                                       std::uint64_t seed) {
  const Mesh& mesh = endpoint.mesh();
  MountainPassGeometry g;
  g.endpoint_J = energy(params, mesh, endpoint.values());
  if (!(g.endpoint_J < 0.0)) {
    std::ostringstream os;
    os << "endpoint has J(e) = " << g.endpoint_J << " >= 0";
    throw Error(ErrorKind::GeometryViolation, os.str());
  }
  std::vector<Eigen::VectorXd> dirs;
  dirs.push_back(endpoint.values());
  dirs.push_back(Eigen::VectorXd::Ones(mesh.num_nodes()));
  for (int i = 0; i < samples; ++i) {
    auto engine = sample_engine(seed, static_cast<std::uint64_t>(i));
    dirs.push_back(gaussian_vector<double>(engine, mesh.num_nodes()).cwiseAbs());
  }
  for (auto& d : dirs) d /= anisotropic_norm(params, mesh, d);

  const double e_norm = anisotropic_norm(params, mesh, endpoint.values());
  double theta = e_norm;
  for (int k = 0; k < 40; ++k) {
    theta *= 0.5;
    double beta = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs) beta = std::min(beta, energy(params, mesh, theta * d));
    if (beta > 0.0) {
      g.theta = theta;
      g.beta = beta;
      return g;
    }
  }
  throw Error(ErrorKind::GeometryViolation, "no sphere ||u|| = theta with J >= beta > 0 was found");
}

namespace {

class PathState {
 public:
  PathState(const ProblemParams& params, std::shared_ptr<const Mesh> mesh, const Eigen::VectorXd& endpoint,
            int knots)
      : params_(params), mesh_(std::move(mesh)) {
    for (int i = 0; i < knots; ++i) {
      knots_.push_back(endpoint * (static_cast<double>(i) / (knots - 1)));
    }
    refresh();
  }

  int size() const { return static_cast<int>(knots_.size()); }
  const Eigen::VectorXd& knot(int i) const { return knots_[static_cast<std::size_t>(i)]; }
  double J(int i) const { return energy_[static_cast<std::size_t>(i)]; }

  void set(int i, Eigen::VectorXd u, double J) {
    knots_[static_cast<std::size_t>(i)] = std::move(u);
    energy_[static_cast<std::size_t>(i)] = J;
  }

  int max_knot() const {
    int k = 0;
    for (int i = 1; i < size(); ++i) {
      if (J(i) > J(k) + kTieTolerance) k = i;
    }
    return k;
  }

  // Equal arc length in the anisotropic norm on each side of knot `pin`,
  // which is kept. Returns its new index.
  int respace(int pin) {
    const int n = size();
    std::vector<double> arc(static_cast<std::size_t>(n), 0.0);
    for (int i = 1; i < n; ++i) {
      arc[static_cast<std::size_t>(i)] =
          arc[static_cast<std::size_t>(i - 1)] + anisotropic_norm(params_, *mesh_, knot(i) - knot(i - 1));
    }
    const double total = arc.back();
    if (!(total > 0.0)) return pin;
    const double at = arc[static_cast<std::size_t>(pin)];
    const int m = std::clamp(static_cast<int>(std::lround((n - 1) * at / total)), 1, n - 2);

    auto point = [&](double target) {
      int seg = 0;
      while (seg < n - 2 && arc[static_cast<std::size_t>(seg + 1)] < target) ++seg;
      const double len = arc[static_cast<std::size_t>(seg + 1)] - arc[static_cast<std::size_t>(seg)];
      const double s = len > 0.0 ? std::clamp((target - arc[static_cast<std::size_t>(seg)]) / len, 0.0, 1.0) : 0.0;
      return Eigen::VectorXd(knot(seg) + s * (knot(seg + 1) - knot(seg)));
    };
    std::vector<Eigen::VectorXd> next{knot(0)};
    for (int j = 1; j < m; ++j) next.push_back(point(at * j / m));
    next.push_back(knot(pin));
    for (int j = m + 1; j < n - 1; ++j) next.push_back(point(at + (total - at) * (j - m) / (n - 1 - m)));
    next.push_back(knot(n - 1));
    knots_ = std::move(next);
    refresh();
    return m;
  }

 private:
  void refresh() {
    energy_.resize(knots_.size());
    for (std::size_t i = 0; i < knots_.size(); ++i) energy_[i] = energy(params_, *mesh_, knots_[i]);
  }

  const ProblemParams& params_;
  std::shared_ptr<const Mesh> mesh_;
  std::vector<Eigen::VectorXd> knots_;
  std::vector<double> energy_;
};

// Lifts knot k to the maximum of J on the ray through it. Along the initial
// path the ray is the path itself; later it keeps J(knot) >= the minimax level.
void lift_max_knot(const ProblemParams& params, const Mesh& mesh, PathState& path, int k) {
  const Eigen::VectorXd& u = path.knot(k);
  if ((u.array() > 0.0).count() == 0) return;
  const EnergyTerms t = energy_terms(params, mesh, u);
  const FiberingCoefficients c{t.gradient + t.p_term, t.q_term, t.critical};
  if (!(c.C > 0.0) || !(c.A > 0.0)) return;
  const double s = fibering_maximize(c, params).t;
  Eigen::VectorXd lifted = s * u;
  const double J = energy(params, mesh, lifted);
  if (J > path.J(k)) path.set(k, std::move(lifted), J);
}

}  // namespace

SolveReport mountain_pass_solve(const ProblemParams& params, const GridFunction& endpoint,
                                const MountainPassOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  if (options.knots < 3) throw Error(ErrorKind::InvalidArgument, "a path needs at least 3 knots");
  if (!(options.tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  const auto mesh = endpoint.mesh_ptr();
  if (mesh->dimension() != params.N) throw Error(ErrorKind::DimensionMismatch, "mesh dimension differs from N");

  SolveReport rep;
  rep.geometry = validate_geometry(params, endpoint, options.geometry_samples, options.seed);
  rep.threshold = level_threshold(params, options.C_hat);
  const SobolevPreconditioner precond(*mesh);
  PathState path(params, mesh, endpoint.values(), options.knots);
  const double ps = params.critical_exponent();

  int k = 0;
  Eigen::VectorXd r;
  double residual = 0.0;
  for (int it = 0;; ++it) {
    k = path.max_knot();
    if (k == 0 || k == path.size() - 1) {
      throw Error(ErrorKind::Consistency, "path maximum reached an endpoint of the path");
    }
    lift_max_knot(params, *mesh, path, k);
    r = assemble_residual(params, *mesh, path.knot(k));
    residual = precond.dual_norm(r);

    PSRecord rec;
    rec.iteration = it;
    rec.J = path.J(k);
    rec.residual = residual;
    rec.norm = anisotropic_norm(params, *mesh, path.knot(k));
    rec.bound = rec.J - r.dot(path.knot(k)) / ps;
    rep.history.push_back(rec);
    if (it == 0) rep.path_level = rec.J;

    rep.iterations = it;
    if (residual < options.tolerance) {
      rep.status = SolveStatus::Converged;
      break;
    }
    if (it >= options.max_iterations) {
      rep.status = SolveStatus::IterationCap;
      break;
    }

    const Eigen::VectorXd d = precond.apply(r);
    const double slope = r.dot(d);
    const double J0 = path.J(k);
    double alpha = std::min(1.0, options.max_step * precond.primal_norm(path.knot(k)) / precond.primal_norm(d));
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, alpha *= 0.5) {
      Eigen::VectorXd trial = path.knot(k) - alpha * d;
      const double Jt = energy(params, *mesh, trial);
      if (Jt <= J0 - options.armijo * alpha * slope) {
        path.set(k, std::move(trial), Jt);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.status = SolveStatus::Stagnation;
      break;
    }
    if (options.respace_every > 0 && (it + 1) % options.respace_every == 0) path.respace(k);
  }

  const GridFunction u = endpoint.with_values(path.knot(k));
  rep.max_knot = k;
  rep.J = path.J(k);
  rep.residual = residual;
  rep.residual_sup = r.cwiseAbs().maxCoeff();
  rep.min_u = u.values().minCoeff();
  rep.sup_u = u.values().cwiseAbs().maxCoeff();
  rep.norm = anisotropic_norm(params, u);
  rep.below_threshold = rep.J < rep.threshold.value;
  rep.solution = u;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

SolveReport solve_existence(const ProblemParams& params, const ExistenceRun& run,
                            const MountainPassOptions& options) {
  params.validate();
  if (run.domain.dimension != params.N) throw Error(ErrorKind::DimensionMismatch, "domain dimension differs from N");
  const auto mesh = build_mesh(run.domain, run.resolution);
  auto dual = std::make_shared<const DualNorm<double>>(DualNorm<double>::best(params.norm));
  const ExtremalSpec spec = u_eps(params.N, params.p, run.init_eps, run.domain.concentration_point(), dual);
  const GridFunction e = mountain_pass_endpoint(params, interpolate_extremal(spec, mesh));
  return mountain_pass_solve(params, e, options);
}

SolutionDiagnostics verify_solution(const ProblemParams& params, const GridFunction& u) {
  const EnergyReport e = assemble_energy(params, u);
  SolutionDiagnostics d;
  d.residual = e.residual_dual;
  d.residual_sup = e.residual_sup;
  d.min_u = e.min_u;
  d.max_u = e.max_u;
  d.sup_u = u.values().cwiseAbs().maxCoeff();
  d.J = e.J;
  d.interior_min = std::numeric_limits<double>::infinity();
  const auto& boundary = u.mesh().boundary_nodes();
  for (Eigen::Index i = 0; i < u.values().size(); ++i) {
    if (!boundary[static_cast<std::size_t>(i)]) d.interior_min = std::min(d.interior_min, u.values()[i]);
  }
  if (!std::isfinite(d.interior_min)) d.interior_min = d.min_u;
  d.nonnegative = d.min_u >= -1e-8;
  return d;
}

RefinementCheck refinement_stability(const ProblemParams& params, const ExistenceRun& coarse, int fine_resolution,
                                     const MountainPassOptions& options) {
  RefinementCheck c;
  c.coarse = solve_existence(params, coarse, options);
  ExistenceRun fine = coarse;
  fine.resolution = fine_resolution;
  c.fine = solve_existence(params, fine, options);
  c.sup_change = std::abs(c.fine.sup_u - c.coarse.sup_u) / c.coarse.sup_u;
  c.stable = c.sup_change < 0.1;
  return c;
}

}  // namespace anisocrit
