#include "anisocrit/extremals.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "anisocrit/error.hpp"
#include "anisocrit/quadrature.hpp"

namespace anisocrit {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kGradientCutoff = 1e-14;
constexpr unsigned kMaxDepth = 30;

void require_profile_parameters(int N, double p) {
  if (N < 2 || !(p > 1.0) || !(p < N)) {
    std::ostringstream os;
    os << "extremal needs 1 < p < N (p=" << p << ", N=" << N << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
}

double critical_exponent(int N, double p) { return p * N / (N - p); }

// int_lower^upper f(r) dr after r = lower + scale * s / (1 - s)
template <typename F>
double radial_integral(F&& f, double scale, double upper, double tol, double* error, double lower = 0.0) {
  const double s_max = std::isinf(upper) ? 1.0 : (upper - lower) / (upper - lower + scale);
  auto g = [&](double s) {
    if (s >= 1.0) return 0.0;
    const double r = lower + scale * s / (1.0 - s);
    return f(r) * scale / ((1.0 - s) * (1.0 - s));
  };
  double err = 0.0;
  const double v = gauss_kronrod<double, 31>::integrate(g, 0.0, s_max, kMaxDepth, tol, &err);
  if (error) *error = err;
  return v;
}

// Hyperspherical product rule on S^{m-1}: Gauss-Legendre in the polar angles,
// trapezoid in the azimuth.
struct SphereRule {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
};

SphereRule sphere_rule(int m, int n) {
  SphereRule rule;
  if (m == 1) {
    rule.points = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -1.0)};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  const int azimuth = 2 * n;
  const GaussRule polar = gauss_legendre(n, 0.0, std::numbers::pi);
  const int levels = m - 2;
  std::vector<int> idx(static_cast<std::size_t>(levels), 0);
  for (;;) {
    double w_polar = 1.0;
    Eigen::VectorXd head(m);
    double sin_prod = 1.0;
    for (int j = 0; j < levels; ++j) {
      const double th = polar.nodes[idx[static_cast<std::size_t>(j)]];
      w_polar *= polar.weights[idx[static_cast<std::size_t>(j)]] * std::pow(std::sin(th), m - 2 - j);
      head[j] = sin_prod * std::cos(th);
      sin_prod *= std::sin(th);
    }
    for (int k = 0; k < azimuth; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / azimuth;
      Eigen::VectorXd x = head;
      x[m - 2] = sin_prod * std::cos(phi);
      x[m - 1] = sin_prod * std::sin(phi);
      rule.points.push_back(std::move(x));
      rule.weights.push_back(w_polar * 2.0 * std::numbers::pi / azimuth);
    }
    int j = 0;
    while (j < levels && ++idx[static_cast<std::size_t>(j)] == n) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == levels) break;
  }
  return rule;
}

}  // namespace

double kappa(double p, int N) {
  return std::pow(static_cast<double>(N), 1.0 / p) * std::pow((N - p) / (p - 1.0), (p - 1.0) / p);
}

const char* to_string(Amplitude a) {
  return a == Amplitude::Extremal ? "extremal" : "unit-profile";
}

double ExtremalSpec::amplitude_constant() const {
  return amplitude == Amplitude::Extremal ? kappa(p, N) : 1.0;
}

void ExtremalSpec::validate() const {
  require_profile_parameters(N, p);
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "extremal scale lambda must be positive");
  if (!dual) throw Error(ErrorKind::InvalidArgument, "extremal needs a dual norm");
  if (center.size() != N || dual->source().dimension() != N) {
    throw Error(ErrorKind::DimensionMismatch, "extremal center and norm must have dimension N");
  }
}

ExtremalSpec make_extremal(int N, double p, double lambda, Eigen::VectorXd center,
                           std::shared_ptr<const DualNorm<double>> dual, Amplitude amplitude) {
  ExtremalSpec s;
  s.N = N;
  s.p = p;
  s.lambda = lambda;
  s.center = std::move(center);
  s.dual = std::move(dual);
  s.amplitude = amplitude;
  s.validate();
  return s;
}

double eps_scale(double eps, double p) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  return std::pow(eps, (p - 1.0) / p);
}

ExtremalSpec u_eps(int N, double p, double eps, Eigen::VectorXd center,
                   std::shared_ptr<const DualNorm<double>> dual, Amplitude amplitude) {
  return make_extremal(N, p, eps_scale(eps, p), std::move(center), std::move(dual), amplitude);
}

double extremal_profile(const ExtremalSpec& spec, double rho) {
  const double pc = conjugate(spec.p);
  const double num = std::pow(spec.lambda, 1.0 / (spec.p - 1.0)) * spec.amplitude_constant();
  const double den = std::pow(spec.lambda, pc) + std::pow(rho, pc);
  return std::pow(num / den, (spec.N - spec.p) / spec.p);
}

double extremal_profile_derivative(const ExtremalSpec& spec, double rho) {
  if (rho <= 0.0) return 0.0;
  const double pc = conjugate(spec.p);
  const double den = std::pow(spec.lambda, pc) + std::pow(rho, pc);
  return -(spec.N - spec.p) / (spec.p - 1.0) * extremal_profile(spec, rho) *
         std::pow(rho, 1.0 / (spec.p - 1.0)) / den;
}

double extremal_value(const ExtremalSpec& spec, const Eigen::VectorXd& x) {
  return extremal_profile(spec, spec.dual->reflected(x - spec.center));
}

Eigen::VectorXd extremal_gradient(const ExtremalSpec& spec, const Eigen::VectorXd& x) {
  const Eigen::VectorXd z = x - spec.center;
  const double rho = spec.dual->reflected(z);
  if (rho == 0.0) return Eigen::VectorXd::Zero(z.size());
  return extremal_profile_derivative(spec, rho) * spec.dual->reflected_gradient(z);
}

WholeSpaceConstants whole_space_constants(const ExtremalSpec& spec, MomentMethod method) {
  spec.validate();
  if (spec.dual->source().family() != NormFamily::Euclidean) {
    throw Error(ErrorKind::UnsupportedReduction,
                "radial reduction of K1, K2 needs the euclidean norm; use grid quadrature for " +
                    spec.dual->source().describe());
  }
  if (spec.N < 3) throw Error(ErrorKind::InvalidArgument, "whole-space constants need N >= 3");
  const int N = spec.N;
  const double p = spec.p;
  const double ps = critical_exponent(N, p);
  const double area = sphere_area(N);
  WholeSpaceConstants k;
  if (method == MomentMethod::BetaClosedForm) {
    const double c = spec.amplitude_constant();
    k.K1 = std::pow(c, N - p) * std::pow((N - p) / (p - 1.0), p) * area *
           radial_moment(N - 1.0 + conjugate(p), p, N).value;
    k.K2 = std::pow(c, N) * area * radial_moment(N - 1.0, p, N).value;
  } else {
    const double inf = std::numeric_limits<double>::infinity();
    k.K1 = area * radial_integral(
                      [&](double r) {
                        return std::pow(std::abs(extremal_profile_derivative(spec, r)), p) *
                               std::pow(r, N - 1);
                      },
                      spec.lambda, inf, 1e-12, nullptr);
    k.K2 = area * radial_integral(
                      [&](double r) { return std::pow(extremal_profile(spec, r), ps) * std::pow(r, N - 1); },
                      spec.lambda, inf, 1e-12, nullptr);
  }
  k.S = k.K1 / std::pow(k.K2, p / ps);
  return k;
}

WholeSpaceConstants whole_space_constants(int N, double p) {
  auto dual = std::make_shared<const DualNorm<double>>(DualNorm<double>::analytic(Norm<double>::euclidean(N)));
  return whole_space_constants(
      make_extremal(N, p, 1.0, Eigen::VectorXd::Zero(N), dual, Amplitude::UnitProfile));
}

WholeSpaceConstants grid_quadrature_constants(const ExtremalSpec& spec, const GridQuadratureOptions& options) {
  spec.validate();
  if (options.points_per_axis < 2 || !(options.radius > 0.0) || !(options.grading > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid quadrature options out of range");
  }
  const int N = spec.N;
  const double p = spec.p;
  const double ps = critical_exponent(N, p);
  const Norm<double>& norm = spec.dual->source();
  const double radius = options.radius * spec.lambda;
  // H0^(z) >= |z| / C2, so the box of half-width C2 * radius covers the H0^-ball
  const double half_width = radius * norm.equivalence_constants().upper;
  const double c = options.grading;
  const GaussRule rule = gauss_legendre(options.points_per_axis);
  const int n = options.points_per_axis;
  Eigen::VectorXd x1(n), w1(n);
  for (int i = 0; i < n; ++i) {
    const double s = rule.nodes[i];
    x1[i] = half_width * std::sinh(c * s) / std::sinh(c);
    w1[i] = rule.weights[i] * half_width * c * std::cosh(c * s) / std::sinh(c);
  }

  double k1 = 0.0;
  double k2 = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(N), 0);
  Eigen::VectorXd z(N);
  for (;;) {
    double w = 1.0;
    for (int d = 0; d < N; ++d) {
      z[d] = x1[idx[static_cast<std::size_t>(d)]];
      w *= w1[idx[static_cast<std::size_t>(d)]];
    }
    const double rho = spec.dual->reflected(z);
    if (rho < radius) {
      const Eigen::VectorXd x = spec.center + z;
      const Eigen::VectorXd g = extremal_gradient(spec, x);
      if (g.norm() >= kGradientCutoff) k1 += w * std::pow(norm.value(g), p);
      k2 += w * std::pow(extremal_profile(spec, rho), ps);
    }
    int d = 0;
    while (d < N && ++idx[static_cast<std::size_t>(d)] == n) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == N) break;
  }
  WholeSpaceConstants k;
  k.K1 = k1;
  k.K2 = k2;
  k.S = k1 / std::pow(k2, p / ps);
  return k;
}

double Cutoff::operator()(double rho) const {
  if (rho <= inner) return 1.0;
  if (rho >= outer) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * (rho - inner) / (outer - inner));
  return c * c;
}

GridFunction interpolate_extremal(const ExtremalSpec& spec, std::shared_ptr<const Mesh> mesh,
                                  std::optional<Cutoff> cutoff) {
  spec.validate();
  if (mesh->dimension() != spec.N) throw Error(ErrorKind::DimensionMismatch, "mesh dimension differs from N");
  if (cutoff && !(cutoff->outer > cutoff->inner && cutoff->inner >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "cutoff needs 0 <= inner < outer");
  }
  return GridFunction::interpolate(std::move(mesh), [&](const Eigen::VectorXd& x) {
    const double rho = spec.dual->reflected(Eigen::VectorXd(x - spec.center));
    const double u = extremal_profile(spec, rho);
    return cutoff ? u * (*cutoff)(rho) : u;
  });
}

double sobolev_quotient(const GridFunction& u, double p, const Norm<double>& norm) {
  const Mesh& mesh = u.mesh();
  const int N = mesh.dimension();
  require_profile_parameters(N, p);
  if (norm.dimension() != N) throw Error(ErrorKind::DimensionMismatch, "norm dimension differs from mesh");
  if (u.values().cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorKind::ZeroFunction, "Sobolev quotient of the zero function");
  }
  const double ps = critical_exponent(N, p);
  double num = 0.0;
  double den = 0.0;
  for_each_quadrature_point(mesh, u.values(), [&](Eigen::Index, int, double value, const Eigen::VectorXd& grad,
                                                  double w) {
    if (grad.norm() >= kGradientCutoff) num += w * std::pow(norm.value(grad), p);
    den += w * std::pow(std::abs(value), ps);
  });
  if (den == 0.0) throw Error(ErrorKind::ZeroFunction, "u vanishes at every quadrature point");
  return num / std::pow(den, p / ps);
}

HalfSpaceQuotient half_space_quotient(double p, std::shared_ptr<const Mesh> mesh, double lambda, Cutoff cutoff) {
  const int N = mesh->dimension();
  require_profile_parameters(N, p);
  if (!(cutoff.inner >= 0.0 && cutoff.inner < cutoff.outer)) {
    throw Error(ErrorKind::InvalidArgument, "cutoff needs 0 <= inner < outer");
  }
  const auto h = Norm<double>::euclidean(N);
  auto dual = std::make_shared<const DualNorm<double>>(DualNorm<double>::analytic(h));
  const ExtremalSpec spec = make_extremal(N, p, lambda, Eigen::VectorXd::Zero(N), dual);
  HalfSpaceQuotient q;
  q.lambda = lambda;
  q.cutoff = cutoff;
  q.quotient = sobolev_quotient(interpolate_extremal(spec, mesh, cutoff), p, h);
  q.S = whole_space_constants(N, p).S;
  q.reference = std::pow(2.0, -p / N) * q.S;
  q.ratio = q.quotient / q.reference;
  return q;
}

// ---------------------------------------------------------------------------
// Strip integrals

namespace {

struct StripModel {
  ExtremalSpec spec;
  GaussRule inner;
  double tol;

  // int_0^{t_max} f(sqrt(rho^2 + t^2)) dt, t = rho tan(psi)
  template <typename F>
  double column(F&& f, double rho, double t_max) const {
    if (t_max <= 0.0 || rho <= 0.0) return 0.0;
    const double psi_max = std::atan(t_max / rho);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < inner.nodes.size(); ++i) {
      const double psi = 0.5 * psi_max * (inner.nodes[i] + 1.0);
      const double sec = 1.0 / std::cos(psi);
      sum += inner.weights[i] * f(rho * sec) * rho * sec * sec;
    }
    return 0.5 * psi_max * sum;
  }

  // int_0^{rho_max} rho^{m-1} column(rho, min(a rho^2 / 2, sqrt(R^2 - rho^2))) drho
  template <typename F>
  double strip(F&& f, double a, double rho_max, double* error) const {
    if (a <= 0.0) {
      if (error) *error = 0.0;
      return 0.0;
    }
    const int m = spec.N - 1;
    const bool bounded = std::isfinite(rho_max);
    auto integrand = [&](double rho) {
      double t_max = 0.5 * a * rho * rho;
      if (bounded) t_max = std::min(t_max, std::sqrt(std::max(0.0, rho_max * rho_max - rho * rho)));
      return std::pow(rho, m - 1) * column(f, rho, t_max);
    };
    // the strip turns from thin to thick near rho = 2/a, far outside the
    // concentration scale, so the regimes are integrated separately
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    double v = 0.0;
    if (!bounded) {
      const double split = 2.0 / a;
      v = radial_integral(integrand, spec.lambda, split, tol, &e1) +
          radial_integral(integrand, split, rho_max, tol, &e2, split);
    } else {
      // a rho^2 / 2 meets the sphere of radius R at rho_k; beyond it the cap
      // height sqrt(R^2 - rho^2) is smoothed by R - rho = (R - rho_k) v^2
      const double R = rho_max;
      const double rho_k = std::sqrt(2.0 * (std::sqrt(1.0 + a * a * R * R) - 1.0)) / a;
      const double split = std::min(2.0 / a, rho_k);
      v = radial_integral(integrand, spec.lambda, split, tol, &e1);
      if (split < rho_k) {
        v += gauss_kronrod<double, 31>::integrate(integrand, split, rho_k, kMaxDepth, tol, &e2);
      }
      const double gap = R - rho_k;
      auto cap = [&](double w) { return integrand(R - gap * w * w) * 2.0 * gap * w; };
      v += gauss_kronrod<double, 31>::integrate(cap, 0.0, 1.0, kMaxDepth, tol, &e3);
    }
    if (error) *error = e1 + e2 + e3;
    return v;
  }
};

}  // namespace

EpsilonEstimates boundary_strip_integrals(int N, double p, double eps, const std::vector<double>& alpha,
                                          const StripOptions& options) {
  require_profile_parameters(N, p);
  if (N < 3) throw Error(ErrorKind::InvalidArgument, "strip integrals need N >= 3");
  if (static_cast<int>(alpha.size()) != N - 1) {
    throw Error(ErrorKind::DimensionMismatch, "need N-1 curvatures alpha_i");
  }
  for (double a : alpha) {
    if (!(a >= 0.0)) throw Error(ErrorKind::InvalidArgument, "curvatures must be nonnegative");
  }
  if (!(options.model_radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "model radius must be positive");
  const double lambda = eps_scale(eps, p);
  if (lambda < 1e-8 || lambda > 1e8) {
    std::ostringstream os;
    os << "eps=" << eps << " gives concentration scale " << lambda << " outside the resolvable range [1e-8, 1e8]";
    throw Error(ErrorKind::Resolution, os.str());
  }

  auto dual = std::make_shared<const DualNorm<double>>(DualNorm<double>::analytic(Norm<double>::euclidean(N)));
  StripModel model{make_extremal(N, p, lambda, Eigen::VectorXd::Zero(N), dual, options.amplitude),
                   gauss_legendre(options.inner_points), options.tolerance};
  const ExtremalSpec& spec = model.spec;
  const double ps = critical_exponent(N, p);
  auto f_grad = [&](double r) { return std::pow(std::abs(extremal_profile_derivative(spec, r)), p); };
  auto f_crit = [&](double r) { return std::pow(extremal_profile(spec, r), ps); };
  auto f_p = [&](double r) { return std::pow(extremal_profile(spec, r), p); };

  const int m = N - 1;
  const bool uniform = std::all_of(alpha.begin(), alpha.end(), [&](double a) { return a == alpha.front(); });
  if (!uniform && m > 4) {
    throw Error(ErrorKind::UnsupportedReduction, "unequal curvatures are supported for N <= 5 only");
  }

  const double inf = std::numeric_limits<double>::infinity();
  double worst_rel_error = 0.0;
  auto track = [&](double value, double err) {
    if (value > 0.0) worst_rel_error = std::max(worst_rel_error, err / value);
  };
  double I = 0.0, II = 0.0, strip_p = 0.0;
  auto accumulate = [&](double a, double w) {
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    const double i1 = model.strip(f_grad, a, inf, &e1);
    const double i2 = model.strip(f_crit, a, inf, &e2);
    const double i3 = model.strip(f_p, a, options.model_radius, &e3);
    track(i1, e1);
    track(i2, e2);
    track(i3, e3);
    I += w * i1;
    II += w * i2;
    strip_p += w * i3;
  };
  if (uniform) {
    accumulate(alpha.front(), sphere_area(m));
  } else {
    const SphereRule rule = sphere_rule(m, options.angular_points);
    const Eigen::Map<const Eigen::VectorXd> al(alpha.data(), m);
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
      accumulate(al.dot(rule.points[i].cwiseAbs2()), rule.weights[i]);
    }
  }
  if (worst_rel_error > 1e-6) {
    std::ostringstream os;
    os << "strip quadrature at eps=" << eps << " did not resolve the concentration (relative error estimate "
       << worst_rel_error << ")";
    throw Error(ErrorKind::Resolution, os.str());
  }

  const WholeSpaceConstants k = whole_space_constants(spec);
  const double ball_p =
      0.5 * sphere_area(N) *
      radial_integral([&](double r) { return f_p(r) * std::pow(r, N - 1); }, lambda, options.model_radius,
                      options.tolerance, nullptr);

  EpsilonEstimates e;
  e.eps = eps;
  e.lambda = lambda;
  e.I = I;
  e.II = II;
  e.K1eps = k.K1 / 2.0 - I;
  e.K2eps = k.K2 / 2.0 - II;
  e.K3eps = ball_p - strip_p;
  e.I_scaled = I / lambda;
  e.II_scaled = II / lambda;
  e.ratio = II > 0.0 ? I / II : 0.0;
  return e;
}

StripLimits strip_limits(int N, double p, const std::vector<double>& alpha, Amplitude amplitude) {
  require_profile_parameters(N, p);
  if (static_cast<int>(alpha.size()) != N - 1) {
    throw Error(ErrorKind::DimensionMismatch, "need N-1 curvatures alpha_i");
  }
  if (!(N > 2.0 * p - 1.0)) {
    std::ostringstream os;
    os << "strip limits need N > 2p-1 (N=" << N << ", p=" << p << ")";
    throw Error(ErrorKind::DivergentIntegral, os.str());
  }
  double sum = 0.0;
  for (double a : alpha) sum += a;
  const double c = amplitude == Amplitude::Extremal ? kappa(p, N) : 1.0;
  const double geom = sum / (2.0 * (N - 1)) * sphere_area(N - 1);
  StripLimits l;
  l.I_scaled = std::pow(c, N - p) * std::pow((N - p) / (p - 1.0), p) * geom *
               radial_moment(N + conjugate(p), p, N).value;
  l.II_scaled = std::pow(c, N) * geom * radial_moment(static_cast<double>(N), p, N).value;
  l.ratio = limit_I_over_II(p, N);
  return l;
}

}  // namespace anisocrit
