#ifndef ANISOCRIT_ANISOTROPY_HPP
#define ANISOCRIT_ANISOTROPY_HPP

// Finsler norms H on R^N, their duals H0 and the operator a(xi) = H^{p-1} grad H.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "anisocrit/error.hpp"
#include "anisocrit/sampling.hpp"

namespace anisocrit {

enum class NormFamily { Euclidean, WeightedQuadratic, Lr, Custom };

inline const char* to_string(NormFamily f) {
  switch (f) {
    case NormFamily::Euclidean: return "euclidean";
    case NormFamily::WeightedQuadratic: return "weighted-quadratic";
    case NormFamily::Lr: return "lr";
    case NormFamily::Custom: return "custom";
  }
  return "unknown";
}

/// C1 |xi| <= H(xi) <= C2 |xi|.
template <typename Scalar>
struct EquivalenceConstants {
  Scalar lower;
  Scalar upper;
  bool analytic;
};

inline constexpr int kEquivalenceSamples = 10000;
inline constexpr std::uint64_t kEquivalenceSeed = 0x4e4f524dULL;

template <typename Scalar = double>
class Norm {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using ValueFn = std::function<Scalar(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  static Norm euclidean(Eigen::Index dim) {
    require_dimension(dim);
    Norm n;
    n.family_ = NormFamily::Euclidean;
    n.dim_ = dim;
    return n;
  }

  /// H(xi) = sqrt(xi^T A xi) for symmetric positive-definite A.
  static Norm weighted_quadratic(const Matrix& a) {
    if (a.rows() != a.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "weighted-quadratic: matrix must be square");
    }
    require_dimension(a.rows());
    const Scalar scale = a.cwiseAbs().maxCoeff();
    if (!(scale > Scalar(0)) || (a - a.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
      throw Error(ErrorKind::NotPositiveDefinite, "weighted-quadratic: matrix must be symmetric");
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::NotPositiveDefinite, "weighted-quadratic: matrix is not positive definite");
    }
    Norm n;
    n.family_ = NormFamily::WeightedQuadratic;
    n.dim_ = a.rows();
    n.matrix_ = a;
    n.inverse_ = llt.solve(Matrix::Identity(a.rows(), a.cols()));
    return n;
  }

  /// l^r norm, optionally smoothed:
  /// H_delta(xi) = (sum (xi_i^2 + delta^2)^{r/2} - N delta^r)^{1/r}.
  /// delta = 0 is only admitted for r >= 2 (C^2 away from the origin).
  static Norm lr(Eigen::Index dim, Scalar r, Scalar delta = Scalar(0)) {
    require_dimension(dim);
    if (!(r > Scalar(1))) throw Error(ErrorKind::InvalidArgument, "lr: exponent r must exceed 1");
    if (delta < Scalar(0)) throw Error(ErrorKind::InvalidArgument, "lr: smoothing delta must be >= 0");
    if (r < Scalar(2) && delta == Scalar(0)) {
      throw Error(ErrorKind::InvalidArgument, "lr: r < 2 requires smoothing delta > 0");
    }
    Norm n;
    n.family_ = NormFamily::Lr;
    n.dim_ = dim;
    n.r_ = r;
    n.delta_ = delta;
    return n;
  }

  /// User-supplied H and grad H. Equivalence constants are estimated by sampling.
  static Norm custom(Eigen::Index dim, ValueFn value, GradientFn gradient) {
    require_dimension(dim);
    if (!value || !gradient) throw Error(ErrorKind::InvalidArgument, "custom norm needs H and grad H");
    Norm n;
    n.family_ = NormFamily::Custom;
    n.dim_ = dim;
    n.value_fn_ = std::move(value);
    n.gradient_fn_ = std::move(gradient);
    return n;
  }

  NormFamily family() const { return family_; }
  Eigen::Index dimension() const { return dim_; }
  Scalar exponent() const { return r_; }
  Scalar smoothing() const { return delta_; }
  const Matrix& matrix() const { return matrix_; }
  const Matrix& inverse_matrix() const { return inverse_; }

  /// False only for the smoothed l^r family, which is not exactly 1-homogeneous.
  bool homogeneous() const { return !(family_ == NormFamily::Lr && delta_ > Scalar(0)); }

  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& xi) const {
    check_dimension(xi.size());
    using std::abs;
    using std::pow;
    using std::sqrt;
    switch (family_) {
      case NormFamily::Euclidean:
        return xi.norm();
      case NormFamily::WeightedQuadratic:
        return sqrt(std::max(Scalar(0), Scalar(xi.dot(matrix_ * xi))));
      case NormFamily::Lr: {
        if (delta_ == Scalar(0)) {
          const Scalar m = xi.cwiseAbs().maxCoeff();
          if (m == Scalar(0)) return Scalar(0);
          Scalar s(0);
          for (Eigen::Index i = 0; i < xi.size(); ++i) s += pow(abs(xi[i]) / m, r_);
          return m * pow(s, Scalar(1) / r_);
        }
        Scalar s(0);
        const Scalar d2 = delta_ * delta_;
        for (Eigen::Index i = 0; i < xi.size(); ++i) {
          // (x^2 + d^2)^{r/2} - d^r, written to avoid cancellation for small x
          const Scalar x2 = xi[i] * xi[i];
          s += pow(d2, r_ / 2) * std::expm1((r_ / 2) * std::log1p(x2 / d2));
        }
        return pow(std::max(s, Scalar(0)), Scalar(1) / r_);
      }
      case NormFamily::Custom:
        return value_fn_(Vector(xi));
    }
    return Scalar(0);
  }

  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& xi) const {
    return value(xi);
  }

  /// grad H(xi); undefined at xi = 0.
  template <typename Derived>
  Vector gradient(const Eigen::MatrixBase<Derived>& xi) const {
    check_dimension(xi.size());
    using std::abs;
    using std::pow;
    const Scalar h = value(xi);
    if (!(h > Scalar(0))) {
      throw Error(ErrorKind::UndefinedGradient, "norm gradient is undefined at the origin");
    }
    switch (family_) {
      case NormFamily::Euclidean:
        return xi / h;
      case NormFamily::WeightedQuadratic:
        return (matrix_ * xi) / h;
      case NormFamily::Lr: {
        Vector g(xi.size());
        if (delta_ == Scalar(0)) {
          for (Eigen::Index i = 0; i < xi.size(); ++i) {
            const Scalar ratio = abs(xi[i]) / h;
            g[i] = (xi[i] < Scalar(0) ? Scalar(-1) : Scalar(1)) * pow(ratio, r_ - 1);
          }
          return g;
        }
        const Scalar d2 = delta_ * delta_;
        const Scalar hr1 = pow(h, r_ - 1);
        for (Eigen::Index i = 0; i < xi.size(); ++i) {
          g[i] = xi[i] * pow(xi[i] * xi[i] + d2, r_ / 2 - 1) / hr1;
        }
        return g;
      }
      case NormFamily::Custom:
        return gradient_fn_(Vector(xi));
    }
    return Vector::Zero(xi.size());
  }

  /// Analytic constants where available, otherwise min/max of H over
  /// kEquivalenceSamples sphere directions.
  EquivalenceConstants<Scalar> equivalence_constants() const {
    using std::pow;
    using std::sqrt;
    const Scalar n = static_cast<Scalar>(dim_);
    switch (family_) {
      case NormFamily::Euclidean:
        return {Scalar(1), Scalar(1), true};
      case NormFamily::WeightedQuadratic: {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_, Eigen::EigenvaluesOnly);
        return {sqrt(eig.eigenvalues().minCoeff()), sqrt(eig.eigenvalues().maxCoeff()), true};
      }
      case NormFamily::Lr:
        if (delta_ == Scalar(0)) {
          const Scalar f = pow(n, Scalar(1) / r_ - Scalar(0.5));
          return r_ >= Scalar(2) ? EquivalenceConstants<Scalar>{f, Scalar(1), true}
                                 : EquivalenceConstants<Scalar>{Scalar(1), f, true};
        }
        break;
      case NormFamily::Custom:
        break;
    }
    return sampled_equivalence_constants(kEquivalenceSamples, kEquivalenceSeed);
  }

  EquivalenceConstants<Scalar> sampled_equivalence_constants(int samples, std::uint64_t seed) const {
    Scalar lo = std::numeric_limits<Scalar>::infinity();
    Scalar hi = Scalar(0);
    for (int i = 0; i < samples; ++i) {
      auto engine = sample_engine(seed, static_cast<std::uint64_t>(i));
      const Scalar h = value(sphere_direction<Scalar>(engine, dim_));
      lo = std::min(lo, h);
      hi = std::max(hi, h);
    }
    return {lo, hi, false};
  }

  std::string describe() const {
    std::ostringstream os;
    os << to_string(family_) << "(N=" << dim_;
    if (family_ == NormFamily::Lr) os << ", r=" << r_ << ", delta=" << delta_;
    os << ")";
    return os.str();
  }

 private:
  Norm() = default;

  static void require_dimension(Eigen::Index dim) {
    if (dim < 2) throw Error(ErrorKind::InvalidArgument, "norm dimension must be >= 2");
  }

  void check_dimension(Eigen::Index n) const {
    if (n != dim_) {
      std::ostringstream os;
      os << "vector of dimension " << n << " passed to norm of dimension " << dim_;
      throw Error(ErrorKind::DimensionMismatch, os.str());
    }
  }

  NormFamily family_ = NormFamily::Euclidean;
  Eigen::Index dim_ = 0;
  Scalar r_ = Scalar(2);
  Scalar delta_ = Scalar(0);
  Matrix matrix_;
  Matrix inverse_;
  ValueFn value_fn_;
  GradientFn gradient_fn_;
};

template <typename Scalar, typename Derived>
Scalar evaluate_norm(const Norm<Scalar>& norm, const Eigen::MatrixBase<Derived>& xi) {
  return norm.value(xi);
}

template <typename Scalar, typename Derived>
typename Norm<Scalar>::Vector norm_gradient(const Norm<Scalar>& norm,
                                            const Eigen::MatrixBase<Derived>& xi) {
  return norm.gradient(xi);
}

/// a(xi) = H(xi)^{p-1} grad H(xi), extended by a(0) = 0.
template <typename Scalar, typename Derived>
typename Norm<Scalar>::Vector operator_map(const Norm<Scalar>& norm, Scalar p,
                                           const Eigen::MatrixBase<Derived>& xi) {
  if (!(p > Scalar(1))) throw Error(ErrorKind::InvalidArgument, "operator_map: p must exceed 1");
  const Scalar h = norm.value(xi);
  if (h == Scalar(0)) return Norm<Scalar>::Vector::Zero(xi.size());
  using std::pow;
  return pow(h, p - 1) * norm.gradient(xi);
}

// ---------------------------------------------------------------------------
// Dual norm

enum class DualMode { Analytic, Numeric };

struct NumericDualOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;
  int restarts = 8;
  std::uint64_t seed = 0x64756131ULL;
};

template <typename Scalar>
struct DualMaximizer {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> direction;  // on the Euclidean unit sphere
  Scalar value;
  int iterations;
  bool converged;
};

/// H0(x) = sup_{H(xi) = 1} <x, xi>, either in closed form or by projected
/// ascent of <x, xi>/H(xi) over the Euclidean unit sphere.
template <typename Scalar = double>
class DualNorm {
 public:
  using Vector = typename Norm<Scalar>::Vector;

  static bool has_analytic(const Norm<Scalar>& n) {
    switch (n.family()) {
      case NormFamily::Euclidean:
      case NormFamily::WeightedQuadratic:
        return true;
      case NormFamily::Lr:
        return n.smoothing() == Scalar(0);
      case NormFamily::Custom:
        return false;
    }
    return false;
  }

  static DualNorm analytic(Norm<Scalar> source) {
    if (!has_analytic(source)) {
      throw Error(ErrorKind::InvalidArgument,
                  "no closed-form dual for " + source.describe() + "; use numeric mode");
    }
    DualNorm d(std::move(source));
    d.mode_ = DualMode::Analytic;
    return d;
  }

  static DualNorm numeric(Norm<Scalar> source, NumericDualOptions options = {}) {
    DualNorm d(std::move(source));
    d.mode_ = DualMode::Numeric;
    d.options_ = options;
    return d;
  }

  /// Analytic when available, numeric otherwise.
  static DualNorm best(Norm<Scalar> source) {
    return has_analytic(source) ? analytic(std::move(source)) : numeric(std::move(source));
  }

  DualMode mode() const { return mode_; }
  const Norm<Scalar>& source() const { return source_; }
  const NumericDualOptions& options() const { return options_; }

  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& x) const {
    using std::sqrt;
    if (x.size() != source_.dimension()) {
      throw Error(ErrorKind::DimensionMismatch, "dual norm: dimension mismatch");
    }
    if (mode_ == DualMode::Numeric) {
      if (x.isZero(0)) return Scalar(0);
      return maximize(x).value;
    }
    switch (source_.family()) {
      case NormFamily::Euclidean:
        return x.norm();
      case NormFamily::WeightedQuadratic:
        return sqrt(std::max(Scalar(0), Scalar(x.dot(source_.inverse_matrix() * x))));
      case NormFamily::Lr:
        return conjugate_lr_value(x);
      case NormFamily::Custom:
        break;
    }
    throw Error(ErrorKind::InvalidArgument, "dual norm: no analytic form");
  }

  template <typename Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& x) const {
    return value(x);
  }

  /// grad H0(x). In numeric mode this is xi*/H(xi*) for the maximizer xi*.
  template <typename Derived>
  Vector gradient(const Eigen::MatrixBase<Derived>& x) const {
    using std::abs;
    using std::pow;
    if (x.size() != source_.dimension()) {
      throw Error(ErrorKind::DimensionMismatch, "dual norm: dimension mismatch");
    }
    if (x.isZero(0)) throw Error(ErrorKind::UndefinedGradient, "dual gradient undefined at 0");
    if (mode_ == DualMode::Numeric) {
      const auto m = maximize(x);
      return m.direction / source_.value(m.direction);
    }
    const Scalar h0 = value(x);
    switch (source_.family()) {
      case NormFamily::Euclidean:
        return x / h0;
      case NormFamily::WeightedQuadratic:
        return (source_.inverse_matrix() * x) / h0;
      case NormFamily::Lr: {
        const Scalar rc = conjugate_exponent();
        Vector g(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          g[i] = (x[i] < Scalar(0) ? Scalar(-1) : Scalar(1)) * pow(abs(x[i]) / h0, rc - 1);
        }
        return g;
      }
      case NormFamily::Custom:
        break;
    }
    throw Error(ErrorKind::InvalidArgument, "dual norm: no analytic form");
  }

  /// hat H0(z) = H0(-z).
  template <typename Derived>
  Scalar reflected(const Eigen::MatrixBase<Derived>& z) const {
    return value(Vector(-z));
  }

  /// grad of z -> H0(-z).
  template <typename Derived>
  Vector reflected_gradient(const Eigen::MatrixBase<Derived>& z) const {
    return -gradient(Vector(-z));
  }

  /// Projected-ascent maximization of <x, xi>/H(xi) over |xi| = 1 with
  /// Barzilai-Borwein steps and monotone backtracking. Starts from x/|x| and
  /// `restarts` seeded random directions; keeps the best converged run.
  template <typename Derived>
  DualMaximizer<Scalar> maximize(const Eigen::MatrixBase<Derived>& x_in) const {
    const Vector x = x_in;
    const Scalar xnorm = x.norm();
    if (!(xnorm > Scalar(0))) throw Error(ErrorKind::InvalidArgument, "dual maximization at x = 0");
    std::optional<DualMaximizer<Scalar>> best;
    int total_iterations = 0;
    for (int start = 0; start <= options_.restarts; ++start) {
      Vector xi;
      if (start == 0) {
        xi = x / xnorm;
      } else {
        auto engine = sample_engine(options_.seed, static_cast<std::uint64_t>(start));
        xi = sphere_direction<Scalar>(engine, x.size());
      }
      auto run = ascend(x, xi);
      total_iterations += run.iterations;
      if (run.converged && (!best || run.value > best->value)) best = run;
    }
    if (!best) {
      std::ostringstream os;
      os << "numeric dual did not converge within " << options_.max_iterations
         << " iterations from any of " << options_.restarts + 1 << " starts";
      throw Error(ErrorKind::NonConvergence, os.str());
    }
    best->iterations = total_iterations;
    return *best;
  }

 private:
  explicit DualNorm(Norm<Scalar> source) : source_(std::move(source)) {}

  Scalar conjugate_exponent() const { return source_.exponent() / (source_.exponent() - 1); }

  template <typename Derived>
  Scalar conjugate_lr_value(const Eigen::MatrixBase<Derived>& x) const {
    using std::abs;
    using std::pow;
    const Scalar rc = conjugate_exponent();
    const Scalar m = x.cwiseAbs().maxCoeff();
    if (m == Scalar(0)) return Scalar(0);
    Scalar s(0);
    for (Eigen::Index i = 0; i < x.size(); ++i) s += pow(abs(x[i]) / m, rc);
    return m * pow(s, Scalar(1) / rc);
  }

  // objective f(xi) = <x, xi>/H(xi) and its gradient projected on the tangent space
  std::pair<Scalar, Vector> objective(const Vector& x, const Vector& xi) const {
    const Scalar h = source_.value(xi);
    const Scalar f = x.dot(xi) / h;
    Vector g = (x - f * source_.gradient(xi)) / h;
    g -= g.dot(xi) * xi;
    return {f, g};
  }

  DualMaximizer<Scalar> ascend(const Vector& x, Vector xi) const {
    const Scalar tol = static_cast<Scalar>(options_.tolerance) * x.norm();
    auto [f, g] = objective(x, xi);
    Scalar step = Scalar(1) / std::max(g.norm() / x.norm(), Scalar(1e-3));
    step /= x.norm();
    for (int it = 0; it < options_.max_iterations; ++it) {
      if (g.norm() <= tol) return {xi, f, it, true};
      Vector trial;
      Scalar f_trial(0);
      Vector g_trial;
      bool accepted = false;
      for (int halving = 0; halving < 60; ++halving) {
        trial = (xi + step * g).normalized();
        std::tie(f_trial, g_trial) = objective(x, trial);
        if (f_trial >= f - Scalar(1e-15) * (std::abs(f) + x.norm())) {
          accepted = true;
          break;
        }
        step /= 2;
      }
      if (!accepted) return {xi, f, it, g.norm() <= Scalar(100) * tol};
      const Vector s = trial - xi;
      const Vector y = g_trial - g;
      const Scalar sy = s.dot(y);
      step = sy < Scalar(0) ? s.squaredNorm() / -sy : step * 2;
      xi = trial;
      f = f_trial;
      g = g_trial;
    }
    return {xi, f, options_.max_iterations, g.norm() <= tol};
  }

  Norm<Scalar> source_;
  DualMode mode_ = DualMode::Analytic;
  NumericDualOptions options_;
};

// ---------------------------------------------------------------------------
// Sampling checks

template <typename Scalar>
struct IdentityCheck {
  std::string name;
  Scalar worst_residual = Scalar(0);
  Scalar tolerance = Scalar(0);
  bool passed = true;
  typename Norm<Scalar>::Vector worst_point;
};

template <typename Scalar>
struct NormIdentityReport {
  std::vector<IdentityCheck<Scalar>> checks;
  // empirical range of |grad H| and |grad H0|; the constant C of the bound is not
  // known in closed form, so only the range is reported
  Scalar gradient_min = std::numeric_limits<Scalar>::infinity();
  Scalar gradient_max = Scalar(0);
  Scalar dual_gradient_min = std::numeric_limits<Scalar>::infinity();
  Scalar dual_gradient_max = Scalar(0);
  int samples = 0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const IdentityCheck<Scalar>& find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return c;
    }
    throw Error(ErrorKind::InvalidArgument, "no identity check named " + name);
  }
};

/// Runs the norm/dual identities on `samples` random nonzero points:
///   triangle      |H(x)-H(y)| <= H(x+y) <= H(x)+H(y)
///   gradient      1/C <= |grad H|, |grad H0| <= C (range only)
///   euler         <x, grad H(x)> = H(x), <x, grad H0(x)> = H0(x)
///   unit          H(grad H0(x)) = 1, H0(grad H(x)) = 1
///   inverse       H0(x) grad H(grad H0(x)) = x
///   zero-degree   grad H(t x) = sgn(t) grad H(x)
/// Residuals are relative; a check passes when its worst residual <= tolerance.
template <typename Scalar>
NormIdentityReport<Scalar> check_norm_identities(const DualNorm<Scalar>& dual, int samples,
                                                 std::uint64_t seed, Scalar tolerance) {
  using Vector = typename Norm<Scalar>::Vector;
  using std::abs;
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  const auto& h = dual.source();
  const Eigen::Index n = h.dimension();
  NormIdentityReport<Scalar> report;
  report.samples = samples;
  const char* names[] = {"triangle", "euler", "euler-dual", "unit", "unit-dual", "inverse", "zero-degree"};
  for (const char* name : names) {
    IdentityCheck<Scalar> c;
    c.name = name;
    c.tolerance = tolerance;
    report.checks.push_back(c);
  }
  auto record = [&](std::size_t idx, Scalar residual, const Vector& point) {
    auto& c = report.checks[idx];
    if (!(residual <= c.worst_residual)) {
      c.worst_residual = residual;
      c.worst_point = point;
    }
  };

  for (int i = 0; i < samples; ++i) {
    auto engine = sample_engine(seed, static_cast<std::uint64_t>(i));
    const Vector x = scaled_sample<Scalar>(engine, n);
    const Vector y = scaled_sample<Scalar>(engine, n);
    std::uniform_real_distribution<double> tdist(-3.0, 3.0);
    Scalar t = static_cast<Scalar>(tdist(engine));
    if (t == Scalar(0)) t = Scalar(1);

    const Scalar hx = h.value(x);
    const Scalar hy = h.value(y);
    const Scalar hxy = h.value(Vector(x + y));
    const Scalar scale = hx + hy;
    Scalar tri = std::max(Scalar(0), hxy - scale);
    tri = std::max(tri, abs(hx - hy) - hxy);
    record(0, tri / scale, x);

    const Vector gh = h.gradient(x);
    const Scalar h0x = dual.value(x);
    const Vector gh0 = dual.gradient(x);
    report.gradient_min = std::min(report.gradient_min, Scalar(gh.norm()));
    report.gradient_max = std::max(report.gradient_max, Scalar(gh.norm()));
    report.dual_gradient_min = std::min(report.dual_gradient_min, Scalar(gh0.norm()));
    report.dual_gradient_max = std::max(report.dual_gradient_max, Scalar(gh0.norm()));

    record(1, abs(x.dot(gh) - hx) / hx, x);
    record(2, abs(x.dot(gh0) - h0x) / h0x, x);
    record(3, abs(h.value(gh0) - Scalar(1)), x);
    record(4, abs(dual.value(gh) - Scalar(1)), x);
    record(5, (h0x * h.gradient(gh0) - x).norm() / x.norm(), x);
    const Scalar sgn = t < Scalar(0) ? Scalar(-1) : Scalar(1);
    record(6, (h.gradient(Vector(t * x)) - sgn * gh).norm() / gh.norm(), x);
  }
  for (auto& c : report.checks) c.passed = c.worst_residual <= c.tolerance;
  return report;
}

template <typename Scalar>
struct MonotonicityReport {
  using Vector = typename Norm<Scalar>::Vector;
  struct Violation {
    Vector xi;
    Vector eta;
    Scalar inner;
  };
  int samples = 0;
  Scalar min_inner = std::numeric_limits<Scalar>::infinity();
  // min over samples of <a(xi)-a(eta), xi-eta> / |xi-eta|^p, scale-free
  Scalar min_normalized = std::numeric_limits<Scalar>::infinity();
  Vector argmin_xi;
  Vector argmin_eta;
  std::vector<Violation> violations;

  bool passed() const { return violations.empty() && min_inner > Scalar(0); }
};

/// Samples `samples` pairs xi != eta and records <a(xi) - a(eta), xi - eta>.
template <typename Scalar>
MonotonicityReport<Scalar> check_monotonicity(const Norm<Scalar>& h, Scalar p, int samples,
                                              std::uint64_t seed) {
  using Vector = typename Norm<Scalar>::Vector;
  using std::pow;
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  MonotonicityReport<Scalar> report;
  report.samples = samples;
  for (int i = 0; i < samples; ++i) {
    auto engine = sample_engine(seed, static_cast<std::uint64_t>(i));
    Vector xi = gaussian_vector<Scalar>(engine, h.dimension());
    Vector eta = gaussian_vector<Scalar>(engine, h.dimension());
    while ((xi - eta).norm() == Scalar(0)) eta = gaussian_vector<Scalar>(engine, h.dimension());
    const Vector diff = xi - eta;
    const Scalar inner = (operator_map(h, p, xi) - operator_map(h, p, eta)).dot(diff);
    if (inner < report.min_inner) {
      report.min_inner = inner;
      report.argmin_xi = xi;
      report.argmin_eta = eta;
    }
    report.min_normalized = std::min(report.min_normalized, inner / pow(diff.norm(), p));
    if (!(inner > Scalar(0))) report.violations.push_back({xi, eta, inner});
  }
  return report;
}

template <typename Scalar>
struct GrowthReport {
  Scalar max_ratio = Scalar(0);       // max |a(xi)| / |xi|^{p-1}
  Scalar gradient_bound = Scalar(0);  // sampled sup |grad H| on the sphere
  Scalar bound = Scalar(0);           // C2^{p-1} * gradient_bound
  bool passed() const { return max_ratio <= bound * (Scalar(1) + Scalar(1e-12)); }
};

/// |a(xi)| <= C2^{p-1} sup|grad H| |xi|^{p-1}, with sup|grad H| taken over the
/// sampled directions (including those of the checked points).
template <typename Scalar>
GrowthReport<Scalar> check_growth(const Norm<Scalar>& h, Scalar p, int samples, std::uint64_t seed) {
  using Vector = typename Norm<Scalar>::Vector;
  using std::pow;
  GrowthReport<Scalar> report;
  const auto c = h.equivalence_constants();
  for (int i = 0; i < samples; ++i) {
    auto engine = sample_engine(seed, static_cast<std::uint64_t>(i));
    const Vector xi = scaled_sample<Scalar>(engine, h.dimension());
    const Vector dir = sphere_direction<Scalar>(engine, h.dimension());
    report.gradient_bound = std::max(report.gradient_bound, Scalar(h.gradient(dir).norm()));
    report.gradient_bound = std::max(report.gradient_bound, Scalar(h.gradient(xi).norm()));
    report.max_ratio =
        std::max(report.max_ratio, Scalar(operator_map(h, p, xi).norm() / pow(xi.norm(), p - 1)));
  }
  report.bound = pow(c.upper, p - 1) * report.gradient_bound;
  return report;
}

}  // namespace anisocrit

#endif  // ANISOCRIT_ANISOTROPY_HPP
