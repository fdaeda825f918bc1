#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "anisocrit/extremals.hpp"

using namespace anisocrit;
using Vec = Eigen::VectorXd;

namespace {

std::shared_ptr<const DualNorm<double>> euclidean_dual(int N) {
  return std::make_shared<const DualNorm<double>>(DualNorm<double>::analytic(Norm<double>::euclidean(N)));
}

// Sharp Sobolev constant for p = 2 in R^N, closed form.
double sobolev_p2(int N) {
  return std::numbers::pi * N * (N - 2) * std::pow(std::tgamma(N / 2.0) / std::tgamma(N), 2.0 / N);
}

}  // namespace

TEST_SUITE("extremals") {

TEST_CASE("peak value") {
  const auto s = make_extremal(4, 2.0, 1.0, Vec::Zero(4), euclidean_dual(4));
  CHECK(kappa(2.0, 4) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(extremal_value(s, Vec::Zero(4)) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-14));
  const auto unit = make_extremal(4, 2.0, 1.0, Vec::Zero(4), euclidean_dual(4), Amplitude::UnitProfile);
  CHECK(extremal_value(unit, Vec::Zero(4)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("extremal solves the critical equation at p = 2") {
  // -Laplace U = U^{p*-1} by a five-point stencil per axis
  const int N = 4;
  const auto s = make_extremal(N, 2.0, 0.7, Vec::Zero(N), euclidean_dual(N));
  const Vec x = Vec{{0.3, -0.2, 0.5, 0.1}};
  const double h = 1e-3;
  double lap = 0;
  for (int i = 0; i < N; ++i) {
    Vec a = x, b = x, c = x, d = x;
    a[i] += h;
    b[i] -= h;
    c[i] += 2 * h;
    d[i] -= 2 * h;
    lap += (-extremal_value(s, c) + 16 * extremal_value(s, a) - 30 * extremal_value(s, x) +
            16 * extremal_value(s, b) - extremal_value(s, d)) / (12 * h * h);
  }
  const double pstar = 2.0 * N / (N - 2);
  CHECK(-lap == doctest::Approx(std::pow(extremal_value(s, x), pstar - 1)).epsilon(1e-6));
}

TEST_CASE("radial decay") {
  const auto s = make_extremal(3, 2.5, 0.5, Vec{{0.1, 0.2, 0.0}}, euclidean_dual(3));
  const double peak = extremal_value(s, s.center);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    Vec x = s.center + Vec{{g(rng), g(rng), g(rng)}};
    CHECK(extremal_value(s, x) < peak);
  }
  for (double rho = 0; rho < 10; rho += 0.5) {
    CHECK(extremal_profile(s, rho + 0.5) < extremal_profile(s, rho));
    CHECK(extremal_profile_derivative(s, rho + 0.5) < 0);
  }
}

TEST_CASE("profile derivative matches central differences") {
  const auto s = make_extremal(5, 3.0, 0.8, Vec::Zero(5), euclidean_dual(5));
  for (double rho : {0.1, 0.9, 3.0}) {
    const double h = 1e-6;
    const double fd = (extremal_profile(s, rho + h) - extremal_profile(s, rho - h)) / (2 * h);
    CHECK(extremal_profile_derivative(s, rho) == doctest::Approx(fd).epsilon(1e-7));
  }
  CHECK(extremal_gradient(s, Vec::Zero(5)).norm() == 0.0);
}

TEST_CASE("tail constant") {
  const int N = 4;
  const double p = 2.0;
  const auto s = make_extremal(N, p, 1.0, Vec::Zero(N), euclidean_dual(N));
  auto tail = [&](double rho) { return extremal_profile(s, rho) * std::pow(rho, (N - p) / (p - 1)); };
  CHECK(std::abs(tail(1e4) - tail(1e3)) / tail(1e4) < 1e-3);
}

TEST_CASE("concentration scale") {
  CHECK(eps_scale(1.0, 2.0) == doctest::Approx(1.0));
  CHECK(eps_scale(1e-4, 2.0) == doctest::Approx(1e-2).epsilon(1e-14));
  CHECK(eps_scale(8.0, 3.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(u_eps(4, 3.0, 8.0, Vec::Zero(4), euclidean_dual(4)).lambda == doctest::Approx(4.0));
}

TEST_CASE("invalid extremal specs") {
  CHECK_THROWS_AS(make_extremal(3, 3.0, 1.0, Vec::Zero(3), euclidean_dual(3)), Error);
  CHECK_THROWS_AS(make_extremal(3, 2.0, -1.0, Vec::Zero(3), euclidean_dual(3)), Error);
  CHECK_THROWS_AS(make_extremal(3, 2.0, 1.0, Vec::Zero(2), euclidean_dual(3)), Error);
}

TEST_CASE("whole-space constants against the sharp Sobolev constant") {
  for (int N : {3, 4, 6}) {
    const auto c = whole_space_constants(N, 2.0);
    CHECK(c.S == doctest::Approx(sobolev_p2(N)).epsilon(1e-10));
  }
  const auto s = make_extremal(4, 2.0, 1.0, Vec::Zero(4), euclidean_dual(4));
  const auto c = whole_space_constants(s);
  CHECK(c.K1 == doctest::Approx(c.K2).epsilon(1e-10));
  CHECK(c.K1 / std::pow(c.K2, 0.5) == doctest::Approx(c.S).epsilon(1e-10));
}

TEST_CASE("unit profile constants ratio") {
  const auto c = whole_space_constants(4, 2.0);
  CHECK((4 - 2) * c.K1 / (4 * c.K2) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("whole-space constants are scale invariant") {
  const auto a = make_extremal(4, 2.0, 1.0, Vec::Zero(4), euclidean_dual(4));
  const auto b = make_extremal(4, 2.0, 0.1, Vec::Zero(4), euclidean_dual(4));
  const auto ca = whole_space_constants(a, MomentMethod::AdaptiveQuadrature);
  const auto cb = whole_space_constants(b, MomentMethod::AdaptiveQuadrature);
  CHECK(std::abs(ca.S - cb.S) <= 1e-10 * ca.S);
  CHECK(std::abs(ca.K1 - cb.K1) <= 1e-10 * ca.K1);
}

TEST_CASE("reduction requires the euclidean norm") {
  Eigen::MatrixXd a = Eigen::Vector4d(4, 1, 1, 1).asDiagonal();
  auto dual = std::make_shared<const DualNorm<double>>(DualNorm<double>::analytic(Norm<double>::weighted_quadratic(a)));
  const auto s = make_extremal(4, 2.0, 1.0, Vec::Zero(4), dual);
  try {
    whole_space_constants(s);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedReduction);
  }
}

TEST_CASE("grid quadrature of the constants") {
  const auto s = make_extremal(4, 2.0, 1.0, Vec::Zero(4), euclidean_dual(4));
  const auto grid = grid_quadrature_constants(s);
  CHECK(std::abs(grid.S - sobolev_p2(4)) < 1e-2 * sobolev_p2(4));

  // H(xi) = sqrt(xi^T A xi) is the euclidean norm after y = A^{-1/2} x, so S scales by det(A)^{p/(2N)}
  Eigen::MatrixXd a = Eigen::Vector4d(4, 1, 1, 1).asDiagonal();
  auto dual = std::make_shared<const DualNorm<double>>(DualNorm<double>::analytic(Norm<double>::weighted_quadratic(a)));
  const auto w = grid_quadrature_constants(make_extremal(4, 2.0, 1.0, Vec::Zero(4), dual));
  CHECK(std::abs(w.S - std::sqrt(2.0) * sobolev_p2(4)) < 0.05 * std::sqrt(2.0) * sobolev_p2(4));
}

TEST_CASE("cutoff") {
  const Cutoff c{0.5, 1.0};
  CHECK(c(0.0) == 1.0);
  CHECK(c(0.5) == 1.0);
  CHECK(c(1.0) == 0.0);
  CHECK(c(2.0) == 0.0);
  const double h = 1e-7;
  CHECK(std::abs(c(0.5 + h) - 1.0) < 1e-5);
  CHECK(std::abs(c(1.0 - h)) < 1e-5);
  for (double r = 0.5; r < 1.0; r += 0.05) CHECK(c(r + 0.05) <= c(r));
}

TEST_CASE("truncated extremal on a box") {
  // radial Simpson oracle for the same truncated profile in R^3
  const int N = 3;
  const double lambda = 0.1;
  const Cutoff cut{0.5, 0.95};
  const auto s = make_extremal(N, 2.0, lambda, Vec::Zero(N), euclidean_dual(N));
  auto w = [&](double r) { return extremal_profile(s, r) * cut(r); };
  const int n = 20000;
  const double h = cut.outer / n;
  double num = 0, den = 0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double c = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    const double d = (w(std::min(r + 1e-7, cut.outer)) - w(std::max(r - 1e-7, 0.0))) / (2e-7);
    num += c * d * d * 4 * std::numbers::pi * r * r;
    den += c * std::pow(w(r), 6) * 4 * std::numbers::pi * r * r;
  }
  const double oracle = (num * h / 3) / std::pow(den * h / 3, 1.0 / 3);

  double previous = std::numeric_limits<double>::infinity();
  for (int res : {16, 32}) {
    auto mesh = build_mesh(DomainSpec::box(N, -1.0, 1.0), res);
    const double q = sobolev_quotient(interpolate_extremal(s, mesh, cut), 2.0, Norm<double>::euclidean(N));
    CHECK(q >= sobolev_p2(N) * (1 - 0.05));
    CHECK(std::abs(q - oracle) < previous);
    previous = std::abs(q - oracle);
  }
  CHECK(previous < 0.05 * oracle);
  CHECK(oracle > sobolev_p2(N));
}

TEST_CASE("quotient is invariant under scaling") {
  auto mesh = build_mesh(DomainSpec::box(3, -1.0, 1.0), 12);
  const auto s = make_extremal(3, 2.0, 0.3, Vec::Zero(3), euclidean_dual(3));
  const auto u = interpolate_extremal(s, mesh);
  const auto h = Norm<double>::lr(3, 4.0);
  const double a = sobolev_quotient(u, 2.0, h);
  const double b = sobolev_quotient(u.with_values(3.0 * u.values()), 2.0, h);
  CHECK(std::abs(a - b) <= 1e-12 * a);
  try {
    sobolev_quotient(GridFunction::constant(mesh, 0.0), 2.0, h);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroFunction);
  }
}

TEST_CASE("half-space factor on a coarse half-ball") {
  auto mesh = build_mesh(DomainSpec::half_ball(3, 1.0), 16);
  const auto r = half_space_quotient(2.0, mesh, 0.1, Cutoff{0.5, 0.95});
  CHECK(r.reference == doctest::Approx(std::pow(2.0, -2.0 / 3) * r.S));
  CHECK(r.ratio >= 0.95);
  CHECK_THROWS_AS(half_space_quotient(2.0, mesh, 0.1, Cutoff{0.9, 0.5}), Error);
}

TEST_CASE("flat boundary has an empty strip") {
  const auto e = boundary_strip_integrals(4, 2.0, 1e-2, {0.0, 0.0, 0.0});
  CHECK(e.I == 0.0);
  CHECK(e.II == 0.0);
  CHECK(e.K1eps > 0);
  CHECK(e.K2eps > 0);
}

TEST_CASE("strip integrals approach their limits") {
  const std::vector<double> alpha{1.0, 1.0, 1.0};
  const auto lim = strip_limits(4, 2.0, alpha);
  CHECK(lim.ratio == doctest::Approx(limit_I_over_II(2.0, 4)).epsilon(1e-8));
  const auto coarse = boundary_strip_integrals(4, 2.0, 1e-2, alpha);
  const auto fine = boundary_strip_integrals(4, 2.0, 1e-4, alpha);
  CHECK(coarse.ratio < fine.ratio);
  CHECK(std::abs(fine.I_scaled - lim.I_scaled) < 0.05 * lim.I_scaled);
  CHECK(std::abs(fine.II_scaled - lim.II_scaled) < 0.05 * lim.II_scaled);
  const auto whole = whole_space_constants(4, 2.0);
  CHECK(fine.K1eps <= whole.K1);
  CHECK(fine.K2eps <= whole.K2);
  CHECK(strip_limits(4, 2.0, {2.0, 2.0, 2.0}).I_scaled == doctest::Approx(2 * lim.I_scaled));
  CHECK_THROWS_AS(strip_limits(3, 2.0, {1.0, 1.0}), Error);
}

}  // TEST_SUITE
