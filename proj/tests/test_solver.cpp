#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "anisocrit/extremals.hpp"
#include "anisocrit/solver.hpp"

using namespace anisocrit;
using Vec = Eigen::VectorXd;

namespace {

ProblemParams params3(double lambda) {
  ProblemParams params;
  params.N = 3;
  params.p = 2.0;
  params.q = 4.0;
  params.lambda = lambda;
  params.norm = Norm<double>::euclidean(3);
  return params;
}

std::shared_ptr<const Mesh> unit_cube(int n) { return build_mesh(DomainSpec::box(3, 0.0, 1.0), n); }

// (1 / 2N) S^{N/2} with the sharp p = 2 constant in R^3
double threshold_p2_n3() {
  const double S = 3 * std::numbers::pi * std::pow(std::tgamma(1.5) / std::tgamma(3.0), 2.0 / 3);
  return std::pow(S, 1.5) / 6;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("fibering coefficients of constants") {
  auto mesh = unit_cube(4);
  const auto c = fibering_coefficients(params3(1.0), GridFunction::constant(mesh, 1.0));
  CHECK(c.A == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.B == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.C == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(c.degenerate());
  const auto m = fibering_coefficients(params3(1.0), GridFunction::constant(mesh, -1.0));
  CHECK(m.B == 0.0);
  CHECK(m.C == 0.0);
  CHECK(m.degenerate());
  CHECK_THROWS_AS(fibering_maximize(m, params3(1.0)), Error);
  CHECK_THROWS_AS(fibering_coefficients(params3(1.0), GridFunction::constant(mesh, 0.0)), Error);
}

TEST_CASE("fibering maximum without the q term") {
  const FiberingCoefficients c{1.0, 7.0, 1.0};
  const auto m = fibering_maximize(c, params3(0.0));
  CHECK(std::abs(m.t - 1.0) < 1e-12);
  CHECK(std::abs(m.Y - 1.0 / 3) < 1e-12);
}

TEST_CASE("fibering maximum solves the quadratic in t^2") {
  const FiberingCoefficients c{1.0, 1.0, 1.0};
  const auto params = params3(1.0);
  const auto m = fibering_maximize(c, params);
  CHECK(m.t * m.t == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-12));
  CHECK(m.t == doctest::Approx(0.78615).epsilon(1e-5));
  CHECK(m.Y == doctest::Approx(fibering_value(c, params, m.t)).epsilon(1e-15));
  for (double s : {0.5, 0.9, 1.1, 1.5}) CHECK(fibering_value(c, params, s * m.t) < m.Y);
}

TEST_CASE("fibering level decreases in lambda") {
  const FiberingCoefficients c{2.0, 0.5, 1.5};
  double previous = fibering_maximize(c, params3(0.0)).Y;
  for (double lambda : {0.5, 1.0, 5.0, 50.0}) {
    const double Y = fibering_maximize(c, params3(lambda)).Y;
    CHECK(Y < previous);
    previous = Y;
  }
}

TEST_CASE("level threshold") {
  const auto t = level_threshold(params3(50.0));
  CHECK(t.value == doctest::Approx(threshold_p2_n3()).epsilon(1e-10));
  CHECK(t.C_hat_sampled == doctest::Approx(1.0));
  CHECK(level_threshold(params3(50.0), 2.0).value == doctest::Approx(t.value / 2));
  auto w = params3(50.0);
  w.norm = Norm<double>::weighted_quadratic(Eigen::Vector3d(4, 1, 1).asDiagonal().toDenseMatrix());
  CHECK(level_threshold(w).C_hat_sampled == doctest::Approx(4.0));
  CHECK_THROWS_AS(level_threshold(params3(50.0), 0.0), Error);
}

TEST_CASE("critical level sweep on the half-ball") {
  const auto domain = DomainSpec::half_ball(3, 1.0);
  auto mesh = build_mesh(domain, 16);
  const auto rows = critical_level_sweep(params3(50.0), {1e-2}, mesh, domain);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].margin > 0);
  CHECK(rows[0].margin == doctest::Approx(rows[0].threshold - rows[0].Y));
  CHECK(rows[0].scale == doctest::Approx(0.1));
  CHECK(rows[0].peak_error <= 0.1);

  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {10.0, 50.0, 100.0}) {
    const double Y = critical_level_sweep(params3(lambda), {1e-2}, mesh, domain)[0].Y;
    CHECK(Y < previous);
    previous = Y;
  }
}

TEST_CASE("sweep reports under-resolved concentration") {
  const auto domain = DomainSpec::half_ball(3, 1.0);
  auto mesh = build_mesh(domain, 5);
  try {
    critical_level_sweep(params3(50.0), {1e-4}, mesh, domain);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resolution);
  }
  CHECK_THROWS_AS(critical_level_sweep(params3(0.0), {1e-2}, mesh, domain), Error);
}

TEST_CASE("mountain pass recovers the constant critical point") {
  auto mesh = unit_cube(6);
  const auto params = params3(0.0);
  const auto e = mountain_pass_endpoint(params, GridFunction::constant(mesh, 1.0));
  CHECK(energy(params, *mesh, e.values()) < 0);
  const auto report = mountain_pass_solve(params, e);
  CHECK(report.status == SolveStatus::Converged);
  REQUIRE(report.solution.has_value());
  CHECK(report.residual < 1e-10);
  CHECK((report.solution->values().array() - 1.0).abs().maxCoeff() < 1e-8);
  CHECK(report.J == doctest::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("endpoint and geometry") {
  auto mesh = build_mesh(DomainSpec::half_ball(3, 1.0), 8);
  const auto params = params3(10.0);
  const auto dual = std::make_shared<const DualNorm<double>>(DualNorm<double>::analytic(params.norm));
  const auto u = interpolate_extremal(u_eps(3, 2.0, 1e-1, Vec::Zero(3), dual), mesh);
  const auto e = mountain_pass_endpoint(params, u);
  CHECK(energy(params, *mesh, e.values()) < 0);
  const auto g = validate_geometry(params, e, 8, 7);
  CHECK(g.beta > 0);
  CHECK(g.theta > 0);
  CHECK(g.theta < anisotropic_norm(params, e));
  CHECK_THROWS_AS(mountain_pass_endpoint(params, GridFunction::constant(mesh, -1.0)), Error);
}

TEST_CASE("mountain pass on the half-ball") {
  const auto params = params3(50.0);
  ExistenceRun run;
  run.domain = DomainSpec::half_ball(3, 1.0);
  run.resolution = 16;
  const auto report = solve_existence(params, run);
  CHECK(report.status == SolveStatus::Converged);
  REQUIRE(report.solution.has_value());
  CHECK(report.residual < 1e-6);
  CHECK(report.min_u > 0);
  CHECK(report.J > 0);
  CHECK(report.J < report.threshold.value);
  CHECK(report.below_threshold == (report.J < report.threshold.value));
  CHECK(report.geometry.beta > 0);

  // Palais-Smale history: bounded norms, and J - <J'(u), u>/p* tracks J as the residual vanishes
  REQUIRE_FALSE(report.history.empty());
  double sup_norm = 0;
  for (const auto& rec : report.history) sup_norm = std::max(sup_norm, rec.norm);
  CHECK(std::isfinite(sup_norm));
  CHECK(sup_norm < 10 * report.norm);
  const auto& last = report.history.back();
  CHECK(std::abs(last.bound - last.J) < 1e-5);
  CHECK(last.residual < 1e-6);

  const auto diag = verify_solution(params, *report.solution);
  CHECK(diag.nonnegative);
  CHECK(diag.min_u >= -1e-8);
  CHECK(diag.interior_min > 0);
  CHECK(diag.residual == doctest::Approx(report.residual).epsilon(1e-8));
  CHECK(diag.J == doctest::Approx(report.J).epsilon(1e-12));
}

TEST_CASE("diagnostics of the constant solution") {
  auto mesh = unit_cube(6);
  const auto d = verify_solution(params3(0.0), GridFunction::constant(mesh, 1.0));
  CHECK(d.residual == 0.0);
  CHECK(d.residual_sup == 0.0);
  CHECK(d.min_u == 1.0);
  CHECK(d.max_u == 1.0);
  CHECK(d.sup_u == 1.0);
  CHECK(d.nonnegative);
}

}  // TEST_SUITE
