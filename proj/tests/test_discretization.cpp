#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "anisocrit/discretization.hpp"

using namespace anisocrit;
using Vec = Eigen::VectorXd;

namespace {

ProblemParams params3(double lambda, double p = 2.0, double q = 4.0) {
  ProblemParams params;
  params.N = 3;
  params.p = p;
  params.q = q;
  params.lambda = lambda;
  params.norm = Norm<double>::euclidean(3);
  return params;
}

std::shared_ptr<const Mesh> unit_cube(int n) { return build_mesh(DomainSpec::box(3, 0.0, 1.0), n); }

Vec random_values(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

TEST_SUITE("discretization") {

TEST_CASE("box mesh covers the cube exactly") {
  auto mesh = unit_cube(8);
  CHECK(mesh->num_cells() == 512);
  CHECK(mesh->num_nodes() == 729);
  CHECK(mesh->measure() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mesh->connected());
  int boundary = 0;
  for (bool b : mesh->boundary_nodes()) boundary += b;
  CHECK(boundary == 729 - 343);
}

TEST_CASE("half-ball measure converges to the volume") {
  const auto domain = DomainSpec::half_ball(3, 1.0);
  const double volume = 2.0 * std::numbers::pi / 3.0;
  CHECK(*domain.exact_measure() == doctest::Approx(volume));
  auto mesh = build_mesh(domain, 32);
  CHECK(std::abs(mesh->measure() - volume) < 0.02 * volume);
  CHECK(mesh->connected());
}

TEST_CASE("domain membership") {
  const auto hb = DomainSpec::half_ball(3, 1.0);
  CHECK(hb.contains(Vec{{0.1, 0.1, 0.1}}));
  CHECK_FALSE(hb.contains(Vec{{0.1, 0.1, -0.1}}));
  const auto cone = DomainSpec::cone_sector(3, 1.0, std::numbers::pi / 2);
  CHECK(cone.contains(Vec{{0.0, 0.1, 0.5}}));
  CHECK_FALSE(cone.contains(Vec{{0.5, 0.0, 0.1}}));
  auto mesh = build_mesh(cone, 24);
  CHECK(std::abs(mesh->measure() - *cone.exact_measure()) < 0.1 * *cone.exact_measure());
}

TEST_CASE("mesh errors") {
  try {
    build_mesh(DomainSpec::half_ball(3, 1.0), 1);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
  CHECK_THROWS_AS(DomainSpec::ball(3, -1.0), Error);
  const Mesh split(2, Vec::Zero(2), Vec::Ones(2), Eigen::Vector2i(4, 4),
                   {Eigen::Vector2i(0, 0), Eigen::Vector2i(3, 3)});
  CHECK_FALSE(split.connected());
}

TEST_CASE("energy of constants") {
  auto mesh = unit_cube(4);
  const auto one = GridFunction::constant(mesh, 1.0);
  CHECK(energy(params3(0.0), *mesh, one.values()) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(energy(params3(1.0), *mesh, one.values()) == doctest::Approx(1.0 / 12).epsilon(1e-14));
  const auto minus = GridFunction::constant(mesh, -1.0);
  for (double p : {2.0, 2.5}) {
    CHECK(energy(params3(5.0, p, 3.0), *mesh, minus.values()) == doctest::Approx(1.0 / p).epsilon(1e-14));
  }
  const auto report = assemble_energy(params3(1.0), one);
  CHECK(report.terms.gradient == 0.0);
  CHECK(report.terms.p_term == doctest::Approx(1.0));
  CHECK(report.terms.q_term == doctest::Approx(1.0));
  CHECK(report.terms.critical == doctest::Approx(1.0));
  CHECK(report.J == doctest::Approx(energy_value(params3(1.0), report.terms)).epsilon(1e-15));
  CHECK(report.min_u == 1.0);
  CHECK(report.max_u == 1.0);
}

TEST_CASE("constant one is a discrete critical point without the q term") {
  auto mesh = build_mesh(DomainSpec::half_ball(3, 1.0), 8);
  const auto one = GridFunction::constant(mesh, 1.0);
  const Vec r = assemble_residual(params3(0.0), *mesh, one.values());
  CHECK(r.lpNorm<Eigen::Infinity>() == 0.0);
  const auto report = assemble_energy(params3(0.0), one);
  CHECK(report.residual_sup == 0.0);
  CHECK(report.residual_dual == 0.0);
}

TEST_CASE("residual matches central differences of the energy") {
  auto mesh = unit_cube(8);
  std::mt19937_64 rng(23);
  const auto params = params3(1.5);
  for (int i = 0; i < 5; ++i) {
    const Vec u = random_values(rng, mesh->num_nodes(), -0.5, 1.5);
    const Vec v = random_values(rng, mesh->num_nodes(), -1.0, 1.0);
    const double h = 1e-5;
    const double fd = (energy(params, *mesh, u + h * v) - energy(params, *mesh, u - h * v)) / (2 * h);
    const double exact = assemble_residual(params, *mesh, u).dot(v);
    CHECK(std::abs(fd - exact) <= 1e-6 * std::abs(exact));
  }
}

TEST_CASE("residual with p > 2 and an anisotropic norm matches central differences") {
  auto mesh = unit_cube(6);
  std::mt19937_64 rng(4);
  auto params = params3(0.5, 2.5, 4.0);
  params.norm = Norm<double>::lr(3, 4.0);
  const Vec u = random_values(rng, mesh->num_nodes(), 0.1, 1.0);
  const Vec v = random_values(rng, mesh->num_nodes(), -1.0, 1.0);
  const double h = 1e-5;
  const double fd = (energy(params, *mesh, u + h * v) - energy(params, *mesh, u - h * v)) / (2 * h);
  CHECK(std::abs(fd - assemble_residual(params, *mesh, u).dot(v)) <= 1e-6 * std::abs(fd));
}

TEST_CASE("residual pairing is linear in the test function") {
  auto mesh = unit_cube(6);
  std::mt19937_64 rng(8);
  const Vec u = random_values(rng, mesh->num_nodes(), -0.2, 1.0);
  const Vec r = assemble_residual(params3(2.0), *mesh, u);
  const Vec v = random_values(rng, mesh->num_nodes(), -1, 1);
  const Vec w = random_values(rng, mesh->num_nodes(), -1, 1);
  const double alpha = 0.37;
  CHECK(std::abs(r.dot(alpha * v + w) - (alpha * r.dot(v) + r.dot(w))) < 1e-12 * (1 + std::abs(r.dot(w))));
}

TEST_CASE("anisotropic norm") {
  auto mesh = unit_cube(4);
  const auto params = params3(0.0);
  CHECK(anisotropic_norm(params, GridFunction::constant(mesh, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  auto box = build_mesh(DomainSpec::box(3, 0.0, 2.0), 4);
  CHECK(anisotropic_norm(params, GridFunction::constant(box, -3.0)) ==
        doctest::Approx(3.0 * std::sqrt(8.0)).epsilon(1e-14));
}

TEST_CASE("weighted norm scales the gradient term of a linear function") {
  auto mesh = unit_cube(4);
  const auto u = GridFunction::interpolate(mesh, [](const Vec& x) { return x[0]; });
  auto e = params3(0.0);
  auto w = params3(0.0);
  w.norm = Norm<double>::weighted_quadratic(Eigen::Vector3d(4, 1, 1).asDiagonal().toDenseMatrix());
  const auto te = energy_terms(e, *mesh, u.values());
  const auto tw = energy_terms(w, *mesh, u.values());
  CHECK(te.gradient == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(te.p_term == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(tw.gradient == doctest::Approx(4.0 * te.gradient).epsilon(1e-14));
  CHECK(tw.p_term == te.p_term);
  CHECK(std::pow(anisotropic_norm(w, u), 2) == doctest::Approx(4.0 * te.gradient + te.p_term).epsilon(1e-14));
}

TEST_CASE("energy of a smooth interpolant converges at second order") {
  auto u = [](const Vec& x) {
    return 1.0 + 0.5 * std::cos(std::numbers::pi * x[0]) * std::cos(std::numbers::pi * x[1]) * std::sin(x[2]);
  };
  const auto params = params3(1.0);
  double J[3];
  int k = 0;
  for (int n : {8, 16, 32}) {
    auto mesh = unit_cube(n);
    J[k++] = energy(params, *mesh, GridFunction::interpolate(mesh, u).values());
  }
  const double rate = std::log2(std::abs(J[0] - J[1]) / std::abs(J[1] - J[2]));
  CHECK(rate >= 1.8);
}

TEST_CASE("grid function evaluation and round trip") {
  auto mesh = build_mesh(DomainSpec::half_ball(3, 1.0), 8);
  const auto u = GridFunction::interpolate(mesh, [](const Vec& x) { return 1 + 2 * x[0] - x[1] + 0.5 * x[2]; });
  const auto val = u.evaluate(Vec{{0.1, 0.05, 0.3}});
  REQUIRE(val.has_value());
  CHECK(*val == doctest::Approx(1 + 0.2 - 0.05 + 0.15).epsilon(1e-13));
  CHECK_FALSE(u.evaluate(Vec{{0.0, 0.0, -0.5}}).has_value());

  std::stringstream ss;
  write_grid_function(ss, u);
  std::stringstream copy(ss.str());
  const auto back = read_grid_function(ss);
  CHECK(back.mesh().num_nodes() == mesh->num_nodes());
  CHECK((back.values() - u.values()).norm() == 0.0);
  const auto onto = read_grid_function(copy, mesh);
  CHECK((onto.values() - u.values()).norm() == 0.0);
}

TEST_CASE("preconditioner is the H1 Riesz map") {
  auto mesh = unit_cube(6);
  const SobolevPreconditioner pre(*mesh);
  std::mt19937_64 rng(9);
  const Vec r = random_values(rng, mesh->num_nodes(), -1, 1);
  const Vec d = pre.apply(r);
  CHECK((pre.matrix() * d - r).norm() < 1e-10 * r.norm());
  CHECK(pre.dual_norm(r) == doctest::Approx(std::sqrt(r.dot(d))).epsilon(1e-12));
  const Vec one = Vec::Ones(mesh->num_nodes());
  CHECK(pre.primal_norm(one) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("problem parameter validation") {
  auto params = params3(1.0);
  CHECK_NOTHROW(params.validate());
  CHECK(params.critical_exponent() == doctest::Approx(6.0));
  CHECK(params.theorem_regime());
  params.q = 6.0;
  CHECK_THROWS_AS(params.validate(), Error);
  params.q = 4.0;
  params.lambda = -1;
  CHECK_THROWS_AS(params.validate(), Error);
  params.lambda = 1;
  params.p = 1.5;
  CHECK_THROWS_AS(params.validate(), Error);
}

}  // TEST_SUITE
