#include <doctest.h>

#include <cmath>
#include <numbers>

#include "anisocrit/error.hpp"
#include "anisocrit/radial_integrals.hpp"

using namespace anisocrit;
using std::numbers::pi;

namespace {

// Composite Simpson in s on r = s/(1-s); crude but independent of the library.
double simpson_moment(double k, double p, int N, int n = 200000) {
  const double pp = p / (p - 1);
  auto f = [&](double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double r = s / (1 - s);
    return std::pow(r, k) * std::pow(1 + std::pow(r, pp), -N) / ((1 - s) * (1 - s));
  };
  const double h = 1.0 / n;
  double sum = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4 : 2) * f(i * h);
  return sum * h / 3;
}

}  // namespace

TEST_SUITE("radial_integrals") {

TEST_CASE("closed-form moments at p = 2") {
  CHECK(radial_moment(2, 2, 3).value == doctest::Approx(pi / 16).epsilon(1e-14));
  CHECK(radial_moment(0, 2, 3).value == doctest::Approx(3 * pi / 16).epsilon(1e-14));
  const auto q = radial_moment(2, 2, 3, MomentMethod::AdaptiveQuadrature);
  CHECK(q.value == doctest::Approx(pi / 16).epsilon(1e-10));
  CHECK(q.method == MomentMethod::AdaptiveQuadrature);
  CHECK(q.error_estimate >= 0);
}

TEST_CASE("moments agree with an independent Simpson rule") {
  const double cases[][3] = {{2, 2, 4}, {1.5, 3, 5}, {4, 2.5, 6}, {0.5, 2, 3}};
  for (const auto& c : cases) {
    const int N = static_cast<int>(c[2]);
    const double ref = simpson_moment(c[0], c[1], N);
    CHECK(radial_moment(c[0], c[1], N).value == doctest::Approx(ref).epsilon(1e-7));
  }
}

TEST_CASE("validity window") {
  CHECK(conjugate(2) == 2);
  CHECK(conjugate(3) == doctest::Approx(1.5));
  CHECK(in_validity_window(2, 2, 3));
  CHECK_FALSE(in_validity_window(5, 2, 3));   // (k+1)/2 = N
  CHECK_FALSE(in_validity_window(-1, 2, 3));
  try {
    radial_moment(5, 2, 3);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivergentIntegral);
  }
  CHECK_THROWS_AS(radial_moment(7, 2, 3, MomentMethod::AdaptiveQuadrature), Error);
}

TEST_CASE("recursion residual") {
  // (p, N, k)
  const double triples[][3] = {{2, 4, 4}, {3, 9, 3}, {2, 4, 6}};
  for (const auto& t : triples) {
    CHECK(moment_recursion_residual(t[2], t[0], static_cast<int>(t[1])) < 1e-10);
  }
}

TEST_CASE("recursion holds for the Simpson oracle") {
  // M(k) = c(k) M(k - p') checked without the library
  const double p = 3, k = 3;
  const int N = 4;
  const double pp = p / (p - 1);
  const double c = ((p - 1) * k - 1) / (p * N - (p - 1) - (p - 1) * k);
  CHECK(simpson_moment(k, p, N) == doctest::Approx(c * simpson_moment(k - pp, p, N)).epsilon(1e-7));
}

TEST_CASE("adaptive quadrature matches the closed form over a grid") {
  for (double p : {2.0, 2.5, 3.0, 4.0}) {
    for (int N : {5, 9, 14, 20}) {
      if (!(N > p)) continue;
      const double pp = conjugate(p);
      for (double f : {0.05, 0.3, 0.6, 0.95}) {
        const double k = (f * N) * pp - 1;
        if (!in_validity_window(k, p, N)) continue;
        const double a = radial_moment(k, p, N).value;
        const double b = radial_moment(k, p, N, MomentMethod::AdaptiveQuadrature).value;
        CHECK(std::abs(a - b) <= 1e-8 * a);
      }
    }
  }
}

TEST_CASE("high moment ratio") {
  CHECK(moment_ratio_high(2, 4) == doctest::Approx(5).epsilon(1e-12));
  CHECK(moment_ratio_high(3, 9) == doctest::Approx(5).epsilon(1e-12));
  CHECK_THROWS_AS(moment_ratio_high(2, 3), Error);
}

TEST_CASE("strip limit ratio") {
  CHECK(limit_I_over_II(2, 4) == doctest::Approx(20).epsilon(1e-12));
  CHECK(limit_I_over_II(2, 5) == doctest::Approx(27).epsilon(1e-12));
}

TEST_CASE("scaled K1 over K2") {
  const auto a = K1_over_K2_scaled(2, 4);
  CHECK(a.value == doctest::Approx(4).epsilon(1e-14));
  CHECK(a.via_moments == doctest::Approx(4).epsilon(1e-8));
  CHECK(a.rel_diff < 1e-8);
  CHECK(K1_over_K2_scaled(2, 3).value == doctest::Approx(1).epsilon(1e-14));
}

}  // TEST_SUITE
