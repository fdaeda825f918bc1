#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "anisocrit/commands.hpp"
#include "anisocrit/config.hpp"

using namespace anisocrit;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(problem: {N: 3, p: 2, q: 4, lambda: 50}
domain: {type: half-ball, radius: 1, resolution: 16}
)";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("anisocrit_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(const std::string& command, RunConfig config, const fs::path& dir, CommandOptions options = {}) {
  config.output.dir = dir;
  std::ostringstream out, log;
  return dispatch(command, config, options, out, log);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal configuration") {
  const auto c = parse_config_string(kMinimal, "minimal.yaml");
  CHECK(c.N == 3);
  CHECK(c.p == 2.0);
  CHECK(c.q == 4.0);
  CHECK(c.lambda == 50.0);
  CHECK(c.domain.type == "half-ball");
  CHECK(c.domain.resolution == 16);
  CHECK(c.critical_exponent() == doctest::Approx(6.0));
  CHECK(c.norm.family == "euclidean");
  CHECK(c.solver.options.tolerance == 1e-6);
  CHECK_NOTHROW(validate_config(c));
  const auto echoed = parse_config_string(c.echo(), "echo");
  CHECK(echoed.echo() == c.echo());
}

TEST_CASE("critical q is rejected with a location") {
  try {
    parse_config_string("problem: {N: 3, p: 2, q: 6, lambda: 50}\n", "bad.yaml");
    FAIL("expected an exception");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("q must satisfy p < q < p*") != std::string::npos);
    CHECK(std::string(e.what()).find("bad.yaml:1:") != std::string::npos);
    CHECK(e.line() == 1);
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("regime checks") {
  CHECK_NOTHROW(parse_config_string("problem: {N: 5, p: 2, q: 3, lambda: 1}\n"));
  CHECK_THROWS_AS(parse_config_string("problem: {N: 5, p: 3, q: 4, lambda: 1}\n"), ConfigError);
  CHECK_NOTHROW(parse_config_string("problem: {N: 5, p: 3, q: 4, lambda: 1, require_regime: false}\n"));
  CHECK_THROWS_AS(parse_config_string("problem: {N: 2, p: 2, q: 3}\n"), ConfigError);
}

TEST_CASE("malformed configurations") {
  CHECK_THROWS_AS(parse_config_string("problem: {N: 3, p: 2, q: 4, lamda: 50}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("domain: {type: torus}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("domain: {resolution: 2}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("problem: [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("norm: {family: weighted-quadratic, matrix: [[1, 2], [2, 1]]}\n"),
                  Error);
  CHECK_THROWS_AS(parse_config(fs::path("/nonexistent/config.yaml")), Error);
}

TEST_CASE("exit status mapping") {
  CHECK(exit_status(ErrorKind::Config) == 2);
  CHECK(exit_status(ErrorKind::InvalidArgument) == 2);
  CHECK(exit_status(ErrorKind::NonConvergence) == 1);
  CHECK(exit_status(ErrorKind::GeometryViolation) == 1);
  CHECK(command_names().size() == 8);
}

TEST_CASE("dispatch exit codes") {
  const auto dir = scratch("dispatch");
  const auto c = parse_config_string(kMinimal);
  CHECK(run("check-norm", c, dir) == 0);
  CHECK(fs::exists(dir / "run_check_norm.json"));
  CommandOptions radial;
  radial.p = 2.0;
  radial.N = 4;
  CHECK(run("radial", c, dir, radial) == 0);
  const auto csv = slurp(dir / "run_radial.csv");
  CHECK(csv.rfind("k,p,N,value_beta,value_quad", 0) == 0);
  CHECK(run("no-such-command", c, dir) == 2);

  auto coarse = c;
  coarse.domain.resolution = 1;
  CHECK(run("solve", coarse, dir) == 2);

  CommandOptions fib;
  fib.A = 1.0;
  fib.B = 1.0;
  fib.C = 0.0;
  CHECK(run("fibering", c, dir, fib) == 1);

  CommandOptions missing;
  missing.solution = dir / "absent.txt";
  CHECK(run("verify", c, dir, missing) == 1);
}

TEST_CASE("solve is deterministic") {
  auto c = parse_config_string(kMinimal);
  c.domain.resolution = 8;
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  REQUIRE(run("solve", c, a) == 0);
  REQUIRE(run("solve", c, b) == 0);
  for (const char* name : {"run_solve.json", "run_history.csv", "run_solution.txt"}) {
    CHECK(slurp(a / name) == slurp(b / name));
    CHECK_FALSE(slurp(a / name).empty());
  }
  CommandOptions verify;
  verify.solution = a / "run_solution.txt";
  CHECK(run("verify", c, a, verify) == 0);
}

TEST_CASE("parallel sweep matches the sequential one") {
  auto c = parse_config_string(kMinimal);
  c.domain.resolution = 8;
  c.sweep.eps = {1e-1};
  c.sweep.lambda = {10, 50, 100};
  const auto a = scratch("sweep_a");
  const auto b = scratch("sweep_b");
  CommandOptions seq, par;
  par.jobs = 3;
  run("sweep", c, a, seq);
  run("sweep", c, b, par);
  CHECK(slurp(a / "run_sweep.csv") == slurp(b / "run_sweep.csv"));
  CHECK_FALSE(slurp(a / "run_sweep.csv").empty());
}

}  // TEST_SUITE
