#include "anisocrit/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace anisocrit {

namespace {

std::string located(const std::string& source, int line, int column, const std::string& message) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ':' << line << ':' << column;
  os << ": " << message;
  return os.str();
}

// Marks of the keys that cross-field checks point at.
using Marks = std::map<std::string, YAML::Mark>;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& message) const {
    if (mark.is_null()) throw ConfigError(source_, 0, 0, message);
    throw ConfigError(source_, mark.line + 1, mark.column + 1, message);
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node.Mark(), what + " must be a mapping");
  }

  void only_keys(const YAML::Node& node, const std::string& block, std::set<std::string> allowed) const {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first.Mark(), "unknown key '" + key + "' in " + block);
    }
  }

  template <typename T>
  bool read(const YAML::Node& block, const std::string& key, T& out, Marks* marks = nullptr,
            const std::string& mark_name = {}) const {
    const YAML::Node node = block[key];
    if (!node) return false;
    if (marks) (*marks)[mark_name.empty() ? key : mark_name] = node.Mark();
    try {
      out = node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node.Mark(), "'" + key + "' has the wrong type");
    }
    return true;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

DualMode parse_dual(const Reader& rd, const YAML::Node& node) {
  const auto s = node.as<std::string>();
  if (s == "analytic") return DualMode::Analytic;
  if (s == "numeric") return DualMode::Numeric;
  rd.fail(node.Mark(), "norm.dual must be 'analytic' or 'numeric'");
}

void check(const Reader& rd, const Marks& marks, const std::string& key, bool ok, const std::string& message) {
  if (ok) return;
  const auto it = marks.find(key);
  rd.fail(it == marks.end() ? YAML::Mark::null_mark() : it->second, message);
}

// Everything that does not need the YAML tree; marks locate the message when present.
void validate(const RunConfig& c, const Reader& rd, const Marks& marks) {
  check(rd, marks, "N", c.N >= 2, "N must be >= 2");
  check(rd, marks, "p", c.p >= 2.0, "p must satisfy p >= 2");
  check(rd, marks, "p", c.p < c.N, "p must satisfy p < N");
  check(rd, marks, "q", c.q > c.p && c.q < c.critical_exponent(), "q must satisfy p < q < p*");
  check(rd, marks, "lambda", c.lambda >= 0.0 && std::isfinite(c.lambda), "lambda must be >= 0");
  check(rd, marks, "require_regime", !c.require_regime || c.params().theorem_regime(),
        "regime flag false: need N >= p^2 or N = p^2 - p + 1 (set require_regime: false to override)");

  try {
    (void)c.norm.build_dual(c.N);
  } catch (const Error& e) {
    check(rd, marks, "norm", false, std::string("norm: ") + e.what());
  }

  const auto& d = c.domain;
  check(rd, marks, "resolution", d.resolution >= 4, "resolution must be >= 4");
  check(rd, marks, "type", d.type == "half-ball" || d.type == "ball" || d.type == "box" || d.type == "cone-sector",
        "domain.type must be one of half-ball, ball, box, cone-sector");
  check(rd, marks, "radius", d.radius > 0.0, "domain.radius must be positive");
  if (d.type == "cone-sector") {
    check(rd, marks, "opening", d.opening > 0.0 && d.opening <= 3.141592653589793,
          "domain.opening must lie in (0, pi]");
  }
  if (d.type == "box") {
    check(rd, marks, "lower", static_cast<int>(d.lower.size()) == c.N, "domain.lower must have N entries");
    check(rd, marks, "upper", static_cast<int>(d.upper.size()) == c.N, "domain.upper must have N entries");
    for (int i = 0; i < c.N; ++i) {
      check(rd, marks, "upper", d.lower[i] < d.upper[i], "domain.lower must be below domain.upper");
    }
  }
  if (d.curvatures) {
    check(rd, marks, "curvatures", static_cast<int>(d.curvatures->size()) == c.N - 1,
          "domain.curvatures must have N - 1 entries");
    for (double a : *d.curvatures) check(rd, marks, "curvatures", std::isfinite(a), "curvatures must be finite");
  }

  const auto& o = c.solver.options;
  check(rd, marks, "tolerance", o.tolerance > 0.0, "solver.tolerance must be positive");
  check(rd, marks, "max_iterations", o.max_iterations >= 1, "solver.max_iterations must be >= 1");
  check(rd, marks, "knots", o.knots >= 3, "solver.knots must be >= 3");
  check(rd, marks, "armijo", o.armijo > 0.0 && o.armijo < 1.0, "solver.armijo must lie in (0, 1)");
  check(rd, marks, "max_step", o.max_step > 0.0, "solver.max_step must be positive");
  check(rd, marks, "max_halvings", o.max_halvings >= 1, "solver.max_halvings must be >= 1");
  check(rd, marks, "respace_every", o.respace_every >= 0, "solver.respace_every must be >= 0");
  check(rd, marks, "C_hat", o.C_hat > 0.0, "solver.C_hat must be positive");
  check(rd, marks, "geometry_samples", o.geometry_samples >= 1, "solver.geometry_samples must be >= 1");
  check(rd, marks, "init_eps", c.solver.init_eps > 0.0, "solver.init_eps must be positive");
  check(rd, marks, "refine_resolution", c.solver.refine_resolution == 0 || c.solver.refine_resolution >= 4,
        "solver.refine_resolution must be 0 or >= 4");

  for (double e : c.sweep.eps) check(rd, marks, "eps", e > 0.0, "sweep.eps entries must be positive");
  for (double l : c.sweep.lambda) check(rd, marks, "sweep_lambda", l >= 0.0, "sweep.lambda entries must be >= 0");

  check(rd, marks, "samples", c.checks.samples >= 1, "checks.samples must be >= 1");
  check(rd, marks, "check_tolerance", c.checks.tolerance > 0.0, "checks.tolerance must be positive");
  check(rd, marks, "prefix", !c.output.prefix.empty(), "output.prefix must not be empty");
}

RunConfig parse_tree(const YAML::Node& root, const std::string& source) {
  const Reader rd(source);
  RunConfig c;
  c.source = source;
  Marks marks;
  if (!root || root.IsNull()) {
    validate(c, rd, marks);
    return c;
  }
  rd.require_map(root, "the configuration");
  rd.only_keys(root, "the configuration", {"problem", "norm", "domain", "solver", "sweep", "checks", "output"});

  if (const auto b = root["problem"]) {
    rd.require_map(b, "problem");
    rd.only_keys(b, "problem", {"N", "p", "q", "lambda", "require_regime"});
    rd.read(b, "N", c.N, &marks);
    rd.read(b, "p", c.p, &marks);
    rd.read(b, "q", c.q, &marks);
    rd.read(b, "lambda", c.lambda, &marks);
    rd.read(b, "require_regime", c.require_regime, &marks);
  }
  if (const auto b = root["norm"]) {
    rd.require_map(b, "norm");
    rd.only_keys(b, "norm", {"family", "matrix", "r", "delta", "dual"});
    marks["norm"] = b.Mark();
    rd.read(b, "family", c.norm.family);
    if (c.norm.family != "euclidean" && c.norm.family != "weighted-quadratic" && c.norm.family != "lr") {
      rd.fail(b["family"].Mark(), "norm.family must be one of euclidean, weighted-quadratic, lr");
    }
    if (const auto m = b["matrix"]) {
      std::vector<std::vector<double>> rows;
      rd.read(b, "matrix", rows);
      const auto n = static_cast<Eigen::Index>(rows.size());
      c.norm.matrix.resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
          rd.fail(m.Mark(), "norm.matrix must be square");
        }
        for (Eigen::Index j = 0; j < n; ++j) c.norm.matrix(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    } else if (c.norm.family == "weighted-quadratic") {
      rd.fail(b.Mark(), "weighted-quadratic norm needs 'matrix'");
    }
    rd.read(b, "r", c.norm.r);
    rd.read(b, "delta", c.norm.delta);
    if (const auto d = b["dual"]) c.norm.dual = parse_dual(rd, d);
  }
  if (const auto b = root["domain"]) {
    rd.require_map(b, "domain");
    rd.only_keys(b, "domain", {"type", "radius", "lower", "upper", "opening", "resolution", "curvatures"});
    rd.read(b, "type", c.domain.type, &marks);
    rd.read(b, "radius", c.domain.radius, &marks);
    rd.read(b, "lower", c.domain.lower, &marks);
    rd.read(b, "upper", c.domain.upper, &marks);
    rd.read(b, "opening", c.domain.opening, &marks);
    rd.read(b, "resolution", c.domain.resolution, &marks);
    std::vector<double> curv;
    if (rd.read(b, "curvatures", curv, &marks)) c.domain.curvatures = curv;
  }
  if (const auto b = root["solver"]) {
    rd.require_map(b, "solver");
    rd.only_keys(b, "solver",
                 {"tolerance", "max_iterations", "knots", "armijo", "max_step", "max_halvings", "respace_every",
                  "C_hat", "geometry_samples", "seed", "init_eps", "refine_resolution"});
    auto& o = c.solver.options;
    rd.read(b, "tolerance", o.tolerance, &marks);
    rd.read(b, "max_iterations", o.max_iterations, &marks);
    rd.read(b, "knots", o.knots, &marks);
    rd.read(b, "armijo", o.armijo, &marks);
    rd.read(b, "max_step", o.max_step, &marks);
    rd.read(b, "max_halvings", o.max_halvings, &marks);
    rd.read(b, "respace_every", o.respace_every, &marks);
    rd.read(b, "C_hat", o.C_hat, &marks);
    rd.read(b, "geometry_samples", o.geometry_samples, &marks);
    rd.read(b, "seed", o.seed, &marks);
    rd.read(b, "init_eps", c.solver.init_eps, &marks);
    rd.read(b, "refine_resolution", c.solver.refine_resolution, &marks);
  }
  if (const auto b = root["sweep"]) {
    rd.require_map(b, "sweep");
    rd.only_keys(b, "sweep", {"eps", "lambda"});
    rd.read(b, "eps", c.sweep.eps, &marks);
    rd.read(b, "lambda", c.sweep.lambda, &marks, "sweep_lambda");
  }
  if (const auto b = root["checks"]) {
    rd.require_map(b, "checks");
    rd.only_keys(b, "checks", {"samples", "seed", "tolerance"});
    rd.read(b, "samples", c.checks.samples, &marks);
    rd.read(b, "seed", c.checks.seed, &marks);
    rd.read(b, "tolerance", c.checks.tolerance, &marks, "check_tolerance");
  }
  if (const auto b = root["output"]) {
    rd.require_map(b, "output");
    rd.only_keys(b, "output", {"dir", "prefix"});
    std::string dir;
    if (rd.read(b, "dir", dir, &marks)) c.output.dir = dir;
    rd.read(b, "prefix", c.output.prefix, &marks);
  }
  validate(c, rd, marks);
  return c;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, int column, const std::string& message)
    : Error(ErrorKind::Config, located(source, line, column, message)), line_(line), column_(column) {}

Norm<double> NormConfig::build(int N) const {
  if (family == "euclidean") return Norm<double>::euclidean(N);
  if (family == "weighted-quadratic") {
    if (matrix.rows() != N) throw Error(ErrorKind::DimensionMismatch, "matrix must be N x N");
    return Norm<double>::weighted_quadratic(matrix);
  }
  if (family == "lr") return Norm<double>::lr(N, r, delta);
  throw Error(ErrorKind::InvalidArgument, "unknown norm family '" + family + "'");
}

DualNorm<double> NormConfig::build_dual(int N) const {
  auto h = build(N);
  if (!dual) return DualNorm<double>::best(std::move(h));
  return *dual == DualMode::Analytic ? DualNorm<double>::analytic(std::move(h))
                                     : DualNorm<double>::numeric(std::move(h));
}

DomainSpec DomainConfig::build(int N) const {
  if (type == "half-ball") return DomainSpec::half_ball(N, radius);
  if (type == "ball") return DomainSpec::ball(N, radius);
  if (type == "cone-sector") return DomainSpec::cone_sector(N, radius, opening);
  if (type == "box") {
    return DomainSpec::box(Eigen::Map<const Eigen::VectorXd>(lower.data(), static_cast<Eigen::Index>(lower.size())),
                           Eigen::Map<const Eigen::VectorXd>(upper.data(), static_cast<Eigen::Index>(upper.size())));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown domain type '" + type + "'");
}

std::vector<double> DomainConfig::boundary_curvatures(int N) const {
  return curvatures ? *curvatures : build(N).curvatures();
}

ProblemParams RunConfig::params() const {
  ProblemParams pp;
  pp.N = N;
  pp.p = p;
  pp.q = q;
  pp.lambda = lambda;
  if (N >= 2) pp.norm = norm.build(N);
  return pp;
}

std::string RunConfig::echo() const {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "problem" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "N" << YAML::Value << N << YAML::Key << "p" << YAML::Value << p;
  out << YAML::Key << "q" << YAML::Value << q << YAML::Key << "lambda" << YAML::Value << lambda;
  out << YAML::Key << "require_regime" << YAML::Value << require_regime;
  out << YAML::EndMap;
  {
    std::ostringstream derived;
    derived << std::setprecision(17) << "p* = " << critical_exponent();
    out << YAML::Comment(derived.str());
  }

  out << YAML::Key << "norm" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << norm.family;
  if (norm.family == "weighted-quadratic") {
    out << YAML::Key << "matrix" << YAML::Value << YAML::BeginSeq;
    for (Eigen::Index i = 0; i < norm.matrix.rows(); ++i) {
      out << YAML::BeginSeq;
      for (Eigen::Index j = 0; j < norm.matrix.cols(); ++j) out << norm.matrix(i, j);
      out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
  }
  if (norm.family == "lr") out << YAML::Key << "r" << YAML::Value << norm.r << YAML::Key << "delta" << YAML::Value << norm.delta;
  const bool numeric = norm.dual ? *norm.dual == DualMode::Numeric : !DualNorm<double>::has_analytic(norm.build(N));
  out << YAML::Key << "dual" << YAML::Value << (numeric ? "numeric" : "analytic") << YAML::EndMap;

  out << YAML::Key << "domain" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << domain.type << YAML::Key << "radius" << YAML::Value << domain.radius;
  if (domain.type == "box") {
    out << YAML::Key << "lower" << YAML::Value << domain.lower << YAML::Key << "upper" << YAML::Value << domain.upper;
  }
  if (domain.type == "cone-sector") out << YAML::Key << "opening" << YAML::Value << domain.opening;
  out << YAML::Key << "resolution" << YAML::Value << domain.resolution;
  out << YAML::Key << "curvatures" << YAML::Value << domain.boundary_curvatures(N) << YAML::EndMap;

  const auto& o = solver.options;
  out << YAML::Key << "solver" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "tolerance" << YAML::Value << o.tolerance;
  out << YAML::Key << "max_iterations" << YAML::Value << o.max_iterations;
  out << YAML::Key << "knots" << YAML::Value << o.knots;
  out << YAML::Key << "armijo" << YAML::Value << o.armijo;
  out << YAML::Key << "max_step" << YAML::Value << o.max_step;
  out << YAML::Key << "max_halvings" << YAML::Value << o.max_halvings;
  out << YAML::Key << "respace_every" << YAML::Value << o.respace_every;
  out << YAML::Key << "C_hat" << YAML::Value << o.C_hat;
  out << YAML::Key << "geometry_samples" << YAML::Value << o.geometry_samples;
  out << YAML::Key << "seed" << YAML::Value << o.seed;
  out << YAML::Key << "init_eps" << YAML::Value << solver.init_eps;
  out << YAML::Key << "refine_resolution" << YAML::Value << solver.refine_resolution << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "eps" << YAML::Value << sweep.eps;
  out << YAML::Key << "lambda" << YAML::Value << (sweep.lambda.empty() ? std::vector<double>{lambda} : sweep.lambda);
  out << YAML::EndMap;

  out << YAML::Key << "checks" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "samples" << YAML::Value << checks.samples << YAML::Key << "seed" << YAML::Value << checks.seed;
  out << YAML::Key << "tolerance" << YAML::Value << checks.tolerance << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << output.dir.string() << YAML::Key << "prefix" << YAML::Value << output.prefix;
  out << YAML::EndMap << YAML::EndMap;
  return out.c_str();
}

RunConfig parse_config_string(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  return parse_tree(root, source);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, 0, "cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path.string());
}

void validate_config(const RunConfig& config) { validate(config, Reader(config.source), {}); }

}  // namespace anisocrit
