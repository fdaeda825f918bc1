#include "anisocrit/commands.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <locale>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "anisocrit/anisotropy.hpp"
#include "anisocrit/discretization.hpp"
#include "anisocrit/extremals.hpp"
#include "anisocrit/radial_integrals.hpp"
#include "anisocrit/solver.hpp"

namespace anisocrit {

namespace {

using json = nlohmann::ordered_json;

std::string format_double(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// nlohmann prints the shortest round-trip form; result files use 17 digits.
void write_json(std::ostream& os, const json& j, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner(static_cast<std::size_t>(indent + 2), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << inner << json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent + 2);
      }
      os << '\n' << pad << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << inner;
        write_json(os, j[i], indent + 2);
      }
      os << '\n' << pad << ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      os << (std::isfinite(x) ? format_double(x) : "null");
      return;
    }
    default:
      os << j.dump();
  }
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vector_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

class Output {
 public:
  Output(const RunConfig& config, std::ostream& log) : dir_(config.output.dir), prefix_(config.output.prefix), log_(log) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  std::filesystem::path path(const std::string& suffix) const { return dir_ / (prefix_ + "_" + suffix); }

  void write(const std::string& suffix, const std::function<void(std::ostream&)>& body) const {
    const auto p = path(suffix);
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + p.string());
    os.imbue(std::locale::classic());
    body(os);
    if (!os) throw Error(ErrorKind::Io, "write failed for " + p.string());
    log_ << "wrote " << p.string() << '\n';
  }

  void json_file(const std::string& suffix, const json& j) const {
    write(suffix, [&](std::ostream& os) {
      write_json(os, j);
      os << '\n';
    });
  }

 private:
  std::filesystem::path dir_;
  std::string prefix_;
  std::ostream& log_;
};

void csv_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    first = false;
    os << format_double(v);
  }
  os << '\n';
}

// Runs fn(i) for i < n on up to `jobs` threads; results stay in index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto count = static_cast<std::size_t>(std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(n, 1))));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < count; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

json threshold_json(const LevelThreshold& t) {
  return json{{"S", t.S},
              {"C_hat", t.C_hat},
              {"value", t.value},
              {"C_hat_sampled", t.C_hat_sampled},
              {"value_sampled", t.value_sampled}};
}

// ---------------------------------------------------------------------------

int cmd_check_norm(const RunConfig& c, const CommandOptions&, const Output& out, std::ostream& os,
                   std::ostream& log) {
  const auto dual = c.norm.build_dual(c.N);
  double tol = c.checks.tolerance;
  if (dual.mode() == DualMode::Numeric && tol < 1e-6) {
    tol = 1e-6;
    log << "numeric dual: identity tolerance raised to 1e-6\n";
  }
  const auto report = check_norm_identities(dual, c.checks.samples, c.checks.seed, tol);
  const auto eq = dual.source().equivalence_constants();
  json checks = json::array();
  for (const auto& ch : report.checks) {
    checks.push_back({{"name", ch.name}, {"worst", ch.worst_residual}, {"tolerance", ch.tolerance}, {"passed", ch.passed}});
    os << (ch.passed ? "PASS " : "FAIL ") << ch.name << " worst=" << format_double(ch.worst_residual) << '\n';
  }
  json mono = json::array();
  bool mono_ok = true;
  std::vector<double> exponents{2.0, 3.0};
  if (c.p != 2.0 && c.p != 3.0) exponents.push_back(c.p);
  for (double p : exponents) {
    const auto m = check_monotonicity(dual.source(), p, c.checks.samples, c.checks.seed);
    mono_ok = mono_ok && m.passed();
    mono.push_back({{"p", p},
                    {"min_inner", m.min_inner},
                    {"min_normalized", m.min_normalized},
                    {"violations", m.violations.size()},
                    {"passed", m.passed()}});
    os << (m.passed() ? "PASS " : "FAIL ") << "monotonicity p=" << format_double(p)
       << " min=" << format_double(m.min_inner) << '\n';
  }
  const bool ok = report.passed() && mono_ok;
  json j{{"family", to_string(dual.source().family())},
         {"dimension", c.N},
         {"dual", dual.mode() == DualMode::Analytic ? "analytic" : "numeric"},
         {"samples", c.checks.samples},
         {"seed", c.checks.seed},
         {"equivalence", {{"C1", eq.lower}, {"C2", eq.upper}, {"analytic", eq.analytic}}},
         {"gradient_range", {report.gradient_min, report.gradient_max}},
         {"dual_gradient_range", {report.dual_gradient_min, report.dual_gradient_max}},
         {"identities", checks},
         {"monotonicity", mono},
         {"passed", ok}};
  out.json_file("check_norm.json", j);
  return ok ? 0 : 1;
}

int cmd_radial(const RunConfig& c, const CommandOptions& o, const Output& out, std::ostream& os, std::ostream&) {
  const double p = o.p.value_or(c.p);
  const int N = o.N.value_or(c.N);
  const double pc = conjugate(p);
  const double lo = pc;
  const double hi = N * pc - 1.0;
  constexpr int kPoints = 20;
  bool ok = true;
  double worst_residual = 0.0;
  double worst_quad = 0.0;
  std::ostringstream csv;
  csv.imbue(std::locale::classic());
  csv << "k,p,N,value_beta,value_quad,quad_rel_diff,recursion_residual\n";
  for (int i = 0; i < kPoints; ++i) {
    const double k = lo + (hi - lo) * i / kPoints;
    const double beta = radial_moment(k, p, N, MomentMethod::BetaClosedForm).value;
    const double quad = radial_moment(k, p, N, MomentMethod::AdaptiveQuadrature).value;
    const double diff = std::abs(quad - beta) / beta;
    const double res = moment_recursion_residual(k, p, N);
    worst_residual = std::max(worst_residual, res);
    worst_quad = std::max(worst_quad, diff);
    csv_row(csv, {k, p, static_cast<double>(N), beta, quad, diff, res});
  }
  ok = worst_residual < 1e-10 && worst_quad < 1e-8;
  out.write("radial.csv", [&](std::ostream& f) { f << csv.str(); });

  json j{{"p", p}, {"N", N}, {"worst_recursion_residual", worst_residual}, {"worst_quad_rel_diff", worst_quad}};
  const ScaledRatio sr = K1_over_K2_scaled(p, N);
  j["K1_over_K2_scaled"] = {{"value", sr.value}, {"via_moments", sr.via_moments}, {"rel_diff", sr.rel_diff}};
  if (N > 2.0 * p - 1.0) {
    j["moment_ratio_high"] = moment_ratio_high(p, N);
    j["limit_I_over_II"] = limit_I_over_II(p, N);
  } else {
    j["moment_ratio_high"] = nullptr;
    j["limit_I_over_II"] = nullptr;
  }
  j["passed"] = ok;
  out.json_file("radial.json", j);
  os << (ok ? "PASS" : "FAIL") << " radial p=" << format_double(p) << " N=" << N
     << " recursion=" << format_double(worst_residual) << " quad=" << format_double(worst_quad) << '\n';
  return ok ? 0 : 1;
}

int cmd_extremal(const RunConfig& c, const CommandOptions& o, const Output& out, std::ostream& os, std::ostream&) {
  const double p = o.p.value_or(c.p);
  const int N = o.N.value_or(c.N);
  // no mesh involved, so the default reaches one decade below the mesh sweep
  const std::vector<double> eps = o.eps.empty() ? std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4} : o.eps;
  const std::vector<double> alpha = o.curvatures ? *o.curvatures : c.domain.boundary_curvatures(N);
  if (static_cast<int>(alpha.size()) != N - 1) {
    throw Error(ErrorKind::InvalidArgument, "extremal: need N - 1 curvatures");
  }
  const auto rows = parallel_map<EpsilonEstimates>(
      eps.size(), o.jobs, [&](std::size_t i) { return boundary_strip_integrals(N, p, eps[i], alpha); });

  out.write("extremal.csv", [&](std::ostream& f) {
    f << "eps,lambda,K1eps,K2eps,K3eps,I,II,I_scaled,II_scaled,ratio\n";
    for (const auto& r : rows) {
      csv_row(f, {r.eps, r.lambda, r.K1eps, r.K2eps, r.K3eps, r.I, r.II, r.I_scaled, r.II_scaled, r.ratio});
    }
  });

  const auto unit = whole_space_constants(N, p);
  json j{{"p", p},
         {"N", N},
         {"curvatures", vector_json(alpha)},
         {"whole_space_unit", {{"K1", unit.K1}, {"K2", unit.K2}, {"S", unit.S}}}};
  auto dual = std::make_shared<const DualNorm<double>>(DualNorm<double>::analytic(Norm<double>::euclidean(N)));
  const auto ext = whole_space_constants(make_extremal(N, p, 1.0, Eigen::VectorXd::Zero(N), dual));
  j["whole_space_extremal"] = {{"K1", ext.K1}, {"K2", ext.K2}, {"S", ext.S}};
  if (N > 2.0 * p - 1.0) {
    const auto lim = strip_limits(N, p, alpha);
    j["limits"] = {{"I_scaled", lim.I_scaled}, {"II_scaled", lim.II_scaled}, {"ratio", lim.ratio}};
    // ratios ordered by decreasing eps must approach the limit monotonically
    std::vector<const EpsilonEstimates*> sorted;
    for (const auto& r : rows) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a->eps > b->eps; });
    bool monotone = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      monotone = monotone && std::abs(sorted[i]->ratio - lim.ratio) <= std::abs(sorted[i - 1]->ratio - lim.ratio);
    }
    j["monotone"] = monotone;
  } else {
    j["limits"] = nullptr;
  }
  out.json_file("extremal.json", j);
  for (const auto& r : rows) {
    os << "eps=" << format_double(r.eps) << " I/II=" << format_double(r.ratio) << '\n';
  }
  return 0;
}

int cmd_quotient(const RunConfig& c, const CommandOptions& o, const Output& out, std::ostream& os, std::ostream&) {
  if (c.domain.type != "half-ball") throw Error(ErrorKind::InvalidArgument, "quotient: needs a half-ball domain");
  const auto mesh = build_mesh(c.domain.build(c.N), c.domain.resolution);
  const double R = c.domain.radius;
  const Cutoff cut{0.5 * R, 0.95 * R};
  const auto q = half_space_quotient(c.p, mesh, o.scale.value_or(0.05 * R), cut);
  const bool ok = q.ratio >= 0.95;
  out.json_file("quotient.json", json{{"p", c.p},
                                      {"N", c.N},
                                      {"resolution", c.domain.resolution},
                                      {"scale", q.lambda},
                                      {"cutoff", {q.cutoff.inner, q.cutoff.outer}},
                                      {"quotient", q.quotient},
                                      {"S", q.S},
                                      {"reference", q.reference},
                                      {"ratio", q.ratio},
                                      {"passed", ok}});
  os << (ok ? "PASS" : "FAIL") << " quotient=" << format_double(q.quotient)
     << " reference=" << format_double(q.reference) << " ratio=" << format_double(q.ratio) << '\n';
  return ok ? 0 : 1;
}

int cmd_fibering(const RunConfig& c, const CommandOptions& o, const Output& out, std::ostream& os, std::ostream&) {
  const ProblemParams params = c.params();
  FiberingCoefficients co;
  std::string source;
  if (o.A || o.B || o.C) {
    if (!(o.A && o.B && o.C)) throw Error(ErrorKind::InvalidArgument, "fibering: give all of A, B, C");
    co = {*o.A, *o.B, *o.C};
    source = "coefficients";
  } else {
    const DomainSpec domain = c.domain.build(c.N);
    const auto mesh = build_mesh(domain, c.domain.resolution);
    auto dual = std::make_shared<const DualNorm<double>>(c.norm.build_dual(c.N));
    const auto spec = u_eps(c.N, c.p, c.solver.init_eps, domain.concentration_point(), dual);
    co = fibering_coefficients(params, interpolate_extremal(spec, mesh));
    source = "u_eps";
  }
  const FiberingMaximum m = fibering_maximize(co, params);
  const LevelThreshold thr = level_threshold(params, c.solver.options.C_hat);
  out.json_file("fibering.json", json{{"source", source},
                                      {"lambda", c.lambda},
                                      {"A", co.A},
                                      {"B", co.B},
                                      {"C", co.C},
                                      {"t", m.t},
                                      {"Y", m.Y},
                                      {"iterations", m.iterations},
                                      {"threshold", threshold_json(thr)},
                                      {"margin", thr.value - m.Y}});
  os << "t=" << format_double(m.t) << " Y=" << format_double(m.Y) << " threshold=" << format_double(thr.value)
     << '\n';
  return 0;
}

int cmd_sweep(const RunConfig& c, const CommandOptions& o, const Output& out, std::ostream& os, std::ostream& log) {
  const std::vector<double> eps = o.eps.empty() ? c.sweep.eps : o.eps;
  std::vector<double> lambdas = c.sweep.lambda.empty() ? std::vector<double>{c.lambda} : c.sweep.lambda;
  const DomainSpec domain = c.domain.build(c.N);
  const auto mesh = build_mesh(domain, c.domain.resolution);
  const auto tables = parallel_map<std::vector<SweepRow>>(lambdas.size(), o.jobs, [&](std::size_t i) {
    ProblemParams params = c.params();
    params.lambda = lambdas[i];
    return critical_level_sweep(params, eps, mesh, domain, c.solver.options.C_hat);
  });

  out.write("sweep.csv", [&](std::ostream& f) {
    f << "lambda,eps,scale,t,Y,threshold,margin,threshold_sampled,margin_sampled,peak_error\n";
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      for (const auto& r : tables[i]) {
        csv_row(f, {lambdas[i], r.eps, r.scale, r.t, r.Y, r.threshold, r.margin, r.threshold_sampled, r.margin_sampled,
                    r.peak_error});
      }
    }
  });

  // smallest lambda with a positive margin, per eps and for all eps at once
  json per_eps = json::array();
  for (std::size_t e = 0; e < eps.size(); ++e) {
    std::optional<double> best;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (tables[i][e].margin > 0.0 && (!best || lambdas[i] < *best)) best = lambdas[i];
    }
    per_eps.push_back({{"eps", eps[e]}, {"smallest_lambda", best ? json(*best) : json(nullptr)}});
  }
  std::optional<double> all;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const bool positive =
        std::all_of(tables[i].begin(), tables[i].end(), [](const SweepRow& r) { return r.margin > 0.0; });
    if (positive && (!all || lambdas[i] < *all)) all = lambdas[i];
  }
  out.json_file("sweep.json", json{{"resolution", c.domain.resolution},
                                   {"C_hat", c.solver.options.C_hat},
                                   {"lambda", vector_json(lambdas)},
                                   {"eps", vector_json(eps)},
                                   {"smallest_lambda_per_eps", per_eps},
                                   {"smallest_lambda_all_eps", all ? json(*all) : json(nullptr)}});
  if (all) {
    os << "smallest lambda with positive margin: " << format_double(*all) << '\n';
  } else {
    os << "no lambda in the sweep gives a positive margin at every eps\n";
    log << "sweep: margins reported in " << out.path("sweep.csv").string() << '\n';
  }
  return 0;
}

json report_json(const SolveReport& r) {
  return json{{"status", to_string(r.status)},
              {"J", r.J},
              {"residual", r.residual},
              {"residual_sup", r.residual_sup},
              {"min_u", r.min_u},
              {"sup_u", r.sup_u},
              {"norm", r.norm},
              {"threshold", threshold_json(r.threshold)},
              {"below_threshold", r.below_threshold},
              {"path_level", r.path_level},
              {"iterations", r.iterations},
              {"max_knot", r.max_knot},
              {"geometry", {{"theta", r.geometry.theta}, {"beta", r.geometry.beta}, {"endpoint_J", r.geometry.endpoint_J}}}};
}

bool solve_ok(const SolveReport& r) {
  return r.status == SolveStatus::Converged && r.min_u >= -1e-8 && r.J > 0.0 && r.below_threshold;
}

int cmd_solve(const RunConfig& c, const CommandOptions&, const Output& out, std::ostream& os, std::ostream& log) {
  const ProblemParams params = c.params();
  const ExistenceRun run{c.domain.build(c.N), c.domain.resolution, c.solver.init_eps};
  const SolveReport rep = solve_existence(params, run, c.solver.options);
  log << "solve: " << rep.iterations << " iterations in " << std::fixed << std::setprecision(2) << rep.wall_time
      << " s\n" << std::defaultfloat;

  json j{{"N", c.N}, {"p", c.p}, {"q", c.q}, {"lambda", c.lambda}, {"resolution", c.domain.resolution}};
  j["report"] = report_json(rep);
  bool ok = solve_ok(rep);
  if (c.solver.refine_resolution > 0) {
    ExistenceRun fine = run;
    fine.resolution = c.solver.refine_resolution;
    const SolveReport f = solve_existence(params, fine, c.solver.options);
    const double change = std::abs(f.sup_u - rep.sup_u) / rep.sup_u;
    j["refinement"] = {{"resolution", fine.resolution}, {"report", report_json(f)}, {"sup_change", change},
                       {"stable", change < 0.1}};
    ok = ok && solve_ok(f) && change < 0.1;
  }
  j["passed"] = ok;
  out.json_file("solve.json", j);
  out.write("history.csv", [&](std::ostream& f) {
    f << "iteration,J,residual,norm,bound\n";
    for (const auto& h : rep.history) csv_row(f, {static_cast<double>(h.iteration), h.J, h.residual, h.norm, h.bound});
  });
  out.write("solution.txt", [&](std::ostream& f) { write_grid_function(f, *rep.solution); });
  os << "solve: status=" << to_string(rep.status) << " J=" << format_double(rep.J)
     << " residual=" << format_double(rep.residual) << " min_u=" << format_double(rep.min_u)
     << " sup_u=" << format_double(rep.sup_u) << " threshold=" << format_double(rep.threshold.value)
     << " iterations=" << rep.iterations << '\n';
  return ok ? 0 : 1;
}

int cmd_verify(const RunConfig& c, const CommandOptions& o, const Output& out, std::ostream& os, std::ostream& log) {
  const auto path = o.solution.value_or(out.path("solution.txt"));
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read solution file " + path.string());
  const GridFunction u = read_grid_function(in);
  const ProblemParams params = c.params();
  const SolutionDiagnostics d = verify_solution(params, u);
  bool ok = d.residual < c.solver.options.tolerance && d.nonnegative;
  json j{{"solution", path.filename().string()},
         {"residual", d.residual},
         {"residual_sup", d.residual_sup},
         {"min_u", d.min_u},
         {"max_u", d.max_u},
         {"sup_u", d.sup_u},
         {"interior_min", d.interior_min},
         {"J", d.J},
         {"nonnegative", d.nonnegative}};
  const int refine = o.refine.value_or(c.solver.refine_resolution);
  if (refine > 0) {
    if (refine < 4) throw Error(ErrorKind::InvalidArgument, "refine resolution must be >= 4");
    log << "verify: solving at resolution " << refine << '\n';
    const ExistenceRun fine{c.domain.build(c.N), refine, c.solver.init_eps};
    const SolveReport f = solve_existence(params, fine, c.solver.options);
    const double change = std::abs(f.sup_u - d.sup_u) / d.sup_u;
    j["refinement"] = {{"resolution", refine}, {"status", to_string(f.status)}, {"sup_u", f.sup_u},
                       {"sup_change", change}, {"stable", change < 0.1}};
    ok = ok && f.status == SolveStatus::Converged && change < 0.1;
  }
  j["passed"] = ok;
  out.json_file("verify.json", j);
  os << (ok ? "PASS" : "FAIL") << " verify residual=" << format_double(d.residual)
     << " min_u=" << format_double(d.min_u) << " sup_u=" << format_double(d.sup_u) << '\n';
  return ok ? 0 : 1;
}

using Command = int (*)(const RunConfig&, const CommandOptions&, const Output&, std::ostream&, std::ostream&);

struct Entry {
  const char* module;
  Command run;
};

const std::map<std::string, Entry>& table() {
  static const std::map<std::string, Entry> t{
      {"check-norm", {"anisotropy", cmd_check_norm}}, {"radial", {"radial_integrals", cmd_radial}},
      {"extremal", {"extremals", cmd_extremal}},      {"quotient", {"extremals", cmd_quotient}},
      {"fibering", {"solver", cmd_fibering}},         {"sweep", {"solver", cmd_sweep}},
      {"solve", {"solver", cmd_solve}},               {"verify", {"solver", cmd_verify}},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"check-norm", "radial", "extremal", "quotient",
                                              "fibering",   "sweep",  "solve",    "verify"};
  return names;
}

int exit_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NotPositiveDefinite:
      return 2;
    default:
      return 1;
  }
}

int dispatch(const std::string& command, const RunConfig& config, const CommandOptions& options,
             std::ostream& out, std::ostream& log) {
  const auto it = table().find(command);
  if (it == table().end()) {
    log << "error: unknown command '" << command << "'\n";
    return 2;
  }
  if (options.jobs < 1) {
    log << "error: --jobs must be >= 1\n";
    return 2;
  }
  log << "config (" << config.source << "):\n" << config.echo() << '\n';
  const auto start = std::chrono::steady_clock::now();
  try {
    validate_config(config);
    const Output files(config, log);
    const int status = it->second.run(config, options, files, out, log);
    log << command << ": exit " << status << " after " << std::fixed << std::setprecision(2)
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n"
        << std::defaultfloat;
    return status;
  } catch (const Error& e) {
    log << "error: " << it->second.module << ": [" << to_string(e.kind()) << "] " << e.what() << '\n';
    return exit_status(e.kind());
  } catch (const std::exception& e) {
    log << "error: " << it->second.module << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace anisocrit
