// anisocrit: command-line front end.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "anisocrit/commands.hpp"
#include "anisocrit/config.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string prefix;
  std::optional<double> lambda;
  std::optional<int> resolution;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace anisocrit;
  CLI::App app{"Critical anisotropic Neumann problem: norms, radial integrals, extremals, mountain-pass solver"};
  app.require_subcommand(1);

  Common common;
  CommandOptions opts;
  std::vector<double> curvatures;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config, "YAML configuration file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", common.out, "output directory (overrides output.dir)");
    sub->add_option("--prefix", common.prefix, "result file prefix (overrides output.prefix)");
    sub->add_option("--jobs", opts.jobs, "concurrent sweep points")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", common.lambda, "override problem.lambda");
    sub->add_option("--resolution", common.resolution, "override domain.resolution");
  };

  const char* help[] = {
      "norm and dual-norm identities, strict monotonicity",
      "radial moments: Beta form, quadrature, recursion",
      "boundary-strip integrals over an eps sweep",
      "Sobolev quotient of a truncated extremal on the half-ball",
      "fibering maximum sup_t J(t u)",
      "critical-level sweep over lambda and eps",
      "mountain-pass solve",
      "diagnostics of a stored solution",
  };
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < command_names().size(); ++i) {
    auto* sub = app.add_subcommand(command_names()[i], help[i]);
    add_common(sub);
    subs.push_back(sub);
  }
  for (auto* sub : {subs[1], subs[2]}) {
    sub->add_option("--p", opts.p, "exponent p");
    sub->add_option("--N", opts.N, "dimension N");
  }
  for (auto* sub : {subs[2], subs[5]}) sub->add_option("--eps-sweep", opts.eps, "eps values");
  subs[2]->add_option("--curvatures", curvatures, "principal curvatures at the boundary point");
  subs[3]->add_option("--scale", opts.scale, "concentration scale of the extremal");
  subs[4]->add_option("--A", opts.A, "coefficient A");
  subs[4]->add_option("--B", opts.B, "coefficient B");
  subs[4]->add_option("--C", opts.C, "coefficient C");
  subs[7]->add_option("--solution", opts.solution, "solution file (default <out>/<prefix>_solution.txt)");
  subs[7]->add_option("--refine", opts.refine, "re-solve at this resolution and compare sup u");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (!curvatures.empty()) opts.curvatures = curvatures;

  std::string command;
  for (auto* sub : subs) {
    if (sub->parsed()) command = sub->get_name();
  }

  RunConfig config;
  try {
    config = common.config.empty() ? parse_config_string("", "<defaults>") : parse_config(common.config);
  } catch (const Error& e) {
    std::cerr << "error: cli: " << e.what() << '\n';
    return exit_status(e.kind());
  }
  if (!common.out.empty()) config.output.dir = common.out;
  if (!common.prefix.empty()) config.output.prefix = common.prefix;
  if (common.lambda) config.lambda = *common.lambda;
  if (common.resolution) config.domain.resolution = *common.resolution;

  return dispatch(command, config, opts, std::cout, std::cerr);
}
