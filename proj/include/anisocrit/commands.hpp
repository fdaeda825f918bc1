#ifndef ANISOCRIT_COMMANDS_HPP
#define ANISOCRIT_COMMANDS_HPP

// Subcommands behind the command-line tool. Each writes its result files under
// config.output.dir, named <prefix>_<command>.*, and returns an exit status:
// 0 success, 1 runtime or check failure, 2 invalid configuration or arguments.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "anisocrit/config.hpp"
#include "anisocrit/error.hpp"

namespace anisocrit {

struct CommandOptions {
  int jobs = 1;
  std::optional<double> p;                        // radial, extremal
  std::optional<int> N;                           // radial, extremal
  std::vector<double> eps;                        // empty: 1e-1..1e-4 (extremal), config (sweep)
  std::optional<std::vector<double>> curvatures;  // extremal
  std::optional<double> scale;                    // quotient
  std::optional<double> A, B, C;                  // fibering
  std::optional<std::filesystem::path> solution;  // verify
  std::optional<int> refine;                      // verify
};

const std::vector<std::string>& command_names();

/// 2 for configuration and argument errors, 1 otherwise.
int exit_status(ErrorKind kind);

/// Runs `command`. The summary goes to `out`, the run log to `log`.
int dispatch(const std::string& command, const RunConfig& config, const CommandOptions& options,
             std::ostream& out, std::ostream& log);

}  // namespace anisocrit

#endif  // ANISOCRIT_COMMANDS_HPP
