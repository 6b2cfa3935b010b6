#pragma once

#include "dce/io.hpp"
#include "dce/sweep.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dce {

enum class Command { Spectrum, PhaseScan, FreqScan, Additivity, Convergence, Compare, Validate };
enum class OutputFormat { Csv, Json };

std::string_view to_string(Command command);
std::optional<Command> parse_command(std::string_view name);

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

struct RunManifest {
  Command command = Command::Spectrum;
  CavityConfig config;
  Truncation trunc;
  std::vector<std::string> defaulted;
  std::string output_path;  // empty: stdout
  OutputFormat output_format = OutputFormat::Csv;
  bool quiet = false;
  unsigned threads = 0;

  // Scan and convergence controls.
  int points = 16;
  double grid_from = 1.0;
  double grid_to = 6.0;
  std::vector<Engine> engines{Engine::Analytic, Engine::Numeric};
  std::vector<int> k_list;
  std::vector<int> steps_list;
};

struct RunOutput {
  Table table;
  bool passed = true;  // false: a tolerance or validation check failed
  std::vector<std::string> notes;
};

/// Runs the command and builds its table; does not touch the filesystem.
RunOutput execute(const RunManifest& manifest);

/// execute() plus emission: to output_path atomically, else to `out`.
/// Returns the process exit code.
int run(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Full command line: argv[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dce
