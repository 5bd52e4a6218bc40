#pragma once

// Command implementations behind the `logdyn` executable. Each returns the
// process exit status: 0 on success, 1 on a runtime error, 2 on a usage
// error. Data goes to `out` or files, diagnostics to `err`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace logdyn::cli {

using std::filesystem::path;

struct GenOptions {
  path config;
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  path prompt;
  std::size_t steps = 100;
  path out;
};

struct AnalyzeOptions {
  std::vector<path> trajectories;
  std::optional<path> per_step;
  std::optional<path> summary;
  std::optional<path> step_cv;
};

struct SteerOptions {
  path trajectory;
  std::size_t step = 0;
  std::uint32_t target = 0;
  double eta = 0.5;
  std::size_t max_steps = 50;
  std::size_t continue_steps = 0;
  std::optional<path> out;
};

struct ProbeOptions {
  path trajectory;
  std::size_t grid = 11;
  std::optional<path> per_pair;
};

struct BatchOptions {
  path dir;
  path summary;
};

int cmd_gen(const GenOptions& opts, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_steer(const SteerOptions& opts, std::ostream& out, std::ostream& err);
int cmd_probe(const ProbeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_batch(const BatchOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace logdyn::cli
