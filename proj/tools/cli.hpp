#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace permuton::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kViolation = 2 };

// Thrown for malformed flags or config values; run() maps it to kUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string family;
  std::optional<std::uint64_t> n;
  std::string n_grid;
  std::optional<std::uint64_t> replicates;
  std::uint64_t seed = 1;
  std::string lambda;
  std::string out = "-";
  std::string in;
  bool json = false;
  unsigned threads = 0;
  bool with_log_correction = false;
  bool emit_witness = false;
  std::optional<double> alpha;
  std::string suite = "primary";
  std::string criteria;
};

// `start:stop:geometric[:points]`. Without `points` the grid doubles:
// round(log2(stop/start)) + 1 points.
std::vector<std::uint64_t> parse_n_grid(std::string_view spec);

// Comma-separated non-negative reals.
std::vector<double> parse_real_list(std::string_view spec);

// Runs one command line. Output selected by `--out -` goes to `out`;
// diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace permuton::cli
