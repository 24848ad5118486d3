#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssatlas/config.hpp"
#include "ssatlas/serialize.hpp"

namespace ssatlas {

// Output could not be written. Exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string version();

struct ResultEnvelope {
  RunConfig config;
  std::string version;
  double wall_time_s = 0.0;
  ordered_json payload;
  CsvTable table;  // the payload as one CSV table
  std::vector<std::string> warnings;
};

// Runs the configured command. Module exceptions propagate unchanged.
ResultEnvelope run(const RunConfig& config);

// JSON: {"config", "version", "wall_time_s", "payload", "warnings"} in that order.
// CSV: the payload table only.
std::string serialize(const ResultEnvelope& envelope, Format format);

// Writes to config.output, or to `out` when it is empty. Throws IoError.
void write_result(const ResultEnvelope& envelope, std::ostream& out);

enum ExitCode { kExitOk = 0, kExitUsage = 2, kExitNumerical = 3, kExitIo = 4 };

// Full command-line entry point; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace ssatlas
