#pragma once

// Run configuration shared by the command line, config files and the config
// echo written into every result.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssatlas/eigensolver.hpp"
#include "ssatlas/scattering.hpp"

namespace ssatlas {

enum class Command { spectrum_sweep, scattering_sweep, ss_find, ss_atlas, trace_gc, verify_exact, cross_validate };
enum class Format { json, csv };

std::string to_string(Command c);
Command command_from_string(const std::string& name);
std::string to_string(Format f);
Format format_from_string(const std::string& name);
const std::vector<Command>& all_commands();

// Bad flags, values or combinations. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --help; carries the text to print. Exit code 0.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::spectrum_sweep;

  // potential
  double A = 1.5;
  std::vector<double> A_list;  // ss-atlas takes a list
  double g = -1.0 / (2.0 * 1.7320508075688772);

  // sweep ranges
  std::optional<double> g_lo, g_hi, k_lo, k_hi;
  double g_step = 0.01;
  double A_lo = 0.1, A_hi = 3.0, A_step = 0.05;
  SweepAxis axis = SweepAxis::k;
  double k = 1.0;
  int samples = 201;
  bool spectra = false;

  // grid and detection
  GridSpec grid;
  int onset_n_points = 501;
  double onset_step = 0.05;
  double tol_g = 1e-3;
  DetectionOptions detection;
  double h = 1e-3;  // finite-difference step of the exact-state residual

  // scattering and roots
  double rel_tol = 1e-10;
  double g0 = -0.93, k0 = 1.0;
  double root_tol = 1e-9;
  int max_iter = 50;
  double fd_step = 1e-6;
  int coarse_n = 64;
  double seed_threshold = 1.0;
  double coarse_rel_tol = 1e-7;
  bool warm_start = true;

  // output
  std::string output;  // empty writes to stdout
  Format format = Format::json;
  int threads = 1;

  bool operator==(const RunConfig&) const = default;
};

// Command-line form: argv[0] is the program name, argv[1] the command.
// `--config <file>` loads a JSON echo first; flags given explicitly override it.
// Throws UsageError naming the offending flag.
RunConfig parse_config(const std::vector<std::string>& argv);

// JSON object in the echo layout (command first, then the command's flags in
// a fixed order). Throws UsageError.
RunConfig parse_config_json(const std::string& text);

// The echo: flag names without dashes as keys, fixed order, only the flags
// the command uses.
std::string config_to_json(const RunConfig& cfg);

// Help text for one command, or the overview when none is given.
std::string usage(const std::optional<Command>& command = std::nullopt);

}  // namespace ssatlas
