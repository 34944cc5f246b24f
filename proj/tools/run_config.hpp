#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "switchrep/game.hpp"
#include "switchrep/rng.hpp"
#include "switchrep/schedule.hpp"

namespace switchrep::cli {

// Flag/config-file errors; the CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Engine { ClosedForm, ReducedOde, PairOde, Agent };

/// Raw run configuration: one field per CLI flag. A declarative config file
/// (key=value lines) can override any field; the file wins conflicts with a
/// warning on stderr.
struct RunConfig {
  double omega = 0.01;
  int degree = 4;
  double benefit = 2.0;
  double cost = 0.2;
  int pop_size = 2000;
  std::string rules = "pc,im";
  std::string instants = "2";
  double period = 5.0;
  std::string x0 = "0.5";
  std::string engine = "closed-form";
  double t_end = 50.0;
  double dt = 0.1;
  double step = 1e-3;
  std::uint64_t seed = 1;
  int runs = 1;
  std::string out;
  std::string format = "csv";

  // Applies `path` on top of this config. `provided` holds the long names
  // (without dashes) of flags given on the command line; a differing file
  // value emits an override warning. Throws ConfigError with file:line
  // context on unknown keys or unparsable values.
  void apply_file(const std::string& path, const std::set<std::string>& provided);

  // One-line reproduction echo used in CSV comment headers and JSON echoes.
  std::string echo(const std::string& command) const;
};

/// Config resolved into domain values.
struct ResolvedRun {
  GameParams params;
  SwitchSchedule schedule;
  std::vector<double> x0_list;
  Engine engine = Engine::ClosedForm;
  double t_end = 50.0;
  double sample_dt = 0.1;
  double step = 1e-3;
  std::uint64_t seed = 1;
  int runs = 1;
};

// Validates and converts; throws ConfigError with a field-precise message.
ResolvedRun resolve(const RunConfig& cfg);

// Worker cap from SWITCHREP_THREADS (0 = unset/hardware default).
int thread_cap_from_env();

}  // namespace switchrep::cli
