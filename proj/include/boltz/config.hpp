#pragma once

#include <map>
#include <string>
#include <vector>

#include "boltz/solver.hpp"
#include "boltz/xsection.hpp"

// Plain `key = value` run configuration. '#' starts a comment, blank lines
// are skipped, later assignments win. After the file is read, environment
// variables override individual keys: solver.dt becomes BOLTZLAB_SOLVER_DT
// (uppercase, dots to underscores). Unknown keys are errors, not warnings;
// a config that parses but violates a range constraint reports every
// violation at once.

namespace boltz {

struct RunConfig {
  int dim = 2;
  double gamma = 0;
  double nu = 1;
  std::string b_kind = "reference";  // reference | tabulated
  std::string b_table;               // CSV path (theta,b per line), tabulated only

  int grid_n = 32;
  double grid_L = 4.0;

  std::string f0_kind = "maxwellian";  // maxwellian | bimodal | indicator | mixture
  double f0_mass = 1.0;
  double f0_temperature = 1.0;
  Vec f0_center = {0, 0, 0};
  double f0_separation = 3.0;  // bimodal hump distance
  double f0_radius = 1.0;      // indicator ball
  double f0_height = 1.0;
  int f0_components = 3;       // mixture size, drawn from `seed`

  SolverConfig solver;  // quad starts from the stepping preset for `dim`

  unsigned seed = 1;
  int threads = 1;
  std::vector<double> probe_speeds = {0, 5, 10, 20};  // bounds probes along +x
};

struct ConfigResult {
  RunConfig cfg;
  bool ok = false;
  std::vector<std::string> errors;  // one line per violated constraint
  std::map<std::string, std::string> raw;  // effective key/value view (post override)
};

ConfigResult load_config(const std::string& path);
ConfigResult config_from_text(const std::string& text);

// CSV rows `theta,b`; negative theta rows are kept so that validate() can
// check evenness rather than assume it.
AngularTable load_angular_table(const std::string& path, std::string* err);

// Build the configured cross section; reads b_table for the tabulated kind.
// On failure returns a default-constructed section and sets *err.
CrossSection make_xsection(const RunConfig& cfg, std::string* err);

DistributionFunction make_initial(const RunConfig& cfg, const VelocityGrid& g);

}  // namespace boltz
