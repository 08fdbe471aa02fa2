#pragma once

// Run configuration shared by every CLI command. The config file is flat
// key=value text using the long flag names as keys, e.g.
//
//   # comment
//   scheme=ansatz
//   n=1.07
//   steps=4000
//
// Precedence: command-line flags, then the config file, then these defaults.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chiral/robustness.hpp"
#include "chiral/sweep.hpp"

namespace chiral {

struct RunConfig {
  // Schedule. scheme and n are optional so that each command can pick its own
  // default (sps for design/simulate, ansatz n = 1.10 for heatmap).
  std::optional<std::string> scheme;
  std::optional<double> n;
  double T = 1.0;
  std::size_t steps = 4000;
  double clamp = kDefaultClampScale;  // units of 1/T
  double quad_tol = 1e-10;
  unsigned workers = 0;
  std::string out = ".";
  std::string handedness = "both";
  std::size_t trace_points = 201;

  // scan
  std::string error = "systematic";
  std::vector<std::string> schemes;  // empty: command default
  std::optional<double> min;
  std::optional<double> max;
  std::size_t points = 101;
  std::string mode = "exact";

  // heatmap
  double alpha_min = -0.3;
  double alpha_max = 0.3;
  std::size_t alpha_points = 101;
  double delta_min = -1.0;  // units of 1/T
  double delta_max = 1.0;
  std::size_t delta_points = 101;

  // optimize
  std::string kind = "systematic";
  double n_min = 0.5;
  double n_max = 1.5;
  double tol = 1e-3;
  std::size_t coarse_points = 201;
};

/// Keys accepted in config files (and, prefixed with --, on the command line).
const std::vector<std::string>& config_keys();

/// Sets one field from its textual value; throws InvalidConfig on an unknown
/// key or a malformed value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Parses key=value lines; '#' starts a comment line.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Numeric fields positive and finite, enumerations known, ranges ordered.
void validate(const RunConfig& config);

/// Effective configuration as metadata, in key order of config_keys(). The
/// worker count and output directory are left out so that file contents do
/// not depend on them.
Metadata config_metadata(const RunConfig& config);

SweepSettings sweep_settings(const RunConfig& config);
std::vector<Handedness> handedness_list(const RunConfig& config);
SensitivityKind parse_sensitivity_kind(const std::string& text);

/// Scheme selected by --scheme/--n with a command-specific fallback.
SchemeSpec scheme_from_config(const RunConfig& config, const std::string& default_scheme, double default_n);

}  // namespace chiral
