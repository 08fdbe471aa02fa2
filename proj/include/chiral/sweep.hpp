#pragma once

// Parameter sweeps over schemes and error amplitudes, and their CSV output.

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "chiral/core.hpp"
#include "chiral/design.hpp"
#include "chiral/robustness.hpp"

namespace chiral {

/// Ansatz weights of the named schemes.
inline constexpr double kOssN = 1.07;      // systematic-optimal
inline constexpr double kOsdN = 1.12;      // detuning-optimal
inline constexpr double kHeatmapN = 1.10;  // both-error heatmap default

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct SchemeSpec {
  SchemeKind kind = SchemeKind::Sps;
  double n = 0.0;
  std::string name = "sps";

  static SchemeSpec sps();
  static SchemeSpec ansatz(double n, std::string name = {});
  /// Accepts sps, oss (alias ose), osd, ansatz:<n> and ansatz-n<n>.
  static SchemeSpec parse(const std::string& text);

  InvariantSchedule make(double duration) const;
};

/// Amplitudes along one error direction. Detuning values are in units of 1/T.
struct ErrorAxis {
  SensitivityKind kind = SensitivityKind::Systematic;
  double min = -0.3;
  double max = 0.3;
  std::size_t points = 101;

  std::vector<double> values() const;
  /// Column name: alpha or delta_T.
  std::string column() const;
};

void check_axis(const ErrorAxis& axis);

enum class SweepMode { Exact, Perturbative, Both };

std::string_view to_string(SweepMode mode) noexcept;
SweepMode parse_sweep_mode(const std::string& text);

struct SweepSettings {
  double duration = 1.0;
  std::size_t steps = 4000;
  double clamp_scale = kDefaultClampScale;
  double quadrature_tolerance = 1e-10;
  /// 0 selects the hardware concurrency.
  unsigned workers = 0;

  RobustnessSettings robustness() const { return {steps, clamp_scale, quadrature_tolerance}; }
};

struct SweepSpec {
  std::vector<SchemeSpec> schemes;
  ErrorAxis axis1;
  std::optional<ErrorAxis> axis2;
  SweepMode mode = SweepMode::Exact;
  /// Empty runs both handednesses.
  std::optional<Handedness> handedness;
  SweepSettings settings;
};

/// One scheme's fidelities; a vector is empty when that mode or handedness was
/// not requested. Heatmap values are row-major over (axis1, axis2).
struct SchemeResult {
  std::string scheme;
  std::vector<double> exact_left;
  std::vector<double> exact_right;
  std::vector<double> perturbative;
};

struct SweepResult {
  std::string tag;
  SweepMode mode = SweepMode::Exact;
  ErrorAxis axis1;
  std::optional<ErrorAxis> axis2;
  std::vector<double> axis1_values;
  std::vector<double> axis2_values;
  std::vector<SchemeResult> schemes;
  Metadata metadata;
};

/// Runs fn(i) for i in [0, count) on a bounded pool; the first exception is rethrown.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn);

/// Trajectory from |2> with at least output_points recorded nodes.
Trajectory population_trace(const InvariantSchedule& s, Handedness h, const SweepSettings& settings = {},
                            std::size_t output_points = 201);

/// Single-axis sweep (tag fig3 for systematic, fig4 for detuning).
SweepResult fidelity_curve(const SweepSpec& spec);

/// Two-axis (alpha, delta) sweep with the combined error, exact propagation only (tag fig5).
SweepResult fidelity_heatmap(const SweepSpec& spec);

struct HeatmapRegion {
  double threshold = 0.99;
  double origin_value = 0.0;
  std::size_t cells_above = 0;
  std::size_t origin_component_cells = 0;
  double fraction_above = 0.0;
  /// Cells above threshold times the cell area, in alpha * delta_T units.
  double area = 0.0;
  bool origin_above = false;
  /// Every above-threshold cell is 4-connected to the origin cell.
  bool contiguous = false;
};

HeatmapRegion summarize_region(const SweepResult& heatmap, std::size_t scheme_index, Handedness h,
                               double threshold = 0.99);

struct SensitivityTable {
  SensitivityKind kind = SensitivityKind::Systematic;
  std::vector<double> n;
  std::vector<double> q;
};

SensitivityTable sensitivity_curve(SensitivityKind kind, double n_lo, double n_hi, std::size_t points,
                                   const SweepSettings& settings = {});

/// 15 significant digits.
std::string format_number(double v);

/// <tag>_<scheme>_<mode>.csv
std::string output_file_name(const std::string& tag, const std::string& scheme, const std::string& mode);

Metadata sweep_metadata(const SweepSpec& spec, const std::string& tag);

void write_metadata(std::ostream& os, const Metadata& metadata);
/// Header t,omega,omega_q,gamma; t in units of T, frequencies in units of 1/T.
void write_pulses_csv(std::ostream& os, const PulseSchedule& pulses, const Metadata& metadata = {});
/// Header t,P1,P2,P3 with t in units of T.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double duration, const Metadata& metadata);
void write_curve_csv(std::ostream& os, const SweepResult& result, std::size_t scheme_index);
/// One fidelity column per scheme (exact Left when available, else perturbative).
void write_combined_curve_csv(std::ostream& os, const SweepResult& result);
void write_heatmap_csv(std::ostream& os, const SweepResult& result, std::size_t scheme_index);
void write_sensitivity_csv(std::ostream& os, const SensitivityTable& table, const Metadata& metadata);

}  // namespace chiral
