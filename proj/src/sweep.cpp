#include "chiral/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "chiral/error.hpp"

namespace chiral {

namespace {

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, what + " is not a finite number: '" + text + "'");
  }
  return v;
}

void check_settings(const SweepSettings& s) {
  check_grid(TimeGrid{s.duration, s.steps});
  if (!(s.clamp_scale > 0.0) || !std::isfinite(s.clamp_scale)) {
    throw Error(ErrorKind::InvalidArgument, "clamp must be positive and finite");
  }
  if (!(s.quadrature_tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "quadrature tolerance must be positive");
}

// Physical error model for axis value(s); detuning axis values are delta * T.
ErrorModel model_for(const ErrorAxis& axis, double value, double duration) {
  return axis.kind == SensitivityKind::Systematic ? ErrorModel::systematic(value)
                                                  : ErrorModel::detuning(value / duration);
}

std::vector<Handedness> hands_for(const std::optional<Handedness>& h) {
  if (h) return {*h};
  return {Handedness::Left, Handedness::Right};
}

bool in_validity_window(const ErrorAxis& axis, double value) {
  return axis.kind == SensitivityKind::Systematic ? std::abs(value) <= 0.1 : std::abs(value) <= 0.5;
}

}  // namespace

SchemeSpec SchemeSpec::sps() { return {}; }

SchemeSpec SchemeSpec::ansatz(double n, std::string name) {
  SchemeSpec s;
  s.kind = SchemeKind::FourierAnsatz;
  s.n = n;
  s.name = name.empty() ? "ansatz-n" + format_number(n) : std::move(name);
  return s;
}

SchemeSpec SchemeSpec::parse(const std::string& text) {
  if (text == "sps") return sps();
  if (text == "oss" || text == "ose") return ansatz(kOssN, "oss");
  if (text == "osd") return ansatz(kOsdN, "osd");
  for (const std::string prefix : {"ansatz:", "ansatz-n"}) {
    if (text.rfind(prefix, 0) == 0) return ansatz(parse_number(text.substr(prefix.size()), "ansatz weight"));
  }
  throw Error(ErrorKind::InvalidArgument,
              "unknown scheme '" + text + "' (expected sps, oss, osd, ansatz:<n> or ansatz-n<n>)");
}

InvariantSchedule SchemeSpec::make(double duration) const {
  return kind == SchemeKind::Sps ? sps_schedule(duration) : ansatz_schedule(n, duration);
}

std::vector<double> ErrorAxis::values() const {
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i) {
    v[i] = i + 1 == points ? max : min + (max - min) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return v;
}

std::string ErrorAxis::column() const { return kind == SensitivityKind::Systematic ? "alpha" : "delta_T"; }

void check_axis(const ErrorAxis& axis) {
  if (axis.points < 2) throw Error(ErrorKind::InvalidArgument, "an error axis needs at least 2 points");
  if (!std::isfinite(axis.min) || !std::isfinite(axis.max) || !(axis.min < axis.max)) {
    throw Error(ErrorKind::InvalidArgument, "error axis needs finite min < max");
  }
}

std::string_view to_string(SweepMode mode) noexcept {
  switch (mode) {
    case SweepMode::Exact: return "exact";
    case SweepMode::Perturbative: return "perturbative";
    case SweepMode::Both: return "both";
  }
  return "exact";
}

SweepMode parse_sweep_mode(const std::string& text) {
  if (text == "exact") return SweepMode::Exact;
  if (text == "perturbative") return SweepMode::Perturbative;
  if (text == "both") return SweepMode::Both;
  throw Error(ErrorKind::InvalidArgument, "unknown sweep mode '" + text + "' (exact, perturbative, both)");
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

Trajectory population_trace(const InvariantSchedule& s, Handedness h, const SweepSettings& settings,
                            std::size_t output_points) {
  check_settings(settings);
  const TimeGrid grid{s.duration(), settings.steps};
  const auto pulses = pulses_on_midpoints(s, grid, settings.clamp_scale / s.duration());
  const auto hs = step_hamiltonians(pulses, h);
  const std::size_t intervals = std::max<std::size_t>(output_points, 2) - 1;
  const std::size_t stride = std::max<std::size_t>(1, settings.steps / intervals);
  return propagate_piecewise(hs, QuantumState::basis(2), grid, stride);
}

Metadata sweep_metadata(const SweepSpec& spec, const std::string& tag) {
  Metadata md;
  md.emplace_back("tag", tag);
  md.emplace_back("code_version", CHIRAL_LRI_VERSION);
  md.emplace_back("mode", std::string(to_string(spec.mode)));
  md.emplace_back("handedness", spec.handedness ? std::string(to_string(*spec.handedness)) : "both");
  auto axis_md = [&](const std::string& key, const ErrorAxis& a) {
    md.emplace_back(key, a.column() + " min=" + format_number(a.min) + " max=" + format_number(a.max) +
                             " points=" + std::to_string(a.points));
  };
  axis_md("axis1", spec.axis1);
  if (spec.axis2) axis_md("axis2", *spec.axis2);
  std::string names;
  for (const auto& s : spec.schemes) {
    if (!names.empty()) names += ',';
    names += s.name;
    if (s.kind == SchemeKind::FourierAnsatz) names += "(n=" + format_number(s.n) + ")";
  }
  md.emplace_back("schemes", names);
  md.emplace_back("T", format_number(spec.settings.duration));
  md.emplace_back("grid_steps", std::to_string(spec.settings.steps));
  md.emplace_back("clamp_value_over_T", format_number(spec.settings.clamp_scale));
  md.emplace_back("quadrature_tolerance", format_number(spec.settings.quadrature_tolerance));
  md.emplace_back("integrator", "piecewise-exponential-midpoint");
  md.emplace_back("initial_state", "|2>");
  md.emplace_back("targets", "left:|3> right:|1>");
  return md;
}

SweepResult fidelity_curve(const SweepSpec& spec) {
  if (spec.axis2) throw Error(ErrorKind::InvalidArgument, "fidelity curves take a single error axis");
  if (spec.schemes.empty()) throw Error(ErrorKind::InvalidArgument, "no schemes requested");
  check_axis(spec.axis1);
  check_settings(spec.settings);

  SweepResult out;
  out.tag = spec.axis1.kind == SensitivityKind::Systematic ? "fig3" : "fig4";
  out.mode = spec.mode;
  out.axis1 = spec.axis1;
  out.axis1_values = spec.axis1.values();
  out.metadata = sweep_metadata(spec, out.tag);
  const double T = spec.settings.duration;
  const std::size_t m = out.axis1_values.size();
  const bool exact = spec.mode != SweepMode::Perturbative;
  const bool perturbative = spec.mode != SweepMode::Exact;
  const auto hands = hands_for(spec.handedness);

  std::vector<InvariantSchedule> schedules;
  for (const auto& scheme : spec.schemes) {
    schedules.push_back(scheme.make(T));
    SchemeResult r;
    r.scheme = scheme.name;
    if (exact) {
      for (Handedness h : hands) (h == Handedness::Left ? r.exact_left : r.exact_right).assign(m, 0.0);
    }
    if (perturbative) r.perturbative.assign(m, 0.0);
    out.schemes.push_back(std::move(r));
  }

  if (perturbative) {
    for (std::size_t k = 0; k < schedules.size(); ++k) {
      for (std::size_t i = 0; i < m; ++i) {
        out.schemes[k].perturbative[i] = perturbative_fidelity(
            schedules[k], model_for(spec.axis1, out.axis1_values[i], T), spec.settings.quadrature_tolerance);
      }
    }
  }
  if (exact) {
    std::vector<ExactFidelityEvaluator> evaluators;
    for (const auto& s : schedules) evaluators.emplace_back(s, spec.settings.robustness());
    const std::size_t per_scheme = m * hands.size();
    parallel_for(schedules.size() * per_scheme, spec.settings.workers, [&](std::size_t job) {
      const std::size_t k = job / per_scheme;
      const std::size_t i = (job % per_scheme) / hands.size();
      const Handedness h = hands[job % hands.size()];
      const double f = evaluators[k].fidelity(model_for(spec.axis1, out.axis1_values[i], T), h);
      (h == Handedness::Left ? out.schemes[k].exact_left : out.schemes[k].exact_right)[i] = f;
    });
  }
  return out;
}

SweepResult fidelity_heatmap(const SweepSpec& spec) {
  if (!spec.axis2) throw Error(ErrorKind::InvalidArgument, "a heatmap needs two error axes");
  if (spec.axis1.kind != SensitivityKind::Systematic || spec.axis2->kind != SensitivityKind::Detuning) {
    throw Error(ErrorKind::InvalidArgument, "heatmap axes must be (systematic, detuning)");
  }
  if (spec.mode != SweepMode::Exact) {
    throw Error(ErrorKind::InvalidArgument, "the combined-error heatmap is computed by exact propagation only");
  }
  if (spec.schemes.empty()) throw Error(ErrorKind::InvalidArgument, "no schemes requested");
  check_axis(spec.axis1);
  check_axis(*spec.axis2);
  check_settings(spec.settings);

  SweepResult out;
  out.tag = "fig5";
  out.mode = SweepMode::Exact;
  out.axis1 = spec.axis1;
  out.axis2 = spec.axis2;
  out.axis1_values = spec.axis1.values();
  out.axis2_values = spec.axis2->values();
  out.metadata = sweep_metadata(spec, out.tag);
  out.metadata.emplace_back("error_hamiltonian", "alpha*H + delta*(|3><3| - |1><1|)");
  const double T = spec.settings.duration;
  const std::size_t na = out.axis1_values.size(), nd = out.axis2_values.size();
  const auto hands = hands_for(spec.handedness);

  std::vector<ExactFidelityEvaluator> evaluators;
  for (const auto& scheme : spec.schemes) {
    evaluators.emplace_back(scheme.make(T), spec.settings.robustness());
    SchemeResult r;
    r.scheme = scheme.name;
    for (Handedness h : hands) (h == Handedness::Left ? r.exact_left : r.exact_right).assign(na * nd, 0.0);
    out.schemes.push_back(std::move(r));
  }
  const std::size_t per_scheme = na * nd * hands.size();
  parallel_for(evaluators.size() * per_scheme, spec.settings.workers, [&](std::size_t job) {
    const std::size_t k = job / per_scheme;
    const std::size_t cell = (job % per_scheme) / hands.size();
    const Handedness h = hands[job % hands.size()];
    const double alpha = out.axis1_values[cell / nd];
    const double delta = out.axis2_values[cell % nd] / T;
    const double f = evaluators[k].fidelity(ErrorModel::combined(alpha, delta), h);
    (h == Handedness::Left ? out.schemes[k].exact_left : out.schemes[k].exact_right)[cell] = f;
  });
  return out;
}

HeatmapRegion summarize_region(const SweepResult& heatmap, std::size_t scheme_index, Handedness h, double threshold) {
  if (!heatmap.axis2 || scheme_index >= heatmap.schemes.size()) {
    throw Error(ErrorKind::InvalidArgument, "summarize_region needs a heatmap result and a valid scheme index");
  }
  const auto& values =
      h == Handedness::Left ? heatmap.schemes[scheme_index].exact_left : heatmap.schemes[scheme_index].exact_right;
  const std::size_t na = heatmap.axis1_values.size(), nd = heatmap.axis2_values.size();
  if (values.size() != na * nd) throw Error(ErrorKind::InvalidArgument, "heatmap has no values for that handedness");

  auto nearest_zero = [](const std::vector<double>& axis) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < axis.size(); ++i) {
      if (std::abs(axis[i]) < std::abs(axis[best])) best = i;
    }
    return best;
  };
  const std::size_t ia = nearest_zero(heatmap.axis1_values), id = nearest_zero(heatmap.axis2_values);

  HeatmapRegion r;
  r.threshold = threshold;
  r.origin_value = values[ia * nd + id];
  r.origin_above = r.origin_value >= threshold;
  for (double v : values) r.cells_above += v >= threshold ? 1 : 0;
  r.fraction_above = static_cast<double>(r.cells_above) / static_cast<double>(values.size());
  const double da = (heatmap.axis1.max - heatmap.axis1.min) / static_cast<double>(na - 1);
  const double dd = (heatmap.axis2->max - heatmap.axis2->min) / static_cast<double>(nd - 1);
  r.area = static_cast<double>(r.cells_above) * da * dd;

  if (r.origin_above) {
    std::vector<char> seen(values.size(), 0);
    std::vector<std::size_t> stack{ia * nd + id};
    seen[stack.back()] = 1;
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      ++r.origin_component_cells;
      const std::size_t i = c / nd, j = c % nd;
      auto visit = [&](std::size_t ni, std::size_t nj) {
        const std::size_t nc = ni * nd + nj;
        if (!seen[nc] && values[nc] >= threshold) {
          seen[nc] = 1;
          stack.push_back(nc);
        }
      };
      if (i > 0) visit(i - 1, j);
      if (i + 1 < na) visit(i + 1, j);
      if (j > 0) visit(i, j - 1);
      if (j + 1 < nd) visit(i, j + 1);
    }
  }
  r.contiguous = r.origin_above && r.origin_component_cells == r.cells_above;
  return r;
}

SensitivityTable sensitivity_curve(SensitivityKind kind, double n_lo, double n_hi, std::size_t points,
                                   const SweepSettings& settings) {
  if (points < 2) throw Error(ErrorKind::InvalidArgument, "a sensitivity curve needs at least 2 points");
  if (!std::isfinite(n_lo) || !std::isfinite(n_hi) || !(n_lo < n_hi)) {
    throw Error(ErrorKind::InvalidArgument, "n range must be finite with n_min < n_max");
  }
  check_settings(settings);
  SensitivityTable table;
  table.kind = kind;
  table.n = ErrorAxis{kind, n_lo, n_hi, points}.values();
  table.q.assign(points, 0.0);
  parallel_for(points, settings.workers, [&](std::size_t i) {
    table.q[i] = sensitivity(kind, ansatz_schedule(table.n[i], settings.duration), settings.quadrature_tolerance);
  });
  return table;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string output_file_name(const std::string& tag, const std::string& scheme, const std::string& mode) {
  return tag + "_" + scheme + "_" + mode + ".csv";
}

void write_metadata(std::ostream& os, const Metadata& metadata) {
  for (const auto& [key, value] : metadata) os << "# " << key << '=' << value << '\n';
}

void write_pulses_csv(std::ostream& os, const PulseSchedule& pulses, const Metadata& metadata) {
  const double T = pulses.duration;
  write_metadata(os, metadata);
  os << "t,omega,omega_q,gamma\n";
  for (std::size_t k = 0; k < pulses.samples.size(); ++k) {
    const auto& s = pulses.samples[k];
    os << format_number(pulses.times[k] / T) << ',' << format_number(s.omega * T) << ','
       << format_number(s.omega_q * T) << ',' << format_number(s.gamma) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double duration, const Metadata& metadata) {
  write_metadata(os, metadata);
  os << "t,P1,P2,P3\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto& p = traj.populations[k];
    os << format_number(traj.times[k] / duration) << ',' << format_number(p[0]) << ',' << format_number(p[1])
       << ',' << format_number(p[2]) << '\n';
  }
}

void write_curve_csv(std::ostream& os, const SweepResult& result, std::size_t scheme_index) {
  const auto& r = result.schemes.at(scheme_index);
  Metadata md = result.metadata;
  md.emplace_back("scheme", r.scheme);
  write_metadata(os, md);
  const bool both = result.mode == SweepMode::Both;
  os << result.axis1.column();
  if (!r.exact_left.empty()) os << ",F_exact_left";
  if (!r.exact_right.empty()) os << ",F_exact_right";
  if (!r.perturbative.empty()) os << ",F_perturbative";
  if (both) os << ",in_validity_window";
  os << '\n';
  for (std::size_t i = 0; i < result.axis1_values.size(); ++i) {
    os << format_number(result.axis1_values[i]);
    if (!r.exact_left.empty()) os << ',' << format_number(r.exact_left[i]);
    if (!r.exact_right.empty()) os << ',' << format_number(r.exact_right[i]);
    if (!r.perturbative.empty()) os << ',' << format_number(r.perturbative[i]);
    if (both) os << ',' << (in_validity_window(result.axis1, result.axis1_values[i]) ? 1 : 0);
    os << '\n';
  }
}

void write_combined_curve_csv(std::ostream& os, const SweepResult& result) {
  Metadata md = result.metadata;
  auto column_of = [](const SchemeResult& r) -> const std::vector<double>& {
    if (!r.exact_left.empty()) return r.exact_left;
    if (!r.exact_right.empty()) return r.exact_right;
    return r.perturbative;
  };
  const auto& first = result.schemes.at(0);
  md.emplace_back("columns", !first.exact_left.empty()    ? "exact fidelity, left"
                             : !first.exact_right.empty() ? "exact fidelity, right"
                                                          : "perturbative fidelity");
  write_metadata(os, md);
  os << result.axis1.column();
  for (const auto& r : result.schemes) os << ',' << r.scheme;
  os << '\n';
  for (std::size_t i = 0; i < result.axis1_values.size(); ++i) {
    os << format_number(result.axis1_values[i]);
    for (const auto& r : result.schemes) os << ',' << format_number(column_of(r)[i]);
    os << '\n';
  }
}

void write_heatmap_csv(std::ostream& os, const SweepResult& result, std::size_t scheme_index) {
  if (!result.axis2) throw Error(ErrorKind::InvalidArgument, "not a heatmap result");
  const auto& r = result.schemes.at(scheme_index);
  Metadata md = result.metadata;
  md.emplace_back("scheme", r.scheme);
  write_metadata(os, md);
  os << result.axis1.column() << ',' << result.axis2->column();
  if (!r.exact_left.empty()) os << ",F_exact_left";
  if (!r.exact_right.empty()) os << ",F_exact_right";
  os << '\n';
  const std::size_t nd = result.axis2_values.size();
  for (std::size_t i = 0; i < result.axis1_values.size(); ++i) {
    for (std::size_t j = 0; j < nd; ++j) {
      os << format_number(result.axis1_values[i]) << ',' << format_number(result.axis2_values[j]);
      if (!r.exact_left.empty()) os << ',' << format_number(r.exact_left[i * nd + j]);
      if (!r.exact_right.empty()) os << ',' << format_number(r.exact_right[i * nd + j]);
      os << '\n';
    }
  }
}

void write_sensitivity_csv(std::ostream& os, const SensitivityTable& table, const Metadata& metadata) {
  write_metadata(os, metadata);
  os << "n," << (table.kind == SensitivityKind::Systematic ? "q_alpha" : "q_delta") << '\n';
  for (std::size_t i = 0; i < table.n.size(); ++i) {
    os << format_number(table.n[i]) << ',' << format_number(table.q[i]) << '\n';
  }
}

}  // namespace chiral
