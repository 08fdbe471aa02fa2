// chiral_lri command-line front end: design, simulate, scan, heatmap, optimize.
//
// Every command reads the same flat configuration (see chiral/config.hpp).
// Output files are rendered in memory and written only after every
// computation has succeeded, so a failing run leaves no partial files.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chiral/config.hpp"
#include "chiral/design.hpp"
#include "chiral/error.hpp"
#include "chiral/robustness.hpp"
#include "chiral/sweep.hpp"

namespace fs = std::filesystem;
using namespace chiral;

namespace {

struct FlagHelp {
  const char* key;
  const char* help;
};

// One entry per RunConfig field, in config_keys() order.
constexpr FlagHelp kFlags[] = {
    {"scheme", "schedule family: sps or ansatz [design/simulate default sps, heatmap default ansatz]"},
    {"n", "ansatz harmonic weight, dimensionless [default 1.07, heatmap 1.10]"},
    {"T", "protocol duration, time unit of the run; frequencies are reported in units of 1/T [1]"},
    {"steps", "propagation steps over [0, T], count [4000]"},
    {"clamp", "cap on |Omega_q| inside the first and last 1% of T, units of 1/T [100]"},
    {"quad-tol", "absolute tolerance of the overlap-integral quadrature, dimensionless [1e-10]"},
    {"workers", "worker threads for sweeps, count; 0 uses every core [0]"},
    {"out", "output directory, path [.]"},
    {"handedness", "both, left or right [both]"},
    {"trace-points", "simulate: recorded trajectory points, count [201]"},
    {"error", "scan: error axis, systematic (alpha, dimensionless) or detuning (delta, units of 1/T) [systematic]"},
    {"schemes", "scan: comma-separated list of sps, oss, osd, ansatz:<n> [sps,oss,osd]"},
    {"min", "scan: axis minimum, alpha or delta*T [-0.3 systematic, -1 detuning]"},
    {"max", "scan: axis maximum, alpha or delta*T [0.3 systematic, 1 detuning]"},
    {"points", "scan: axis samples, count [101]"},
    {"mode", "scan: exact, perturbative or both [exact]"},
    {"alpha-min", "heatmap: systematic amplitude minimum, dimensionless [-0.3]"},
    {"alpha-max", "heatmap: systematic amplitude maximum, dimensionless [0.3]"},
    {"alpha-points", "heatmap: alpha samples, count [101]"},
    {"delta-min", "heatmap: detuning minimum, units of 1/T [-1]"},
    {"delta-max", "heatmap: detuning maximum, units of 1/T [1]"},
    {"delta-points", "heatmap: delta samples, count [101]"},
    {"kind", "optimize: sensitivity to minimize, systematic or detuning [systematic]"},
    {"n-min", "optimize: lower end of the n search range, dimensionless [0.5]"},
    {"n-max", "optimize: upper end of the n search range, dimensionless [1.5]"},
    {"tol", "optimize: bracket width at which golden-section search stops, units of n [1e-3]"},
    {"coarse-points", "optimize: coarse scan samples before refinement, count [201]"},
};

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_flags(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_path, "flat key=value configuration file; flags override it");
  for (const auto& f : kFlags) {
    cmd.options[f.key] = cmd.app->add_option(std::string("--") + f.key, cmd.values[f.key], f.help);
  }
}

RunConfig resolve(const Command& cmd) {
  RunConfig c;
  if (!cmd.config_path.empty()) {
    for (const auto& [k, v] : read_config_file(cmd.config_path)) apply_setting(c, k, v);
  }
  for (const auto& [key, opt] : cmd.options) {
    if (opt->count() > 0) apply_setting(c, key, cmd.values.at(key));
  }
  validate(c);
  return c;
}

// Rendered output files, flushed together at the end of a command.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

  std::ostringstream& add(const std::string& name) {
    files_.emplace_back(name, std::ostringstream{});
    return files_.back().second;
  }

  std::string names() const {
    std::string s;
    for (const auto& [name, _] : files_) s += (s.empty() ? "" : ",") + name;
    return s;
  }

  void write() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir_ + ": " + ec.message());
    for (const auto& [name, content] : files_) {
      const fs::path path = fs::path(dir_) / name;
      std::ofstream out(path, std::ios::binary);
      out << content.str();
      if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    }
  }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::ostringstream>> files_;
};

Metadata with_config(Metadata md, const std::string& command, const RunConfig& c) {
  md.emplace(md.begin(), "command", command);
  for (auto& kv : config_metadata(c)) md.push_back(std::move(kv));
  return md;
}

std::string fmt(double v) { return format_number(v); }

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cmd_design(const RunConfig& c) {
  const SchemeSpec spec = scheme_from_config(c, "sps", kOssN);
  const auto s = spec.make(c.T);
  const TimeGrid grid{c.T, c.steps};
  const auto pulses = pulses_on_nodes(s, grid, c.clamp / c.T);
  const auto report = validate_schedule(s, {c.steps, c.clamp});

  Metadata md{{"scheme", spec.name}, {"grid_points", std::to_string(pulses.times.size())},
              {"clamped_samples", std::to_string(pulses.clamped_count)}};
  md = with_config(md, "design", c);
  Outputs out(c.out);
  write_pulses_csv(out.add("pulses.csv"), pulses, md);
  auto& v = out.add("validation.txt");
  write_metadata(v, md);
  v << report.to_text();
  auto& sch = out.add("schedule.txt");
  write_metadata(sch, md);
  sch << serialize_schedule(s, c.steps, c.clamp);
  out.write();

  std::cout << "command=design scheme=" << spec.name << " T=" << fmt(c.T) << " steps=" << c.steps
            << " clamped_samples=" << pulses.clamped_count << " validation=" << (report.passed() ? "PASS" : "FAIL")
            << " files=" << out.names() << '\n';
  if (!report.passed()) {
    std::cerr << "error: schedule validation failed, see validation.txt\n";
    return 1;
  }
  return 0;
}

int cmd_simulate(const RunConfig& c) {
  const SchemeSpec spec = scheme_from_config(c, "sps", kOssN);
  const auto s = spec.make(c.T);
  const SweepSettings settings = sweep_settings(c);
  Outputs out(c.out);
  std::map<Handedness, std::array<double, 3>> finals;
  for (Handedness h : handedness_list(c)) {
    const auto traj = population_trace(s, h, settings, c.trace_points);
    finals[h] = traj.final_populations();
    Metadata md{{"tag", "fig2"}, {"scheme", spec.name}, {"handedness", std::string(to_string(h))},
                {"code_version", CHIRAL_LRI_VERSION}, {"initial_state", "|2>"}};
    write_trajectory_csv(out.add(output_file_name("fig2", spec.name, std::string(to_string(h)))), traj, c.T,
                         with_config(md, "simulate", c));
  }
  out.write();

  std::string pops;
  bool resolved = true;
  for (const auto& [h, p] : finals) {
    const char* tag = h == Handedness::Left ? "L" : "R";
    pops += std::string(" P1_") + tag + "=" + short_num(p[0]) + " P2_" + tag + "=" + short_num(p[1]) + " P3_" + tag +
            "=" + short_num(p[2]);
    resolved = resolved && p[h == Handedness::Left ? 2 : 0] >= 0.999;
  }
  std::cout << "final populations:" << pops << '\n';
  std::cout << (resolved ? "verdict: L→|3⟩, R→|1⟩" : "verdict: not resolved (target population below 0.999)")
            << '\n';
  std::cout << "command=simulate scheme=" << spec.name << " T=" << fmt(c.T) << " steps=" << c.steps << pops
            << " discriminated=" << (resolved ? "yes" : "no") << " files=" << out.names() << '\n';
  return 0;
}

int cmd_scan(const RunConfig& c) {
  SweepSpec spec;
  const SensitivityKind kind = parse_sensitivity_kind(c.error);
  const bool sys = kind == SensitivityKind::Systematic;
  spec.axis1 = {kind, c.min.value_or(sys ? -0.3 : -1.0), c.max.value_or(sys ? 0.3 : 1.0), c.points};
  check_axis(spec.axis1);
  const std::vector<std::string> names = c.schemes.empty() ? std::vector<std::string>{"sps", "oss", "osd"} : c.schemes;
  for (const auto& n : names) spec.schemes.push_back(SchemeSpec::parse(n));
  spec.mode = parse_sweep_mode(c.mode);
  const auto hands = handedness_list(c);
  if (hands.size() == 1) spec.handedness = hands.front();
  spec.settings = sweep_settings(c);

  SweepResult r = fidelity_curve(spec);
  r.metadata = with_config(r.metadata, "scan", c);

  // Both mode: the second-order curve is checked against exact propagation
  // inside the validity window and only recorded outside it.
  std::size_t violations = 0;
  double worst_gap = 0.0;
  if (spec.mode == SweepMode::Both) {
    for (const auto& sr : r.schemes) {
      const auto& exact = sr.exact_left.empty() ? sr.exact_right : sr.exact_left;
      for (std::size_t i = 0; i < r.axis1_values.size(); ++i) {
        const double x = std::abs(r.axis1_values[i]);
        if (x > (sys ? 0.1 : 0.5)) continue;
        const double gap = std::abs(exact[i] - sr.perturbative[i]);
        worst_gap = std::max(worst_gap, gap);
        if (gap > 0.01) ++violations;
      }
    }
  }

  Outputs out(c.out);
  const std::string mode(to_string(spec.mode));
  for (std::size_t k = 0; k < r.schemes.size(); ++k) write_curve_csv(out.add(output_file_name(r.tag, r.schemes[k].scheme, mode)), r, k);
  write_combined_curve_csv(out.add(output_file_name(r.tag, "all", mode)), r);
  out.write();

  std::cout << "command=scan tag=" << r.tag << " error=" << c.error << " mode=" << mode << " points=" << c.points;
  for (const auto& sr : r.schemes) {
    const auto& col = !sr.exact_left.empty() ? sr.exact_left : !sr.exact_right.empty() ? sr.exact_right : sr.perturbative;
    std::cout << " min_F_" << sr.scheme << "=" << short_num(*std::min_element(col.begin(), col.end()));
  }
  if (spec.mode == SweepMode::Both) std::cout << " window_max_gap=" << short_num(worst_gap) << " window_violations=" << violations;
  std::cout << " files=" << out.names() << '\n';
  if (violations > 0) std::cerr << "warning: exact and second-order fidelity differ by more than 0.01 inside the validity window\n";
  return 0;
}

int cmd_heatmap(const RunConfig& c) {
  SweepSpec spec;
  spec.schemes = {scheme_from_config(c, "ansatz", kHeatmapN)};
  spec.axis1 = {SensitivityKind::Systematic, c.alpha_min, c.alpha_max, c.alpha_points};
  spec.axis2 = ErrorAxis{SensitivityKind::Detuning, c.delta_min, c.delta_max, c.delta_points};
  spec.mode = SweepMode::Exact;
  const auto hands = handedness_list(c);
  if (hands.size() == 1) spec.handedness = hands.front();
  spec.settings = sweep_settings(c);

  SweepResult r = fidelity_heatmap(spec);
  std::string summary;
  for (Handedness h : hands) {
    const auto region = summarize_region(r, 0, h, 0.99);
    const std::string tag = h == Handedness::Left ? "L" : "R";
    r.metadata.emplace_back("region_" + tag, "F>=0.99 cells=" + std::to_string(region.cells_above) +
                                                 " area=" + fmt(region.area) +
                                                 " contiguous=" + (region.contiguous ? "yes" : "no"));
    summary += " F00_" + tag + "=" + short_num(region.origin_value) + " cells_above_" + tag + "=" +
               std::to_string(region.cells_above) + " area_" + tag + "=" + short_num(region.area) + " contiguous_" +
               tag + "=" + (region.contiguous ? "yes" : "no");
  }
  r.metadata = with_config(r.metadata, "heatmap", c);

  Outputs out(c.out);
  write_heatmap_csv(out.add(output_file_name(r.tag, r.schemes[0].scheme, "exact")), r, 0);
  out.write();
  std::cout << "command=heatmap scheme=" << r.schemes[0].scheme << " grid=" << c.alpha_points << "x" << c.delta_points
            << summary << " files=" << out.names() << '\n';
  return 0;
}

int cmd_optimize(const RunConfig& c) {
  const SensitivityKind kind = parse_sensitivity_kind(c.kind);
  OptimizeOptions opts;
  opts.coarse_points = c.coarse_points;
  opts.duration = c.T;
  opts.settings = sweep_settings(c).robustness();
  const auto r = optimize_n(kind, c.n_min, c.n_max, c.tol, opts);

  SensitivityTable table{kind, r.coarse_n, r.coarse_q};
  Metadata md{{"kind", std::string(to_string(kind))}, {"code_version", CHIRAL_LRI_VERSION},
              {"n_star", fmt(r.n_star)}, {"q_min", fmt(r.q_min)}};
  Outputs out(c.out);
  write_sensitivity_csv(out.add("sensitivity_" + std::string(to_string(kind)) + ".csv"), table,
                        with_config(md, "optimize", c));
  out.write();

  const char* q_name = kind == SensitivityKind::Systematic ? "q_alpha" : "q_delta";
  std::cout << "command=optimize kind=" << to_string(kind) << " n_star=" << short_num(r.n_star) << " " << q_name << "="
            << short_num(r.q_min) << " exact_check=" << short_num(r.exact_check)
            << " perturbative_check=" << short_num(r.perturbative_check) << " files=" << out.names() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lewis-Riesenfeld invariant pulse design for chiral discrimination in a cyclic three-level system"};
  app.set_version_flag("--version", CHIRAL_LRI_VERSION);
  app.require_subcommand(1);

  const std::pair<const char*, const char*> subcommands[] = {
      {"design", "write pulses.csv, validation.txt and schedule.txt for one schedule"},
      {"simulate", "propagate |2> for each handedness and write fig2 population traces"},
      {"scan", "fidelity against one error amplitude for several schemes (fig3, fig4)"},
      {"heatmap", "exact fidelity over (alpha, delta) with both errors present (fig5)"},
      {"optimize", "minimize an error sensitivity over the ansatz weight n"},
  };
  std::map<std::string, Command> commands;
  for (const auto& [name, help] : subcommands) {
    Command& cmd = commands[name];
    cmd.app = app.add_subcommand(name, help);
    add_flags(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (auto& [name, cmd] : commands) {
      if (!cmd.app->parsed()) continue;
      const RunConfig config = resolve(cmd);
      if (name == "design") return cmd_design(config);
      if (name == "simulate") return cmd_simulate(config);
      if (name == "scan") return cmd_scan(config);
      if (name == "heatmap") return cmd_heatmap(config);
      return cmd_optimize(config);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidConfig || e.kind() == ErrorKind::InvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
