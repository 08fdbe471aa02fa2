#include "chiral/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "chiral/error.hpp"

namespace chiral {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorKind::InvalidConfig, key + " expects a finite number, got '" + value + "'");
  }
  return v;
}

std::size_t to_count(const std::string& key, const std::string& value) {
  unsigned long long v = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::InvalidConfig, key + " expects a non-negative integer, got '" + value + "'");
  }
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

struct Field {
  std::string key;
  Setter set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
std::string show(const std::optional<T>& v) {
  if (!v) return "default";
  if constexpr (std::is_same_v<T, double>) return format_number(*v);
  else return *v;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto real = [&f](std::string key, double RunConfig::*member) {
      f.push_back({key, [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = to_double(k, v); },
                   [member](const RunConfig& c) { return format_number(c.*member); }});
    };
    auto opt_real = [&f](std::string key, std::optional<double> RunConfig::*member) {
      f.push_back({key, [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = to_double(k, v); },
                   [member](const RunConfig& c) { return show(c.*member); }});
    };
    auto count = [&f](std::string key, std::size_t RunConfig::*member) {
      f.push_back({key, [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = to_count(k, v); },
                   [member](const RunConfig& c) { return std::to_string(c.*member); }});
    };
    auto text = [&f](std::string key, std::string RunConfig::*member) {
      f.push_back({key, [member](RunConfig& c, const std::string&, const std::string& v) { c.*member = v; },
                   [member](const RunConfig& c) { return c.*member; }});
    };
    f.push_back({"scheme", [](RunConfig& c, const std::string&, const std::string& v) { c.scheme = v; },
                 [](const RunConfig& c) { return show(c.scheme); }});
    opt_real("n", &RunConfig::n);
    real("T", &RunConfig::T);
    count("steps", &RunConfig::steps);
    real("clamp", &RunConfig::clamp);
    real("quad-tol", &RunConfig::quad_tol);
    f.push_back({"workers",
                 [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.workers = static_cast<unsigned>(to_count(k, v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.workers); }});
    text("out", &RunConfig::out);
    text("handedness", &RunConfig::handedness);
    count("trace-points", &RunConfig::trace_points);
    text("error", &RunConfig::error);
    f.push_back({"schemes", [](RunConfig& c, const std::string&, const std::string& v) { c.schemes = split_list(v); },
                 [](const RunConfig& c) {
                   std::string s;
                   for (const auto& x : c.schemes) s += (s.empty() ? "" : ",") + x;
                   return s.empty() ? std::string("default") : s;
                 }});
    opt_real("min", &RunConfig::min);
    opt_real("max", &RunConfig::max);
    count("points", &RunConfig::points);
    text("mode", &RunConfig::mode);
    real("alpha-min", &RunConfig::alpha_min);
    real("alpha-max", &RunConfig::alpha_max);
    count("alpha-points", &RunConfig::alpha_points);
    real("delta-min", &RunConfig::delta_min);
    real("delta-max", &RunConfig::delta_max);
    count("delta-points", &RunConfig::delta_points);
    text("kind", &RunConfig::kind);
    real("n-min", &RunConfig::n_min);
    real("n-max", &RunConfig::n_max);
    real("tol", &RunConfig::tol);
    count("coarse-points", &RunConfig::coarse_points);
    return f;
  }();
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::InvalidConfig, message);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, key, trim(value));
      return;
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unknown configuration key '" + key + "'");
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(lineno) + " is not key=value: " + line);
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate(const RunConfig& c) {
  if (c.scheme) require(*c.scheme == "sps" || *c.scheme == "ansatz", "scheme must be sps or ansatz");
  if (c.n) require(std::isfinite(*c.n), "n must be finite");
  require(positive(c.T), "T must be positive and finite");
  require(c.steps >= 1, "steps must be at least 1");
  require(positive(c.clamp), "clamp must be positive and finite");
  require(positive(c.quad_tol), "quad-tol must be positive and finite");
  require(!c.out.empty(), "out must name a directory");
  require(c.handedness == "both" || c.handedness == "left" || c.handedness == "right",
          "handedness must be both, left or right");
  require(c.trace_points >= 2, "trace-points must be at least 2");
  require(c.error == "systematic" || c.error == "detuning", "error must be systematic or detuning");
  for (const auto& s : c.schemes) {
    try {
      (void)SchemeSpec::parse(s);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidConfig, e.what());
    }
  }
  if (c.min && c.max) require(*c.min < *c.max, "min must be below max");
  require(c.points >= 2, "points must be at least 2");
  require(c.mode == "exact" || c.mode == "perturbative" || c.mode == "both", "mode must be exact, perturbative or both");
  require(c.alpha_min < c.alpha_max, "alpha-min must be below alpha-max");
  require(c.delta_min < c.delta_max, "delta-min must be below delta-max");
  require(c.alpha_points >= 2 && c.delta_points >= 2, "heatmap axes need at least 2 points");
  require(c.kind == "systematic" || c.kind == "detuning", "kind must be systematic or detuning");
  require(c.n_min < c.n_max, "n-min must be below n-max");
  require(positive(c.tol), "tol must be positive and finite");
  require(c.coarse_points >= 3, "coarse-points must be at least 3");
}

Metadata config_metadata(const RunConfig& config) {
  Metadata md;
  for (const auto& f : fields()) {
    if (f.key == "workers" || f.key == "out") continue;
    md.emplace_back("config." + f.key, f.get(config));
  }
  return md;
}

SweepSettings sweep_settings(const RunConfig& c) {
  SweepSettings s;
  s.duration = c.T;
  s.steps = c.steps;
  s.clamp_scale = c.clamp;
  s.quadrature_tolerance = c.quad_tol;
  s.workers = c.workers;
  return s;
}

std::vector<Handedness> handedness_list(const RunConfig& c) {
  if (c.handedness == "left") return {Handedness::Left};
  if (c.handedness == "right") return {Handedness::Right};
  return {Handedness::Left, Handedness::Right};
}

SensitivityKind parse_sensitivity_kind(const std::string& text) {
  if (text == "systematic") return SensitivityKind::Systematic;
  if (text == "detuning") return SensitivityKind::Detuning;
  throw Error(ErrorKind::InvalidConfig, "unknown error kind '" + text + "'");
}

SchemeSpec scheme_from_config(const RunConfig& c, const std::string& default_scheme, double default_n) {
  const std::string scheme = c.scheme.value_or(default_scheme);
  if (scheme == "sps") return SchemeSpec::sps();
  return SchemeSpec::ansatz(c.n.value_or(default_n));
}

}  // namespace chiral
