#include "chiral/design.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "chiral/error.hpp"

namespace chiral {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSingularThreshold = 1e-9;
constexpr double kBoundaryTolerance = 1e-12;
constexpr double kDerivativeTolerance = 1e-6;
constexpr double kInvariantTolerance = 1e-8;
constexpr std::size_t kPhaseKnots = 256;

std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

void check_duration(double duration) {
  if (!std::isfinite(duration) || !(duration > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "schedule duration T must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(SchemeKind kind) noexcept {
  switch (kind) {
    case SchemeKind::Sps: return "sps";
    case SchemeKind::FourierAnsatz: return "ansatz";
    case SchemeKind::Custom: return "custom";
  }
  return "custom";
}

InvariantSchedule InvariantSchedule::custom(double duration, AngleFn phi, AngleFn theta, AngleFn phi_dot,
                                            AngleFn theta_dot, std::string label) {
  check_duration(duration);
  InvariantSchedule s;
  s.kind_ = SchemeKind::Custom;
  s.duration_ = duration;
  s.label_ = std::move(label);
  s.fns_ = std::make_shared<const Functions>(
      Functions{std::move(phi), std::move(theta), std::move(phi_dot), std::move(theta_dot)});
  return s;
}

std::optional<double> InvariantSchedule::closed_form_eta_plus(double t) const {
  if (kind_ != SchemeKind::FourierAnsatz) return std::nullopt;
  const double p = phi(t);
  return -(*n_ * std::sin(3.0 * p) + p);
}

InvariantSchedule sps_schedule(double duration) {
  check_duration(duration);
  const double rate = kPi / (2.0 * duration);
  InvariantSchedule s;
  s.kind_ = SchemeKind::Sps;
  s.duration_ = duration;
  s.label_ = "sps";
  s.fns_ = std::make_shared<const InvariantSchedule::Functions>(InvariantSchedule::Functions{
      [duration](double t) { return (kPi / 2.0) * (t / duration); }, [](double) { return kPi / 2.0; },
      [rate](double) { return rate; }, [](double) { return 0.0; }});
  return s;
}

InvariantSchedule ansatz_schedule(double n, double duration) {
  check_duration(duration);
  if (!std::isfinite(n)) throw Error(ErrorKind::InvalidArgument, "ansatz weight n must be finite");
  const double rate = kPi / (2.0 * duration);
  auto phi = [duration](double t) { return (kPi / 2.0) * (t / duration); };
  auto b_of = [n](double p) { return std::sin(p) * (3.0 * n * std::cos(3.0 * p) + 1.0); };
  auto db_dphi = [n](double p) {
    return std::cos(p) * (3.0 * n * std::cos(3.0 * p) + 1.0) - 9.0 * n * std::sin(p) * std::sin(3.0 * p);
  };
  auto theta = [phi, b_of](double t) {
    const double b = b_of(phi(t));
    const double angle = std::atan2(b + 1.0, b - 1.0);
    return angle < 0.0 ? angle + 2.0 * kPi : angle;
  };
  auto theta_dot = [phi, b_of, db_dphi, rate](double t) {
    const double p = phi(t);
    const double b = b_of(p);
    return -db_dphi(p) * rate / (1.0 + b * b);
  };

  InvariantSchedule s;
  s.kind_ = SchemeKind::FourierAnsatz;
  s.n_ = n;
  s.duration_ = duration;
  s.label_ = "ansatz-n" + format_short(n);
  s.fns_ = std::make_shared<const InvariantSchedule::Functions>(
      InvariantSchedule::Functions{phi, theta, [rate](double) { return rate; }, theta_dot});
  return s;
}

HermitianOperator invariant_matrix(Handedness h, const InvariantParams& p) {
  const double sp = std::sin(p.phi), cp = std::cos(p.phi);
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  if (h == Handedness::Left) {
    return HermitianOperator::from_upper({0.0, 0.0, 0.0}, sp * st, Complex(0.0, -cp), sp * ct);
  }
  return HermitianOperator::from_upper({0.0, 0.0, 0.0}, sp * ct, Complex(0.0, cp), sp * st);
}

Matrix3c invariant_time_derivative(Handedness h, const InvariantParams& p, double phi_dot, double theta_dot) {
  const double sp = std::sin(p.phi), cp = std::cos(p.phi);
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  // d/dt of sin(phi) sin(theta), sin(phi) cos(theta) and cos(phi).
  const double d_ss = cp * st * phi_dot + sp * ct * theta_dot;
  const double d_sc = cp * ct * phi_dot - sp * st * theta_dot;
  const double d_c = -sp * phi_dot;
  const bool left = h == Handedness::Left;
  const Complex e12 = left ? d_ss : d_sc;
  const Complex e23 = left ? d_sc : d_ss;
  const Complex e13 = Complex(0.0, left ? -d_c : d_c);
  return HermitianOperator::from_upper({0.0, 0.0, 0.0}, e12, e13, e23).matrix();
}

InvariantEigensystem invariant_eigensystem(Handedness h, const InvariantParams& p) {
  const double sp = std::sin(p.phi), cp = std::cos(p.phi);
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  const Complex i(0.0, 1.0);
  const double r = 1.0 / std::numbers::sqrt2;
  InvariantEigensystem es;
  es.zero.eigenvalue = 0.0;
  es.plus.eigenvalue = 1.0;
  es.minus.eigenvalue = -1.0;
  if (h == Handedness::Left) {
    es.zero.vector << -sp * ct, i * cp, sp * st;
    es.plus.vector << r * (cp * ct + i * st), r * i * sp, r * (-cp * st + i * ct);
    es.minus.vector << r * (cp * ct - i * st), r * i * sp, r * (-cp * st - i * ct);
  } else {
    es.zero.vector << sp * st, i * cp, -sp * ct;
    es.plus.vector << r * (-cp * st + i * ct), r * i * sp, r * (cp * ct + i * st);
    es.minus.vector << r * (-cp * st - i * ct), r * i * sp, r * (cp * ct - i * st);
  }
  return es;
}

namespace {

RabiSample pulse_formula(const InvariantSchedule& s, double t) {
  const double p = s.phi(t), th = s.theta(t);
  const double pd = s.phi_dot(t), td = s.theta_dot(t);
  const double st = std::sin(th), ct = std::cos(th);
  RabiSample out;
  out.omega = pd / (st - ct);
  out.omega_q = pd * (std::cos(p) / std::sin(p)) * (st + ct) / (st - ct) - td;
  return out;
}

bool finite(const RabiSample& r) { return std::isfinite(r.omega) && std::isfinite(r.omega_q); }

}  // namespace

RabiSample analytic_pulse(const InvariantSchedule& s, double t) {
  RabiSample out = pulse_formula(s, t);
  if (finite(out)) return out;
  // One-sided limit at a removable or divergent endpoint.
  const double T = s.duration();
  const double offset = 1e-7 * T;
  if (t <= offset) return pulse_formula(s, offset);
  if (t >= T - offset) return pulse_formula(s, T - offset);
  return out;
}

PulseSchedule pulses_from_invariant(const InvariantSchedule& s, std::span<const double> times, double clamp) {
  if (!std::isfinite(clamp) || !(clamp > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "clamp value must be positive and finite");
  }
  const double T = s.duration();
  PulseSchedule out;
  out.duration = T;
  out.clamp_value = clamp;
  out.times.assign(times.begin(), times.end());
  out.samples.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0 && t <= T)) {
      throw Error(ErrorKind::InvalidArgument, "sample time " + std::to_string(t) + " outside [0, T]");
    }
    const double th = s.theta(t);
    if (t > 0.0 && std::abs(std::sin(th) - std::cos(th)) < kSingularThreshold) {
      throw Error(ErrorKind::SingularTheta,
                  "sin(theta) = cos(theta) at t = " + std::to_string(t) + " (theta = " + std::to_string(th) + ")");
    }
    RabiSample r = analytic_pulse(s, t);
    if (!std::isfinite(r.omega)) {
      throw Error(ErrorKind::NonFiniteHamiltonian, "non-finite Omega at t = " + std::to_string(t));
    }
    if (!(std::abs(r.omega_q) <= clamp)) {
      const bool in_window = t <= kEndpointWindow * T || t >= (1.0 - kEndpointWindow) * T;
      if (!in_window) {
        throw Error(ErrorKind::ClampViolation, "|Omega_q| = " + std::to_string(std::abs(r.omega_q)) +
                                                   " exceeds clamp " + std::to_string(clamp) +
                                                   " outside the endpoint windows at t = " + std::to_string(t));
      }
      if (std::isnan(r.omega_q)) {
        throw Error(ErrorKind::NonFiniteHamiltonian, "undefined Omega_q at t = " + std::to_string(t));
      }
      r.omega_q = std::copysign(clamp, r.omega_q);
      ++out.clamped_count;
    }
    out.samples.push_back(r);
  }
  return out;
}

PulseSchedule pulses_on_nodes(const InvariantSchedule& s, const TimeGrid& grid, double clamp) {
  check_grid(grid);
  const auto t = grid.nodes();
  return pulses_from_invariant(s, t, clamp);
}

PulseSchedule pulses_on_midpoints(const InvariantSchedule& s, const TimeGrid& grid, double clamp) {
  check_grid(grid);
  const auto t = grid.midpoints();
  return pulses_from_invariant(s, t, clamp);
}

std::vector<HermitianOperator> step_hamiltonians(const PulseSchedule& pulses, Handedness h) {
  std::vector<HermitianOperator> hs;
  hs.reserve(pulses.samples.size());
  for (const auto& r : pulses.samples) hs.push_back(build_hamiltonian(h, r));
  return hs;
}

double eta_plus_rate(const InvariantSchedule& s, double t) {
  const double p = s.phi(t), th = s.theta(t);
  const double st = std::sin(th), ct = std::cos(th);
  return s.phi_dot(t) / std::sin(p) * (st + ct) / (ct - st);
}

LRPhase lr_phase(const InvariantSchedule& s, double tolerance) {
  if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "LR phase tolerance must be positive");
  LRPhase out;
  out.schedule_ = s;
  out.tolerance_ = tolerance;
  const double T = s.duration();
  const double h = T / static_cast<double>(kPhaseKnots);
  out.knots_.resize(kPhaseKnots + 1);
  for (std::size_t k = 0; k <= kPhaseKnots; ++k) out.knots_[k] = k == kPhaseKnots ? T : h * static_cast<double>(k);

  // A rate behaving like c/t near the start is not integrable there.
  const double probe = 1e-9 * T;
  const bool divergent_start = std::abs(probe * eta_plus_rate(s, probe)) > 1e-6;
  out.anchor_ = divergent_start ? LRPhase::Anchor::End : LRPhase::Anchor::Start;

  const QuadratureOptions opts{tolerance / static_cast<double>(kPhaseKnots), 0.0, 4000};
  auto rate = [&s](double t) { return eta_plus_rate(s, t); };
  out.values_.assign(kPhaseKnots + 1, std::numeric_limits<double>::quiet_NaN());
  if (out.anchor_ == LRPhase::Anchor::Start) {
    out.values_[0] = 0.0;
    for (std::size_t k = 1; k <= kPhaseKnots; ++k) {
      out.values_[k] = out.values_[k - 1] + integrate(rate, out.knots_[k - 1], out.knots_[k], opts).value;
    }
    out.first_valid_ = 0;
  } else {
    out.values_[kPhaseKnots] = 0.0;
    for (std::size_t k = kPhaseKnots - 1; k >= 1; --k) {
      out.values_[k] = out.values_[k + 1] - integrate(rate, out.knots_[k], out.knots_[k + 1], opts).value;
    }
    out.first_valid_ = 1;
  }
  return out;
}

double LRPhase::eta_plus(double t) const {
  const double T = schedule_.duration();
  t = std::clamp(t, 0.0, T);
  const double h = T / static_cast<double>(kPhaseKnots);
  auto j = static_cast<std::size_t>(std::llround(t / h));
  j = std::clamp(j, first_valid_, kPhaseKnots);
  if (knots_[j] == t) return values_[j];
  auto rate = [this](double x) { return eta_plus_rate(schedule_, x); };
  const QuadratureOptions opts{tolerance_ / static_cast<double>(kPhaseKnots), 0.0, 4000};
  return values_[j] + integrate(rate, knots_[j], t, opts).value;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << "check=" << c.name << " status=" << (c.passed ? "PASS" : "FAIL")
       << " worst_residual=" << format_short(c.worst_residual);
    if (!c.detail.empty()) os << " detail=\"" << c.detail << '"';
    os << '\n';
  }
  os << "overall=" << (passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

double invariant_residual(const InvariantSchedule& s, Handedness h, double t) {
  const InvariantParams p = s.params(t);
  const Matrix3c inv = invariant_matrix(h, p).matrix();
  const Matrix3c dinv = invariant_time_derivative(h, p, s.phi_dot(t), s.theta_dot(t));
  const Matrix3c ham = build_hamiltonian(h, analytic_pulse(s, t)).matrix();
  const Matrix3c residual = dinv - Complex(0.0, 1.0) * (inv * ham - ham * inv);
  return residual.cwiseAbs().maxCoeff();
}

ValidationReport validate_schedule(const InvariantSchedule& s, const ValidationOptions& options) {
  ValidationReport report;
  const double T = s.duration();
  const TimeGrid grid{T, std::max<std::size_t>(options.steps, 2)};
  const auto nodes = grid.nodes();

  {
    ValidationCheck c;
    c.name = "boundary_conditions";
    const double r0 = std::abs(s.phi(0.0));
    const double r1 = std::abs(s.phi(T) - kPi / 2);
    const double r2 = std::abs(s.theta(T) - kPi / 2);
    c.worst_residual = std::max({r0, r1, r2});
    c.passed = c.worst_residual <= kBoundaryTolerance;
    if (!c.passed) {
      c.detail = "phi(0)=" + format_short(s.phi(0.0)) + " phi(T)=" + format_short(s.phi(T)) +
                 " theta(T)=" + format_short(s.theta(T));
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c;
    c.name = "theta_singularity";
    double closest = std::numeric_limits<double>::infinity();
    double where = 0.0;
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      const double th = s.theta(nodes[k]);
      const double gap = std::abs(std::sin(th) - std::cos(th));
      if (!(gap >= closest)) {
        closest = gap;
        where = nodes[k];
      }
    }
    c.worst_residual = closest;
    c.passed = closest > kSingularThreshold;
    if (!c.passed) c.detail = "SingularTheta: sin(theta) = cos(theta) at t = " + format_short(where);
    report.checks.push_back(c);
  }

  {
    ValidationCheck c;
    c.name = "derivative_consistency";
    const double h = 1e-6 * T;
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
      const double t = nodes[k];
      const double fd_phi = (s.phi(t + h) - s.phi(t - h)) / (2 * h);
      const double fd_theta = (s.theta(t + h) - s.theta(t - h)) / (2 * h);
      const double an_phi = s.phi_dot(t), an_theta = s.theta_dot(t);
      const double e1 = std::abs(fd_phi - an_phi) / std::max(1.0, std::abs(an_phi));
      const double e2 = std::abs(fd_theta - an_theta) / std::max(1.0, std::abs(an_theta));
      if (!(e1 <= worst)) worst = e1;
      if (!(e2 <= worst)) worst = e2;
    }
    c.worst_residual = worst;
    c.passed = worst <= kDerivativeTolerance;
    report.checks.push_back(c);
  }

  const double clamp = options.clamp_scale / T;
  for (Handedness hand : {Handedness::Left, Handedness::Right}) {
    ValidationCheck c;
    c.name = std::string("dynamical_invariant_") + std::string(to_string(hand));
    double worst = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
      const double t = nodes[k];
      const RabiSample r = analytic_pulse(s, t);
      if (std::abs(r.omega_q) > clamp) continue;
      const double res = invariant_residual(s, hand, t);
      ++used;
      if (!(res <= worst)) worst = res;
    }
    c.worst_residual = worst;
    c.passed = used > 0 && worst <= kInvariantTolerance;
    c.detail = std::to_string(used) + " interior unclamped nodes";
    report.checks.push_back(c);
  }
  return report;
}

std::string serialize_schedule(const InvariantSchedule& s, std::size_t grid_steps, double clamp_value) {
  std::ostringstream os;
  os << "kind=" << to_string(s.kind()) << '\n';
  if (s.ansatz_n()) os << "n=" << format_exact(*s.ansatz_n()) << '\n';
  os << "T=" << format_exact(s.duration()) << '\n';
  os << "grid_steps=" << grid_steps << '\n';
  os << "clamp_value=" << format_exact(clamp_value) << '\n';
  return os.str();
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::InvalidArgument, "schedule field " + key + " is not a number: '" + value + "'");
  }
  return v;
}

}  // namespace

InvariantSchedule ScheduleDescriptor::make() const {
  switch (kind) {
    case SchemeKind::Sps: return sps_schedule(duration);
    case SchemeKind::FourierAnsatz:
      if (!n) throw Error(ErrorKind::InvalidArgument, "ansatz schedule needs n");
      return ansatz_schedule(*n, duration);
    case SchemeKind::Custom: break;
  }
  throw Error(ErrorKind::InvalidArgument, "custom schedules cannot be rebuilt from a descriptor");
}

ScheduleDescriptor parse_schedule(const std::string& text) {
  std::map<std::string, std::string> fields;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidArgument, "malformed schedule line: " + line);
    fields[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto require = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorKind::InvalidArgument, "schedule text lacks field " + key);
    return it->second;
  };
  ScheduleDescriptor d;
  const auto& kind = require("kind");
  if (kind == "sps") {
    d.kind = SchemeKind::Sps;
  } else if (kind == "ansatz") {
    d.kind = SchemeKind::FourierAnsatz;
    d.n = parse_double("n", require("n"));
  } else {
    throw Error(ErrorKind::InvalidArgument, "unsupported schedule kind '" + kind + "'");
  }
  d.duration = parse_double("T", require("T"));
  d.grid_steps = static_cast<std::size_t>(parse_double("grid_steps", require("grid_steps")));
  d.clamp_value = parse_double("clamp_value", require("clamp_value"));
  return d;
}

}  // namespace chiral
