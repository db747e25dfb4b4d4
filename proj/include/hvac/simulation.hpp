#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hvac/ctrl_m1.hpp"
#include "hvac/ctrl_m2.hpp"
#include "hvac/oracle.hpp"
#include "hvac/scenario.hpp"
#include "hvac/thermal.hpp"

namespace hvac {

inline constexpr const char* kCsvSchema = "hvacsim-csv v1";

/// Column positions of one controller kind. Absent blocks are npos.
struct ColumnLayout {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  ControllerKind kind = ControllerKind::Method1;
  std::size_t n = 0;
  std::size_t T0 = 1, Z0 = npos, m0 = npos, zeta0 = npos, nu_plus0 = npos, nu_minus0 = npos,
              mu_plus0 = npos, mu_minus0 = npos;
  std::size_t lambda = npos, total_flow = npos, objective = npos, price = npos;
  std::size_t width = 0;
  std::vector<std::string> names;

  ColumnLayout() = default;

  ColumnLayout(ControllerKind k, std::size_t zones) : kind(k), n(zones) {
    names.push_back("t_hours");
    auto block = [&](const char* stem) {
      const std::size_t at = names.size();
      for (std::size_t i = 0; i < n; ++i) names.push_back(std::string(stem) + "_" + std::to_string(i + 1));
      return at;
    };
    auto scalar = [&](const char* name) {
      names.push_back(name);
      return names.size() - 1;
    };
    T0 = block("T");
    if (k != ControllerKind::ConstantFlow) Z0 = block("Z");
    m0 = block("m");
    if (k == ControllerKind::Method1) zeta0 = block("zeta");
    if (k != ControllerKind::ConstantFlow) {
      nu_plus0 = block("nu_plus");
      nu_minus0 = block("nu_minus");
      mu_plus0 = block("mu_plus");
      mu_minus0 = block("mu_minus");
      lambda = scalar("lambda_plus");
    }
    total_flow = scalar("total_flow");
    objective = scalar("objective_full");
    if (k == ControllerKind::Method2) price = scalar("price");
    width = names.size();
  }
};

/// Every tick of a run, row-major.
struct Trajectory {
  ColumnLayout layout;
  std::vector<double> data;

  std::size_t rows() const noexcept { return layout.width ? data.size() / layout.width : 0; }
  bool empty() const noexcept { return data.empty(); }
  double at(std::size_t row, std::size_t col) const { return data[row * layout.width + col]; }
  double time_hours(std::size_t row) const { return at(row, 0); }

  Vector block(std::size_t row, std::size_t first) const {
    Vector v(static_cast<Eigen::Index>(layout.n));
    for (std::size_t i = 0; i < layout.n; ++i) v[static_cast<Eigen::Index>(i)] = at(row, first + i);
    return v;
  }
};

struct AuditWindow {
  double start_hours = 0.0;
  double end_hours = 0.0;
};

enum class AuditVerdict { Pass, Fail, NonStationary, NoData };

inline const char* to_string(AuditVerdict v) noexcept {
  switch (v) {
    case AuditVerdict::Pass: return "pass";
    case AuditVerdict::Fail: return "FAIL";
    case AuditVerdict::NonStationary: return "non-stationary";
    case AuditVerdict::NoData: return "no data";
  }
  return "?";
}

struct AuditResult {
  AuditWindow window;
  AuditVerdict verdict = AuditVerdict::NoData;
  std::string note;
  std::size_t samples = 0;
  // Window averages of the controller and the matching oracle solution.
  DecisionPoint state, oracle;
  DualPoint duals, oracle_duals;
  Vector T;
  double gap_Z = 0.0, gap_m = 0.0, gap_duals = 0.0;
  double max_gap = 0.0;
  double max_T_minus_Z = 0.0;
  KktReport kkt;      // residuals of the averaged state
  bool zeta_positive = false;
};

struct SaturationInterval {
  double start_hours = 0.0;
  double end_hours = 0.0;
};

struct RunArtifact {
  Scenario scenario;
  Trajectory trajectory;
  std::string csv;
  bool failed = false;
  std::string failure;
  std::vector<AuditResult> audits;

  std::size_t csv_rows() const {
    std::size_t rows = 0;
    for (std::size_t r = 0; r < trajectory.rows(); ++r)
      if (r % scenario.stride == 0) ++rows;
    return rows;
  }
};

struct RunOptions {
  bool audit = true;                  // run the default audits
  std::vector<AuditWindow> windows;   // replaces the defaults when nonempty
  double audit_tolerance = 1e-3;
};

namespace sim_detail {

inline double energy_rate(const BuildingNetwork& net, const OperatingContext& ctx, const Vector& T,
                          const Vector& m) {
  double coil = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto& p = net.zone(i);
    coil += ctx.specific_heat * m[ii] * ctx.sign_for(p) * (T[ii] - ctx.supply_for(p));
  }
  const double total = m.sum();
  return coil / ctx.cop + ctx.fan_coeff * total * total * total;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string csv_header(const Scenario& s, const ColumnLayout& layout) {
  std::string out = std::string("# ") + kCsvSchema + " controller=" + to_string(s.controller) +
                    " plant=" + to_string(s.plant) + " zones=" + std::to_string(s.net.size()) +
                    " dt=" + fmt(s.dt) + " stride=" + std::to_string(s.stride) + "\n";
  for (std::size_t c = 0; c < layout.width; ++c) out += (c ? "," : "") + layout.names[c];
  return out + "\n";
}

inline void append_csv_row(std::string& csv, const double* row, std::size_t width) {
  for (std::size_t c = 0; c < width; ++c) {
    if (c) csv += ',';
    csv += fmt(row[c]);
  }
  csv += '\n';
}

/// Plant-facing part of a controller: step on a measurement, report flows and state.
class Driver {
 public:
  Driver(const Scenario& s) : s_(s) {
    switch (s.controller) {
      case ControllerKind::Method1:
        c1_ = std::make_unique<DecentralizedController>(s.net, s.gains, s.derivative_tau, s.substeps);
        break;
      case ControllerKind::Method2:
        c2_ = std::make_unique<DistributedController>(s.net, s.gains, s.derivative_tau, s.substeps);
        break;
      case ControllerKind::ConstantFlow:
        break;
    }
  }

  void initialize(const Vector& T0) {
    if (c1_) c1_->initialize(T0);
    if (c2_) c2_->initialize(T0);
  }

  void step(const OperatingContext& ctx, const Vector& T, double dt) {
    if (c1_) c1_->step(ctx, T, dt);
    if (c2_) c2_->step(ctx, T, dt);
  }

  Vector applied_flows() const {
    if (c1_) return c1_->applied_flows();
    if (c2_) return c2_->applied_flows();
    return s_.constant_flows;
  }

  void record(const ColumnLayout& L, const Vector& T, double* row) const {
    const Vector flows = applied_flows();
    for (std::size_t i = 0; i < L.n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      row[L.T0 + i] = T[ii];
      row[L.m0 + i] = flows[ii];
    }
    if (c1_) {
      for (std::size_t i = 0; i < L.n; ++i) {
        const auto& z = c1_->zones()[i];
        row[L.Z0 + i] = z.Z;
        row[L.m0 + i] = z.m;
        row[L.zeta0 + i] = z.zeta;
        row[L.nu_plus0 + i] = z.nu_plus;
        row[L.nu_minus0 + i] = z.nu_minus;
        row[L.mu_plus0 + i] = z.mu_plus;
        row[L.mu_minus0 + i] = z.mu_minus;
      }
      row[L.lambda] = c1_->fan().lambda_plus;
    }
    if (c2_) {
      for (std::size_t i = 0; i < L.n; ++i) {
        const auto& z = c2_->zones()[i];
        row[L.Z0 + i] = z.Z;
        row[L.m0 + i] = z.m;
        row[L.nu_plus0 + i] = z.nu_plus;
        row[L.nu_minus0 + i] = z.nu_minus;
        row[L.mu_plus0 + i] = z.mu_plus;
        row[L.mu_minus0 + i] = z.mu_minus;
      }
      row[L.lambda] = c2_->fan().lambda_plus;
      row[L.price] = c2_->broadcast().price;
    }
    row[L.total_flow] = flows.sum();
  }

 private:
  const Scenario& s_;
  std::unique_ptr<DecentralizedController> c1_;
  std::unique_ptr<DistributedController> c2_;
};

}  // namespace sim_detail

/// Windows of `length_hours` ending where each regime ends (the next
/// breakpoint or event, and the end of the horizon).
inline std::vector<AuditWindow> default_audit_windows(const Scenario& s, double length_hours = 1.0 / 6.0) {
  auto starts = s.regime_starts();
  starts.push_back(s.horizon_hours);
  std::vector<AuditWindow> out;
  for (std::size_t k = 1; k < starts.size(); ++k)
    if (starts[k] - length_hours >= starts[k - 1] - 1e-12)
      out.push_back({starts[k] - length_hours, starts[k]});
  return out;
}

/// Time-averages the trajectory over the window, freezes the problem data at
/// its midpoint and compares against the matching oracle.
inline AuditResult audit(const Scenario& s, const Trajectory& traj, AuditWindow w,
                         double tolerance = 1e-3) {
  if (!(w.end_hours > w.start_hours)) throw ConfigError("audit window must have end > start");
  if ((w.end_hours - w.start_hours) * 3600.0 < 10.0 * s.dt - 1e-9)
    throw ConfigError("audit window is shorter than 10 time steps");
  if (w.start_hours < -1e-12 || w.end_hours > s.horizon_hours + 1e-12)
    throw ConfigError("audit window lies outside the horizon");

  AuditResult r;
  r.window = w;
  const auto& L = traj.layout;
  const double eps = 0.5 * s.dt / 3600.0;
  std::vector<double> mean(L.width, 0.0);
  for (std::size_t row = 0; row < traj.rows(); ++row) {
    const double t = traj.time_hours(row);
    if (t < w.start_hours - eps || t > w.end_hours + eps) continue;
    for (std::size_t c = 0; c < L.width; ++c) mean[c] += traj.at(row, c);
    ++r.samples;
  }
  if (r.samples == 0 || traj.time_hours(traj.rows() - 1) < w.end_hours - eps) {
    r.note = "trajectory does not cover the window";
    return r;
  }
  for (double& v : mean) v /= static_cast<double>(r.samples);
  auto avg = [&](std::size_t first) {
    Vector v(static_cast<Eigen::Index>(L.n));
    for (std::size_t i = 0; i < L.n; ++i) v[static_cast<Eigen::Index>(i)] = mean[first + i];
    return v;
  };
  r.T = avg(L.T0);
  r.state.m = avg(L.m0);

  bool stationary = s.schedule.constant_on(w.start_hours, w.end_hours);
  for (const auto& e : s.events)
    if (e.time_hours > w.start_hours && e.time_hours < w.end_hours) stationary = false;

  const double mid = 0.5 * (w.start_hours + w.end_hours);
  const ProblemInstance inst = s.instance_at(mid);

  if (s.controller == ControllerKind::ConstantFlow) {
    r.state.Z = r.T;
    r.oracle.m = r.state.m;
    r.oracle.Z = steady_state_for_flows(s.net, inst.ctx(), inst.ambient(), r.state.m, s.plant);
    r.gap_Z = (r.T - r.oracle.Z).cwiseAbs().maxCoeff();
    r.max_gap = r.gap_Z;
  } else {
    const bool m1 = s.controller == ControllerKind::Method1;
    r.state.Z = avg(L.Z0);
    r.duals = DualPoint::zeros(L.n, m1);
    if (m1) r.duals.zeta = avg(L.zeta0);
    r.duals.nu_plus = avg(L.nu_plus0);
    r.duals.nu_minus = avg(L.nu_minus0);
    r.duals.mu_plus = avg(L.mu_plus0);
    r.duals.mu_minus = avg(L.mu_minus0);
    r.duals.lambda_plus = mean[L.lambda];
    r.max_T_minus_Z = (r.T - r.state.Z).cwiseAbs().maxCoeff();
    r.zeta_positive = m1 && (r.duals.zeta.array() > Tolerances{}.zeta).all();

    OracleResult orc;
    try {
      orc = m1 ? solve_relaxed(inst) : solve_general(inst);
    } catch (const Error& e) {
      r.verdict = stationary ? AuditVerdict::Fail : AuditVerdict::NonStationary;
      r.note = std::string("oracle failed: ") + e.what();
      return r;
    }
    r.oracle = orc.pt;
    r.oracle_duals = orc.duals;
    r.kkt = m1 ? kkt_residual_relaxed(inst, r.state, r.duals)
               : kkt_residual_general(inst, r.state.Z, r.duals);
    auto gap = [](const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); };
    r.gap_Z = gap(r.state.Z, orc.pt.Z);
    r.gap_m = gap(r.state.m, orc.pt.m);
    double gd = std::max({gap(r.duals.nu_plus, orc.duals.nu_plus),
                          gap(r.duals.nu_minus, orc.duals.nu_minus),
                          gap(r.duals.mu_plus, orc.duals.mu_plus),
                          gap(r.duals.mu_minus, orc.duals.mu_minus),
                          std::abs(r.duals.lambda_plus - orc.duals.lambda_plus)});
    if (m1) gd = std::max(gd, gap(r.duals.zeta, orc.duals.zeta));
    r.gap_duals = gd;
    r.max_gap = std::max({r.gap_Z, r.gap_m, r.gap_duals});
    if (!orc.converged) r.note = "oracle did not converge";
  }

  if (!stationary) {
    r.verdict = AuditVerdict::NonStationary;
    r.note = "non-stationary: the problem data change inside the window";
  } else {
    r.verdict = r.max_gap <= tolerance && r.max_T_minus_Z <= tolerance ? AuditVerdict::Pass
                                                                       : AuditVerdict::Fail;
  }
  return r;
}

/// Closed-loop simulation. Per tick: record, controller step on the measured
/// temperatures, then RK4 over [t, t + dt] with flows and ambient held.
inline RunArtifact run(const Scenario& scenario, const RunOptions& opt = {}) {
  scenario.validate();
  RunArtifact art;
  art.scenario = scenario;
  const Scenario& s = art.scenario;
  const std::size_t n = s.net.size();
  const std::size_t N = s.ticks();
  if (N % s.stride != 0) throw ConfigError("horizon must be a whole number of strides");

  ColumnLayout L(s.controller, n);
  art.trajectory.layout = L;
  auto& data = art.trajectory.data;
  data.reserve((N + 1) * L.width);
  art.csv = sim_detail::csv_header(s, L);

  sim_detail::Driver drv(s);
  Vector T = s.start_temps();
  drv.initialize(T);

  std::unique_ptr<ProblemInstance> inst;
  std::size_t events_seen = std::numeric_limits<std::size_t>::max();
  AmbientSample amb_seen;

  try {
    for (std::size_t k = 0;; ++k) {
      const double t = static_cast<double>(k) * s.dt;
      const OperatingContext ctx = s.context_at_seconds(t);
      const AmbientSample amb = s.schedule.at_seconds(t);
      const auto events_now = static_cast<std::size_t>(std::count_if(
          s.events.begin(), s.events.end(),
          [&](const ParameterEvent& e) { return e.time_hours * 3600.0 <= t + 1e-9; }));
      if (!inst || events_now != events_seen || amb.outdoor != amb_seen.outdoor ||
          amb.gains != amb_seen.gains) {
        inst = std::make_unique<ProblemInstance>(s.net, ctx, amb);
        events_seen = events_now;
        amb_seen = amb;
      }

      const std::size_t at = data.size();
      data.resize(at + L.width);
      double* row = data.data() + at;
      row[0] = t / 3600.0;
      drv.record(L, T, row);
      row[L.objective] = objective_full(*inst, {T, drv.applied_flows()});
      if (k % s.stride == 0) sim_detail::append_csv_row(art.csv, row, L.width);
      if (k == N) break;

      drv.step(ctx, T, s.dt);
      T = rk4_step(s.plant, s.net, ctx, T, drv.applied_flows(), amb, s.dt);
      require_finite(T, t + s.dt);
    }
  } catch (const NumericalError& e) {
    art.failed = true;
    art.failure = e.what();
  } catch (const DomainError& e) {
    art.failed = true;
    art.failure = e.what();
  }

  if (opt.audit && !art.failed) {
    const auto windows = opt.windows.empty() ? default_audit_windows(s) : opt.windows;
    for (const auto& w : windows) art.audits.push_back(audit(s, art.trajectory, w, opt.audit_tolerance));
  }
  return art;
}

/// Maximal intervals on which the delivered total flow sits at the cap.
inline std::vector<SaturationInterval> saturation_intervals(const Scenario& s, const Trajectory& traj,
                                                            double tol = 1e-3) {
  std::vector<SaturationInterval> out;
  bool open = false;
  for (std::size_t r = 0; r < traj.rows(); ++r) {
    const double t = traj.time_hours(r);
    const double cap = s.context_at(t).total_flow_cap;
    const bool sat = std::abs(traj.at(r, traj.layout.total_flow) - cap) <= tol;
    if (sat && !open) out.push_back({t, t});
    if (sat) out.back().end_hours = t;
    open = sat;
  }
  return out;
}

/// Mean |T - T_set| per zone over [h1, h2].
inline Vector mean_comfort_deviation(const Scenario& s, const Trajectory& traj, double h1, double h2) {
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(s.net.size()));
  std::size_t count = 0;
  for (std::size_t r = 0; r < traj.rows(); ++r) {
    const double t = traj.time_hours(r);
    if (t < h1 || t > h2) continue;
    for (std::size_t i = 0; i < s.net.size(); ++i)
      acc[static_cast<Eigen::Index>(i)] += std::abs(traj.at(r, traj.layout.T0 + i) - s.net.zone(i).set_point);
    ++count;
  }
  if (count == 0) throw ConfigError("no samples in the requested interval");
  return acc / static_cast<double>(count);
}

/// Time-averaged coil plus fan power over the run, kW.
inline double mean_energy_rate(const Scenario& s, const Trajectory& traj) {
  if (traj.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t r = 0; r < traj.rows(); ++r) {
    const Vector T = traj.block(r, traj.layout.T0);
    Vector m = traj.block(r, traj.layout.m0);
    for (std::size_t i = 0; i < s.net.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      m[ii] = std::clamp(m[ii], 0.0, s.net.zone(i).flow_max);
    }
    acc += sim_detail::energy_rate(s.net, s.context_at(traj.time_hours(r)), T, m);
  }
  return acc / static_cast<double>(traj.rows());
}

inline std::string tightness_text(const RunArtifact& art) {
  if (art.scenario.controller != ControllerKind::Method1) return "tightness: not applicable";
  bool any = false;
  for (const auto& a : art.audits) {
    if (a.samples == 0) continue;
    any = true;
    if (!a.zeta_positive) {
      std::ostringstream os;
      os << "zeta <= 0 for some zone in the window " << a.window.start_hours << "-"
         << a.window.end_hours << " h";
      return os.str();
    }
  }
  return any ? "ζ > 0 for all zones at every audit window" : "tightness: no audit windows";
}

inline std::string report(const RunArtifact& art) {
  const auto& s = art.scenario;
  const auto& traj = art.trajectory;
  std::ostringstream os;
  os << "scenario " << s.name << " (" << to_string(s.controller) << ", plant "
     << to_string(s.plant) << ")\n";
  if (traj.empty()) {
    os << "no data\n";
    return os.str();
  }
  if (art.failed) os << "RUN FAILED: " << art.failure << "\n";
  const double end = traj.time_hours(traj.rows() - 1);
  os << "samples " << traj.rows() << ", 0-" << end << " h\n";

  const Vector dev = mean_comfort_deviation(s, traj, 0.0, end);
  os << "comfort deviation |T - T_set| per zone (mean / max):\n";
  for (std::size_t i = 0; i < s.net.size(); ++i) {
    double mx = 0.0;
    for (std::size_t r = 0; r < traj.rows(); ++r)
      mx = std::max(mx, std::abs(traj.at(r, traj.layout.T0 + i) - s.net.zone(i).set_point));
    char buf[96];
    std::snprintf(buf, sizeof buf, "  zone %zu: %.4f / %.4f C\n", i + 1, dev[static_cast<Eigen::Index>(i)], mx);
    os << buf;
  }
  os << "mean coil+fan power " << mean_energy_rate(s, traj) << " kW\n";

  const auto sat = saturation_intervals(s, traj);
  os << "total flow at cap:";
  if (sat.empty()) os << " never";
  for (const auto& iv : sat)
    if (iv.end_hours - iv.start_hours >= 1.0 / 60.0) os << " [" << iv.start_hours << ", " << iv.end_hours << "] h";
  os << "\n";

  if (!art.audits.empty()) {
    os << "audits:\n";
    for (const auto& a : art.audits) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "  %6.3f-%6.3f h  %-14s gap %.2e  |T-Z| %.2e  kkt %.2e%s%s\n",
                    a.window.start_hours, a.window.end_hours, to_string(a.verdict), a.max_gap,
                    a.max_T_minus_Z, a.kkt.max_residual(), a.note.empty() ? "" : "  ",
                    a.note.c_str());
      os << buf;
    }
    os << tightness_text(art) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Parameter sweeps

/// Oracle equilibrium split into its comfort cost and its energy rate.
struct TradeoffPoint {
  double comfort = 0.0;  // sum r_i/2 (Z_i - T_set)^2
  double energy = 0.0;   // objective energy part at w = 1
};

struct SweepPoint {
  double value = 0.0;
  std::vector<TradeoffPoint> oracle;  // one per audit window
  bool simulated = false;
  bool failed = false;
  double mean_deviation = 0.0;  // simulated, averaged over zones and time
  double mean_energy = 0.0;
  std::vector<AuditResult> audits;
};

struct SweepResult {
  std::string param;
  std::vector<AuditWindow> windows;
  std::vector<SweepPoint> points;  // sorted by value
  bool comfort_monotone = true;    // nondecreasing in the value
  bool energy_monotone = true;     // nonincreasing in the value
};

inline std::string canonical_param(const std::string& p) {
  if (p == "w" || p == "energy_weight") return "energy_weight";
  if (p == "m_bar" || p == "total_flow_cap") return "total_flow_cap";
  if (p == "cop" || p == "fan_coeff" || p == "fan_bound") return p;
  throw ConfigError("cannot sweep parameter '" + p + "'");
}

/// Copy of `s` with the parameter fixed for the whole run; its events are dropped.
inline Scenario with_parameter(const Scenario& s, const std::string& param, double value) {
  const std::string key = canonical_param(param);
  Scenario out = s;
  apply_parameter(out.ctx, key, value);
  std::erase_if(out.events, [&](const ParameterEvent& e) { return e.key == key; });
  out.validate();
  return out;
}

inline TradeoffPoint oracle_tradeoff(const Scenario& s, double t_hours) {
  const ProblemInstance inst = s.instance_at(t_hours);
  OperatingContext c0 = inst.ctx(), c1 = inst.ctx();
  c0.energy_weight = 0.0;
  c1.energy_weight = 1.0;
  const ProblemInstance i0(s.net, c0, inst.ambient()), i1(s.net, c1, inst.ambient());
  TradeoffPoint tp;
  if (s.controller == ControllerKind::Method2) {
    const Vector Z = solve_general(inst).pt.Z;
    tp.comfort = objective_general(i0, Z);
    tp.energy = objective_general(i1, Z) - tp.comfort;
  } else {
    DecisionPoint pt = solve_relaxed(inst).pt;
    // Cheapest flow that holds Z; equals the oracle flow whenever the relaxation is tight.
    for (std::size_t i = 0; i < s.net.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      pt.m[ii] = std::max(f_i(inst, i, pt.Z[ii]), s.net.zone(i).flow_min);
    }
    tp.comfort = objective_approx(i0, pt);
    tp.energy = objective_approx(i1, pt) - tp.comfort;
  }
  return tp;
}

/// Runs one scenario per value, in parallel, and checks the comfort/energy
/// tradeoff of the oracle equilibria at the audit windows.
inline SweepResult sweep(const Scenario& base, const std::string& param, std::vector<double> values,
                         bool simulate = true, unsigned threads = 0) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::sort(values.begin(), values.end());
  SweepResult res;
  res.param = canonical_param(param);
  std::vector<Scenario> variants;
  for (double v : values) variants.push_back(with_parameter(base, param, v));
  res.windows = default_audit_windows(variants.front());
  res.points.resize(values.size());

  auto work = [&](std::size_t k) {
    SweepPoint& p = res.points[k];
    const Scenario& s = variants[k];
    p.value = values[k];
    for (const auto& w : res.windows) p.oracle.push_back(oracle_tradeoff(s, 0.5 * (w.start_hours + w.end_hours)));
    if (!simulate) return;
    RunArtifact art = run(s);
    p.simulated = true;
    p.failed = art.failed;
    p.audits = std::move(art.audits);
    if (!art.trajectory.empty()) {
      const auto& tr = art.trajectory;
      p.mean_deviation = mean_comfort_deviation(s, tr, 0.0, tr.time_hours(tr.rows() - 1)).mean();
      p.mean_energy = mean_energy_rate(s, tr);
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t width = std::min<std::size_t>(values.size(), threads ? threads : hw);
  std::vector<std::exception_ptr> errors(values.size());
  for (std::size_t first = 0; first < values.size(); first += width) {
    std::vector<std::thread> pool;
    for (std::size_t k = first; k < std::min(values.size(), first + width); ++k)
      pool.emplace_back([&, k] {
        try {
          work(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const double tol = 1e-9;
  for (std::size_t k = 1; k < res.points.size(); ++k)
    for (std::size_t w = 0; w < res.windows.size(); ++w) {
      const auto& a = res.points[k - 1].oracle[w];
      const auto& b = res.points[k].oracle[w];
      if (b.comfort < a.comfort - tol * (1.0 + std::abs(a.comfort))) res.comfort_monotone = false;
      if (b.energy > a.energy + tol * (1.0 + std::abs(a.energy))) res.energy_monotone = false;
    }
  return res;
}

inline std::string sweep_report(const SweepResult& r) {
  std::ostringstream os;
  os << "sweep over " << r.param << "\n";
  os << "value      oracle comfort   oracle energy kW   sim |T-Tset|   sim power kW   audits\n";
  for (const auto& p : r.points) {
    double c = 0.0, e = 0.0;
    for (const auto& tp : p.oracle) {
      c += tp.comfort;
      e += tp.energy;
    }
    const double nw = p.oracle.empty() ? 1.0 : static_cast<double>(p.oracle.size());
    std::size_t passed = 0;
    for (const auto& a : p.audits) passed += a.verdict == AuditVerdict::Pass;
    char buf[160];
    if (p.simulated)
      std::snprintf(buf, sizeof buf, "%-10g %14.6f %18.6f %14.4f %14.4f   %zu/%zu%s\n", p.value, c / nw,
                    e / nw, p.mean_deviation, p.mean_energy, passed, p.audits.size(),
                    p.failed ? "  (run failed)" : "");
    else
      std::snprintf(buf, sizeof buf, "%-10g %14.6f %18.6f %14s %14s\n", p.value, c / nw, e / nw, "-", "-");
    os << buf;
  }
  os << "comfort cost nondecreasing in " << r.param << ": " << (r.comfort_monotone ? "yes" : "NO") << "\n";
  os << "energy nonincreasing in " << r.param << ": " << (r.energy_monotone ? "yes" : "NO") << "\n";
  return os.str();
}

}  // namespace hvac
