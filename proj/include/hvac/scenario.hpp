#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hvac/ctrl_m1.hpp"
#include "hvac/disturbance.hpp"
#include "hvac/problems.hpp"
#include "hvac/thermal.hpp"

namespace hvac {

enum class ControllerKind { Method1, Method2, ConstantFlow };

inline const char* to_string(ControllerKind k) noexcept {
  switch (k) {
    case ControllerKind::Method1: return "method1";
    case ControllerKind::Method2: return "method2";
    case ControllerKind::ConstantFlow: return "constant_flow";
  }
  return "?";
}

/// Mid-run change of one building-wide parameter.
struct ParameterEvent {
  double time_hours = 0.0;
  std::string key;  // energy_weight, total_flow_cap, cop, fan_coeff, fan_bound
  double value = 0.0;
};

inline bool is_event_key(const std::string& key) {
  static const std::set<std::string> keys{"energy_weight", "total_flow_cap", "cop", "fan_coeff",
                                          "fan_bound"};
  return keys.count(key) > 0;
}

inline void apply_parameter(OperatingContext& ctx, const std::string& key, double value) {
  if (key == "energy_weight") ctx.energy_weight = value;
  else if (key == "total_flow_cap") ctx.total_flow_cap = value;
  else if (key == "cop") ctx.cop = value;
  else if (key == "fan_coeff") ctx.fan_coeff = value;
  else if (key == "fan_bound") ctx.fan_bound = value;
  else throw ConfigError("unknown parameter '" + key + "'");
}

struct Scenario {
  std::string name = "scenario";
  BuildingNetwork net;
  OperatingContext ctx;  // values at t = 0
  DisturbanceSchedule schedule;
  ControllerKind controller = ControllerKind::Method1;
  PlantModel plant = PlantModel::Full;
  GainSet gains;
  double horizon_hours = 24.0;
  double dt = 1.0;               // s
  std::size_t stride = 60;       // ticks per CSV row
  double derivative_tau = 10.0;  // s
  std::size_t substeps = 10;     // controller Euler steps per tick
  Vector initial_temps;          // empty: start at the set points
  Vector constant_flows;         // ConstantFlow controller only
  std::vector<ParameterEvent> events;

  /// Context in force at `t_hours`: every event with time <= t applied in order.
  OperatingContext context_at(double t_hours) const {
    OperatingContext c = ctx;
    for (const auto& e : events)
      if (e.time_hours <= t_hours) apply_parameter(c, e.key, e.value);
    return c;
  }

  /// Same rule on the tick clock, compared in seconds so that an event at
  /// h hours lands exactly on the tick t = 3600 h.
  OperatingContext context_at_seconds(double t) const {
    OperatingContext c = ctx;
    for (const auto& e : events)
      if (e.time_hours * 3600.0 <= t + 1e-9) apply_parameter(c, e.key, e.value);
    return c;
  }

  std::size_t ticks() const {
    return static_cast<std::size_t>(std::llround(horizon_hours * 3600.0 / dt));
  }

  Vector start_temps() const {
    if (initial_temps.size() > 0) return initial_temps;
    Vector t(static_cast<Eigen::Index>(net.size()));
    for (std::size_t i = 0; i < net.size(); ++i) t[static_cast<Eigen::Index>(i)] = net.zone(i).set_point;
    return t;
  }

  /// Times at which the problem data change: 0, breakpoints and events.
  std::vector<double> regime_starts() const {
    std::set<double> t{0.0};
    for (const auto& b : schedule.breakpoints())
      if (b.time_hours < horizon_hours) t.insert(b.time_hours);
    for (const auto& e : events)
      if (e.time_hours < horizon_hours) t.insert(e.time_hours);
    return {t.begin(), t.end()};
  }

  /// Problem data in force on the regime starting at t_hours.
  ProblemInstance instance_at(double t_hours) const {
    return ProblemInstance(net, context_at(t_hours), schedule.at_hours(t_hours));
  }

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(horizon_hours > 0.0)) throw ConfigError("horizon_hours must be > 0");
    if (stride == 0) throw ConfigError("stride must be >= 1");
    if (substeps == 0) throw ConfigError("substeps must be >= 1");
    const double n_ticks = horizon_hours * 3600.0 / dt;
    if (std::abs(n_ticks - std::round(n_ticks)) > 1e-6)
      throw ConfigError("horizon must be a whole number of ticks");
    if (ticks() % stride != 0) throw ConfigError("horizon must be a whole number of strides");
    if (schedule.zones() != net.size())
      throw DimensionError("schedule gains have " + std::to_string(schedule.zones()) +
                           " entries for " + std::to_string(net.size()) + " zones");
    if (controller != ControllerKind::ConstantFlow) gains.validate();
    if (!(derivative_tau > 0.0) || dt >= 2.0 * derivative_tau)
      throw ConfigError("derivative_tau must be > dt/2");
    if (initial_temps.size() > 0) require_size(initial_temps, net.size(), "initial_temps");
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (!is_event_key(events[k].key))
        throw ConfigError("event " + std::to_string(k) + ": unknown key '" + events[k].key + "'");
      if (k > 0 && events[k].time_hours < events[k - 1].time_hours)
        throw ConfigError("events must be sorted by time");
      if (!(events[k].time_hours >= 0.0)) throw ConfigError("event times must be >= 0");
    }
    if (controller == ControllerKind::ConstantFlow) {
      require_size(constant_flows, net.size(), "constant_flows");
      detail::check_flows(net, constant_flows);
    }
    for (double t : regime_starts()) {
      const ProblemInstance inst = instance_at(t);  // checks context and mode consistency
      const std::string at = " (regime starting at " + std::to_string(t) + " h)";
      if (controller == ControllerKind::Method1) {
        if (!strict_convexity_check(inst))
          throw ConfigError("zone weights must exceed " +
                                std::to_string(strict_convexity_bound(inst.ctx())) + at,
                            "strict-convexity");
        const auto ok = assumption1_check(inst);
        for (std::size_t i = 0; i < ok.size(); ++i)
          if (!ok[i])
            throw ConfigError("zone " + std::to_string(i) +
                                  ": set point needs at least the minimum flow" + at,
                              "assumption1");
      } else if (controller == ControllerKind::Method2) {
        if (!inst.shared_supply())
          throw ConfigError("method2 needs one shared supply temperature", "shared-supply");
        const auto grid = comfort_box_grid(inst, 5);
        const auto a3 = assumption3_check(inst, grid);
        if (!a3.psd)
          throw ConfigError("Hessian of the total flow is not PSD on the comfort box" + at,
                            "assumption3");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Scenario files (YAML)

namespace scenario_detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : -1; }

template <class T>
T as(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError("field '" + field + "' has the wrong type", line_of(n));
  }
}

inline const YAML::Node require(const YAML::Node& parent, const std::string& key) {
  const YAML::Node n = parent[key];
  if (!n) throw ParseError("missing field '" + key + "'", line_of(parent));
  return n;
}

template <class T>
T get_or(const YAML::Node& parent, const std::string& key, T fallback) {
  const YAML::Node n = parent[key];
  return n ? as<T>(n, key) : fallback;
}

inline Vector vec(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence()) throw ParseError("field '" + field + "' must be a list", line_of(n));
  Vector v(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = as<double>(n[i], field);
  return v;
}

inline std::pair<double, double> range(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence() || n.size() != 2)
    throw ParseError("field '" + field + "' must be [lo, hi]", line_of(n));
  return {as<double>(n[0], field), as<double>(n[1], field)};
}

inline void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ParseError("unknown field '" + key + "' in " + where, line_of(kv.first));
  }
}

}  // namespace scenario_detail

/// Parses and validates a scenario. `origin` names the source in messages.
inline Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>") {
  using namespace scenario_detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(origin + ": " + e.msg, e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ParseError(origin + ": empty scenario file");
  if (!root.IsMap()) throw ParseError(origin + ": top level must be a mapping", line_of(root));
  check_keys(root,
             {"name", "mode", "supply_temp", "specific_heat", "cop", "fan_coeff", "fan_bound",
              "energy_weight", "total_flow_cap", "controller", "plant", "horizon_hours", "dt",
              "stride", "derivative_tau", "substeps", "initial_temps", "constant_flows", "gains",
              "zones", "edges", "schedule", "events"},
             "scenario");

  Scenario s;
  s.name = get_or<std::string>(root, "name", "scenario");

  OperatingContext& c = s.ctx;
  const auto mode = get_or<std::string>(root, "mode", "cooling");
  if (mode == "cooling") c.mode = Mode::Cooling;
  else if (mode == "heating") c.mode = Mode::Heating;
  else throw ParseError("mode must be cooling or heating", line_of(root["mode"]));
  c.supply_temp = get_or(root, "supply_temp", c.supply_temp);
  c.specific_heat = get_or(root, "specific_heat", c.specific_heat);
  c.cop = get_or(root, "cop", c.cop);
  c.fan_coeff = get_or(root, "fan_coeff", c.fan_coeff);
  c.fan_bound = get_or(root, "fan_bound", c.fan_bound);
  c.energy_weight = get_or(root, "energy_weight", c.energy_weight);
  c.total_flow_cap = get_or(root, "total_flow_cap", c.total_flow_cap);

  const auto ctrl = get_or<std::string>(root, "controller", "method1");
  if (ctrl == "method1") s.controller = ControllerKind::Method1;
  else if (ctrl == "method2") s.controller = ControllerKind::Method2;
  else if (ctrl == "constant_flow") s.controller = ControllerKind::ConstantFlow;
  else throw ParseError("controller must be method1, method2 or constant_flow", line_of(root["controller"]));
  const auto plant = get_or<std::string>(root, "plant", "full");
  if (plant == "full") s.plant = PlantModel::Full;
  else if (plant == "approx") s.plant = PlantModel::Approx;
  else throw ParseError("plant must be full or approx", line_of(root["plant"]));

  s.horizon_hours = get_or(root, "horizon_hours", s.horizon_hours);
  s.dt = get_or(root, "dt", s.dt);
  const int stride = get_or(root, "stride", static_cast<int>(s.stride));
  const int substeps = get_or(root, "substeps", static_cast<int>(s.substeps));
  if (stride < 1) throw ParseError("stride must be >= 1", line_of(root["stride"]));
  if (substeps < 1) throw ParseError("substeps must be >= 1", line_of(root["substeps"]));
  s.stride = static_cast<std::size_t>(stride);
  s.substeps = static_cast<std::size_t>(substeps);
  s.derivative_tau = get_or(root, "derivative_tau", s.derivative_tau);
  if (root["initial_temps"]) s.initial_temps = vec(root["initial_temps"], "initial_temps");
  if (root["constant_flows"]) s.constant_flows = vec(root["constant_flows"], "constant_flows");

  if (const auto g = root["gains"]) {
    check_keys(g, {"k_z", "k_m", "k_zeta", "k_nu_plus", "k_nu_minus", "k_mu_plus", "k_mu_minus",
                   "k_lambda"},
               "gains");
    s.gains.k_z = get_or(g, "k_z", s.gains.k_z);
    s.gains.k_m = get_or(g, "k_m", s.gains.k_m);
    s.gains.k_zeta = get_or(g, "k_zeta", s.gains.k_zeta);
    s.gains.k_nu_plus = get_or(g, "k_nu_plus", s.gains.k_nu_plus);
    s.gains.k_nu_minus = get_or(g, "k_nu_minus", s.gains.k_nu_minus);
    s.gains.k_mu_plus = get_or(g, "k_mu_plus", s.gains.k_mu_plus);
    s.gains.k_mu_minus = get_or(g, "k_mu_minus", s.gains.k_mu_minus);
    s.gains.k_lambda = get_or(g, "k_lambda", s.gains.k_lambda);
  }

  const auto zones = require(root, "zones");
  if (!zones.IsSequence() || zones.size() == 0)
    throw ParseError("zones must be a nonempty list", line_of(zones));
  std::vector<ZoneParams> zp;
  for (const auto& z : zones) {
    check_keys(z, {"C", "R", "set_point", "comfort", "flow", "weight", "supply_temp"}, "zone");
    ZoneParams p;
    p.capacitance = as<double>(require(z, "C"), "C");
    p.resistance_out = as<double>(require(z, "R"), "R");
    p.set_point = as<double>(require(z, "set_point"), "set_point");
    std::tie(p.comfort_min, p.comfort_max) = range(require(z, "comfort"), "comfort");
    std::tie(p.flow_min, p.flow_max) = range(require(z, "flow"), "flow");
    p.weight = as<double>(require(z, "weight"), "weight");
    if (z["supply_temp"]) p.supply_temp_override = as<double>(z["supply_temp"], "supply_temp");
    zp.push_back(p);
  }
  std::vector<Edge> edges;
  if (const auto e = root["edges"]) {
    if (!e.IsSequence()) throw ParseError("edges must be a list", line_of(e));
    for (const auto& item : e) {
      if (!item.IsSequence() || item.size() != 3)
        throw ParseError("edge must be [i, j, R]", line_of(item));
      const int i = as<int>(item[0], "edge"), j = as<int>(item[1], "edge");
      if (i < 0 || j < 0) throw ParseError("edge indices must be >= 0", line_of(item));
      edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                       as<double>(item[2], "edge")});
    }
  }
  try {
    s.net = BuildingNetwork(std::move(zp), std::move(edges));
  } catch (const ParseError&) {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what(), e.assumption());
  }

  const auto sched = require(root, "schedule");
  check_keys(sched, {"interpolation", "breakpoints"}, "schedule");
  const auto interp = get_or<std::string>(sched, "interpolation", "hold");
  Interpolation mode_i;
  if (interp == "hold") mode_i = Interpolation::Hold;
  else if (interp == "linear") mode_i = Interpolation::Linear;
  else throw ParseError("interpolation must be hold or linear", line_of(sched["interpolation"]));
  std::vector<Breakpoint> bps;
  const auto bp = require(sched, "breakpoints");
  if (!bp.IsSequence()) throw ParseError("breakpoints must be a list", line_of(bp));
  for (const auto& b : bp) {
    check_keys(b, {"t", "outdoor", "gains"}, "breakpoint");
    bps.push_back({as<double>(require(b, "t"), "t"), as<double>(require(b, "outdoor"), "outdoor"),
                   vec(require(b, "gains"), "gains")});
  }
  s.schedule = DisturbanceSchedule(std::move(bps), mode_i);

  if (const auto ev = root["events"]) {
    if (!ev.IsSequence()) throw ParseError("events must be a list", line_of(ev));
    for (const auto& e : ev) {
      check_keys(e, {"t", "key", "value"}, "event");
      ParameterEvent pe{as<double>(require(e, "t"), "t"), as<std::string>(require(e, "key"), "key"),
                        as<double>(require(e, "value"), "value")};
      if (!is_event_key(pe.key)) throw ParseError("unknown event key '" + pe.key + "'", line_of(e));
      s.events.push_back(pe);
    }
  }

  s.validate();
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

}  // namespace hvac
