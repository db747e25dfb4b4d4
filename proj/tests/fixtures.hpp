#pragma once

// Shared test data: the bundled office parameters, the two-zone building and
// random instance generators.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "hvac/ctrl_m1.hpp"
#include "hvac/ctrl_m2.hpp"
#include "hvac/oracle.hpp"
#include "hvac/thermal.hpp"

namespace fx {

using hvac::AmbientSample;
using hvac::BuildingNetwork;
using hvac::OperatingContext;
using hvac::Vector;
using hvac::ZoneParams;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline ZoneParams office_zone(double weight = 0.1) {
  ZoneParams z;
  z.capacitance = 20.0;
  z.resistance_out = 15.0;
  z.set_point = 24.0;
  z.comfort_min = 22.5;
  z.comfort_max = 25.5;
  z.flow_min = 0.01;
  z.flow_max = 0.45;
  z.weight = weight;
  return z;
}

/// Four office zones on a ring 0-1-3-2-0, R_ij = 23.
inline BuildingNetwork ring4(double weight = 0.1) {
  return BuildingNetwork(std::vector<ZoneParams>(4, office_zone(weight)),
                         {{0, 1, 23.0}, {1, 3, 23.0}, {3, 2, 23.0}, {2, 0, 23.0}});
}

inline OperatingContext office_ctx(double w = 1.0) {
  OperatingContext c;
  c.energy_weight = w;
  return c;
}

/// A lone zone has flow_max 0.45, so the cap must sit below it.
inline OperatingContext single_ctx(double w = 1.0) {
  OperatingContext c = office_ctx(w);
  c.total_flow_cap = 0.4;
  return c;
}

inline AmbientSample office_morning() { return {28.0, vec({0.4, 0.4, 0.3, 0.5})}; }

inline BuildingNetwork single(double R = 15.0) {
  ZoneParams z = office_zone();
  z.resistance_out = R;
  return BuildingNetwork({z}, {});
}

/// The two adjacent zones of the worked example: R = (15, 16), R_12 = 18.
inline BuildingNetwork two_zone(double weight = 0.1) {
  ZoneParams a = office_zone(weight), b = office_zone(weight);
  a.comfort_min = b.comfort_min = 20.0;
  a.comfort_max = b.comfort_max = 28.0;
  a.flow_max = b.flow_max = 0.5;
  b.resistance_out = 16.0;
  return BuildingNetwork({a, b}, {{0, 1, 18.0}});
}

inline OperatingContext two_zone_ctx(double cap = 0.7, double w = 1.0) {
  OperatingContext c;
  c.total_flow_cap = cap;
  c.energy_weight = w;
  return c;
}

inline AmbientSample two_zone_amb() { return {30.0, vec({0.1, 0.2})}; }

struct Draw {
  BuildingNetwork net;
  OperatingContext ctx;
  AmbientSample amb;
};

/// Random building of 1..max_zones zones on a random spanning tree plus extra
/// edges, in cooling or heating. Parameters stay in the physically sensible
/// ranges of a small office; no assumption is enforced here.
inline Draw random_draw(std::mt19937_64& rng, bool heating, std::size_t min_zones = 1,
                        std::size_t max_zones = 6) {
  auto U = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const auto n = std::uniform_int_distribution<std::size_t>(min_zones, max_zones)(rng);
  Draw d;
  d.ctx.mode = heating ? hvac::Mode::Heating : hvac::Mode::Cooling;
  d.ctx.supply_temp = heating ? 40.0 : 12.8;
  d.ctx.energy_weight = U(0.0, 1.0);
  d.amb.outdoor = heating ? U(0.0, 12.0) : U(26.0, 34.0);
  d.amb.gains.resize(static_cast<Eigen::Index>(n));
  std::vector<ZoneParams> zones;
  double fmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ZoneParams z;
    z.capacitance = U(10.0, 40.0);
    z.resistance_out = U(10.0, 20.0);
    z.set_point = heating ? U(20.0, 22.0) : U(22.0, 25.0);
    z.comfort_min = z.set_point - U(1.0, 2.5);
    z.comfort_max = z.set_point + U(1.0, 2.5);
    z.flow_min = U(0.0, 0.02);
    z.flow_max = U(0.3, 0.6);
    z.weight = U(0.07, 0.5);
    fmax += z.flow_max;
    zones.push_back(z);
    d.amb.gains[static_cast<Eigen::Index>(i)] = heating ? U(0.0, 0.3) : U(0.0, 1.0);
  }
  std::vector<hvac::Edge> edges;
  for (std::size_t j = 1; j < n; ++j)
    edges.push_back({std::uniform_int_distribution<std::size_t>(0, j - 1)(rng), j, U(10.0, 40.0)});
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const bool dup = std::any_of(edges.begin(), edges.end(),
                                 [&](const hvac::Edge& e) { return e.i == i && e.j == n - 1; });
    if (!dup && U(0.0, 1.0) < 0.3) edges.push_back({i, n - 1, U(10.0, 40.0)});
  }
  d.net = BuildingNetwork(std::move(zones), std::move(edges));
  d.ctx.total_flow_cap = U(0.3, 0.95) * fmax;
  d.ctx.fan_bound = std::max(1.0, d.ctx.total_flow_cap);
  return d;
}

/// Instance that the relaxed oracle accepts: strict convexity, assumption 1
/// and a strictly feasible point.
inline std::optional<hvac::ProblemInstance> relaxed_instance(const Draw& d) {
  try {
    hvac::ProblemInstance inst(d.net, d.ctx, d.amb);
    if (!hvac::strict_convexity_check(inst)) return std::nullopt;
    for (bool ok : hvac::assumption1_check(inst))
      if (!ok) return std::nullopt;
    if (!hvac::slater_probe_relaxed(inst)) return std::nullopt;
    return inst;
  } catch (const hvac::ConfigError&) {
    return std::nullopt;
  }
}

/// Instance that the eliminated-flow oracle accepts.
inline std::optional<hvac::ProblemInstance> general_instance(const Draw& d) {
  try {
    hvac::ProblemInstance inst(d.net, d.ctx, d.amb);
    const auto grid = hvac::comfort_box_grid(inst, 5);
    if (!hvac::assumption3_check(inst, grid).psd) return std::nullopt;
    if (!hvac::slater_probe_general(inst)) return std::nullopt;
    return inst;
  } catch (const hvac::ConfigError&) {
    return std::nullopt;
  }
}

template <class Accept>
inline std::vector<hvac::ProblemInstance> instances(std::uint64_t seed, std::size_t count,
                                                    Accept accept, std::size_t min_zones = 1,
                                                    std::size_t max_zones = 6) {
  std::mt19937_64 rng(seed);
  std::vector<hvac::ProblemInstance> out;
  for (std::size_t k = 0; out.size() < count && k < 100 * count; ++k) {
    const Draw d = random_draw(rng, k % 2 == 1, min_zones, max_zones);
    if (auto inst = accept(d)) out.push_back(std::move(*inst));
  }
  return out;
}

/// Closed loop under constant ambient; returns the controller after `hours`.
/// The measured temperatures at the end are written to `T`.
template <class Controller>
inline void close_loop(Controller& c, const hvac::ProblemInstance& inst, hvac::PlantModel plant,
                       double hours, Vector& T, double dt = 1.0) {
  T.resize(static_cast<Eigen::Index>(inst.size()));
  for (std::size_t i = 0; i < inst.size(); ++i) T[static_cast<Eigen::Index>(i)] = inst.zone(i).set_point;
  c.initialize(T);
  const auto ticks = static_cast<std::size_t>(std::llround(hours * 3600.0 / dt));
  for (std::size_t k = 0; k < ticks; ++k) {
    c.step(inst.ctx(), T, dt);
    T = hvac::rk4_step(plant, inst.net(), inst.ctx(), T, c.applied_flows(), inst.ambient(), dt);
  }
}

}  // namespace fx
