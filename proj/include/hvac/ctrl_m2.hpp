#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hvac/ctrl_m1.hpp"
#include "hvac/network.hpp"

// Distributed primal-dual controller for the coupled building model. Zones
// exchange (T_j, Z_j, mu_j+, mu_j-) with graph neighbours and receive one
// combined price from the fan.

namespace hvac {

struct M2ZoneState {
  double Z = 0.0;
  double nu_plus = 0.0, nu_minus = 0.0;
  double mu_plus = 0.0, mu_minus = 0.0;
  double m = 0.0;      // low-pass flow command
  double m_rate = 0.0; // analytic dm/dt of the last step, reported to the fan
  LoadObserver observer;
  double filtered_Tdot = 0.0;

  static M2ZoneState initial(const ZoneParams& p, double T0, double tau = 10.0) {
    M2ZoneState s;
    s.Z = T0;
    s.m = p.flow_min;
    s.observer.tau = tau;
    return s;
  }
};

struct NeighborMsg {
  std::size_t from = 0;
  double T = 0.0;
  double Z = 0.0;
  double mu_plus = 0.0, mu_minus = 0.0;
};

struct FanBroadcast {
  double price = 0.0;  // 3 w s h^2 + lambda+
};

struct M2FanState {
  double lambda_plus = 0.0;
  double h_est = 0.0;
};

/// First-order lag: dm/dt = k (target - m), one Euler step.
inline double low_pass_flow(double m, double target, double k_m, double dt) {
  if (!(dt > 0.0) || !(k_m > 0.0)) throw ConfigError("low_pass_flow needs dt > 0 and k_m > 0");
  return m + dt * k_m * (target - m);
}

namespace detail {

inline const NeighborMsg& find_msg(std::span<const NeighborMsg> msgs, std::size_t from,
                                   std::size_t zone) {
  for (const auto& msg : msgs)
    if (msg.from == from) return msg;
  throw DimensionError("zone " + std::to_string(zone) + ": no message from neighbour " +
                       std::to_string(from));
}

}  // namespace detail

/// One Euler step of zone i given an estimate of its exogenous load T_o/R + Q.
inline M2ZoneState zone_advance_m2(const BuildingNetwork& net, std::size_t i,
                                   const OperatingContext& ctx, const GainSet& g,
                                   const M2ZoneState& s, double load,
                                   std::span<const NeighborMsg> msgs, const FanBroadcast& fan,
                                   double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  const auto& p = net.zone(i);
  const double sg = ctx.sign_for(p);
  const double ts = ctx.supply_for(p);
  const double ca = ctx.specific_heat;
  const double d = detail::zone_gap(ctx, p, s.Z);
  const double g_out = 1.0 / p.resistance_out;

  double g_nb = 0.0, slope_nb = 0.0, load_nb = 0.0, price_nb = 0.0, mu_nb = 0.0;
  for (const auto& nb : net.neighbors(i)) {
    const auto& msg = detail::find_msg(msgs, nb.index, i);
    const double gij = 1.0 / nb.resistance;
    g_nb += gij;
    slope_nb += (ts - msg.Z) * gij;
    load_nb += (msg.Z - s.Z) * gij;
    price_nb += gij / (ca * (msg.Z - ts));
    mu_nb += (msg.mu_minus - msg.mu_plus) * gij;
  }
  const double slope = ts * g_out + slope_nb - load;  // numerator of dh/dZ_i
  const double heat = load - s.Z * g_out + load_nb;   // load the zone's flow must remove

  const double z_rate = p.weight * (p.set_point - s.Z) + sg * ctx.energy_weight * g_out / ctx.cop -
                        s.nu_plus + s.nu_minus +
                        sg * s.mu_plus * (g_out + g_nb + p.flow_max * ca) -
                        sg * s.mu_minus * (g_out + g_nb + p.flow_min * ca) + sg * mu_nb -
                        fan.price * (price_nb + slope / (ca * d * d));

  M2ZoneState n = s;
  n.Z = s.Z + dt * g.k_z * z_rate;
  n.nu_plus = projected_euler(s.nu_plus, s.Z - p.comfort_max, g.k_nu_plus, dt);
  n.nu_minus = projected_euler(s.nu_minus, p.comfort_min - s.Z, g.k_nu_minus, dt);
  n.mu_plus = projected_euler(s.mu_plus, sg * (heat - p.flow_max * ca * d), g.k_mu_plus, dt);
  n.mu_minus = projected_euler(s.mu_minus, sg * (p.flow_min * ca * d - heat), g.k_mu_minus, dt);
  n.m_rate = g.k_m * (heat / (ca * d) - s.m);
  n.m = s.m + dt * n.m_rate;
  return n;
}

/// Updates zone i's load observer from its own and its neighbours' measured
/// temperatures and returns the estimate of T_o/R + Q.
inline double observe_load_m2(const BuildingNetwork& net, std::size_t i,
                              const OperatingContext& ctx, M2ZoneState& s, double T,
                              std::span<const NeighborMsg> msgs, double delivered, double dt) {
  const auto& p = net.zone(i);
  double known = detail::known_local_flows(ctx, p, T, delivered);
  for (const auto& nb : net.neighbors(i))
    known += (T - detail::find_msg(msgs, nb.index, i).T) / nb.resistance;
  const double load = s.observer.step(p.capacitance * T, known, dt);
  s.filtered_Tdot = (load - known) / p.capacitance;
  return load;
}

/// Measurement-driven step: observe, then one Euler step. Reads only the
/// zone's own measurement, neighbour messages and the fan price.
inline M2ZoneState zone_step_m2(const BuildingNetwork& net, std::size_t i,
                                const OperatingContext& ctx, const GainSet& g,
                                const M2ZoneState& s, double T, std::span<const NeighborMsg> msgs,
                                const FanBroadcast& fan, double dt,
                                std::optional<double> delivered = {}) {
  M2ZoneState work = s;
  const double load = observe_load_m2(net, i, ctx, work, T, msgs, delivered.value_or(s.m), dt);
  return zone_advance_m2(net, i, ctx, g, work, load, msgs, fan, dt);
}

/// Reconstructs h from the reported flows and rates, updates lambda+ and
/// returns the combined price.
inline std::pair<M2FanState, FanBroadcast> fan_step_m2(const GainSet& g, const M2FanState& s,
                                                       std::span<const double> flows,
                                                       std::span<const double> rates,
                                                       const OperatingContext& ctx, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (flows.size() != rates.size()) throw DimensionError("fan needs one rate per flow");
  double h = 0.0;
  for (std::size_t i = 0; i < flows.size(); ++i) h += rates[i] / g.k_m + flows[i];
  M2FanState n;
  n.h_est = h;
  n.lambda_plus = projected_euler(s.lambda_plus, h - ctx.total_flow_cap, g.k_lambda, dt);
  return {n, {3.0 * ctx.energy_weight * ctx.fan_coeff * h * h + n.lambda_plus}};
}

/// Synchronous rounds: every zone reads messages built from the start of the
/// round, then the fan aggregates the reports.
class DistributedController {
 public:
  DistributedController(const BuildingNetwork& net, GainSet gains, double tau = 10.0,
                        std::size_t substeps = 1)
      : net_(&net), gains_(gains), tau_(tau), substeps_(substeps) {
    gains_.validate();
    if (substeps_ == 0) throw ConfigError("controller substeps must be >= 1");
  }

  void initialize(const Vector& T0) {
    require_size(T0, net_->size(), "initial temps");
    zones_.clear();
    for (std::size_t i = 0; i < net_->size(); ++i)
      zones_.push_back(M2ZoneState::initial(net_->zone(i), T0[static_cast<Eigen::Index>(i)], tau_));
    fan_ = {};
    broadcast_ = {};
  }

  void step(const OperatingContext& ctx, const Vector& T, double dt) {
    require_size(T, net_->size(), "temps");
    if (zones_.empty()) initialize(T);
    const std::size_t n = zones_.size();
    const Vector delivered = applied_flows();
    std::vector<double> load(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      load[i] = observe_load_m2(*net_, i, ctx, zones_[i], T[ii], messages_for(i, T), delivered[ii], dt);
    }
    const double h = dt / static_cast<double>(substeps_);
    std::vector<double> flows(n), rates(n);
    for (std::size_t k = 0; k < substeps_; ++k) {
      std::vector<M2ZoneState> next(n);
      for (std::size_t i = 0; i < n; ++i) {
        next[i] = zone_advance_m2(*net_, i, ctx, gains_, zones_[i], load[i], messages_for(i, T),
                                  broadcast_, h);
        flows[i] = zones_[i].m;
        rates[i] = next[i].m_rate;
      }
      zones_ = std::move(next);
      std::tie(fan_, broadcast_) = fan_step_m2(gains_, fan_, flows, rates, ctx, h);
    }
  }

  std::vector<NeighborMsg> messages_for(std::size_t i, const Vector& T) const {
    std::vector<NeighborMsg> msgs;
    for (const auto& nb : net_->neighbors(i)) {
      const auto& z = zones_[nb.index];
      msgs.push_back({nb.index, T[static_cast<Eigen::Index>(nb.index)], z.Z, z.mu_plus, z.mu_minus});
    }
    return msgs;
  }

  Vector applied_flows() const {
    Vector m(static_cast<Eigen::Index>(zones_.size()));
    for (std::size_t i = 0; i < zones_.size(); ++i)
      m[static_cast<Eigen::Index>(i)] = std::clamp(zones_[i].m, 0.0, net_->zone(i).flow_max);
    return m;
  }

  const std::vector<M2ZoneState>& zones() const noexcept { return zones_; }
  std::vector<M2ZoneState>& zones() noexcept { return zones_; }
  const M2FanState& fan() const noexcept { return fan_; }
  const FanBroadcast& broadcast() const noexcept { return broadcast_; }

 private:
  const BuildingNetwork* net_;
  GainSet gains_;
  double tau_;
  std::size_t substeps_;
  std::vector<M2ZoneState> zones_;
  M2FanState fan_;
  FanBroadcast broadcast_;
};

}  // namespace hvac
