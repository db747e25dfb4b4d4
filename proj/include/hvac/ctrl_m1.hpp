#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hvac/network.hpp"

// Decentralized primal-dual controller for the decoupled building model.
// A zone sees only its own parameters, its measured temperature and the
// fan's scalar price; the fan sees only the total flow.

namespace hvac {

/// Controller gains, per second.
struct GainSet {
  double k_z = 0.067;
  double k_m = 1.0;
  double k_zeta = 1.0;
  double k_nu_plus = 1.0;
  double k_nu_minus = 1.0;
  double k_mu_plus = 1.0;
  double k_mu_minus = 1.0;
  double k_lambda = 1.0;

  void validate() const {
    const double all[] = {k_z, k_m, k_zeta, k_nu_plus, k_nu_minus, k_mu_plus, k_mu_minus, k_lambda};
    for (double k : all)
      if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("controller gains must be > 0");
  }
};

/// Rate of a multiplier under positive projection at the boundary of [0, inf).
inline double pos_project(double value, double state) {
  if (!(state >= 0.0)) throw DomainError("multiplier state is negative");
  return state > 0.0 ? value : std::max(0.0, value);
}

/// Projected forward-Euler update; the clamp catches overshoot past zero.
inline double projected_euler(double state, double rate, double gain, double dt) {
  return std::max(0.0, state + dt * gain * pos_project(rate, state));
}

/// First-order filtered differentiator with time constant tau.
struct DirtyDerivative {
  double tau = 10.0;
  double internal = 0.0;
  bool primed = false;

  void reset(double sample) {
    internal = sample;
    primed = true;
  }

  double step(double sample, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(tau > 0.0) || dt >= 2.0 * tau)
      throw ConfigError("derivative filter needs 0 < dt < 2 tau");
    if (!primed) reset(sample);
    const double out = (sample - internal) / tau;
    internal += dt * out;
    return out;
  }
};

/// Estimate of the exogenous load T_o/R + Q of one zone from its measured
/// temperature. It is a dirty derivative of C T with the known heat flows fed
/// through the same filter, so the output is the load low-passed with `tau`:
///   d = (C T - chi)/tau,  dchi/dt = d - known.
struct LoadObserver {
  double tau = 10.0;
  double chi = 0.0;
  bool primed = false;

  /// Starts from rest: the first estimate equals `known`.
  void reset(double CT, double known) {
    chi = CT - tau * known;
    primed = true;
  }

  double step(double CT, double known, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(tau > 0.0) || dt >= 2.0 * tau) throw ConfigError("load observer needs 0 < dt < 2 tau");
    if (!primed) reset(CT, known);
    const double out = (CT - chi) / tau;
    chi += dt * (out - known);
    return out;
  }
};

struct M1ZoneState {
  double Z = 0.0;
  double m = 0.0;
  double zeta = 0.0;
  double nu_plus = 0.0, nu_minus = 0.0;
  double mu_plus = 0.0, mu_minus = 0.0;
  LoadObserver observer;
  double filtered_Tdot = 0.0;

  static M1ZoneState initial(const ZoneParams& p, double T0, double tau = 10.0) {
    M1ZoneState s;
    s.Z = T0;
    s.m = p.flow_min;
    s.observer.tau = tau;
    return s;
  }
};

struct M1FanState {
  double lambda_plus = 0.0;
};

namespace detail {

inline double coil_weight(const OperatingContext& ctx) {
  return ctx.energy_weight / ctx.cop * ctx.specific_heat;
}

inline double zone_gap(const OperatingContext& ctx, const ZoneParams& p, double z) {
  const double d = z - ctx.supply_for(p);
  if (d == 0.0 || !std::isfinite(d))
    throw DomainError("controller state Z = " + std::to_string(z) +
                      " reached the supply temperature");
  return d;
}

/// Heat flows into zone i that the zone can compute itself, excluding neighbours:
/// C dT/dt + T/R + c_a m (T - T_s) equals the exogenous load T_o/R + Q.
inline double known_local_flows(const OperatingContext& ctx, const ZoneParams& p, double T,
                                double delivered) {
  return T / p.resistance_out + ctx.specific_heat * delivered * (T - ctx.supply_for(p));
}

}  // namespace detail

/// One Euler step given an estimate of the zone's exogenous load T_o/R + Q.
/// With the exact load this is the textbook primal-dual flow.
inline M1ZoneState zone_advance_m1(const ZoneParams& p, const OperatingContext& ctx,
                                   const GainSet& g, const M1ZoneState& s, double load,
                                   double lambda, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  const double sg = ctx.sign_for(p);
  const double ts = ctx.supply_for(p);
  const double coil = detail::coil_weight(ctx);
  const double ca = ctx.specific_heat;
  const double d = detail::zone_gap(ctx, p, s.Z);
  const double q = ctx.energy_weight * ctx.fan_coeff * ctx.fan_bound;
  const double slope = ts / p.resistance_out - load;  // numerator of f'
  const double flow = (load - s.Z / p.resistance_out) / (ca * d);

  const double z_rate = p.weight * (p.set_point - s.Z) - sg * coil * s.m - s.nu_plus +
                        s.nu_minus - s.zeta * slope / (ca * d * d);
  const double m_rate = -q * s.m - sg * coil * d + s.zeta - s.mu_plus + s.mu_minus - lambda;

  M1ZoneState n = s;
  n.Z = s.Z + dt * g.k_z * z_rate;
  n.m = s.m + dt * g.k_m * m_rate;
  n.zeta = projected_euler(s.zeta, flow - s.m, g.k_zeta, dt);
  n.nu_plus = projected_euler(s.nu_plus, s.Z - p.comfort_max, g.k_nu_plus, dt);
  n.nu_minus = projected_euler(s.nu_minus, p.comfort_min - s.Z, g.k_nu_minus, dt);
  n.mu_plus = projected_euler(s.mu_plus, s.m - p.flow_max, g.k_mu_plus, dt);
  n.mu_minus = projected_euler(s.mu_minus, p.flow_min - s.m, g.k_mu_minus, dt);
  return n;
}

/// Updates the load observer from the measured temperature and returns the estimate.
/// `delivered` is the flow the damper supplied over the last interval.
inline double observe_load_m1(const ZoneParams& p, const OperatingContext& ctx, M1ZoneState& s,
                              double T, double delivered, double dt) {
  const double known = detail::known_local_flows(ctx, p, T, delivered);
  const double load = s.observer.step(p.capacitance * T, known, dt);
  s.filtered_Tdot = (load - known) / p.capacitance;
  return load;
}

/// Measurement-driven step: observe, then one Euler step. No outdoor
/// temperature or heat gain enters here.
inline M1ZoneState zone_step_m1(const ZoneParams& p, const OperatingContext& ctx, const GainSet& g,
                                const M1ZoneState& s, double T, double lambda, double dt,
                                std::optional<double> delivered = {}) {
  M1ZoneState work = s;
  const double load = observe_load_m1(p, ctx, work, T, delivered.value_or(s.m), dt);
  return zone_advance_m1(p, ctx, g, work, load, lambda, dt);
}

/// Reference form that reads the outdoor temperature and heat gain directly.
/// Only for testing the measured form against it.
inline M1ZoneState zone_step_m1_ideal(const ZoneParams& p, const OperatingContext& ctx,
                                      const GainSet& g, const M1ZoneState& s, double outdoor,
                                      double gain, double lambda, double dt) {
  return zone_advance_m1(p, ctx, g, s, outdoor / p.resistance_out + gain, lambda, dt);
}

inline M1FanState fan_step_m1(const GainSet& g, const M1FanState& s, double total_flow,
                              double cap, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  return {projected_euler(s.lambda_plus, total_flow - cap, g.k_lambda, dt)};
}

/// All zones plus the fan. Zones step first on the last broadcast price, then
/// the fan reads the new flows and updates the price for the next round.
class DecentralizedController {
 public:
  DecentralizedController(const BuildingNetwork& net, GainSet gains, double tau = 10.0,
                          std::size_t substeps = 1)
      : net_(&net), gains_(gains), tau_(tau), substeps_(substeps) {
    gains_.validate();
    if (substeps_ == 0) throw ConfigError("controller substeps must be >= 1");
  }

  void initialize(const Vector& T0) {
    require_size(T0, net_->size(), "initial temps");
    zones_.clear();
    for (std::size_t i = 0; i < net_->size(); ++i)
      zones_.push_back(M1ZoneState::initial(net_->zone(i), T0[static_cast<Eigen::Index>(i)], tau_));
    fan_ = {};
  }

  /// One measurement tick of length dt, split into `substeps` Euler steps
  /// with the measurement held.
  void step(const OperatingContext& ctx, const Vector& T, double dt) {
    require_size(T, net_->size(), "temps");
    if (zones_.empty()) initialize(T);
    const Vector delivered = applied_flows();
    std::vector<double> load(zones_.size());
    for (std::size_t i = 0; i < zones_.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      load[i] = observe_load_m1(net_->zone(i), ctx, zones_[i], T[ii], delivered[ii], dt);
    }
    const double h = dt / static_cast<double>(substeps_);
    for (std::size_t k = 0; k < substeps_; ++k) {
      double total = 0.0;
      for (std::size_t i = 0; i < zones_.size(); ++i) {
        zones_[i] = zone_advance_m1(net_->zone(i), ctx, gains_, zones_[i], load[i],
                                    fan_.lambda_plus, h);
        total += zones_[i].m;
      }
      fan_ = fan_step_m1(gains_, fan_, total, ctx.total_flow_cap, h);
    }
  }

  /// Flows sent to the dampers, limited to what they can physically deliver.
  Vector applied_flows() const {
    Vector m(static_cast<Eigen::Index>(zones_.size()));
    for (std::size_t i = 0; i < zones_.size(); ++i)
      m[static_cast<Eigen::Index>(i)] = std::clamp(zones_[i].m, 0.0, net_->zone(i).flow_max);
    return m;
  }

  const std::vector<M1ZoneState>& zones() const noexcept { return zones_; }
  std::vector<M1ZoneState>& zones() noexcept { return zones_; }
  const M1FanState& fan() const noexcept { return fan_; }
  M1FanState& fan() noexcept { return fan_; }
  const GainSet& gains() const noexcept { return gains_; }

 private:
  const BuildingNetwork* net_;
  GainSet gains_;
  double tau_;
  std::size_t substeps_;
  std::vector<M1ZoneState> zones_;
  M1FanState fan_;
};

}  // namespace hvac
