#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hvac/error.hpp"

namespace hvac {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Mode { Cooling, Heating };

/// +1 for cooling (supply air colder than the zone), -1 for heating.
constexpr double mode_sign(Mode mode) noexcept { return mode == Mode::Cooling ? 1.0 : -1.0; }

inline const char* to_string(Mode mode) noexcept {
  return mode == Mode::Cooling ? "cooling" : "heating";
}

/// Thermal and comfort parameters of one zone. Units: kJ/°C, °C/kW, °C, kg/s.
struct ZoneParams {
  double capacitance = 0.0;
  double resistance_out = 0.0;
  double set_point = 0.0;
  double comfort_min = 0.0;
  double comfort_max = 0.0;
  double flow_min = 0.0;
  double flow_max = 0.0;
  double weight = 0.0;
  /// Per-unit supply temperature (separate houses served by their own unit).
  std::optional<double> supply_temp_override;

  void validate(std::size_t index) const {
    auto fail = [&](const std::string& msg) {
      throw ConfigError("zone " + std::to_string(index) + ": " + msg);
    };
    if (!(capacitance > 0.0)) fail("capacitance must be > 0");
    if (!(resistance_out > 0.0)) fail("resistance_out must be > 0");
    if (!(flow_min >= 0.0)) fail("flow_min must be >= 0");
    if (!(flow_max > flow_min)) fail("flow_max must exceed flow_min");
    if (!(comfort_min < set_point && set_point < comfort_max))
      fail("set point must lie strictly inside the comfort range");
    if (!(weight >= 0.0)) fail("weight must be >= 0");
    if (supply_temp_override && !std::isfinite(*supply_temp_override))
      fail("supply_temp_override must be finite");
  }
};

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double resistance = 0.0;  // °C/kW
};

struct Neighbor {
  std::size_t index;
  double resistance;
};

/// Undirected, connected zone graph.
class BuildingNetwork {
 public:
  BuildingNetwork() = default;

  BuildingNetwork(std::vector<ZoneParams> zones, std::vector<Edge> edges)
      : zones_(std::move(zones)), edges_(std::move(edges)) {
    if (zones_.empty()) throw ConfigError("network needs at least one zone");
    for (std::size_t i = 0; i < zones_.size(); ++i) zones_[i].validate(i);
    adjacency_.assign(zones_.size(), {});
    for (auto& e : edges_) {
      if (e.i == e.j) throw ConfigError("self-loop on zone " + std::to_string(e.i));
      if (e.i > e.j) std::swap(e.i, e.j);
      if (e.j >= zones_.size())
        throw ConfigError("edge references unknown zone " + std::to_string(e.j));
      if (!(e.resistance > 0.0))
        throw ConfigError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                          ") needs resistance > 0");
      for (const auto& n : adjacency_[e.i])
        if (n.index == e.j)
          throw ConfigError("duplicate edge (" + std::to_string(e.i) + "," +
                            std::to_string(e.j) + ")");
      adjacency_[e.i].push_back({e.j, e.resistance});
      adjacency_[e.j].push_back({e.i, e.resistance});
    }
    if (!connected()) throw ConfigError("zone graph must be connected");
  }

  std::size_t size() const noexcept { return zones_.size(); }
  const ZoneParams& zone(std::size_t i) const { return zones_.at(i); }
  ZoneParams& zone(std::size_t i) { return zones_.at(i); }
  const std::vector<ZoneParams>& zones() const noexcept { return zones_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(std::size_t i) const { return adjacency_.at(i); }

  /// Sum of 1/R_ij over the neighbours of zone i.
  double coupling_conductance(std::size_t i) const {
    double g = 0.0;
    for (const auto& n : adjacency_.at(i)) g += 1.0 / n.resistance;
    return g;
  }

  double total_flow_max() const noexcept {
    double s = 0.0;
    for (const auto& z : zones_) s += z.flow_max;
    return s;
  }

 private:
  bool connected() const {
    std::vector<bool> seen(zones_.size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      auto k = stack.back();
      stack.pop_back();
      for (const auto& n : adjacency_[k]) {
        if (!seen[n.index]) {
          seen[n.index] = true;
          ++count;
          stack.push_back(n.index);
        }
      }
    }
    return count == zones_.size();
  }

  std::vector<ZoneParams> zones_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// Building-wide constants of the air handling unit and the trade-off weights.
struct OperatingContext {
  Mode mode = Mode::Cooling;
  double supply_temp = 12.8;      // °C
  double specific_heat = 1.012;   // kJ/kg/°C
  double cop = 2.9;
  double fan_coeff = 2.0;         // kW/(kg/s)^3
  double fan_bound = 1.0;         // kg/s
  double energy_weight = 1.0;
  double total_flow_cap = 0.5;    // kg/s

  /// Supply temperature seen by zone i.
  double supply_for(const ZoneParams& z) const noexcept {
    return z.supply_temp_override.value_or(supply_temp);
  }

  /// Mode sign of zone i. Zones with their own supply unit take the sign
  /// implied by the position of that supply relative to the set point.
  double sign_for(const ZoneParams& z) const noexcept {
    if (z.supply_temp_override) return *z.supply_temp_override < z.set_point ? 1.0 : -1.0;
    return mode_sign(mode);
  }

  void validate(const BuildingNetwork& net) const {
    if (!(specific_heat > 0.0)) throw ConfigError("specific_heat must be > 0");
    if (!(cop > 0.0)) throw ConfigError("cop must be > 0");
    if (!(fan_coeff >= 0.0)) throw ConfigError("fan_coeff must be >= 0");
    if (!(energy_weight >= 0.0)) throw ConfigError("energy_weight must be >= 0");
    if (!(total_flow_cap > 0.0)) throw ConfigError("total_flow_cap must be > 0");
    if (!(fan_bound >= total_flow_cap))
      throw ConfigError("fan_bound must be >= total_flow_cap", "fan-bound");
    if (!(total_flow_cap < net.total_flow_max()))
      throw ConfigError("total_flow_cap must be below the sum of zone flow_max", "flow-cap");
    for (std::size_t i = 0; i < net.size(); ++i) {
      const auto& z = net.zone(i);
      const double ts = supply_for(z);
      const double sigma = sign_for(z);
      if (sigma > 0.0 && !(ts < z.comfort_min))
        throw ConfigError("zone " + std::to_string(i) +
                              ": cooling needs supply temperature below comfort_min",
                          "mode-consistency");
      if (sigma < 0.0 && !(ts > z.comfort_max))
        throw ConfigError("zone " + std::to_string(i) +
                              ": heating needs supply temperature above comfort_max",
                          "mode-consistency");
    }
  }
};

struct ThermalState {
  Vector temps;       // °C
  double time = 0.0;  // s
};

/// Exogenous inputs at one instant: outdoor temperature and indoor heat gains.
struct AmbientSample {
  double outdoor = 0.0;  // °C
  Vector gains;          // kW, >= 0

  void validate(std::size_t zones) const {
    if (static_cast<std::size_t>(gains.size()) != zones)
      throw DimensionError("ambient gains: expected " + std::to_string(zones) + " entries, got " +
                           std::to_string(gains.size()));
    if (!std::isfinite(outdoor)) throw DomainError("outdoor temperature must be finite");
    for (Eigen::Index i = 0; i < gains.size(); ++i)
      if (!(gains[i] >= 0.0))
        throw DomainError("heat gain of zone " + std::to_string(i) + " must be >= 0");
  }
};

inline void require_size(const Vector& v, std::size_t n, const char* name) {
  if (static_cast<std::size_t>(v.size()) != n)
    throw DimensionError(std::string(name) + ": expected " + std::to_string(n) +
                         " entries, got " + std::to_string(v.size()));
}

}  // namespace hvac
