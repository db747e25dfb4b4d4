#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "hvac/disturbance.hpp"
#include "hvac/network.hpp"

namespace hvac {

/// Which thermal model drives the zones: with inter-zone conduction, or without it.
enum class PlantModel { Full, Approx };

inline const char* to_string(PlantModel p) noexcept {
  return p == PlantModel::Full ? "full" : "approx";
}

namespace detail {

inline void check_flows(const BuildingNetwork& net, const Vector& flows) {
  require_size(flows, net.size(), "flows");
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double m = flows[static_cast<Eigen::Index>(i)];
    if (!(m >= 0.0) || m > net.zone(i).flow_max * (1.0 + 1e-12))
      throw DomainError("flow of zone " + std::to_string(i) + " = " + std::to_string(m) +
                        " outside [0, flow_max]");
  }
}

}  // namespace detail

/// Heat exchanged with neighbours, per zone: sum_j (T_j - T_i)/R_ij  [kW].
inline Vector coupling_heat(const BuildingNetwork& net, const Vector& temps) {
  require_size(temps, net.size(), "temps");
  Vector q = Vector::Zero(static_cast<Eigen::Index>(net.size()));
  for (const auto& e : net.edges()) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    const double flow = (temps[j] - temps[i]) / e.resistance;
    q[i] += flow;
    q[j] -= flow;
  }
  return q;
}

/// Time derivative of zone temperatures [°C/s] for the chosen model.
inline Vector rhs(PlantModel model, const BuildingNetwork& net, const OperatingContext& ctx,
                  const Vector& temps, const Vector& flows, const AmbientSample& amb) {
  require_size(temps, net.size(), "temps");
  detail::check_flows(net, flows);
  require_size(amb.gains, net.size(), "ambient gains");
  Vector d(static_cast<Eigen::Index>(net.size()));
  for (std::size_t k = 0; k < net.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto& z = net.zone(k);
    d[i] = (amb.outdoor - temps[i]) / z.resistance_out +
           ctx.specific_heat * flows[i] * (ctx.supply_for(z) - temps[i]) + amb.gains[i];
  }
  if (model == PlantModel::Full) d += coupling_heat(net, temps);
  for (std::size_t k = 0; k < net.size(); ++k)
    d[static_cast<Eigen::Index>(k)] /= net.zone(k).capacitance;
  return d;
}

inline Vector rhs_full(const BuildingNetwork& net, const OperatingContext& ctx,
                       const ThermalState& state, const Vector& flows, const AmbientSample& amb) {
  return rhs(PlantModel::Full, net, ctx, state.temps, flows, amb);
}

inline Vector rhs_approx(const BuildingNetwork& net, const OperatingContext& ctx,
                         const ThermalState& state, const Vector& flows,
                         const AmbientSample& amb) {
  return rhs(PlantModel::Approx, net, ctx, state.temps, flows, amb);
}

/// One classical fourth-order Runge-Kutta step with flows and ambient held.
inline Vector rk4_step(PlantModel model, const BuildingNetwork& net, const OperatingContext& ctx,
                       const Vector& temps, const Vector& flows, const AmbientSample& amb,
                       double h) {
  const Vector k1 = rhs(model, net, ctx, temps, flows, amb);
  const Vector k2 = rhs(model, net, ctx, temps + 0.5 * h * k1, flows, amb);
  const Vector k3 = rhs(model, net, ctx, temps + 0.5 * h * k2, flows, amb);
  const Vector k4 = rhs(model, net, ctx, temps + h * k3, flows, amb);
  return temps + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Throws NumericalError naming the first non-finite zone.
inline void require_finite(const Vector& temps, double t) {
  for (Eigen::Index i = 0; i < temps.size(); ++i)
    if (!std::isfinite(temps[i]))
      throw NumericalError("non-finite temperature at t = " + std::to_string(t) + " s, zone " +
                           std::to_string(i) + ", value " + std::to_string(temps[i]));
}

struct IntegrateOptions {
  PlantModel model = PlantModel::Full;
  std::size_t stride = 1;  // keep every stride-th step (first and last always kept)
};

using FlowSource = std::function<Vector(double /*t seconds*/)>;

/// Fixed-step RK4 integration over [t0, t1]. Disturbances and flows are
/// sampled at the start of each step and held for its duration.
inline std::vector<ThermalState> integrate(const BuildingNetwork& net, const OperatingContext& ctx,
                                           const DisturbanceSchedule& schedule,
                                           const FlowSource& flow_source,
                                           const ThermalState& initial, double t1, double dt,
                                           IntegrateOptions opt = {}) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(t1 > initial.time)) throw ConfigError("time span must be nonempty");
  if (opt.stride == 0) throw ConfigError("stride must be >= 1");
  require_size(initial.temps, net.size(), "initial temps");
  const double span = t1 - initial.time;
  const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
  std::vector<ThermalState> out;
  out.push_back(initial);
  Vector temps = initial.temps;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = initial.time + static_cast<double>(k) * dt;
    const double h = std::min(dt, t1 - t);
    temps = rk4_step(opt.model, net, ctx, temps, flow_source(t), schedule.at_seconds(t), h);
    require_finite(temps, t + h);
    if ((k + 1) % opt.stride == 0 || k + 1 == steps) out.push_back({temps, t + h});
  }
  return out;
}

/// Equilibrium temperatures for fixed flows and ambient (zero right-hand side).
inline Vector steady_state_for_flows(const BuildingNetwork& net, const OperatingContext& ctx,
                                     const AmbientSample& amb, const Vector& flows,
                                     PlantModel model = PlantModel::Full) {
  require_size(flows, net.size(), "flows");
  require_size(amb.gains, net.size(), "ambient gains");
  const auto n = static_cast<Eigen::Index>(net.size());
  Matrix a = Matrix::Zero(n, n);
  Vector b(n);
  for (std::size_t k = 0; k < net.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto& z = net.zone(k);
    const double m = flows[i];
    if (!std::isfinite(m) || m < 0.0)
      throw DomainError("flow of zone " + std::to_string(k) + " must be finite and >= 0");
    a(i, i) = 1.0 / z.resistance_out + ctx.specific_heat * m;
    b[i] = amb.outdoor / z.resistance_out + ctx.specific_heat * m * ctx.supply_for(z) +
           amb.gains[i];
  }
  if (model == PlantModel::Full) {
    for (const auto& e : net.edges()) {
      const auto i = static_cast<Eigen::Index>(e.i);
      const auto j = static_cast<Eigen::Index>(e.j);
      const double g = 1.0 / e.resistance;
      a(i, i) += g;
      a(j, j) += g;
      a(i, j) -= g;
      a(j, i) -= g;
    }
  }
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw NumericalError("steady-state system is singular");
  return lu.solve(b);
}

/// State matrix A of dT/dt = A T + (inputs) for fixed flows.
inline Matrix state_matrix(const BuildingNetwork& net, const OperatingContext& ctx,
                           const Vector& flows, PlantModel model = PlantModel::Full) {
  require_size(flows, net.size(), "flows");
  const auto n = static_cast<Eigen::Index>(net.size());
  Matrix a = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < net.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto& z = net.zone(k);
    a(i, i) = -(1.0 / z.resistance_out + ctx.specific_heat * flows[i]);
    if (model == PlantModel::Full) {
      for (const auto& nb : net.neighbors(k)) {
        a(i, i) -= 1.0 / nb.resistance;
        a(i, static_cast<Eigen::Index>(nb.index)) += 1.0 / nb.resistance;
      }
    }
    a.row(i) /= z.capacitance;
  }
  return a;
}

struct StabilityResult {
  bool hurwitz = false;
  double spectral_abscissa = 0.0;  // max real part of the eigenvalues, 1/s
};

inline StabilityResult hurwitz_check(const BuildingNetwork& net, const OperatingContext& ctx,
                                     const Vector& flows, PlantModel model = PlantModel::Full) {
  for (Eigen::Index i = 0; i < flows.size(); ++i)
    if (!(flows[i] >= 0.0)) throw DomainError("flows must be >= 0");
  const Matrix a = state_matrix(net, ctx, flows, model);
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  double abscissa = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    abscissa = std::max(abscissa, es.eigenvalues()[i].real());
  return {abscissa < 0.0, abscissa};
}

}  // namespace hvac
