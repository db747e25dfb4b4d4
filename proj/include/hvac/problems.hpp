#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hvac/network.hpp"

namespace hvac {

/// Pass thresholds shared by the auditors, in natural units.
struct Tolerances {
  double primal = 1e-6;  // constraint violation (°C, kg/s, kW)
  double kkt = 1e-5;     // stationarity and complementarity
  double zeta = 1e-6;    // multiplier counted as strictly positive
};

/// Steady-state problem data: building, operating point and frozen ambient.
/// Mode signs and supply temperatures are resolved per zone at construction.
class ProblemInstance {
 public:
  ProblemInstance(BuildingNetwork net, OperatingContext ctx, AmbientSample ambient)
      : net_(std::move(net)), ctx_(ctx), ambient_(std::move(ambient)) {
    ctx_.validate(net_);
    ambient_.validate(net_.size());
    const auto n = static_cast<Eigen::Index>(net_.size());
    sign_.resize(n);
    supply_.resize(n);
    for (std::size_t k = 0; k < net_.size(); ++k) {
      const auto& z = net_.zone(k);
      const auto i = static_cast<Eigen::Index>(k);
      sign_[i] = ctx_.sign_for(z);
      supply_[i] = ctx_.supply_for(z);
      // Heating keeps f_i convex only while the supply dominates the gains.
      if (sign_[i] < 0.0 &&
          !((supply_[i] - ambient_.outdoor) / z.resistance_out > ambient_.gains[i]))
        throw ConfigError("zone " + std::to_string(k) +
                              ": heating with (T_s - T_o)/R <= Q breaks convexity of the flow map",
                          "heating-convexity");
    }
  }

  const BuildingNetwork& net() const noexcept { return net_; }
  const OperatingContext& ctx() const noexcept { return ctx_; }
  const AmbientSample& ambient() const noexcept { return ambient_; }
  std::size_t size() const noexcept { return net_.size(); }
  const ZoneParams& zone(std::size_t i) const { return net_.zone(i); }
  double sign(std::size_t i) const { return sign_[static_cast<Eigen::Index>(i)]; }
  double supply(std::size_t i) const { return supply_[static_cast<Eigen::Index>(i)]; }
  double outdoor() const noexcept { return ambient_.outdoor; }
  double gain(std::size_t i) const { return ambient_.gains[static_cast<Eigen::Index>(i)]; }

  /// True when every zone shares the building supply temperature and mode.
  bool shared_supply() const {
    for (const auto& z : net_.zones())
      if (z.supply_temp_override) return false;
    return true;
  }

 private:
  BuildingNetwork net_;
  OperatingContext ctx_;
  AmbientSample ambient_;
  Vector sign_;
  Vector supply_;
};

struct DecisionPoint {
  Vector Z;  // °C
  Vector m;  // kg/s
};

/// Multipliers of the relaxed (zeta used) or eliminated-flow (zeta empty) problem.
struct DualPoint {
  Vector zeta;
  Vector nu_plus, nu_minus;
  Vector mu_plus, mu_minus;
  double lambda_plus = 0.0;

  static DualPoint zeros(std::size_t n, bool with_zeta) {
    const auto k = static_cast<Eigen::Index>(n);
    DualPoint d;
    d.zeta = with_zeta ? Vector::Zero(k) : Vector();
    d.nu_plus = d.nu_minus = d.mu_plus = d.mu_minus = Vector::Zero(k);
    return d;
  }
};

enum class ProblemKind { Full, Approx, Relaxed, General };

inline const char* to_string(ProblemKind k) noexcept {
  switch (k) {
    case ProblemKind::Full: return "full";
    case ProblemKind::Approx: return "approx";
    case ProblemKind::Relaxed: return "relaxed";
    case ProblemKind::General: return "general";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Zone flow maps

namespace detail {

inline double supply_gap(const ProblemInstance& inst, std::size_t i, double z) {
  const double d = z - inst.supply(i);
  if (d == 0.0 || !std::isfinite(d))
    throw DomainError("zone " + std::to_string(i) + ": temperature equals the supply temperature");
  return d;
}

}  // namespace detail

/// Approximate flow keeping zone i at temperature z (neighbours ignored).
inline double f_i(const ProblemInstance& inst, std::size_t i, double z) {
  const auto& p = inst.zone(i);
  const double d = detail::supply_gap(inst, i, z);
  return ((inst.outdoor() - z) / p.resistance_out + inst.gain(i)) / (inst.ctx().specific_heat * d);
}

inline double f_i_prime(const ProblemInstance& inst, std::size_t i, double z) {
  const auto& p = inst.zone(i);
  const double d = detail::supply_gap(inst, i, z);
  return ((inst.supply(i) - inst.outdoor()) / p.resistance_out - inst.gain(i)) /
         (inst.ctx().specific_heat * d * d);
}

inline double f_i_second(const ProblemInstance& inst, std::size_t i, double z) {
  const auto& p = inst.zone(i);
  const double d = detail::supply_gap(inst, i, z);
  return -2.0 * ((inst.supply(i) - inst.outdoor()) / p.resistance_out - inst.gain(i)) /
         (inst.ctx().specific_heat * d * d * d);
}

/// Temperature at which f_i equals the given flow.
inline double f_i_inverse(const ProblemInstance& inst, std::size_t i, double flow) {
  const auto& p = inst.zone(i);
  const double ca = inst.ctx().specific_heat;
  return (inst.outdoor() / p.resistance_out + inst.gain(i) + flow * ca * inst.supply(i)) /
         (1.0 / p.resistance_out + flow * ca);
}

/// Heat balance of zone i at steady state without the supply term [kW]:
/// (T_o - Z_i)/R_i + sum_j (Z_j - Z_i)/R_ij + Q_i.
inline double zone_load(const ProblemInstance& inst, std::size_t i, const Vector& Z) {
  const auto ii = static_cast<Eigen::Index>(i);
  double g = (inst.outdoor() - Z[ii]) / inst.zone(i).resistance_out + inst.gain(i);
  for (const auto& nb : inst.net().neighbors(i))
    g += (Z[static_cast<Eigen::Index>(nb.index)] - Z[ii]) / nb.resistance;
  return g;
}

/// Flows that hold the coupled network at temperatures Z.
inline Vector coupled_flows(const ProblemInstance& inst, const Vector& Z) {
  require_size(Z, inst.size(), "Z");
  Vector m(Z.size());
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    m[ii] = zone_load(inst, i, Z) /
            (inst.ctx().specific_heat * detail::supply_gap(inst, i, Z[ii]));
  }
  return m;
}

/// Total coupled flow h(Z).
inline double h_of_Z(const ProblemInstance& inst, const Vector& Z) {
  return coupled_flows(inst, Z).sum();
}

inline Vector h_gradient(const ProblemInstance& inst, const Vector& Z) {
  require_size(Z, inst.size(), "Z");
  const double ca = inst.ctx().specific_heat;
  Vector g(Z.size());
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double ts = inst.supply(i);
    const double d = detail::supply_gap(inst, i, Z[ii]);
    double p = (ts - inst.outdoor()) / inst.zone(i).resistance_out - inst.gain(i);
    double cross = 0.0;
    for (const auto& nb : inst.net().neighbors(i)) {
      const auto j = static_cast<Eigen::Index>(nb.index);
      p += (ts - Z[j]) / nb.resistance;
      cross += 1.0 / (nb.resistance * ca * detail::supply_gap(inst, nb.index, Z[j]));
    }
    g[ii] = p / (ca * d * d) + cross;
  }
  return g;
}

inline Matrix h_hessian(const ProblemInstance& inst, const Vector& Z) {
  require_size(Z, inst.size(), "Z");
  const double ca = inst.ctx().specific_heat;
  const auto n = Z.size();
  Matrix H = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double ts = inst.supply(i);
    const double di = detail::supply_gap(inst, i, Z[ii]);
    double p = (ts - inst.outdoor()) / inst.zone(i).resistance_out - inst.gain(i);
    for (const auto& nb : inst.net().neighbors(i)) {
      const auto j = static_cast<Eigen::Index>(nb.index);
      const double dj = detail::supply_gap(inst, nb.index, Z[j]);
      p += (ts - Z[j]) / nb.resistance;
      H(ii, j) = -1.0 / (nb.resistance * ca * di * di) - 1.0 / (nb.resistance * ca * dj * dj);
    }
    H(ii, ii) = -2.0 * p / (ca * di * di * di);
  }
  return H;
}

// ---------------------------------------------------------------------------
// Objectives

inline double objective_full(const ProblemInstance& inst, const DecisionPoint& pt) {
  require_size(pt.Z, inst.size(), "Z");
  require_size(pt.m, inst.size(), "m");
  const auto& c = inst.ctx();
  double comfort = 0.0, coil = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double dz = pt.Z[ii] - inst.zone(i).set_point;
    comfort += 0.5 * inst.zone(i).weight * dz * dz;
    coil += c.specific_heat * pt.m[ii] * inst.sign(i) * (pt.Z[ii] - inst.supply(i));
  }
  const double total = pt.m.sum();
  return comfort + c.energy_weight / c.cop * coil + c.energy_weight * c.fan_coeff * total * total * total;
}

inline double objective_approx(const ProblemInstance& inst, const DecisionPoint& pt) {
  require_size(pt.Z, inst.size(), "Z");
  require_size(pt.m, inst.size(), "m");
  const auto& c = inst.ctx();
  double v = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double dz = pt.Z[ii] - inst.zone(i).set_point;
    v += 0.5 * inst.zone(i).weight * dz * dz +
         c.energy_weight / c.cop * c.specific_heat * pt.m[ii] * inst.sign(i) *
             (pt.Z[ii] - inst.supply(i)) +
         0.5 * c.energy_weight * c.fan_coeff * c.fan_bound * pt.m[ii] * pt.m[ii];
  }
  return v;
}

namespace detail {

inline void require_shared_supply(const ProblemInstance& inst) {
  if (!inst.shared_supply())
    throw DomainError("the eliminated-flow problem needs one shared supply temperature");
}

}  // namespace detail

/// Objective with flows eliminated; the coil term uses the telescoped sum of
/// outdoor and internal loads.
inline double objective_general(const ProblemInstance& inst, const Vector& Z) {
  detail::require_shared_supply(inst);
  require_size(Z, inst.size(), "Z");
  const auto& c = inst.ctx();
  double comfort = 0.0, load = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double dz = Z[ii] - inst.zone(i).set_point;
    comfort += 0.5 * inst.zone(i).weight * dz * dz;
    load += (inst.outdoor() - Z[ii]) / inst.zone(i).resistance_out + inst.gain(i);
  }
  const double h = h_of_Z(inst, Z);
  return comfort + c.energy_weight / c.cop * inst.sign(0) * load +
         c.energy_weight * c.fan_coeff * h * h * h;
}

// ---------------------------------------------------------------------------
// Validators

/// Weight bound w c_a^2 / (s phi eta^2) above which the approximate objective
/// is strictly convex in (Z_i, m_i).
inline double strict_convexity_bound(const OperatingContext& c) {
  if (c.energy_weight == 0.0) return 0.0;
  const double den = c.fan_coeff * c.fan_bound * c.cop * c.cop;
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return c.energy_weight * c.specific_heat * c.specific_heat / den;
}

inline bool strict_convexity_check(const BuildingNetwork& net, const OperatingContext& c) {
  const double bound = strict_convexity_bound(c);
  return std::all_of(net.zones().begin(), net.zones().end(),
                     [&](const ZoneParams& z) { return z.weight > bound; });
}

inline bool strict_convexity_check(const ProblemInstance& inst) {
  return strict_convexity_check(inst.net(), inst.ctx());
}

/// Per-zone set-point condition for tightness. Zones with their own supply
/// unit use the threshold-zero form (f_i(T_set) > 0).
inline std::vector<bool> assumption1_check(const ProblemInstance& inst) {
  std::vector<bool> ok(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto& z = inst.zone(i);
    const double f = f_i(inst, i, z.set_point);
    if (z.supply_temp_override) {
      ok[i] = f > 0.0;
      continue;
    }
    const bool side = inst.sign(i) > 0.0 ? z.set_point < inst.outdoor() : z.set_point > inst.outdoor();
    ok[i] = side && f >= z.flow_min;
  }
  return ok;
}

struct Assumption3Result {
  bool psd = false;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  /// Smallest |H_ii| - sum_j |H_ij| over all samples and rows.
  double min_dominance_margin = std::numeric_limits<double>::infinity();
  bool diagonally_dominant = false;
  std::size_t samples = 0;
};

inline Assumption3Result assumption3_check(const ProblemInstance& inst,
                                           std::span<const Vector> samples,
                                           double eig_tol = 1e-9) {
  Assumption3Result r;
  for (const auto& z : samples) {
    const Matrix H = h_hessian(inst, z);
    Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = std::min(r.min_eigenvalue, es.eigenvalues().minCoeff());
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      const double off = H.row(i).cwiseAbs().sum() - std::abs(H(i, i));
      r.min_dominance_margin = std::min(r.min_dominance_margin, std::abs(H(i, i)) - off);
    }
    ++r.samples;
  }
  r.psd = r.samples > 0 && r.min_eigenvalue >= -eig_tol;
  r.diagonally_dominant = r.samples > 0 && r.min_dominance_margin >= 0.0;
  return r;
}

/// Regular grid over the comfort box with `per_axis` points per zone.
inline std::vector<Vector> comfort_box_grid(const ProblemInstance& inst, std::size_t per_axis) {
  if (per_axis < 2) throw ConfigError("comfort grid needs >= 2 points per axis");
  const std::size_t n = inst.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= per_axis;
  std::vector<Vector> out;
  out.reserve(total);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t c = 0; c < total; ++c) {
    Vector z(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = inst.zone(k);
      const double a = static_cast<double>(idx[k]) / static_cast<double>(per_axis - 1);
      z[static_cast<Eigen::Index>(k)] = p.comfort_min + a * (p.comfort_max - p.comfort_min);
    }
    out.push_back(std::move(z));
    for (std::size_t k = 0; k < n && ++idx[k] == per_axis; ++k) idx[k] = 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// KKT audits

struct ActiveSet {
  std::vector<bool> relaxed_flow;  // f_i(Z_i) = m_i (relaxed problem only)
  std::vector<bool> comfort_max, comfort_min;
  std::vector<bool> flow_max, flow_min;
  bool total_flow = false;
};

struct KktReport {
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
  double primal_violation = 0.0;
  bool tight = true;
  std::vector<bool> zone_tight;
  ActiveSet active;

  bool passes(double tol) const {
    return stationarity_residual <= tol && complementarity_residual <= tol &&
           primal_violation <= tol;
  }
  double max_residual() const {
    return std::max({stationarity_residual, complementarity_residual, primal_violation});
  }
};

namespace detail {

inline void check_duals(const DualPoint& d, std::size_t n, bool with_zeta) {
  if (with_zeta) require_size(d.zeta, n, "zeta");
  require_size(d.nu_plus, n, "nu_plus");
  require_size(d.nu_minus, n, "nu_minus");
  require_size(d.mu_plus, n, "mu_plus");
  require_size(d.mu_minus, n, "mu_minus");
  auto nonneg = [](const Vector& v, const char* name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!(v[i] >= 0.0))
        throw DomainError(std::string("negative multiplier ") + name + "[" + std::to_string(i) +
                          "]");
  };
  if (with_zeta) nonneg(d.zeta, "zeta");
  nonneg(d.nu_plus, "nu_plus");
  nonneg(d.nu_minus, "nu_minus");
  nonneg(d.mu_plus, "mu_plus");
  nonneg(d.mu_minus, "mu_minus");
  if (!(d.lambda_plus >= 0.0)) throw DomainError("negative multiplier lambda_plus");
}

struct Accum {
  double comp = 0.0, primal = 0.0;
  void add(double dual, double g) {
    comp = std::max(comp, std::abs(dual * g));
    primal = std::max(primal, g);
  }
};

}  // namespace detail

/// KKT residuals of the relaxed decoupled problem at (pt, duals).
inline KktReport kkt_residual_relaxed(const ProblemInstance& inst, const DecisionPoint& pt,
                                      const DualPoint& duals, const Tolerances& tol = {}) {
  const std::size_t n = inst.size();
  require_size(pt.Z, n, "Z");
  require_size(pt.m, n, "m");
  detail::check_duals(duals, n, true);
  const auto& c = inst.ctx();
  const double coil = c.energy_weight / c.cop * c.specific_heat;
  KktReport rep;
  rep.zone_tight.assign(n, false);
  auto& act = rep.active;
  act.relaxed_flow.assign(n, false);
  act.comfort_max.assign(n, false);
  act.comfort_min.assign(n, false);
  act.flow_max.assign(n, false);
  act.flow_min.assign(n, false);
  detail::Accum acc;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto& p = inst.zone(k);
    const double z = pt.Z[i], m = pt.m[i], sg = inst.sign(k);
    const double dz = duals.zeta[i];
    const double st_z = p.weight * (z - p.set_point) + sg * coil * m + dz * f_i_prime(inst, k, z) +
                        duals.nu_plus[i] - duals.nu_minus[i];
    const double st_m = c.energy_weight * c.fan_coeff * c.fan_bound * m +
                        sg * coil * (z - inst.supply(k)) - dz + duals.mu_plus[i] -
                        duals.mu_minus[i] + duals.lambda_plus;
    rep.stationarity_residual = std::max({rep.stationarity_residual, std::abs(st_z), std::abs(st_m)});
    const double gap = f_i(inst, k, z) - m;
    acc.add(dz, gap);
    acc.add(duals.nu_plus[i], z - p.comfort_max);
    acc.add(duals.nu_minus[i], p.comfort_min - z);
    acc.add(duals.mu_plus[i], m - p.flow_max);
    acc.add(duals.mu_minus[i], p.flow_min - m);
    act.relaxed_flow[k] = std::abs(gap) <= tol.primal;
    act.comfort_max[k] = std::abs(z - p.comfort_max) <= tol.primal;
    act.comfort_min[k] = std::abs(p.comfort_min - z) <= tol.primal;
    act.flow_max[k] = std::abs(m - p.flow_max) <= tol.primal;
    act.flow_min[k] = std::abs(p.flow_min - m) <= tol.primal;
    rep.zone_tight[k] = dz > tol.zeta || std::abs(gap) <= tol.primal;
    rep.tight = rep.tight && rep.zone_tight[k];
  }
  const double total_gap = pt.m.sum() - c.total_flow_cap;
  acc.add(duals.lambda_plus, total_gap);
  act.total_flow = std::abs(total_gap) <= tol.primal;
  rep.complementarity_residual = acc.comp;
  rep.primal_violation = std::max(0.0, acc.primal);
  return rep;
}

/// Negated gradient of the eliminated-flow Lagrangian in Z_i, one entry per zone.
/// This is the drift that drives the distributed controller's Z_i.
inline Vector general_lagrangian_drift(const ProblemInstance& inst, const Vector& Z,
                                       const DualPoint& duals) {
  detail::require_shared_supply(inst);
  const std::size_t n = inst.size();
  const auto& c = inst.ctx();
  const double sg = inst.sign(0);
  const double h = h_of_Z(inst, Z);
  const double price = 3.0 * c.energy_weight * c.fan_coeff * h * h + duals.lambda_plus;
  const Vector grad_h = h_gradient(inst, Z);
  Vector drift(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto& p = inst.zone(k);
    const double g_all = 1.0 / p.resistance_out + inst.net().coupling_conductance(k);
    double v = p.weight * (p.set_point - Z[i]) + sg * c.energy_weight / (c.cop * p.resistance_out) -
               duals.nu_plus[i] + duals.nu_minus[i] +
               sg * duals.mu_plus[i] * (g_all + p.flow_max * c.specific_heat) -
               sg * duals.mu_minus[i] * (g_all + p.flow_min * c.specific_heat);
    for (const auto& nb : inst.net().neighbors(k)) {
      const auto j = static_cast<Eigen::Index>(nb.index);
      v += sg * (duals.mu_minus[j] - duals.mu_plus[j]) / nb.resistance;
    }
    drift[i] = v - price * grad_h[i];
  }
  return drift;
}

/// Constraint values (<= 0 when satisfied) of the linearised zone-flow bounds:
/// sigma (g_i - m_max c_a (Z_i - T_s)) and sigma (m_min c_a (Z_i - T_s) - g_i).
inline std::pair<double, double> flow_bound_constraints(const ProblemInstance& inst, std::size_t i,
                                                        const Vector& Z) {
  const auto ii = static_cast<Eigen::Index>(i);
  const double g = zone_load(inst, i, Z);
  const double cd = inst.ctx().specific_heat * (Z[ii] - inst.supply(i));
  const double sg = inst.sign(i);
  return {sg * (g - inst.zone(i).flow_max * cd), sg * (inst.zone(i).flow_min * cd - g)};
}

/// KKT residuals of the eliminated-flow problem at Z (duals without zeta).
inline KktReport kkt_residual_general(const ProblemInstance& inst, const Vector& Z,
                                      const DualPoint& duals, const Tolerances& tol = {}) {
  const std::size_t n = inst.size();
  require_size(Z, n, "Z");
  detail::check_duals(duals, n, false);
  KktReport rep;
  rep.zone_tight.assign(n, true);
  auto& act = rep.active;
  act.comfort_max.assign(n, false);
  act.comfort_min.assign(n, false);
  act.flow_max.assign(n, false);
  act.flow_min.assign(n, false);
  rep.stationarity_residual = general_lagrangian_drift(inst, Z, duals).cwiseAbs().maxCoeff();
  detail::Accum acc;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto& p = inst.zone(k);
    const auto [up, lo] = flow_bound_constraints(inst, k, Z);
    acc.add(duals.nu_plus[i], Z[i] - p.comfort_max);
    acc.add(duals.nu_minus[i], p.comfort_min - Z[i]);
    acc.add(duals.mu_plus[i], up);
    acc.add(duals.mu_minus[i], lo);
    act.comfort_max[k] = std::abs(Z[i] - p.comfort_max) <= tol.primal;
    act.comfort_min[k] = std::abs(p.comfort_min - Z[i]) <= tol.primal;
    act.flow_max[k] = std::abs(up) <= tol.primal;
    act.flow_min[k] = std::abs(lo) <= tol.primal;
  }
  const double total_gap = h_of_Z(inst, Z) - inst.ctx().total_flow_cap;
  acc.add(duals.lambda_plus, total_gap);
  act.total_flow = std::abs(total_gap) <= tol.primal;
  rep.complementarity_residual = acc.comp;
  rep.primal_violation = std::max(0.0, acc.primal);
  return rep;
}

// ---------------------------------------------------------------------------
// Feasibility

struct Slack {
  std::string constraint;
  int zone = -1;  // -1 for building-wide constraints
  double value = 0.0;  // > 0 means violated; equalities report |residual|
};

struct FeasibilityReport {
  std::vector<Slack> slacks;
  double max_violation = 0.0;
  bool feasible = true;
};

/// Signed slacks of every constraint of the chosen problem. Balance equalities
/// are expressed in flow units (kg/s). For the eliminated-flow problem pt.m
/// is ignored and flows are recovered from the coupled balance.
inline FeasibilityReport feasibility_check(const ProblemInstance& inst, const DecisionPoint& pt,
                                           ProblemKind kind, bool include_comfort = true,
                                           double tol = Tolerances{}.primal) {
  const std::size_t n = inst.size();
  require_size(pt.Z, n, "Z");
  const Vector m = kind == ProblemKind::General ? coupled_flows(inst, pt.Z) : pt.m;
  require_size(m, n, "m");
  FeasibilityReport rep;
  auto push = [&](std::string name, int zone, double v) {
    rep.max_violation = std::max(rep.max_violation, v);
    rep.slacks.push_back({std::move(name), zone, v});
  };
  const Vector coupled = kind == ProblemKind::Full ? coupled_flows(inst, pt.Z) : Vector();
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto& p = inst.zone(k);
    const int zi = static_cast<int>(k);
    switch (kind) {
      case ProblemKind::Full: push("balance", zi, std::abs(coupled[i] - m[i])); break;
      case ProblemKind::Approx: push("balance", zi, std::abs(f_i(inst, k, pt.Z[i]) - m[i])); break;
      case ProblemKind::Relaxed: push("relaxed_flow", zi, f_i(inst, k, pt.Z[i]) - m[i]); break;
      case ProblemKind::General: break;
    }
    if (include_comfort) {
      push("comfort_max", zi, pt.Z[i] - p.comfort_max);
      push("comfort_min", zi, p.comfort_min - pt.Z[i]);
    }
    push("flow_max", zi, m[i] - p.flow_max);
    push("flow_min", zi, p.flow_min - m[i]);
  }
  push("total_flow", -1, m.sum() - inst.ctx().total_flow_cap);
  rep.feasible = rep.max_violation <= tol;
  return rep;
}

}  // namespace hvac
