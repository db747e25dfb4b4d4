#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hvac/problems.hpp"

// Reference solvers used to certify controller equilibria. Nothing here is
// shared with the controllers: gradients and multiplier recovery are computed
// from the problem data directly.

namespace hvac {

struct OracleOptions {
  double tolerance = 1e-7;           // KKT residual required for `converged`
  std::size_t max_iterations = 1000000;
};

struct OracleResult {
  DecisionPoint pt;
  DualPoint duals;
  KktReport report;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace oracle_detail {

struct ZoneInterval {
  double lo, hi;
};

/// Comfort box intersected with {f_i(Z) <= m_max}; empty -> nullopt.
inline std::optional<ZoneInterval> relaxed_zone_interval(const ProblemInstance& inst,
                                                         std::size_t i) {
  const auto& p = inst.zone(i);
  double lo = p.comfort_min, hi = p.comfort_max;
  const double slope = f_i_prime(inst, i, p.set_point);
  if (slope != 0.0) {
    const double cap = f_i_inverse(inst, i, p.flow_max);
    if (slope < 0.0)
      lo = std::max(lo, cap);
    else
      hi = std::min(hi, cap);
  } else if (f_i(inst, i, p.set_point) > p.flow_max) {
    return std::nullopt;
  }
  if (lo > hi) return std::nullopt;
  return ZoneInterval{lo, hi};
}

/// Cheapest admissible flow at temperature z: max(f_i(z), m_min).
inline double floor_flow(const ProblemInstance& inst, std::size_t i, double z) {
  return std::max(f_i(inst, i, z), inst.zone(i).flow_min);
}

/// Derivative of the zone's reduced objective for a given fan price `lambda`.
inline double reduced_slope(const ProblemInstance& inst, std::size_t i, double z, double lambda) {
  const auto& p = inst.zone(i);
  const auto& c = inst.ctx();
  const double coil = c.energy_weight / c.cop * c.specific_heat * inst.sign(i);
  const double q = c.energy_weight * c.fan_coeff * c.fan_bound;
  const double f = f_i(inst, i, z);
  const double m = std::max(f, p.flow_min);
  const double dm = f > p.flow_min ? f_i_prime(inst, i, z) : 0.0;
  const double price = coil * (z - inst.supply(i)) + lambda + q * m;
  return p.weight * (z - p.set_point) + coil * m + price * dm;
}

struct ZoneOptimum {
  double z, m;
  std::size_t iterations;
};

inline ZoneOptimum solve_zone(const ProblemInstance& inst, std::size_t i, const ZoneInterval& box,
                              double lambda) {
  std::size_t it = 0;
  double z;
  if (reduced_slope(inst, i, box.lo, lambda) >= 0.0) {
    z = box.lo;
  } else if (reduced_slope(inst, i, box.hi, lambda) <= 0.0) {
    z = box.hi;
  } else {
    double a = box.lo, b = box.hi;
    while (it < 200) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      (reduced_slope(inst, i, mid, lambda) > 0.0 ? b : a) = mid;
      ++it;
    }
    z = 0.5 * (a + b);
  }
  double m = floor_flow(inst, i, z);
  // The upper end of the interval may sit on f_i = m_max; keep rounding inside.
  m = std::min(m, inst.zone(i).flow_max);
  return {z, m, it};
}

/// Nonnegative multipliers of one zone solving the two stationarity rows.
/// Columns: zeta, nu+, nu-, mu+, mu-. Only columns flagged active may be nonzero.
inline Eigen::Matrix<double, 5, 1> zone_multipliers(const Eigen::Matrix<double, 2, 5>& M,
                                                    const Eigen::Vector2d& rhs,
                                                    const std::array<bool, 5>& active) {
  Eigen::Matrix<double, 5, 1> best = Eigen::Matrix<double, 5, 1>::Zero();
  double best_res = rhs.norm();
  for (int a = 0; a < 5; ++a) {
    for (int b = a; b < 5; ++b) {
      if (!active[a] || !active[b]) continue;
      const int cols = a == b ? 1 : 2;
      Eigen::MatrixXd A(2, cols);
      A.col(0) = M.col(a);
      if (cols == 2) A.col(1) = M.col(b);
      const Eigen::VectorXd u = A.colPivHouseholderQr().solve(rhs);
      if (u.minCoeff() < -1e-13) continue;
      const double res = (A * u - rhs).norm();
      if (res < best_res - 1e-14) {
        best_res = res;
        best.setZero();
        best[a] = std::max(0.0, u[0]);
        if (cols == 2) best[b] = std::max(0.0, u[1]);
      }
    }
  }
  return best;
}

}  // namespace oracle_detail

/// Strictly feasible point of the relaxed problem, searched along the segment
/// from the set points towards the comfort bounds that need the least flow.
inline std::optional<DecisionPoint> slater_probe_relaxed(const ProblemInstance& inst) {
  const std::size_t n = inst.size();
  Vector target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = inst.zone(i);
    target[static_cast<Eigen::Index>(i)] =
        f_i_prime(inst, i, p.set_point) < 0.0 ? p.comfort_max : p.comfort_min;
  }
  auto point_at = [&](double t) {
    Vector z(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      z[ii] = inst.zone(i).set_point + t * (target[ii] - inst.zone(i).set_point);
    }
    return z;
  };
  auto strictly_ok = [&](double t) {
    const Vector z = point_at(t);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = oracle_detail::floor_flow(inst, i, z[static_cast<Eigen::Index>(i)]);
      if (!(lo < inst.zone(i).flow_max)) return false;
      total += lo;
    }
    return total < inst.ctx().total_flow_cap;
  };
  const double t_max = 1.0 - 1e-6;
  if (!strictly_ok(t_max)) return std::nullopt;
  double t = 0.0;
  if (!strictly_ok(0.0)) {
    double a = 0.0, b = t_max;
    for (int k = 0; k < 100; ++k) {
      const double mid = 0.5 * (a + b);
      (strictly_ok(mid) ? b : a) = mid;
    }
    t = 0.5 * (b + t_max);
  }
  DecisionPoint pt;
  pt.Z = point_at(t);
  pt.m.resize(static_cast<Eigen::Index>(n));
  Vector lo(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    lo[static_cast<Eigen::Index>(i)] =
        oracle_detail::floor_flow(inst, i, pt.Z[static_cast<Eigen::Index>(i)]);
  const double spare = (inst.ctx().total_flow_cap - lo.sum()) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    pt.m[ii] = lo[ii] + 0.5 * std::min(inst.zone(i).flow_max - lo[ii], spare);
  }
  return pt;
}

/// Optimum of the relaxed decoupled problem by dual decomposition on the
/// total-flow multiplier; each zone reduces to a convex scalar problem.
inline OracleResult solve_relaxed(const ProblemInstance& inst, OracleOptions opt = {}) {
  using namespace oracle_detail;
  if (!strict_convexity_check(inst))
    throw ConfigError("zone weights must exceed w c_a^2/(s phi eta^2)", "strict-convexity");
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (!(f_i_second(inst, i, inst.zone(i).set_point) > 0.0))
      throw ConfigError("zone " + std::to_string(i) + ": flow map is not convex", "flow-convexity");
  if (!slater_probe_relaxed(inst))
    throw ConfigError("relaxed problem has no strictly feasible point", "slater");

  const std::size_t n = inst.size();
  std::vector<ZoneInterval> boxes;
  for (std::size_t i = 0; i < n; ++i) boxes.push_back(*relaxed_zone_interval(inst, i));

  OracleResult res;
  auto solve_all = [&](double lambda, Vector& z, Vector& m) {
    z.resize(static_cast<Eigen::Index>(n));
    m.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto o = solve_zone(inst, i, boxes[i], lambda);
      z[static_cast<Eigen::Index>(i)] = o.z;
      m[static_cast<Eigen::Index>(i)] = o.m;
      res.iterations += o.iterations + 1;
    }
    return m.sum();
  };

  const double cap = inst.ctx().total_flow_cap;
  Vector z, m;
  double lambda = 0.0;
  if (solve_all(0.0, z, m) > cap) {
    double lo = 0.0, hi = 1.0;
    Vector zh, mh;
    while (solve_all(hi, zh, mh) > cap) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) throw ConfigError("total flow cap cannot be met", "slater");
    }
    for (int k = 0; k < 200 && res.iterations < opt.max_iterations; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      Vector zm, mm;
      if (solve_all(mid, zm, mm) > cap) {
        lo = mid;
      } else {
        hi = mid;
        zh = zm;
        mh = mm;
      }
    }
    lambda = hi;
    z = zh;
    m = mh;
  }

  res.pt = {z, m};
  res.duals = DualPoint::zeros(n, true);
  res.duals.lambda_plus = lambda;
  const auto& c = inst.ctx();
  const double coil = c.energy_weight / c.cop * c.specific_heat;
  const double q = c.energy_weight * c.fan_coeff * c.fan_bound;
  constexpr double kActive = 1e-9;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto& p = inst.zone(k);
    const double sg = inst.sign(k);
    Eigen::Matrix<double, 2, 5> M;
    M << f_i_prime(inst, k, z[i]), 1.0, -1.0, 0.0, 0.0,  //
        -1.0, 0.0, 0.0, 1.0, -1.0;
    const Eigen::Vector2d rhs(-(p.weight * (z[i] - p.set_point) + sg * coil * m[i]),
                              -(q * m[i] + sg * coil * (z[i] - inst.supply(k)) + lambda));
    const std::array<bool, 5> active{
        std::abs(f_i(inst, k, z[i]) - m[i]) <= kActive, std::abs(z[i] - p.comfort_max) <= kActive,
        std::abs(z[i] - p.comfort_min) <= kActive, std::abs(m[i] - p.flow_max) <= kActive,
        std::abs(m[i] - p.flow_min) <= kActive};
    const auto u = zone_multipliers(M, rhs, active);
    res.duals.zeta[i] = u[0];
    res.duals.nu_plus[i] = u[1];
    res.duals.nu_minus[i] = u[2];
    res.duals.mu_plus[i] = u[3];
    res.duals.mu_minus[i] = u[4];
  }
  res.report = kkt_residual_relaxed(inst, res.pt, res.duals);
  res.converged = res.report.max_residual() <= opt.tolerance;
  return res;
}

// ---------------------------------------------------------------------------
// Eliminated-flow problem

namespace oracle_detail {

/// Inequality c(Z) <= 0 of the eliminated-flow problem with first and second derivatives.
struct GeneralConstraints {
  const ProblemInstance& inst;

  std::size_t count() const { return 4 * inst.size() + 1; }

  /// Values of all constraints, ordered: comfort max, comfort min, flow max, flow min, total.
  Vector values(const Vector& Z) const {
    const std::size_t n = inst.size();
    Vector c(static_cast<Eigen::Index>(count()));
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const auto& p = inst.zone(k);
      const auto [up, lo] = flow_bound_constraints(inst, k, Z);
      c[i] = Z[i] - p.comfort_max;
      c[i + static_cast<Eigen::Index>(n)] = p.comfort_min - Z[i];
      c[i + static_cast<Eigen::Index>(2 * n)] = up;
      c[i + static_cast<Eigen::Index>(3 * n)] = lo;
    }
    c[static_cast<Eigen::Index>(4 * n)] = h_of_Z(inst, Z) - inst.ctx().total_flow_cap;
    return c;
  }

  /// Gradients of the linear constraints (rows), independent of Z.
  Matrix linear_jacobian() const {
    const std::size_t n = inst.size();
    const auto nn = static_cast<Eigen::Index>(n);
    Matrix J = Matrix::Zero(4 * nn, nn);
    const double ca = inst.ctx().specific_heat;
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const auto& p = inst.zone(k);
      const double sg = inst.sign(k);
      const double diag = 1.0 / p.resistance_out + inst.net().coupling_conductance(k);
      J(i, i) = 1.0;
      J(nn + i, i) = -1.0;
      J(2 * nn + i, i) = -sg * (diag + p.flow_max * ca);
      J(3 * nn + i, i) = sg * (diag + p.flow_min * ca);
      for (const auto& nb : inst.net().neighbors(k)) {
        const auto j = static_cast<Eigen::Index>(nb.index);
        J(2 * nn + i, j) = sg / nb.resistance;
        J(3 * nn + i, j) = -sg / nb.resistance;
      }
    }
    return J;
  }
};

struct GeneralObjective {
  const ProblemInstance& inst;

  double value(const Vector& Z) const {
    const auto& c = inst.ctx();
    double v = 0.0, load = 0.0;
    for (std::size_t k = 0; k < inst.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const auto& p = inst.zone(k);
      v += 0.5 * p.weight * (Z[i] - p.set_point) * (Z[i] - p.set_point);
      load += (inst.outdoor() - Z[i]) / p.resistance_out + inst.gain(k);
    }
    const double h = h_of_Z(inst, Z);
    return v + c.energy_weight / c.cop * inst.sign(0) * load + c.energy_weight * c.fan_coeff * h * h * h;
  }

  void derivatives(const Vector& Z, Vector& g, Matrix& H) const {
    const auto& c = inst.ctx();
    const auto n = static_cast<Eigen::Index>(inst.size());
    const double h = h_of_Z(inst, Z);
    const Vector gh = h_gradient(inst, Z);
    const Matrix Hh = h_hessian(inst, Z);
    const double ws = c.energy_weight * c.fan_coeff;
    g.resize(n);
    H = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < inst.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const auto& p = inst.zone(k);
      g[i] = p.weight * (Z[i] - p.set_point) -
             inst.sign(0) * c.energy_weight / (c.cop * p.resistance_out);
      H(i, i) = p.weight;
    }
    g += 3.0 * ws * h * h * gh;
    H += ws * (6.0 * h * gh * gh.transpose() + 3.0 * h * h * Hh);
  }
};

}  // namespace oracle_detail

/// Strictly feasible temperatures of the eliminated-flow problem.
inline std::optional<Vector> slater_probe_general(const ProblemInstance& inst) {
  const std::size_t n = inst.size();
  const auto nn = static_cast<Eigen::Index>(n);
  Vector target(nn), start(nn);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = inst.zone(i);
    start[static_cast<Eigen::Index>(i)] = p.set_point;
    target[static_cast<Eigen::Index>(i)] =
        f_i_prime(inst, i, p.set_point) < 0.0 ? p.comfort_max : p.comfort_min;
  }
  oracle_detail::GeneralConstraints cons{inst};
  auto point_at = [&](double t) -> Vector { return start + t * (target - start); };
  auto upper_ok = [&](double t) {
    const Vector c = cons.values(point_at(t));
    for (std::size_t k = 0; k < n; ++k)
      if (!(c[static_cast<Eigen::Index>(2 * n + k)] < 0.0)) return false;
    return c[static_cast<Eigen::Index>(4 * n)] < 0.0;
  };
  auto all_ok = [&](double t) { return cons.values(point_at(t)).maxCoeff() < 0.0; };
  const double t_max = 1.0 - 1e-6;
  if (all_ok(0.0)) return point_at(0.0);
  double t_lo = 0.0;
  if (!upper_ok(0.0)) {
    if (!upper_ok(t_max)) return std::nullopt;
    double a = 0.0, b = t_max;
    for (int k = 0; k < 100; ++k) {
      const double mid = 0.5 * (a + b);
      (upper_ok(mid) ? b : a) = mid;
    }
    t_lo = b;
  }
  for (int d = 1; d <= 30; ++d) {
    for (int k = 1; k < (1 << std::min(d, 6)); k += 2) {
      const double t = t_lo + (t_max - t_lo) * static_cast<double>(k) / static_cast<double>(1 << std::min(d, 6));
      if (all_ok(t)) return point_at(t);
    }
    if (d >= 6) break;
  }
  return std::nullopt;
}

/// Optimum of the eliminated-flow problem by a log-barrier Newton method.
inline OracleResult solve_general(const ProblemInstance& inst, OracleOptions opt = {}) {
  using namespace oracle_detail;
  detail::require_shared_supply(inst);
  const auto start = slater_probe_general(inst);
  if (!start) throw ConfigError("eliminated-flow problem has no strictly feasible point", "slater");

  const std::size_t n = inst.size();
  const auto nn = static_cast<Eigen::Index>(n);
  GeneralConstraints cons{inst};
  GeneralObjective obj{inst};
  const Matrix J = cons.linear_jacobian();
  const auto nc = static_cast<double>(cons.count());

  OracleResult res;
  Vector Z = *start;
  double t = 1.0;
  bool stalled = false;
  while (true) {
    for (int newton = 0; newton < 200; ++newton) {
      Vector g;
      Matrix H;
      obj.derivatives(Z, g, H);
      g *= t;
      H *= t;
      const Vector c = cons.values(Z);
      for (Eigen::Index k = 0; k < 4 * nn; ++k) {
        const double s = -c[k];
        g += J.row(k).transpose() / s;
        H += J.row(k).transpose() * J.row(k) / (s * s);
      }
      {
        const double s = -c[4 * nn];
        const Vector gh = h_gradient(inst, Z);
        g += gh / s;
        H += h_hessian(inst, Z) / s + gh * gh.transpose() / (s * s);
      }
      Eigen::LDLT<Matrix> ldlt(H);
      Vector step = -ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !(step.dot(g) < 0.0)) {
        // Hessian lost definiteness (assumption violated); fall back to a scaled gradient.
        step = -g / std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      }
      const double decrement = -step.dot(g);
      ++res.iterations;
      if (decrement < 1e-20 || res.iterations >= opt.max_iterations) break;
      // Damped Newton: step length from the decrement alone, so no barrier
      // values are compared (they lose all precision once t is large).
      double alpha = decrement > 0.0625 ? 1.0 / (1.0 + std::sqrt(decrement)) : 1.0;
      Vector trial = Z + alpha * step;
      while (!(cons.values(trial).maxCoeff() < 0.0)) {
        alpha *= 0.5;
        if (alpha < 1e-30) break;
        trial = Z + alpha * step;
      }
      if (alpha < 1e-30) {
        stalled = true;
        break;
      }
      if ((trial - Z).cwiseAbs().maxCoeff() == 0.0) break;
      Z = trial;
    }
    if (nc / t < 1e-11 || res.iterations >= opt.max_iterations) break;
    t *= 10.0;
  }

  const Vector c = cons.values(Z);
  // Barrier duals 1/(t s) identify the active set; the values themselves are
  // refit from stationarity, which is far better conditioned than the slacks.
  Vector mult = (1.0 / (t * (-c).array())).matrix();
  Matrix G(nn, cons.count());
  G.leftCols(4 * nn) = J.transpose();
  G.col(4 * nn) = h_gradient(inst, Z);
  Vector gF;
  Matrix HF;
  obj.derivatives(Z, gF, HF);
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < mult.size(); ++k)
    if (mult[k] > 1e-6) active.push_back(k);
  while (!active.empty()) {
    Matrix A(nn, static_cast<Eigen::Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) A.col(static_cast<Eigen::Index>(a)) = G.col(active[a]);
    const Vector u = A.colPivHouseholderQr().solve(-gF);
    Eigen::Index worst;
    if (u.minCoeff(&worst) >= 0.0) {
      mult.setZero();
      for (std::size_t a = 0; a < active.size(); ++a) mult[active[a]] = u[static_cast<Eigen::Index>(a)];
      break;
    }
    active.erase(active.begin() + worst);
  }
  if (active.empty()) mult.setZero();
  res.duals = DualPoint::zeros(n, false);
  res.duals.nu_plus = mult.segment(0, nn);
  res.duals.nu_minus = mult.segment(nn, nn);
  res.duals.mu_plus = mult.segment(2 * nn, nn);
  res.duals.mu_minus = mult.segment(3 * nn, nn);
  res.duals.lambda_plus = mult[4 * nn];
  res.pt = {Z, coupled_flows(inst, Z)};
  res.report = kkt_residual_general(inst, Z, res.duals);
  res.converged = !stalled && res.report.max_residual() <= opt.tolerance;
  return res;
}

// ---------------------------------------------------------------------------
// Two-zone brute force

struct GridBox {
  double z1_lo, z1_hi, z2_lo, z2_hi;
};

/// Flows implied by (Z1, Z2) under the approximate (Approx) or coupled
/// (General/Full) balance.
inline Vector grid_flows(const ProblemInstance& inst, const Vector& Z, ProblemKind kind) {
  if (kind == ProblemKind::General || kind == ProblemKind::Full) return coupled_flows(inst, Z);
  Vector m(2);
  m << f_i(inst, 0, Z[0]), f_i(inst, 1, Z[1]);
  return m;
}

inline bool grid_feasible(const ProblemInstance& inst, const Vector& m) {
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& p = inst.zone(i);
    const double mi = m[static_cast<Eigen::Index>(i)];
    if (mi < p.flow_min || mi > p.flow_max) return false;
  }
  return m.sum() <= inst.ctx().total_flow_cap;
}

/// Feasible-set membership on a resolution x resolution grid over `box`.
/// Entry [a * resolution + b] corresponds to (Z1_a, Z2_b).
inline std::vector<bool> feasible_grid_2zone(const ProblemInstance& inst, const GridBox& box,
                                             std::size_t resolution, ProblemKind kind) {
  if (inst.size() != 2) throw DimensionError("feasible_grid_2zone needs exactly 2 zones");
  if (resolution < 3) throw ConfigError("grid resolution must be >= 3 per axis");
  std::vector<bool> mask(resolution * resolution);
  const double r = static_cast<double>(resolution - 1);
  Vector Z(2);
  for (std::size_t a = 0; a < resolution; ++a) {
    Z[0] = box.z1_lo + (box.z1_hi - box.z1_lo) * static_cast<double>(a) / r;
    for (std::size_t b = 0; b < resolution; ++b) {
      Z[1] = box.z2_lo + (box.z2_hi - box.z2_lo) * static_cast<double>(b) / r;
      mask[a * resolution + b] = grid_feasible(inst, grid_flows(inst, Z, kind));
    }
  }
  return mask;
}

/// Exhaustive scan of (Z1, Z2) over the comfort box. Flows follow from the
/// balance equation of `kind`; infeasible points are discarded. Each refinement
/// rescans a +-2 cell neighbourhood of the incumbent at the same resolution.
inline DecisionPoint grid_search_2zone(const ProblemInstance& inst, std::size_t resolution,
                                       ProblemKind kind = ProblemKind::General,
                                       std::size_t refinements = 0) {
  if (inst.size() != 2) throw DimensionError("grid_search_2zone needs exactly 2 zones");
  if (resolution < 3) throw ConfigError("grid resolution must be >= 3 per axis");
  GridBox box{inst.zone(0).comfort_min, inst.zone(0).comfort_max, inst.zone(1).comfort_min,
              inst.zone(1).comfort_max};
  const GridBox comfort = box;
  DecisionPoint best;
  double best_val = std::numeric_limits<double>::infinity();
  const double r = static_cast<double>(resolution - 1);
  for (std::size_t pass = 0; pass <= refinements; ++pass) {
    Vector Z(2);
    for (std::size_t a = 0; a < resolution; ++a) {
      Z[0] = box.z1_lo + (box.z1_hi - box.z1_lo) * static_cast<double>(a) / r;
      for (std::size_t b = 0; b < resolution; ++b) {
        Z[1] = box.z2_lo + (box.z2_hi - box.z2_lo) * static_cast<double>(b) / r;
        const Vector m = grid_flows(inst, Z, kind);
        if (!grid_feasible(inst, m)) continue;
        const double v = kind == ProblemKind::Approx ? objective_approx(inst, {Z, m})
                                                     : objective_full(inst, {Z, m});
        if (v < best_val) {
          best_val = v;
          best = {Z, m};
        }
      }
    }
    if (!std::isfinite(best_val)) throw DomainError("no feasible grid point");
    const double h1 = 2.0 * (box.z1_hi - box.z1_lo) / r;
    const double h2 = 2.0 * (box.z2_hi - box.z2_lo) / r;
    box = {std::max(comfort.z1_lo, best.Z[0] - h1), std::min(comfort.z1_hi, best.Z[0] + h1),
           std::max(comfort.z2_lo, best.Z[1] - h2), std::min(comfort.z2_hi, best.Z[1] + h2)};
  }
  return best;
}

}  // namespace hvac
