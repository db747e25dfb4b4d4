#include <gtest/gtest.h>

#include <cstring>
#include <numbers>
#include <random>

#include "fixtures.hpp"

using namespace hvac;
using fx::vec;

namespace {

// The bundled second office: wider comfort band, small damper in zone 4.
BuildingNetwork office2() {
  auto z = fx::office_zone();
  z.comfort_min = 22.2;
  z.comfort_max = 25.8;
  auto small = z;
  small.flow_max = 0.15;
  return BuildingNetwork({z, z, z, small}, {{0, 1, 23.0}, {1, 3, 23.0}, {3, 2, 23.0}, {2, 0, 23.0}});
}

ProblemInstance office2_at(double w, AmbientSample amb, double cap = 0.5) {
  auto c = fx::office_ctx(w);
  c.total_flow_cap = cap;
  return {office2(), c, std::move(amb)};
}

AmbientSample mid_morning() { return {31.0, vec({0.7, 0.7, 0.6, 0.8})}; }

struct Outcome {
  double gap_Z = 0.0, gap_m = 0.0, T_minus_Z = 0.0, kkt = 0.0, h_err = 0.0;
  Vector Z;
};

Outcome run_to_oracle(const ProblemInstance& inst, double hours) {
  DistributedController c(inst.net(), GainSet{}, 10.0, 10);
  Vector T;
  fx::close_loop(c, inst, PlantModel::Full, hours, T);
  const auto orc = solve_general(inst);
  Outcome o;
  o.Z.resize(T.size());
  Vector m(T.size());
  DualPoint d = DualPoint::zeros(inst.size(), false);
  for (std::size_t k = 0; k < inst.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto& z = c.zones()[k];
    o.Z[i] = z.Z;
    m[i] = z.m;
    d.nu_plus[i] = z.nu_plus;
    d.nu_minus[i] = z.nu_minus;
    d.mu_plus[i] = z.mu_plus;
    d.mu_minus[i] = z.mu_minus;
  }
  d.lambda_plus = c.fan().lambda_plus;
  o.gap_Z = (o.Z - orc.pt.Z).cwiseAbs().maxCoeff();
  o.gap_m = (m - orc.pt.m).cwiseAbs().maxCoeff();
  o.T_minus_Z = (T - o.Z).cwiseAbs().maxCoeff();
  o.kkt = kkt_residual_general(inst, o.Z, d).max_residual();
  o.h_err = std::abs(c.fan().h_est - h_of_Z(inst, o.Z));
  return o;
}

std::vector<NeighborMsg> msgs_from(const BuildingNetwork& net, std::size_t i, const Vector& T, const Vector& Z,
                                   const DualPoint& d) {
  std::vector<NeighborMsg> out;
  for (const auto& nb : net.neighbors(i)) {
    const auto j = static_cast<Eigen::Index>(nb.index);
    out.push_back({nb.index, T[j], Z[j], d.mu_plus[j], d.mu_minus[j]});
  }
  return out;
}

}  // namespace

TEST(LowPass, Examples) {
  EXPECT_EQ(low_pass_flow(0.2, 0.2, 1.0, 1.0), 0.2);
  double m = 0.0;
  const double dt = 1e-3;
  int steps = 0;
  while (m < 0.99) {
    m = low_pass_flow(m, 1.0, 0.5, dt);
    ++steps;
  }
  EXPECT_NEAR(steps * dt, 4.6 / 0.5, 0.05);
  EXPECT_THROW(low_pass_flow(0.0, 1.0, 0.0, 1.0), ConfigError);
  EXPECT_THROW(low_pass_flow(0.0, 1.0, 1.0, 0.0), ConfigError);
}

TEST(LowPass, AttenuatesTenHertzNoise) {
  const double dt = 1e-4;
  double m = 0.0, peak = 0.0;
  for (int k = 0; k < 200000; ++k) {
    const double t = k * dt;
    m = low_pass_flow(m, std::sin(2.0 * std::numbers::pi * 10.0 * t), 1.0, dt);
    if (t > 10.0) peak = std::max(peak, std::abs(m));
  }
  EXPECT_LT(peak, 1.0 / 30.0);
  EXPECT_NEAR(peak, 1.0 / std::sqrt(1.0 + std::pow(20.0 * std::numbers::pi, 2)), 1e-3);
}

TEST(FanStepM2, Examples) {
  const GainSet g;
  auto c = fx::office_ctx();
  const std::vector<double> flows{0.2, 0.3}, still{0.0, 0.0};
  auto [s, b] = fan_step_m2(g, {0.4, 0.0}, flows, still, c, 1.0);
  EXPECT_EQ(s.lambda_plus, 0.4);
  EXPECT_DOUBLE_EQ(s.h_est, 0.5);
  EXPECT_DOUBLE_EQ(b.price, 3.0 * 1.0 * 2.0 * 0.25 + 0.4);

  c.energy_weight = 0.0;
  const std::vector<double> low{0.1, 0.1};
  auto [s0, b0] = fan_step_m2(g, {0.0, 0.0}, low, still, c, 1.0);
  EXPECT_EQ(s0.lambda_plus, 0.0);
  EXPECT_EQ(b0.price, 0.0);

  // Rates count towards the reconstruction: h = sum(rate / k_m + m).
  const std::vector<double> rates{0.05, -0.02};
  EXPECT_DOUBLE_EQ(fan_step_m2(g, {0.0, 0.0}, flows, rates, c, 1.0).first.h_est, 0.53);
  const std::vector<double> one{0.1};
  EXPECT_THROW(fan_step_m2(g, {0.0, 0.0}, flows, one, c, 1.0), DimensionError);
}

TEST(ZoneStepM2, OracleOptimumIsFixedPoint) {
  const auto inst = office2_at(1.0, mid_morning());
  const auto orc = solve_general(inst);
  ASSERT_TRUE(orc.converged);
  const GainSet g;
  const auto& c = inst.ctx();
  const double h = orc.pt.m.sum();
  const FanBroadcast fan{3.0 * c.energy_weight * c.fan_coeff * h * h + orc.duals.lambda_plus};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    M2ZoneState s;
    s.Z = orc.pt.Z[i];
    s.m = orc.pt.m[i];
    s.nu_plus = orc.duals.nu_plus[i];
    s.nu_minus = orc.duals.nu_minus[i];
    s.mu_plus = orc.duals.mu_plus[i];
    s.mu_minus = orc.duals.mu_minus[i];
    const auto msgs = msgs_from(inst.net(), k, orc.pt.Z, orc.pt.Z, orc.duals);
    const double load = inst.outdoor() / inst.zone(k).resistance_out + inst.gain(k);
    const auto n = zone_advance_m2(inst.net(), k, c, g, s, load, msgs, fan, 1.0);
    EXPECT_NEAR(n.Z, s.Z, 1e-6);
    EXPECT_NEAR(n.m, s.m, 1e-9);
    EXPECT_NEAR(n.m_rate, 0.0, 1e-9);
    EXPECT_NEAR(n.mu_plus, s.mu_plus, 1e-6);
    EXPECT_NEAR(n.mu_minus, s.mu_minus, 1e-6);
    EXPECT_NEAR(n.nu_plus, s.nu_plus, 1e-6);
    EXPECT_NEAR(n.nu_minus, s.nu_minus, 1e-6);
    // The measured form observes the same load when T = Z at rest.
    const auto m = zone_step_m2(inst.net(), k, c, g, s, s.Z, msgs, fan, 1.0);
    EXPECT_NEAR(m.Z, n.Z, 1e-9);
  }
}

TEST(ZoneStepM2, FlowBoundViolationRaisesMultiplier) {
  const auto net = office2();
  const auto c = fx::office_ctx();
  M2ZoneState s = M2ZoneState::initial(net.zone(3), 23.0);
  // Very high load: the flow needed to hold Z exceeds flow_max = 0.15.
  std::vector<NeighborMsg> msgs{{1, 23.0, 23.0, 0.0, 0.0}, {2, 23.0, 23.0, 0.0, 0.0}};
  const auto n = zone_advance_m2(net, 3, c, GainSet{}, s, 33.0 / 15.0 + 3.0, msgs, {}, 1.0);
  EXPECT_GT(n.mu_plus, 0.0);
  EXPECT_EQ(n.mu_minus, 0.0);
}

TEST(ZoneStepM2, MissingMessageAndSingularity) {
  const auto net = office2();
  const auto c = fx::office_ctx();
  const auto s = M2ZoneState::initial(net.zone(0), 23.0);
  std::vector<NeighborMsg> only_one{{1, 23.0, 23.0, 0.0, 0.0}};
  EXPECT_THROW(zone_advance_m2(net, 0, c, GainSet{}, s, 2.5, only_one, {}, 1.0), DimensionError);
  std::vector<NeighborMsg> both{{1, 23.0, 23.0, 0.0, 0.0}, {2, 23.0, 23.0, 0.0, 0.0}};
  EXPECT_THROW(zone_advance_m2(net, 0, c, GainSet{}, M2ZoneState::initial(net.zone(0), 12.8), 2.5, both, {}, 1.0),
               DomainError);
}

TEST(ZoneStepM2, MultipliersStayNonnegative) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto net = office2();
  const auto c = fx::office_ctx();
  GainSet g;
  g.k_nu_plus = g.k_nu_minus = g.k_mu_plus = g.k_mu_minus = g.k_lambda = 50.0;
  for (int k = 0; k < 5000; ++k) {
    const std::size_t i = static_cast<std::size_t>(k) % 4;
    M2ZoneState s;
    s.Z = 15.0 + 20.0 * u(rng);
    s.m = u(rng);
    s.nu_plus = u(rng) < 0.3 ? 0.0 : u(rng);
    s.nu_minus = u(rng) < 0.3 ? 0.0 : u(rng);
    s.mu_plus = u(rng) < 0.3 ? 0.0 : u(rng);
    s.mu_minus = u(rng) < 0.3 ? 0.0 : u(rng);
    std::vector<NeighborMsg> msgs;
    for (const auto& nb : net.neighbors(i))
      msgs.push_back({nb.index, 15.0 + 20.0 * u(rng), 15.0 + 20.0 * u(rng), u(rng), u(rng)});
    const auto n = zone_advance_m2(net, i, c, g, s, 3.0 * u(rng), msgs, {3.0 * u(rng)}, 0.5 + u(rng));
    for (double v : {n.nu_plus, n.nu_minus, n.mu_plus, n.mu_minus}) ASSERT_GE(v, 0.0);
  }
}

TEST(Locality, NonNeighboursDoNotAffectOneTick) {
  auto z = fx::office_zone();
  const BuildingNetwork path({z, z, z, z}, {{0, 1, 20.0}, {1, 2, 20.0}, {2, 3, 20.0}});
  const auto c = fx::office_ctx();
  DistributedController a(path, GainSet{}, 10.0, 1);
  const Vector T0 = vec({23.0, 24.0, 25.0, 23.5});
  a.initialize(T0);
  for (int k = 0; k < 50; ++k) a.step(c, T0, 1.0);  // non-trivial states and price
  DistributedController b = a;
  b.zones()[3].Z += 0.7;
  b.zones()[3].mu_plus += 0.3;
  Vector Tb = T0;
  Tb[3] += 1.5;
  a.step(c, T0, 1.0);
  b.step(c, Tb, 1.0);
  for (std::size_t i : {0u, 1u}) {
    EXPECT_EQ(std::memcmp(&a.zones()[i].Z, &b.zones()[i].Z, sizeof(double)), 0) << i;
    EXPECT_EQ(a.zones()[i].m, b.zones()[i].m) << i;
    EXPECT_EQ(a.zones()[i].mu_plus, b.zones()[i].mu_plus) << i;
  }
  EXPECT_NE(a.zones()[2].Z, b.zones()[2].Z);
}

TEST(ClosedLoopM2, MidMorningMatchesOracle) {
  const auto o = run_to_oracle(office2_at(1.0, mid_morning()), 4.0);
  EXPECT_LT(o.gap_Z, 1e-3);
  EXPECT_LT(o.gap_m, 1e-3);
  EXPECT_LT(o.T_minus_Z, 1e-3);
  EXPECT_LT(o.kkt, 1e-4);
  EXPECT_LT(o.h_err, 1e-9);
}

TEST(ClosedLoopM2, ZeroWeightHoldsSetPoints) {
  const auto o = run_to_oracle(office2_at(0.0, {28.0, vec({0.4, 0.4, 0.3, 0.5})}), 4.0);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(o.Z[i], 24.0, 1e-4);
  EXPECT_LT(o.T_minus_Z, 1e-3);
}

TEST(ClosedLoopM2, BindingCapAndSmallDamper) {
  const auto inst = office2_at(1.0, {33.3, vec({0.92, 0.92, 0.82, 1.02})});
  const auto orc = solve_general(inst);
  EXPECT_NEAR(orc.pt.m.sum(), 0.5, 1e-6);
  DistributedController c(inst.net(), GainSet{}, 10.0, 10);
  Vector T;
  fx::close_loop(c, inst, PlantModel::Full, 4.0, T);
  EXPECT_GT(c.fan().lambda_plus, 0.0);
  EXPECT_NEAR(c.fan().h_est, 0.5, 1e-6);
  const auto o = run_to_oracle(inst, 4.0);
  EXPECT_LT(o.gap_Z, 1e-3);
  EXPECT_LT(o.kkt, 1e-4);
}

TEST(ClosedLoopM2, Heating) {
  auto c = fx::office_ctx(0.5);
  c.mode = Mode::Heating;
  c.supply_temp = 40.0;
  auto z = fx::office_zone();
  z.set_point = 21.0;
  z.comfort_min = 19.5;
  z.comfort_max = 22.5;
  const BuildingNetwork net({z, z, z}, {{0, 1, 20.0}, {1, 2, 20.0}});
  const ProblemInstance inst(net, c, {4.0, vec({0.1, 0.3, 0.2})});
  ASSERT_TRUE(assumption3_check(inst, comfort_box_grid(inst, 5)).psd);
  const auto o = run_to_oracle(inst, 5.0);
  EXPECT_LT(o.gap_Z, 1e-3);
  EXPECT_LT(o.gap_m, 1e-3);
  EXPECT_LT(o.T_minus_Z, 1e-3);
}
