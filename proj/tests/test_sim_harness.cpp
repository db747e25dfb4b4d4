#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hvac/hvac.hpp"

using namespace hvac;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = HVAC_SCENARIO_DIR;
const std::string kData = HVAC_TEST_DATA_DIR;

std::string two_zone_yaml(const std::string& extra, const std::string& schedule = "",
                          double weight = 0.1) {
  std::ostringstream os;
  os << "name: small\n"
        "controller: constant_flow\n"
        "plant: approx\n"
        "horizon_hours: 2\n"
        "stride: 60\n"
        "constant_flows: [0.1, 0.15]\n"
        "zones:\n"
        "  - {C: 20, R: 15, set_point: 24, comfort: [20, 28], flow: [0.01, 0.5], weight: "
     << weight << "}\n"
        "  - {C: 20, R: 16, set_point: 24, comfort: [20, 28], flow: [0.01, 0.5], weight: "
     << weight << "}\n"
        "edges:\n"
        "  - [0, 1, 18]\n"
     << (schedule.empty() ? "schedule:\n  breakpoints:\n    - {t: 0, outdoor: 30, gains: [0.1, 0.2]}\n"
                          : schedule)
     << extra;
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hvacsim_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(HVACSIM_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Scenario cut(Scenario s, double hours) {
  s.horizon_hours = hours;
  s.validate();
  return s;
}

}  // namespace

TEST(Parse, BundledScenarios) {
  const auto s1 = load_scenario(kScenarios + "/scenario1.yaml");
  EXPECT_EQ(s1.name, "scenario1");
  EXPECT_EQ(s1.net.size(), 4u);
  EXPECT_EQ(s1.controller, ControllerKind::Method1);
  EXPECT_EQ(s1.plant, PlantModel::Approx);
  ASSERT_EQ(s1.events.size(), 1u);
  EXPECT_EQ(s1.events[0].key, "energy_weight");
  EXPECT_EQ(s1.context_at(11.99).energy_weight, 1.0);
  EXPECT_EQ(s1.context_at(12.0).energy_weight, 0.1);
  const auto s2 = load_scenario(kScenarios + "/scenario2.yaml");
  EXPECT_EQ(s2.controller, ControllerKind::Method2);
  EXPECT_EQ(s2.net.zone(3).flow_max, 0.15);
  EXPECT_EQ(s2.context_at(16.0).total_flow_cap, 0.4);
}

TEST(Parse, Errors) {
  try {
    load_scenario(kData + "/empty.yaml");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("empty"), std::string::npos);
  }
  EXPECT_THROW(load_scenario(kData + "/no_such_file.yaml"), ConfigError);
  try {
    parse_scenario(two_zone_yaml("colour: blue\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 15);
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
  EXPECT_THROW(parse_scenario("zones: [1, 2"), ParseError);
  EXPECT_THROW(parse_scenario(two_zone_yaml("events:\n  - {t: 1, key: supply_temp, value: 10}\n")), ParseError);
}

TEST(Parse, AssumptionGates) {
  auto text = two_zone_yaml("", "", 0.01);
  text.replace(text.find("constant_flow"), 13, "method1");
  try {
    parse_scenario(text);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.assumption(), "strict-convexity");
  }
  // Cold outdoor air: the set point needs less than the minimum flow.
  auto cold = two_zone_yaml("", "schedule:\n  breakpoints:\n    - {t: 0, outdoor: 15, gains: [0.0, 0.0]}\n");
  cold.replace(cold.find("constant_flow"), 13, "method1");
  try {
    parse_scenario(cold);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.assumption(), "assumption1");
  }
  auto split = two_zone_yaml("");
  split.replace(split.find("constant_flow"), 13, "method2");
  split.replace(split.find("weight: 0.1}"), 12, "weight: 0.1, supply_temp: 14}");
  try {
    parse_scenario(split);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.assumption(), "shared-supply");
  }
}

TEST(Run, ConstantFlowReachesSteadyState) {
  const auto s = parse_scenario(two_zone_yaml(""));
  const auto art = run(s);
  ASSERT_FALSE(art.failed);
  const auto& tr = art.trajectory;
  const Vector T = tr.block(tr.rows() - 1, tr.layout.T0);
  const Vector ss = steady_state_for_flows(s.net, s.ctx, s.schedule.at_hours(0), s.constant_flows, s.plant);
  EXPECT_LT((T - ss).cwiseAbs().maxCoeff(), 1e-6);
  ASSERT_EQ(art.audits.size(), 1u);
  EXPECT_EQ(art.audits[0].verdict, AuditVerdict::Pass);
}

TEST(Run, CsvLayoutAndRowCount) {
  const auto s = parse_scenario(two_zone_yaml(""));
  const auto art = run(s);
  std::istringstream in(art.csv);
  std::string header, names, line;
  std::getline(in, header);
  std::getline(in, names);
  EXPECT_EQ(header.rfind("# hvacsim-csv v1 controller=constant_flow", 0), 0u);
  EXPECT_EQ(names, "t_hours,T_1,T_2,m_1,m_2,total_flow,objective_full");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, s.ticks() / s.stride + 1);
  EXPECT_EQ(rows, art.csv_rows());
  EXPECT_EQ(art.trajectory.rows(), s.ticks() + 1);

  const ColumnLayout m1(ControllerKind::Method1, 2), m2(ControllerKind::Method2, 2);
  EXPECT_EQ(m1.names[m1.zeta0], "zeta_1");
  EXPECT_EQ(m1.price, ColumnLayout::npos);
  EXPECT_EQ(m2.names.back(), "price");
  EXPECT_EQ(m2.zeta0, ColumnLayout::npos);
}

TEST(Run, Deterministic) {
  auto s = load_scenario(kScenarios + "/scenario2.yaml");
  s = cut(s, 1.0);
  RunOptions opt;
  opt.audit = false;
  const auto a = run(s, opt), b = run(s, opt);
  EXPECT_EQ(a.csv, b.csv);
  ASSERT_EQ(a.trajectory.data.size(), b.trajectory.data.size());
  EXPECT_EQ(std::memcmp(a.trajectory.data.data(), b.trajectory.data.data(), a.trajectory.data.size() * sizeof(double)), 0);
}

TEST(Run, EventsLandExactlyOnTheirTick) {
  const auto s = parse_scenario(two_zone_yaml("events:\n  - {t: 0.5, key: energy_weight, value: 3}\n"));
  RunOptions opt;
  opt.audit = false;
  const auto art = run(s, opt);
  const auto& tr = art.trajectory;
  const std::size_t k = 1800;
  ASSERT_DOUBLE_EQ(tr.time_hours(k), 0.5);
  for (std::size_t row : {k - 1, k}) {
    const ProblemInstance inst(s.net, s.context_at_seconds(static_cast<double>(row)), s.schedule.at_hours(0));
    const double expect = objective_full(inst, {tr.block(row, tr.layout.T0), s.constant_flows});
    EXPECT_DOUBLE_EQ(tr.at(row, tr.layout.objective), expect) << row;
  }
  EXPECT_EQ(s.context_at_seconds(1799.0).energy_weight, 1.0);
  EXPECT_EQ(s.context_at_seconds(1800.0).energy_weight, 3.0);
}

TEST(Audit, RampIsNonStationary) {
  const auto s = parse_scenario(two_zone_yaml(
      "", "schedule:\n  interpolation: linear\n  breakpoints:\n    - {t: 0, outdoor: 28, gains: [0.1, 0.2]}\n"
          "    - {t: 2, outdoor: 32, gains: [0.1, 0.2]}\n"));
  RunOptions opt;
  opt.audit = false;
  const auto art = run(s, opt);
  const auto a = audit(s, art.trajectory, {1.0, 1.5});
  EXPECT_EQ(a.verdict, AuditVerdict::NonStationary);
  EXPECT_NE(a.note.find("non-stationary"), std::string::npos);
  EXPECT_THROW(audit(s, art.trajectory, {1.0, 1.0 + 9.0 / 3600.0}), ConfigError);
  EXPECT_THROW(audit(s, art.trajectory, {1.5, 1.0}), ConfigError);
  EXPECT_THROW(audit(s, art.trajectory, {1.9, 2.1}), ConfigError);
}

TEST(Audit, DefaultWindowsEndEachRegime) {
  const auto s = load_scenario(kScenarios + "/scenario1.yaml");
  const auto w = default_audit_windows(s);
  ASSERT_EQ(w.size(), 7u);
  EXPECT_NEAR(w[0].start_hours, 6.0 - 1.0 / 6.0, 1e-12);
  EXPECT_EQ(w[0].end_hours, 6.0);
  EXPECT_EQ(w.back().end_hours, 24.0);
}

TEST(Audit, MidDayWindowsMatchTheOracle) {
  RunOptions opt;
  opt.windows = {{10.0, 12.0}};
  for (const char* name : {"scenario1", "scenario2"}) {
    const auto s = cut(load_scenario(kScenarios + "/" + name + ".yaml"), 12.0);
    const auto art = run(s, opt);
    ASSERT_FALSE(art.failed) << name;
    ASSERT_EQ(art.audits.size(), 1u);
    const auto& a = art.audits[0];
    EXPECT_EQ(a.verdict, AuditVerdict::Pass) << name << " gap " << a.max_gap;
    EXPECT_LT(a.max_T_minus_Z, 1e-3) << name;
    if (s.controller == ControllerKind::Method1) {
      EXPECT_TRUE(a.zeta_positive);
      EXPECT_EQ(tightness_text(art), "ζ > 0 for all zones at every audit window");
    } else {
      EXPECT_EQ(tightness_text(art), "tightness: not applicable");
    }
    EXPECT_NE(report(art).find("audits:"), std::string::npos);
  }
}

TEST(Report, EmptyAndFailedRuns) {
  RunArtifact empty;
  empty.scenario = parse_scenario(two_zone_yaml(""));
  empty.trajectory.layout = ColumnLayout(ControllerKind::ConstantFlow, 2);
  EXPECT_NE(report(empty).find("no data"), std::string::npos);

  const auto art = run(load_scenario(kData + "/blowup.yaml"));
  EXPECT_TRUE(art.failed);
  EXPECT_NE(art.failure.find("non-finite"), std::string::npos);
  EXPECT_LT(art.trajectory.rows(), art.scenario.ticks() + 1);
  EXPECT_GT(art.trajectory.rows(), 0u);
  EXPECT_TRUE(art.audits.empty());
  EXPECT_NE(report(art).find("RUN FAILED"), std::string::npos);
}

TEST(Sweep, OracleTradeoffIsMonotoneInWeight) {
  const auto s = load_scenario(kScenarios + "/scenario1.yaml");
  const auto r = sweep(s, "w", {1.0, 0.0, 0.1}, false);
  ASSERT_EQ(r.points.size(), 3u);
  EXPECT_EQ(r.points[0].value, 0.0);
  EXPECT_TRUE(r.comfort_monotone);
  EXPECT_TRUE(r.energy_monotone);
  // At w = 0 the morning optimum sits on the set points; the hot afternoon is capped either way.
  EXPECT_NEAR(r.points[0].oracle[0].comfort, 0.0, 1e-12);
  EXPECT_GT(r.points[2].oracle[0].comfort, r.points[1].oracle[0].comfort);
  EXPECT_THROW(sweep(s, "supply_temp", {1.0}, false), ConfigError);
  EXPECT_THROW(sweep(s, "w", {}, false), ConfigError);
  EXPECT_NE(sweep_report(r).find("energy nonincreasing in energy_weight: yes"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("check " + kScenarios + "/scenario1.yaml"), 0);
  EXPECT_EQ(cli("check " + kData + "/empty.yaml"), 2);
  auto weak = two_zone_yaml("", "", 0.01);
  weak.replace(weak.find("constant_flow"), 13, "method1");
  EXPECT_EQ(cli("check " + write_file("weak.yaml", weak).string()), 2);
  EXPECT_EQ(cli("simulate " + kData + "/blowup.yaml --out " + scratch("out").string()), 3);
  EXPECT_EQ(cli("audit " + kScenarios + "/scenario1.yaml --window 12.0:12.1 --strict"), 4);
  EXPECT_EQ(cli("audit " + kScenarios + "/scenario1.yaml --window 12.0:12.1"), 0);
  EXPECT_EQ(cli("audit " + kScenarios + "/scenario1.yaml --window nonsense"), 2);
}

TEST(Cli, OutputDirectory) {
  const auto file = write_file("small.yaml", two_zone_yaml(""));
  const auto env_dir = scratch("from_env"), flag_dir = scratch("from_flag");
  const std::string env = "HVACSIM_OUT_DIR=" + env_dir.string() + " ";
  ASSERT_EQ(std::system((env + HVACSIM_BIN + " simulate " + file.string() + " > /dev/null").c_str()), 0);
  EXPECT_TRUE(fs::exists(env_dir / "small.csv"));
  EXPECT_TRUE(fs::exists(env_dir / "small_report.txt"));
  ASSERT_EQ(std::system((env + HVACSIM_BIN + " simulate " + file.string() + " --out " + flag_dir.string() +
                         " > /dev/null").c_str()),
            0);
  EXPECT_TRUE(fs::exists(flag_dir / "small.csv"));
  std::ifstream in(env_dir / "small.csv");
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), run(parse_scenario(two_zone_yaml(""))).csv);
}
