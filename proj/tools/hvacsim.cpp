// hvacsim: run, audit and sweep building HVAC control scenarios.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "hvac/hvac.hpp"

namespace {

enum Exit { kOk = 0, kError = 1, kConfig = 2, kNumerical = 3, kAudit = 4 };

std::filesystem::path out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("HVACSIM_OUT_DIR"); env && *env) return env;
  return ".";
}

hvac::AuditWindow parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw hvac::ConfigError("window must be H1:H2");
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw hvac::ConfigError("window must be H1:H2 in hours, got '" + text + "'");
  }
}

void apply_overrides(hvac::Scenario& s, double dt, int stride) {
  if (dt > 0.0) s.dt = dt;
  if (stride > 0) s.stride = static_cast<std::size_t>(stride);
  s.validate();
}

bool all_pass(const std::vector<hvac::AuditResult>& audits) {
  for (const auto& a : audits)
    if (a.verdict == hvac::AuditVerdict::Fail) return false;
  return true;
}

void print_audit(const hvac::Scenario& s, const hvac::AuditResult& a) {
  std::cout << "window " << a.window.start_hours << "-" << a.window.end_hours << " h: "
            << to_string(a.verdict);
  if (!a.note.empty()) std::cout << " (" << a.note << ")";
  std::cout << "\n  samples " << a.samples << ", max gap " << a.max_gap << " (Z " << a.gap_Z << ", m "
            << a.gap_m << ", duals " << a.gap_duals << "), max |T-Z| " << a.max_T_minus_Z
            << ", kkt residual " << a.kkt.max_residual() << "\n";
  if (a.samples == 0) return;
  for (std::size_t i = 0; i < s.net.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    std::cout << "  zone " << i + 1 << ": Z " << a.state.Z[ii] << " vs " << a.oracle.Z[ii] << ", m "
              << a.state.m[ii] << " vs " << a.oracle.m[ii] << "\n";
  }
  if (s.controller != hvac::ControllerKind::ConstantFlow)
    std::cout << "  lambda+ " << a.duals.lambda_plus << " vs " << a.oracle_duals.lambda_plus << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop HVAC control simulator"};
  app.require_subcommand(1);

  std::string file, out, window, param = "w";
  std::vector<double> values;
  double dt = 0.0;
  int stride = 0;
  bool strict = false;
  unsigned threads = 0;

  auto* sim = app.add_subcommand("simulate", "run a scenario and write its CSV and report");
  sim->add_option("scenario", file, "scenario file")->required();
  sim->add_option("--out", out, "output directory (default $HVACSIM_OUT_DIR or .)");
  sim->add_option("--dt", dt, "override the time step, s");
  sim->add_option("--stride", stride, "override the CSV stride, ticks");
  sim->add_flag("--strict", strict, "exit 4 when an audit fails");

  auto* aud = app.add_subcommand("audit", "simulate up to a window and compare it with the oracle");
  aud->add_option("scenario", file, "scenario file")->required();
  aud->add_option("--window", window, "H1:H2 in hours")->required();
  aud->add_flag("--strict", strict, "exit 4 when the audit fails");

  auto* swp = app.add_subcommand("sweep", "rerun a scenario over values of one parameter");
  swp->add_option("scenario", file, "scenario file")->required();
  swp->add_option("--param", param, "w, m_bar, cop, fan_coeff or fan_bound");
  swp->add_option("--values", values, "values to try")->required()->delimiter(',');
  swp->add_option("--threads", threads, "worker threads (default: all cores)");
  swp->add_flag("--strict", strict, "exit 4 when the tradeoff is not monotone");

  auto* chk = app.add_subcommand("check", "validate a scenario and its assumptions");
  chk->add_option("scenario", file, "scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    hvac::Scenario s = hvac::load_scenario(file);

    if (*chk) {
      std::cout << s.name << ": " << s.net.size() << " zones, " << to_string(s.controller)
                << ", plant " << to_string(s.plant) << ", " << s.regime_starts().size()
                << " regimes; all checks passed\n";
      return kOk;
    }

    if (*sim) {
      apply_overrides(s, dt, stride);
      const auto art = hvac::run(s);
      const auto dir = out_dir(out);
      std::filesystem::create_directories(dir);
      const auto csv = dir / (s.name + ".csv");
      std::ofstream(csv, std::ios::binary) << art.csv;
      const std::string text = hvac::report(art);
      std::ofstream(dir / (s.name + "_report.txt")) << text;
      std::cout << text << "csv: " << csv.string() << "\n";
      if (art.failed) return kNumerical;
      if (strict && !all_pass(art.audits)) return kAudit;
      return kOk;
    }

    if (*aud) {
      const auto w = parse_window(window);
      if (w.end_hours > s.horizon_hours) throw hvac::ConfigError("window lies outside the horizon");
      hvac::Scenario cut = s;
      cut.horizon_hours = w.end_hours;
      cut.stride = 1;
      cut.validate();
      hvac::RunOptions opt;
      opt.audit = false;
      const auto art = hvac::run(cut, opt);
      if (art.failed) {
        std::cerr << "run failed: " << art.failure << "\n";
        return kNumerical;
      }
      const auto a = hvac::audit(s, art.trajectory, w);
      print_audit(s, a);
      return strict && a.verdict == hvac::AuditVerdict::Fail ? kAudit : kOk;
    }

    if (*swp) {
      const auto res = hvac::sweep(s, param, values, true, threads);
      std::cout << hvac::sweep_report(res);
      for (const auto& p : res.points)
        if (p.failed) return kNumerical;
      if (strict && !(res.comfort_monotone && res.energy_monotone)) return kAudit;
      return kOk;
    }
  } catch (const hvac::ConfigError& e) {
    std::cerr << "config error";
    if (!e.assumption().empty()) std::cerr << " [" << e.assumption() << "]";
    std::cerr << ": " << e.what() << "\n";
    return kConfig;
  } catch (const hvac::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kOk;
}
