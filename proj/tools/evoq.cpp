// evoq: command-line front end for instance configs.
//
// Exit codes: 0 all assertions pass, 1 a numerical assertion failed,
// 2 invalid config or arguments, 3 I/O failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evoq/acceptance.hpp"
#include "evoq/harness.hpp"
#include "evoq/signal_io.hpp"

using namespace evoq;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string suite = "all";
  std::string variant;
  std::string config_dir = EVOQ_CONFIG_DIR;
  bool certify = false;
  bool json_out = false;
};

json number(double x) { return std::isfinite(x) ? json(x) : json(std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf")); }

json to_json(const CoercivityCertificate& c) {
  return {{"nu", c.nu}, {"c_est", c.c_est}, {"sample_count", c.sample_count}, {"min_location", c.min_location}};
}

json to_json(const GridSpec& g) {
  return {{"t_min", g.t_min}, {"t_max", g.t_max}, {"n", g.n}, {"padding_fraction", g.padding_fraction}};
}

json to_json(const Measurement& m) {
  return {{"label", m.label}, {"value", number(m.value)}, {"limit", number(m.limit)}, {"pass", m.pass}};
}

json complex_list(const CVector& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back({z.real(), z.imag()});
  return out;
}

Measurement below(std::string label, double value, double limit) { return {std::move(label), value, limit, value < limit}; }

bool all_pass(const std::vector<Measurement>& ms) {
  for (const auto& m : ms)
    if (!m.pass) return false;
  return true;
}

void write_json(const fs::path& dir, const std::string& name, const json& j) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream f(dir / name);
  if (ec || !(f << j.dump(2) << '\n')) throw Error(ErrorKind::Io, "cannot write " + (dir / name).string());
}

void write_csv(const fs::path& dir, const std::string& stem, const WeightedSignal& s) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string());
  write_signal(dir / stem, s);
}

void emit(const Options& o, const json& report, const std::string& text) {
  if (o.json_out)
    std::cout << report.dump(2) << '\n';
  else
    std::cout << text;
}

int run_solve(const Options& o, Direction dir) {
  auto cfg = load_config(o.config);
  auto rep = solve(make_problem(cfg, dir));
  const double bound = cfg.tol.norm_slack / rep.certificate.c_est;
  std::vector<Measurement> checks{below("residual_rel", rep.residual_rel, cfg.tol.residual),
                                  {"norm_ratio", rep.norm_ratio, bound, rep.norm_ratio <= bound}};
  const bool fwd = dir == Direction::Forward;
  json j{{"instance", cfg.name},
         {"direction", fwd ? "forward" : "adjoint"},
         {"nu", cfg.nu},
         {"grid", to_json(cfg.grid)},
         {"certificate", to_json(rep.certificate)},
         {"residual_rel", rep.residual_rel},
         {"norm_ratio", rep.norm_ratio},
         {"support_leakage", rep.support_leakage},
         {"wraparound_tolerance", rep.wraparound_tolerance},
         {"assertions", json::array()},
         {"pass", all_pass(checks)}};
  for (const auto& m : checks) j["assertions"].push_back(to_json(m));
  write_json(o.out, fwd ? "solve_report.json" : "adjoint_report.json", j);
  write_csv(o.out, fwd ? "solution" : "adjoint_solution", rep.solution);
  std::ostringstream text;
  text << cfg.name << ' ' << (fwd ? "forward" : "adjoint") << ": c_est " << rep.certificate.c_est << ", residual "
       << rep.residual_rel << ", norm ratio " << rep.norm_ratio << " (bound " << bound << "), leakage "
       << rep.support_leakage << (all_pass(checks) ? "  ok\n" : "  FAILED\n");
  emit(o, j, text.str());
  return all_pass(checks) ? 0 : 1;
}

std::vector<Measurement> run_suite(const std::string& suite, const InstanceConfig& cfg) {
  SystemSpec s{cfg.system.law, cfg.system.A, cfg.nu, cfg.grid.grid(), cfg.grid.padding_fraction};
  const auto& t = cfg.tol;
  std::vector<Measurement> out;
  if (suite == "norm") {
    auto m = measure_norm_bound(s, 100, cfg.seed);
    const double bound = t.norm_slack / m.c_est;
    out.push_back({"forward ratio", m.worst_forward, bound, m.worst_forward <= bound});
    out.push_back({"adjoint ratio", m.worst_adjoint, bound, m.worst_adjoint <= bound});
  } else if (suite == "duality") {
    double d = measure_duality(s, 100, cfg.seed);
    out.push_back({"duality residual", d, t.duality, d <= t.duality});
  } else if (suite == "pairing") {
    double d = measure_operator_pairing(s, 10, cfg.seed);
    out.push_back({"operator pairing", d, t.pairing, d <= t.pairing});
  } else if (suite == "causality") {
    auto m = measure_causality(s, make_problem(cfg, Direction::Forward).rhs, make_problem(cfg, Direction::Adjoint).rhs);
    out.push_back(below("spectral forward leakage", m.spectral_forward, m.wraparound_forward));
    out.push_back(below("spectral adjoint leakage", m.spectral_adjoint, m.wraparound_adjoint));
    if (m.stepper_forward >= 0.0) {
      out.push_back(below("stepper forward leakage", m.stepper_forward, t.causality));
      out.push_back(below("stepper adjoint leakage", m.stepper_adjoint, t.causality));
    }
  } else if (suite == "reversal") {
    out.push_back(below("reversal discrepancy", measure_reversal(s, 4, cfg.seed), t.reversal));
  } else if (suite == "nu-independence") {
    const Eigen::Index m = cfg.system.A.dim();
    auto r = measure_nu_independence(s, shape_values(cfg.rhs, s.grid, m), shape_values(cfg.adjoint_rhs, s.grid, m), 1.0,
                                     2.0);
    out.push_back(below("forward, nu 1 vs 2", r.forward, t.nu_independence));
    out.push_back(below("adjoint, nu 1 vs 2", r.adjoint, t.nu_independence));
  } else if (suite == "oracle") {
    auto r = measure_stepper_agreement(s, make_problem(cfg, Direction::Forward).rhs,
                                       make_problem(cfg, Direction::Adjoint).rhs);
    const double limit = std::max(t.oracle, r.wraparound);
    out.push_back(below("stepper vs spectral, forward", r.forward, limit));
    out.push_back(below("stepper vs spectral, adjoint", r.adjoint, limit));
  }
  return out;
}

int run_verify(const Options& o) {
  static const std::vector<std::string> every{"norm", "duality", "pairing", "causality", "reversal", "nu-independence",
                                              "oracle"};
  auto cfg = load_config(o.config);
  std::vector<std::string> suites = o.suite == "all" ? every : std::vector<std::string>{o.suite};
  json j{{"instance", cfg.name}, {"certificate", to_json(cfg.certificate)}, {"suites", json::array()}};
  std::ostringstream text;
  bool pass = true;
  for (const auto& name : suites) {
    auto ms = run_suite(name, cfg);
    json js{{"suite", name}, {"pass", all_pass(ms)}, {"measurements", json::array()}};
    for (const auto& m : ms) {
      js["measurements"].push_back(to_json(m));
      text << name << ": " << m.label << ' ' << m.value << " vs " << m.limit << (m.pass ? "  ok\n" : "  FAILED\n");
    }
    pass = pass && all_pass(ms);
    j["suites"].push_back(js);
  }
  j["pass"] = pass;
  write_json(o.out, "verify_report.json", j);
  emit(o, j, text.str());
  return pass ? 0 : 1;
}

json to_json(const DualityVerdict& v) {
  return {{"feasible", v.feasible},
          {"included", v.included},
          {"finite", v.finite},
          {"agree", v.agree},
          {"c_obs", number(v.c_obs)},
          {"douglas_constant", number(v.douglas_constant)},
          {"worst_probe_residual", v.worst_probe_residual},
          {"adjoint_factorization_defect", v.adjoint_factorization_defect}};
}

int run_certify(const Options& o) {
  auto rows = duality_table();
  if (!o.config.empty()) {
    auto cfg = load_config(o.config);
    rows.push_back({cfg.name, certify_duality(make_control_problem(cfg, ControlVariant::Supported), 4, cfg.seed,
                                              cfg.tol.control)});
  }
  json j = json::array();
  std::ostringstream text;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %-9s %-9s %-7s %-6s %s\n", "instance", "feasible", "included", "finite",
                "agree", "c_obs");
  text << buf;
  bool pass = true;
  for (const auto& [name, v] : rows) {
    json r = to_json(v);
    r["instance"] = name;
    j.push_back(r);
    pass = pass && v.agree;
    std::snprintf(buf, sizeof buf, "%-28s %-9s %-9s %-7s %-6s %.6g\n", name.c_str(), v.feasible ? "yes" : "no",
                  v.included ? "yes" : "no", v.finite ? "yes" : "no", v.agree ? "yes" : "NO", v.c_obs);
    text << buf;
  }
  json report{{"rows", j}, {"pass", pass}};
  write_json(o.out, "duality_verdicts.json", report);
  emit(o, report, text.str());
  return pass ? 0 : 1;
}

int run_control(const Options& o) {
  if (o.certify) return run_certify(o);
  if (o.config.empty()) throw Error(ErrorKind::Schema, "control needs --config");
  auto cfg = load_config(o.config);
  std::optional<ControlVariant> variant;
  if (o.variant == "supported") variant = ControlVariant::Supported;
  if (o.variant == "pointwise") variant = ControlVariant::Pointwise;
  auto cp = make_control_problem(cfg, variant);
  const bool pointwise = cp.variant == ControlVariant::Pointwise;
  const auto& opt = cfg.tol.control;
  auto res = pointwise ? pointwise_null_control(cp, opt) : null_control(cp, opt);

  std::vector<Measurement> checks;
  if (res.feasible) {
    if (pointwise) {
      const double limit = opt.pointwise_tol * (1.0 + cp.U0.norm());
      checks.push_back(below("||M0 U(T)||", res.terminal_residual, limit));
    } else {
      checks.push_back({"relative residual", res.relative_residual, opt.feasibility_tol,
                        res.relative_residual <= opt.feasibility_tol});
    }
  }
  json j{{"instance", cfg.name},
         {"variant", pointwise ? "pointwise" : "supported"},
         {"T", cp.T},
         {"grid", to_json(cfg.control->grid)},
         {"certificate", to_json(cfg.certificate)},
         {"feasible", res.feasible},
         {"terminal_residual", res.terminal_residual},
         {"relative_residual", res.relative_residual},
         {"control_norm", res.control_norm},
         {"rank", res.rank},
         {"cutoff", res.cutoff},
         {"assertions", json::array()},
         {"pass", all_pass(checks)}};
  for (const auto& m : checks) j["assertions"].push_back(to_json(m));
  if (pointwise) {
    j["M0U_at_T"] = complex_list(res.M0U_at_T);
    j["hminus_norm"] = res.hminus_norm;
  }
  write_json(o.out, "control_result.json", j);
  write_csv(o.out, "control", res.G);

  std::ostringstream text;
  text << cfg.name << ' ' << (pointwise ? "pointwise" : "supported") << " control at T = " << cp.T << ": "
       << (res.feasible ? "feasible" : "infeasible") << ", residual " << res.terminal_residual << ", ||G|| "
       << res.control_norm << ", rank " << res.rank << '\n';
  json report{{"control", j}};
  if (!pointwise) {
    auto est = observability_constant(cp, opt);
    json obs{{"c_obs", number(est.c_obs)},
             {"infinite", est.infinite},
             {"method", est.method == ObservabilityMethod::GeneralizedSvd ? "generalized-svd" : "power-iteration"},
             {"rank", est.rank},
             {"iterations", est.iterations}};
    write_json(o.out, "observability.json", obs);
    if (!est.infinite) write_csv(o.out, "observability_witness", est.witness);
    report["observability"] = obs;
    text << "observability constant " << (est.infinite ? std::string("inf") : std::to_string(est.c_obs)) << '\n';
  }
  emit(o, report, text.str());
  return all_pass(checks) ? 0 : 1;
}

int run_acceptance_suite(const Options& o) {
  auto instances = bundled_instances(o.config_dir);
  json rows = json::array();
  bool pass = true;
  for (int id = 1; id <= 10; ++id) {
    auto r = run_criterion(id, instances);
    pass = pass && r.pass;
    if (!o.json_out) std::cout << format_line(r) << std::endl;
    json row{{"criterion", r.id}, {"name", r.name}, {"pass", r.pass}, {"measurements", json::array()}};
    for (const auto& m : r.measurements) row["measurements"].push_back(to_json(m));
    if (!r.note.empty()) row["note"] = r.note;
    rows.push_back(row);
  }
  json report{{"criteria", rows}, {"pass", pass}};
  write_json(o.out, "acceptance.json", report);
  if (o.json_out) std::cout << report.dump(2) << '\n';
  return pass ? 0 : 1;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Io: return 3;
    case ErrorKind::Solver:
    case ErrorKind::Oracle:
    case ErrorKind::NotInvertible: return 1;
    default: return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary equations in weighted spaces: solves, adjoints, verification and null control"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("--json", o.json_out, "Print the machine-readable report instead of text");

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "Instance config (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", o.out, "Directory for reports and signals");
    sub->add_flag("--json", o.json_out, "Print the machine-readable report instead of text");
  };
  auto* solve_cmd = app.add_subcommand("solve", "Forward solve of the configured instance");
  add_common(solve_cmd, true);
  auto* adjoint_cmd = app.add_subcommand("adjoint", "Adjoint (backward) solve of the configured instance");
  add_common(adjoint_cmd, true);
  auto* verify_cmd = app.add_subcommand("verify", "Run property harnesses on the configured instance");
  add_common(verify_cmd, true);
  verify_cmd->add_option("--suite", o.suite, "Harness to run")
      ->check(CLI::IsMember({"all", "norm", "duality", "pairing", "causality", "reversal", "nu-independence", "oracle"}));
  auto* control_cmd = app.add_subcommand("control", "Null-control synthesis and observability");
  add_common(control_cmd, false);
  control_cmd->add_option("--variant", o.variant, "Override the configured variant")
      ->check(CLI::IsMember({"supported", "pointwise"}));
  control_cmd->add_flag("--certify-duality", o.certify, "Three-way verdict table over the built-in instances");
  auto* suite_cmd = app.add_subcommand("suite", "Run a named suite");
  suite_cmd->add_option("name", o.suite, "Suite name")->required()->check(CLI::IsMember({"acceptance"}));
  suite_cmd->add_option("--configs", o.config_dir, "Directory with the bundled configs")->check(CLI::ExistingDirectory);
  suite_cmd->add_option("--out", o.out, "Directory for the verdict table");
  suite_cmd->add_flag("--json", o.json_out, "Print the machine-readable report instead of text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve_cmd) return run_solve(o, Direction::Forward);
    if (*adjoint_cmd) return run_solve(o, Direction::Adjoint);
    if (*verify_cmd) return run_verify(o);
    if (*control_cmd) return run_control(o);
    if (*suite_cmd) return run_acceptance_suite(o);
  } catch (const NonCoerciveError& e) {
    std::cerr << "evoq: non-coercive material law: c_est " << e.c_est() << " at frequency " << e.min_location()
              << " (nu " << e.nu() << ")\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "evoq: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "evoq: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
