// cusplab: profile construction, inequality checks, blow-up runs and their analysis.
//
// Exit codes: 0 pass, 1 a checked property failed, 2 bad configuration.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cusplab/acceptance.hpp"
#include "cusplab/analysis.hpp"
#include "cusplab/burgers.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/inequalities.hpp"
#include "cusplab/numerics.hpp"
#include "cusplab/profile.hpp"
#include "cusplab/run_io.hpp"
#include "cusplab/sim.hpp"

namespace fs = std::filesystem;
using namespace cusplab;
using ojson = nlohmann::ordered_json;

namespace {

// --out wins; otherwise CUSPLAB_OUT_DIR/<command>, otherwise out/<command>.
fs::path output_dir(const std::string& flag, const std::string& command) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CUSPLAB_OUT_DIR"); env && *env) return fs::path(env) / command;
  return fs::path("out") / command;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int finish(Manifest& m, const fs::path& dir) {
  m.finished = utc_timestamp();
  std::ofstream f(dir / "manifest.json");
  f << to_json(m).dump(2) << '\n';
  if (!f) throw ConfigError("cannot write " + (dir / "manifest.json").string());
  std::cout << (m.passed ? "PASS" : "FAIL") << "  " << m.command << " -> "
            << (dir / "manifest.json").string() << '\n';
  return m.passed ? 0 : 1;
}

// ---- profile

struct ProfileArgs {
  double beta = 1.0;
  double y_max = 1e4;
  double tol = 1e-13;
  bool check_asymptotics = false;
  std::string out;
};

int cmd_profile(const ProfileArgs& a) {
  Manifest m;
  m.command = "profile";
  m.started = utc_timestamp();
  ProfileParams p;
  p.beta = a.beta;
  p.y_max = a.y_max;
  p.rel_tol = a.tol;
  // keep the linear part of the grid fixed in the natural variable sqrt(beta) y
  p.linear_end = 10.0 / std::sqrt(a.beta);
  p.validate();
  m.config = {{"beta", p.beta}, {"y_max", p.y_max}, {"rel_tol", p.rel_tol},
              {"abs_tol", p.abs_tol}, {"n_samples", p.n_samples},
              {"linear_end", p.linear_end}, {"certify_tol", p.certify_tol},
              {"check_asymptotics", a.check_asymptotics}};
  const fs::path dir = output_dir(a.out, "profile");
  fs::create_directories(dir);

  const auto t = build_profile(p);
  const auto taylor = taylor_check(t);
  const auto res = profile_residual(t);
  const double d3 = third_derivative_at_origin(t);
  const double c = std::pow(50.0 * t.beta, -0.2);

  const std::string hash = write_profile(t, dir / "profile.csv");
  m.outputs.push_back({"profile.csv", hash, "profile U, U', U'' against y"});
  m.outputs.push_back({"profile.csv.json", git_blob_hash(slurp(dir / "profile.csv.json")),
                       "profile metadata"});

  ojson rep;
  rep["beta"] = t.beta;
  rep["du0"] = t.du[0];
  rep["d2u0"] = t.d2u[0];
  rep["d3u0"] = d3;
  rep["d3u0_expected"] = 256.0 * t.beta;
  rep["residual_max"] = std::fabs(res.value);
  rep["residual_worst_y"] = res.y;
  rep["taylor"] = {{"window", taylor.window}, {"nodes", taylor.nodes_in_window},
                   {"c1", taylor.c1}, {"c3", taylor.c3}, {"c5", taylor.c5},
                   {"c1_error", taylor.c1_error}, {"c3_rel_error", taylor.c3_rel_error},
                   {"max_even", taylor.max_even}, {"passed", taylor.passed}};
  bool ok = taylor.passed && std::fabs(d3 / (256.0 * t.beta) - 1) <= 1e-3 &&
            std::fabs(res.value) <= p.certify_tol;
  if (a.check_asymptotics) {
    ojson lim = ojson::array();
    for (double y : {t.y_max, 1e6}) {
      const auto l = tail_limits(t, y);
      const double tol = y > t.y_max ? 1e-3 : 1e-2;
      const bool pass = std::fabs(l.gradient / c - 1) <= tol;
      ok = ok && pass;
      lim.push_back({{"y", y}, {"gradient", l.gradient}, {"value", l.value},
                     {"curvature", l.curvature}, {"tolerance", tol}, {"passed", pass}});
    }
    rep["tail_limit"] = c;
    rep["tail_checks"] = lim;
  }
  rep["passed"] = ok;
  m.outputs.push_back(write_output(dir, "profile_report.json", rep.dump(2) + "\n",
                                   "origin constants, Taylor fit and tail limits"));

  // cusp profile beside the Burgers profile on a shared grid
  std::vector<double> grid{0.0};
  for (int i = 0; i <= 600; ++i) grid.push_back(1e-3 * std::pow(1e6, i / 600.0));
  const auto bp = burgers_profile(grid);
  std::ostringstream cmp;
  cmp << "y,U,V\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    cmp << format_double(grid[i]) << ',' << format_double(eval_profile(t, grid[i]).u) << ','
        << format_double(bp.v[i]) << '\n';
  m.outputs.push_back(write_output(dir, "profile_comparison.csv", cmp.str(),
                                   "cusp profile against the Burgers pre-shock profile"));

  m.summary = {{"du0", t.du[0]}, {"d3u0", d3}, {"residual_max", std::fabs(res.value)}};
  if (a.check_asymptotics) m.summary["tail_limit"] = c;
  m.passed = ok;
  std::cout << "U'(0) = " << format_double(t.du[0]) << ", U'''(0) = " << d3 << '\n';
  return finish(m, dir);
}

// ---- verify

struct VerifyArgs {
  double lambda = 1.0001;
  double m0 = 93.0;
  std::size_t grid = 4096;
  std::string profile;
  std::string out;
};

int cmd_verify(const VerifyArgs& a) {
  Manifest m;
  m.command = "verify";
  m.started = utc_timestamp();
  InequalityConfig cfg;
  cfg.lambda = a.lambda;
  cfg.m0 = a.m0;
  if (a.grid < 16) throw ConfigError("verify: grid must be at least 16");
  cfg.y_grid = default_inequality_grid(a.grid);
  cfg.validate();
  m.config = {{"lambda", cfg.lambda}, {"m0", cfg.m0}, {"grid", a.grid},
              {"margin_tol", cfg.margin_tol}, {"profile", a.profile.empty() ? "built" : a.profile}};
  const fs::path dir = output_dir(a.out, "verify");
  fs::create_directories(dir);

  ProfileTable t;
  if (a.profile.empty()) {
    t = build_profile(ProfileParams{});
  } else {
    t = read_profile(a.profile);
    m.inputs.push_back({a.profile, git_blob_hash(slurp(a.profile))});
  }
  bool ok = true;
  ojson reports = ojson::array();
  for (const auto& r : verify_all(t, cfg)) {
    m.outputs.push_back(write_output(dir, r.name + "_margins.csv", margins_csv(r),
                                     r.name + " margin against y"));
    reports.push_back(to_json(r));
    ok = ok && r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  min margin "
              << format_double(r.min_margin);
    if (r.delta_found) std::cout << "  delta " << *r.delta_found;
    if (!r.crossings.empty()) std::cout << "  crossings " << r.crossings.size();
    if (!r.violations.empty())
      std::cout << "  violations " << r.violations.size() << " from y = " << r.violations.front();
    std::cout << '\n';
    m.summary[r.name] = r.passed;
  }
  m.outputs.push_back(write_output(dir, "inequalities.json", reports.dump(2) + "\n",
                                   "inequality reports"));
  m.passed = ok;
  return finish(m, dir);
}

// ---- simulate / analyze

struct SimArgs {
  std::string equation = "hs";
  double epsilon = 0.1;
  double gamma = 0.0;
  double k3 = 0.0;
  double Theta = 0.46;
  double beta_v = 1.0;
  double k_v = 1.0;
  double h_min_rel = 2e-5;
  double growth = 0.01;
  double g_max = 0.0;
  double cfl = 0.05;
  int snapshots_per_decade = 4;
  bool no_taper = false;
  bool strict_localization = false;
  std::vector<double> alphas{0.7, 0.8, 1.0};
  std::string out;
};

struct AnalyzeArgs {
  std::string run_dir;
  std::vector<double> alphas{0.7, 0.8, 1.0};
  double y_lo = 100, y_hi = 1000;
  std::string out;
};

std::vector<OutputFile> write_report(const BlowupReport& r, const fs::path& dir) {
  std::vector<OutputFile> out;
  out.push_back(write_output(dir, "report.json", to_json(r).dump(2) + "\n", "blow-up report"));
  out.push_back(write_output(dir, "holder_fit.csv", holder_csv(r.holder),
                             "log oscillation against log radius at the last snapshot"));
  out.push_back(write_output(dir, "rate_fit.csv", rate_csv(r.rates),
                             "log Holder seminorm against log distance to blow-up"));
  out.push_back(write_output(dir, "blowup_fit.csv", blowup_csv(r.blowup),
                             "inverse minimum gradient against time"));
  if (!r.audits.empty())
    out.push_back(write_output(dir, "envelope_audit.csv", audit_csv(r.audits),
                               "envelope ratios per snapshot"));
  return out;
}

ojson report_summary(const BlowupReport& r) {
  ojson s;
  s["equation"] = r.equation;
  s["T_star"] = r.blowup.T_star;
  s["rate_b"] = r.blowup.rate;
  s["alpha_hat"] = r.holder.alpha_hat;
  s["alpha_stderr"] = r.holder.stderr_;
  ojson rates = ojson::object();
  for (const auto& f : r.rates) rates[format_double(f.alpha)] = f.exponent;
  s["rate_exponents"] = rates;
  s["riccati_error"] = r.riccati_error;
  s["energy_drift"] = r.energy_drift;
  s["energy_x_drift"] = r.energy_x_drift;
  s["max_abs_u"] = r.max_abs_u;
  if (r.u_bound > 0) s["u_bound"] = r.u_bound;
  if (!r.audits.empty()) s["envelopes_passed"] = r.envelopes_passed;
  return s;
}

void print_report(const BlowupReport& r) {
  std::cout << r.equation << ": T* = " << r.blowup.T_star << ", b = " << r.blowup.rate
            << ", alpha_hat = " << r.holder.alpha_hat << " +- " << r.holder.stderr_ << '\n';
  for (const auto& f : r.rates)
    std::cout << "  seminorm rate alpha " << f.alpha << ": " << f.exponent << " (expected "
              << f.expected << ")\n";
  std::cout << "  energy drift " << r.energy_drift << ", max|u| " << r.max_abs_u << '\n';
  if (!r.audits.empty()) {
    std::cout << "  envelope audit " << (r.envelopes_passed ? "passed" : "failed") << '\n';
    const auto& last = r.audits.back();
    for (const auto& c : last.checks)
      std::cout << "    " << c.name << ": worst ratio " << c.value << " margin " << c.min_margin
                << (c.passed ? "" : "  FAIL") << '\n';
  }
}

int cmd_simulate(const SimArgs& a) {
  Manifest m;
  m.command = "simulate";
  m.started = utc_timestamp();
  InitialDataSpec s;
  s.equation = parse_equation(a.equation);
  s.epsilon = a.epsilon;
  s.gamma = a.gamma;
  s.k3 = a.k3;
  s.Theta = a.Theta;
  s.beta_v = a.beta_v;
  s.k_v = a.k_v;
  s.h_min_rel = a.h_min_rel;
  s.growth = a.growth;
  s.taper = !a.no_taper;
  s.strict_localization = a.strict_localization;
  s.validate();
  RunOptions o;
  o.g_max = a.g_max;
  o.cfl = a.cfl;
  o.snapshots_per_decade = a.snapshots_per_decade;
  o.validate();
  AnalysisOptions ao;
  ao.alphas = a.alphas;
  ao.validate();
  m.config = {{"spec", to_json(s)}, {"options", to_json(o)}, {"alphas", ao.alphas}};
  const fs::path dir = output_dir(a.out, "simulate");

  const auto table = build_profile(ProfileParams{});
  const auto run = run_to_blowup(s, o, table);
  m.outputs = write_run(run, dir);
  const auto rep = analyze_run(run, table, ao);
  for (auto& f : write_report(rep, dir)) m.outputs.push_back(std::move(f));
  m.summary = report_summary(rep);
  m.summary["stop_reason"] = run.stop_reason;
  m.summary["steps"] = run.steps;
  print_report(rep);
  return finish(m, dir);
}

int cmd_analyze(const AnalyzeArgs& a) {
  Manifest m;
  m.command = "analyze";
  m.started = utc_timestamp();
  AnalysisOptions ao;
  ao.alphas = a.alphas;
  ao.window = {a.y_lo, a.y_hi};
  ao.validate();
  m.config = {{"run_dir", a.run_dir}, {"alphas", ao.alphas},
              {"window", {ao.window.y_lo, ao.window.y_hi}}, {"fit_decades", ao.fit_decades},
              {"rate_decades", ao.rate_decades}, {"subsample", ao.subsample},
              {"audit_M", ao.audit.M}, {"audit_noise_floor", ao.audit.noise_floor}};
  const fs::path in = a.run_dir;
  for (const char* f : {"run.json", "snapshots.csv", "modulation.csv", "conservation.csv"})
    m.inputs.push_back({(in / f).string(), git_blob_hash(slurp(in / f))});
  const fs::path dir = output_dir(a.out, "analyze");

  const auto run = read_run(in);
  const auto rep = analyze_run(run, build_profile(ProfileParams{}), ao);
  m.outputs = write_report(rep, dir);
  m.summary = report_summary(rep);
  print_report(rep);
  return finish(m, dir);
}

// ---- acceptance

struct AcceptArgs {
  bool quick = false;
  std::string profile_fixture;
  unsigned jobs = 1;
  std::vector<int> only;
  std::string out;
};

int cmd_acceptance(const AcceptArgs& a) {
  Manifest m;
  m.command = "acceptance";
  m.started = utc_timestamp();
  AcceptanceOptions o;
  o.quick = a.quick;
  o.jobs = a.jobs;
  o.only = a.only;
  if (!a.profile_fixture.empty()) {
    o.profile_fixture = a.profile_fixture;
    m.inputs.push_back({a.profile_fixture, git_blob_hash(slurp(a.profile_fixture))});
  }
  m.config = {{"quick", a.quick}, {"jobs", a.jobs}, {"only", a.only},
              {"profile_fixture", a.profile_fixture.empty() ? "built" : a.profile_fixture}};
  const fs::path dir = output_dir(a.out, "acceptance");

  const auto r = run_acceptance(o);
  for (const auto& c : r.criteria) std::cout << format_line(c) << '\n';
  // wall-clock times stay in the manifest so the result file is reproducible
  auto j = to_json(r);
  ojson times = ojson::object();
  for (auto& c : j["criteria"]) {
    times[std::to_string(c["id"].get<int>())] = c["seconds"];
    c.erase("seconds");
    c.erase("detail");
    c["data"].erase("seconds");
    c["data"].erase("run_seconds");
    if (c["data"].contains("runs"))
      for (auto& run : c["data"]["runs"]) run.erase("seconds");
  }
  m.outputs.push_back(write_output(dir, "acceptance.json", j.dump(2) + "\n",
                                   "acceptance criteria and measured values"));
  ojson failed = ojson::array();
  for (const auto& c : r.criteria)
    if (!c.passed) failed.push_back(std::to_string(c.id) + " " + c.name);
  m.summary = {{"criteria", r.criteria.size()}, {"failed", failed}, {"seconds", times}};
  m.passed = r.passed;
  if (!r.passed)
    for (const auto& f : failed) std::cerr << "failed criterion: " << f.get<std::string>() << '\n';
  return finish(m, dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cusplab: cusp profiles, blow-up runs and their analysis"};
  app.set_config("--config", "", "key = value configuration file; command line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  ProfileArgs pa;
  auto* prof = app.add_subcommand("profile", "build and check the self-similar profile");
  prof->add_option("--beta", pa.beta, "profile parameter")->capture_default_str();
  prof->add_option("--y-max", pa.y_max, "largest tabulated y")->capture_default_str();
  prof->add_option("--tol", pa.tol, "relative ODE tolerance")->capture_default_str();
  prof->add_flag("--check-asymptotics", pa.check_asymptotics, "report the tail limits");
  prof->add_option("--out", pa.out, "output directory");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "check the profile inequalities on a grid");
  ver->add_option("--lambda", va.lambda)->capture_default_str();
  ver->add_option("--m0", va.m0, "start of the required range for num_1")->capture_default_str();
  ver->add_option("--grid", va.grid, "log-spaced grid points")->capture_default_str();
  ver->add_option("--profile", va.profile, "profile CSV instead of a fresh build");
  ver->add_option("--out", va.out, "output directory");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "run to blow-up and analyze the run");
  sim->add_option("equation", sa.equation, "ch, hs or burgers")
      ->check(CLI::IsMember({"ch", "hs", "burgers"}))
      ->capture_default_str();
  sim->add_option("--epsilon", sa.epsilon)->capture_default_str();
  sim->add_option("--gamma", sa.gamma)->capture_default_str();
  sim->add_option("--k3", sa.k3, "CH third derivative at 0; 0 gives beta = 1")->capture_default_str();
  sim->add_option("--Theta", sa.Theta)->capture_default_str();
  sim->add_option("--beta-v", sa.beta_v, "HS profile parameter")->capture_default_str();
  sim->add_option("--k-v", sa.k_v, "HS gradient scale")->capture_default_str();
  sim->add_option("--h-min-rel", sa.h_min_rel, "finest marker spacing in core scales")
      ->capture_default_str();
  sim->add_option("--growth", sa.growth, "marker spacing growth rate")->capture_default_str();
  sim->add_option("--Gmax", sa.g_max, "stop at min gradient -Gmax; 0 picks the default")
      ->capture_default_str();
  sim->add_option("--cfl", sa.cfl)->capture_default_str();
  sim->add_option("--snapshots-per-decade", sa.snapshots_per_decade)->capture_default_str();
  sim->add_flag("--no-taper", sa.no_taper, "use the profile without the localization taper");
  sim->add_flag("--strict-localization", sa.strict_localization);
  sim->add_option("--alphas", sa.alphas, "Holder exponents for the rate fits")->capture_default_str();
  sim->add_option("--out", sa.out, "output directory");

  AnalyzeArgs an;
  auto* ana = app.add_subcommand("analyze", "analyze a stored run");
  ana->add_option("--run-dir", an.run_dir, "directory written by simulate")->required();
  ana->add_option("--alphas", an.alphas)->capture_default_str();
  ana->add_option("--window-lo", an.y_lo, "Holder fit window in y")->capture_default_str();
  ana->add_option("--window-hi", an.y_hi)->capture_default_str();
  ana->add_option("--out", an.out, "output directory");

  AcceptArgs aa;
  auto* acc = app.add_subcommand("acceptance", "run the acceptance criteria");
  acc->add_flag("--quick", aa.quick, "criteria 1 to 6 only");
  acc->add_option("--profile-fixture", aa.profile_fixture, "profile CSV checked instead of a fresh build");
  acc->add_option("--jobs", aa.jobs, "concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
  acc->add_option("--only", aa.only, "criterion ids");
  acc->add_option("--out", aa.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*prof) return cmd_profile(pa);
    if (*ver) return cmd_verify(va);
    if (*sim) return cmd_simulate(sa);
    if (*ana) return cmd_analyze(an);
    if (*acc) return cmd_acceptance(aa);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const InitialDataError& e) {
    std::cerr << "initial data rejected (" << e.condition << " at x = " << e.worst_x
              << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
