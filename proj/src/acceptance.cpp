#include "cusplab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <random>
#include <sstream>

#include "cusplab/analysis.hpp"
#include "cusplab/burgers.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/inequalities.hpp"
#include "cusplab/numerics.hpp"
#include "cusplab/profile.hpp"
#include "cusplab/sim.hpp"

namespace cusplab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects named requirements; the first failure becomes the detail line.
class Checks {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && first_failure_.empty()) first_failure_ = what;
    ok_ = ok_ && ok;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  bool ok() const { return ok_; }
  std::string detail() const { return ok_ ? notes_ : "failed: " + first_failure_ + "; " + notes_; }

 private:
  bool ok_ = true;
  std::string first_failure_;
  std::string notes_;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

const double kTailConstant = std::pow(50.0, -0.2);

struct Context {
  const AcceptanceOptions& opt;
  ProfileTable fresh;
  ProfileTable under_test;  ///< fresh or the fixture
  double profile_seconds = 0;
  std::string profile_source = "built";

  std::optional<RunResult> hs_run;
  double hs_run_seconds = 0;

  const RunResult& hs() {
    if (!hs_run) {
      const auto t0 = Clock::now();
      hs_run = run_to_blowup(InitialDataSpec{}, RunOptions{}, fresh);
      hs_run_seconds = seconds_since(t0);
    }
    return *hs_run;
  }
};

void profile_constants(Context& cx, Checks& c, nlohmann::ordered_json& d) {
  const auto& t = cx.under_test;
  const double d3 = third_derivative_at_origin(t);
  d["source"] = cx.profile_source;
  d["du0"] = t.du[0];
  d["d2u0"] = t.d2u[0];
  d["d3u0"] = d3;
  d["seconds"] = cx.profile_seconds;
  c.require(t.nodes[0] == 0.0 && t.du[0] == -2.0, "U'(0) = -2");
  c.require(std::fabs(t.d2u[0]) <= 1e-10, "|U''(0)| <= 1e-10");
  c.require(std::fabs(d3 / 256.0 - 1) <= 1e-3, "U'''(0) = 256 within 0.1%");
  c.require(cx.profile_seconds < 10, "profile built in under 10 s");
  c.note("U'(0)=" + fmt(t.du[0]) + " U''(0)=" + fmt(t.d2u[0], 3) + " U'''(0)=" + fmt(d3, 8));
}

void profile_asymptotics(Context& cx, Checks& c, nlohmann::ordered_json& d) {
  const auto& t = cx.under_test;
  auto rel = [](double v) { return std::fabs(v / kTailConstant - 1); };
  const auto a = tail_limits(t, 1e4);
  const auto b = tail_limits(t, 1e6);
  d["target"] = kTailConstant;
  d["at_1e4"] = {{"gradient", a.gradient}, {"value", a.value}, {"curvature", a.curvature}};
  d["at_1e6"] = {{"gradient", b.gradient}, {"value", b.value}, {"curvature", b.curvature}};
  c.require(rel(a.gradient) <= 0.01, "y^{2/5}|U'| at 1e4 within 1%");
  c.require(rel(b.gradient) <= 1e-3, "y^{2/5}|U'| at 1e6 within 0.1%");
  c.require(rel(a.value) <= 0.01 && rel(b.value) <= 0.01, "(3/5)y^{-3/5}|U| within 1%");
  c.require(rel(a.curvature) <= 0.01 && rel(b.curvature) <= 0.01, "(5/2)y^{7/5}U'' within 1%");
  c.note("gradient " + fmt(a.gradient, 6) + " / " + fmt(b.gradient, 6) + " vs " +
         fmt(kTailConstant, 6));
}

void profile_consistency(Context& cx, Checks& c, nlohmann::ordered_json& d) {
  const auto& t = cx.under_test;
  double implicit = 0, curvature = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double du = t.du[i];
    const double w = t.u[i] + 2.5 * t.nodes[i];
    const double v = du + 2.5;
    const double bw2 = t.beta * w * w;
    implicit = std::max(implicit, std::fabs(bw2 - (2 * v - 1) / std::pow(5 - 2 * v, 5)) /
                                      std::max(1.0, bw2));
    const double cf = 2 * std::sqrt(t.beta) * std::sqrt(2 + du) * std::pow(-du, 3.5);
    curvature = std::max(curvature, std::fabs(t.d2u[i] - cf));
  }
  const double ode = std::fabs(profile_residual(t).value);
  d["implicit_relation_residual"] = implicit;
  d["curvature_closed_form_residual"] = curvature;
  d["ode_residual_max"] = ode;
  c.require(implicit <= 1e-8, "implicit relation residual <= 1e-8");
  c.require(curvature <= 1e-10, "curvature closed form residual <= 1e-10");
  c.require(ode <= 1e-8, "ODE residual <= 1e-8");
  c.note("implicit " + fmt(implicit, 3) + " curvature " + fmt(curvature, 3) + " ode " +
         fmt(ode, 3));
}

void inequalities(Context& cx, Checks& c, nlohmann::ordered_json& d) {
  const auto t0 = Clock::now();
  const auto& t = cx.under_test;
  InequalityConfig cfg;
  for (auto r : {check_num4(t, cfg), check_num2(t, cfg), check_num3(t, cfg)}) {
    d[r.name] = {{"passed", r.passed}, {"min_margin", r.min_margin}};
    c.require(r.passed && r.min_margin >= -1e-9, r.name + " margin >= -1e-9");
  }
  auto r6 = check_num6(t, 1.01, cfg);
  d[r6.name] = {{"passed", r6.passed}, {"delta", r6.delta_found ? *r6.delta_found : NAN}};
  c.require(r6.passed && r6.delta_found && *r6.delta_found < 1, "num_6 delta < 1 at lambda 1.01");
  auto r1 = check_num1(t, 1.0001, 93.0, cfg);
  std::vector<double> cross;
  for (double x : r1.crossings)
    if (x >= 1.0) cross.push_back(x);
  d[r1.name] = {{"passed", r1.passed}, {"min_margin", r1.min_margin}, {"crossings", cross}};
  c.require(r1.passed, "num_1 holds on [93, 1e4]");
  c.require(cross.size() == 1 && std::fabs(cross[0] - 92.882) <= 0.5,
            "num_1 single sign change in 92.882 +- 0.5");
  const double secs = seconds_since(t0);
  d["seconds"] = secs;
  c.require(secs < 30, "inequalities in under 30 s");
  if (r6.delta_found) c.note("num_6 delta " + fmt(*r6.delta_found, 6));
  if (!cross.empty()) c.note("num_1 crossing " + fmt(cross[0], 6));
}

void hs_exactness(Context& cx, Checks& c, nlohmann::ordered_json& d) {
  const auto& run = cx.hs();
  const auto rep = analyze_run(run, cx.fresh);
  const double drift = std::max(rep.energy_drift, rep.energy_x_drift);
  d["riccati_error"] = rep.riccati_error;
  d["T_star"] = rep.blowup.T_star;
  d["energy_drift"] = rep.energy_drift;
  d["energy_x_drift"] = rep.energy_x_drift;
  d["run_seconds"] = cx.hs_run_seconds;
  c.require(rep.riccati_error <= 1e-6, "Riccati closed form within 1e-6 until |g| = 1e3");
  c.require(std::fabs(rep.blowup.T_star) <= 1e-3, "projected T* = 0 +- 1e-3");
  c.require(drift <= 1e-4, "energy drift <= 1e-4");
  c.note("riccati " + fmt(rep.riccati_error, 3) + " T* " + fmt(rep.blowup.T_star, 3) +
         " drift " + fmt(drift, 3));
}

void hs_regularity(Context& cx, Checks& c, nlohmann::ordered_json& d) {
  const auto& run = cx.hs();
  const auto t0 = Clock::now();
  const auto rep = analyze_run(run, cx.fresh);
  const double secs = cx.hs_run_seconds + seconds_since(t0);
  d["alpha_hat"] = rep.holder.alpha_hat;
  d["alpha_stderr"] = rep.holder.stderr_;
  d["seconds"] = secs;
  c.require(std::fabs(rep.holder.alpha_hat - 0.6) <= 0.03, "alpha_hat = 0.600 +- 0.03");
  c.note("alpha_hat " + fmt(rep.holder.alpha_hat, 5));
  for (const auto& f : rep.rates) {
    d["rate_" + fmt(f.alpha)] = {{"exponent", f.exponent}, {"expected", f.expected}};
    c.require(std::fabs(f.exponent - f.expected) <= 0.1 * f.expected,
              "rate exponent at alpha " + fmt(f.alpha) + " within 10%");
    c.note("rate(" + fmt(f.alpha) + ") " + fmt(f.exponent, 5));
  }
  c.require(secs < 300, "run and analysis in under 5 min");
}

void ch_desk_scale(Context& cx, Checks& c, nlohmann::ordered_json& d) {
  const std::vector<double> eps{0.2, 0.1, 0.05};
  const std::vector<double> gam{0.0, 0.5};
  struct Job {
    double eps, gamma;
    BlowupReport rep;
    double seconds = 0;
    std::string error;
  };
  std::vector<Job> jobs;
  for (double g : gam)
    for (double e : eps) jobs.push_back({e, g, {}, 0, {}});

  auto work = [&cx](Job& j) {
    const auto t0 = Clock::now();
    try {
      InitialDataSpec s;
      s.equation = Equation::CH;
      s.epsilon = j.eps;
      s.gamma = j.gamma;
      auto run = run_to_blowup(s, RunOptions{}, cx.fresh);
      j.rep = analyze_run(run, cx.fresh);
    } catch (const std::exception& e) {
      j.error = e.what();
    }
    j.seconds = seconds_since(t0);
  };
  const std::size_t width = std::max(1u, cx.opt.jobs);
  for (std::size_t b = 0; b < jobs.size(); b += width) {
    std::vector<std::future<void>> fs;
    for (std::size_t k = b; k < std::min(jobs.size(), b + width); ++k)
      fs.push_back(std::async(std::launch::async, work, std::ref(jobs[k])));
    for (auto& f : fs) f.get();
  }

  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& j : jobs) {
    const std::string tag = "eps " + fmt(j.eps) + " gamma " + fmt(j.gamma);
    if (!j.error.empty()) {
      c.require(false, tag + ": " + j.error);
      runs.push_back({{"epsilon", j.eps}, {"gamma", j.gamma}, {"error", j.error}});
      continue;
    }
    const auto& r = j.rep;
    runs.push_back({{"epsilon", j.eps}, {"gamma", j.gamma}, {"energy_drift", r.energy_drift},
                    {"max_abs_u", r.max_abs_u}, {"u_bound", r.u_bound},
                    {"rate_b", r.blowup.rate}, {"T_star", r.blowup.T_star},
                    {"alpha_hat", r.holder.alpha_hat}, {"seconds", j.seconds}});
    c.require(r.energy_drift <= 1e-4, tag + ": energy drift <= 1e-4");
    c.require(r.max_abs_u <= r.u_bound, tag + ": |u| within the a priori bound");
    c.require(std::fabs(r.blowup.rate - 1) <= 0.05, tag + ": rate exponent 1 +- 5%");
    c.require(j.seconds < 900, tag + ": under 15 min");
    if (j.eps == eps.back())
      c.require(std::fabs(r.holder.alpha_hat - 0.6) <= 0.05, tag + ": alpha_hat 0.60 +- 0.05");
  }
  d["runs"] = runs;

  // |T*| against eps: decreasing, and its power law fitted in logs
  for (double g : gam) {
    std::vector<double> le, lt;
    double prev = INFINITY, c_max = 0;
    bool decreasing = true, ok = true;
    for (const auto& j : jobs) {
      if (j.gamma != g) continue;
      if (!j.error.empty()) {
        ok = false;
        break;
      }
      const double a = std::fabs(j.rep.blowup.T_star);
      decreasing = decreasing && a < prev;
      prev = a;
      c_max = std::max(c_max, a / std::pow(j.eps, 3));
      le.push_back(std::log(j.eps));
      lt.push_back(std::log(a));
    }
    if (!ok) continue;
    const auto lf = fit_line(le, lt);
    const std::string tag = "gamma " + fmt(g);
    d["T_star_scaling_gamma_" + fmt(g)] = {
        {"C", c_max}, {"power", lf.slope}, {"power_stderr", lf.slope_stderr}};
    c.require(decreasing, tag + ": |T*| decreasing with eps");
    c.require(lf.slope >= 3 - 2 * lf.slope_stderr - 0.05, tag + ": |T*| <= C eps^3");
    c.note(tag + " C " + fmt(c_max, 3) + " power " + fmt(lf.slope, 3));
  }
  for (const auto& j : jobs)
    if (j.error.empty() && j.eps == eps.back())
      c.note("alpha_hat(eps 0.05, gamma " + fmt(j.gamma) + ") " + fmt(j.rep.holder.alpha_hat, 4));
}

void burgers_discrimination(Context& cx, Checks& c, nlohmann::ordered_json& d) {
  InitialDataSpec s;
  s.equation = Equation::Burgers;
  auto run = run_to_blowup(s, RunOptions{}, cx.fresh);
  auto rep = analyze_run(run, cx.fresh);
  const double a = rep.holder.alpha_hat, se = rep.holder.stderr_;
  d["alpha_hat"] = a;
  d["alpha_stderr"] = se;
  c.require(std::fabs(a - 1.0 / 3) <= 0.03, "Burgers alpha_hat = 1/3 +- 0.03");
  c.require(std::fabs(0.6 - a) >= 5 * se, "alpha_hat separated from 3/5 by 5 stderr");

  std::vector<double> grid{0.0};
  for (int i = 0; i <= 400; ++i) grid.push_back(1e-3 * std::pow(1e7, i / 400.0));
  const auto bp = burgers_profile(grid);
  const auto sv = tail_exponent(bp.nodes, bp.v, 1e3, 1e4);
  const auto su = tail_exponent(cx.fresh.nodes, cx.fresh.u, 1e3, 1e4);
  d["tail_exponent_burgers"] = {{"slope", sv.slope}, {"stderr", sv.slope_stderr}};
  d["tail_exponent_cusp"] = {{"slope", su.slope}, {"stderr", su.slope_stderr}};
  c.require(std::fabs(sv.slope - 1.0 / 3) <= 0.01, "Burgers tail exponent 1/3");
  c.require(std::fabs(su.slope - 0.6) <= 0.01, "cusp tail exponent 3/5");
  const double sep = std::hypot(sv.slope_stderr, su.slope_stderr);
  c.require(std::fabs(su.slope - sv.slope) >= 5 * sep, "tail exponents separated by 5 stderr");
  c.note("alpha_hat " + fmt(a, 5) + " (stderr " + fmt(se, 2) + "), tails " + fmt(sv.slope, 4) +
         " vs " + fmt(su.slope, 4));
}

void calibration(Context& cx, Checks& c, nlohmann::ordered_json& d) {
  // pure cusps u = us - k sign(x - xs) |x - xs|^a on jittered geometric radii
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  double cusp_err = 0;
  for (double a : {1.0 / 3, 0.5, 0.6}) {
    const double xs = 0.37, us = -1.2;
    std::vector<double> x, u;
    for (double r = 1e-8; r < 1e-1; r *= 1.07 * jitter(rng))
      for (double sg : {-1.0, 1.0}) {
        x.push_back(xs + sg * r);
        u.push_back(us - 2.5 * sg * std::pow(r, a));
      }
    cusp_err = std::max(cusp_err, std::fabs(holder_exponent(x, u, xs, us, 1e-6, 1e-3).alpha_hat - a));
  }
  d["cusp_max_error"] = cusp_err;
  c.require(cusp_err <= 1e-3, "pure cusps recovered to 1e-3");

  // 1/|g| = a (T - t)^b
  double rate_err = 0;
  for (auto [T, b, a] : {std::tuple{0.5, 1.0, 1.0}, std::tuple{0.3, 1.2, 2.5}}) {
    std::vector<double> t, g;
    for (int i = 0; i < 50; ++i) {
      const double dt = 0.1 * std::pow(10.0, -3.0 * i / 49);
      t.push_back(T - dt);
      g.push_back(-1.0 / (a * std::pow(dt, b)));
    }
    const auto f = fit_blowup_time(t, g);
    rate_err = std::max({rate_err, std::fabs(f.T_star - T), std::fabs(f.rate - b),
                         std::fabs(f.a - a) / a});
  }
  d["rate_history_max_error"] = rate_err;
  c.require(rate_err <= 1e-6, "rate histories recovered to 1e-6");

  const auto& t = cx.under_test;
  // odd symmetry of evaluation and monotonicity of the table
  bool odd = true, mono = true;
  for (double ly = -6; ly <= 6; ly += 0.05) {
    const double y = std::pow(10.0, ly);
    const auto p = eval_profile(t, y), m = eval_profile(t, -y);
    odd = odd && p.u + m.u == 0.0 && p.du == m.du && p.d2u == -m.d2u;
  }
  for (std::size_t i = 1; i < t.size(); ++i)
    mono = mono && t.nodes[i] > t.nodes[i - 1] && t.u[i] <= t.u[i - 1] && t.du[i] >= -2.0 &&
           t.du[i] <= 0.0 && t.d2u[i] >= 0.0;
  c.require(odd, "odd symmetry");
  c.require(mono, "monotone table");

  // U_4(y) = U_1(2y) / 2
  double resc = 0;
  const auto t4 = rescale_beta(t, 4.0);
  for (double ly = -4; ly <= 4; ly += 0.1) {
    const double y = std::pow(10.0, ly);
    const double b = eval_profile(t, 2 * y).u;
    resc = std::max(resc, std::fabs(2 * eval_profile(t4, y).u - b) / std::max(1.0, std::fabs(b)));
  }
  const double d3_4 = third_derivative_at_origin(t4);
  d["rescale_error"] = resc;
  d["rescaled_d3u0"] = d3_4;
  c.require(resc <= 1e-12 && std::fabs(d3_4 / 1024 - 1) <= 1e-3, "rescale_beta");

  // envelope audit: the profile passes, a 1.5x gradient fails
  SelfSimilarData sd;
  for (int side : {-1, 1})
    for (int i = 0; i < 2000; ++i) {
      const double y = side * 1e-4 * std::pow(1e8, i / 1999.0);
      const auto p = eval_profile(t, y);
      sd.y.push_back(y);
      sd.U.push_back(p.u);
      sd.Uy.push_back(p.du);
    }
  sd.y.push_back(0.0);
  sd.U.push_back(0.0);
  sd.Uy.push_back(-2.0);
  std::vector<std::size_t> idx(sd.y.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return sd.y[a] < sd.y[b]; });
  SelfSimilarData sorted;
  for (auto i : idx) {
    sorted.y.push_back(sd.y[i]);
    sorted.U.push_back(sd.U[i]);
    sorted.Uy.push_back(sd.Uy[i]);
  }
  const bool clean = envelope_audit(sorted, cx.fresh).passed;
  for (auto& v : sorted.Uy) v *= 1.5;
  const bool scaled = envelope_audit(sorted, cx.fresh).passed;
  d["audit_profile_passes"] = clean;
  d["audit_scaled_gradient_fails"] = !scaled;
  c.require(clean && !scaled, "envelope audit separates the profile from a scaled gradient");
  c.note("cusp err " + fmt(cusp_err, 2) + ", rate err " + fmt(rate_err, 2) + ", rescale err " +
         fmt(resc, 2));
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Context&, Checks&, nlohmann::ordered_json&)> run;
};

}  // namespace

AcceptanceResult run_acceptance(const AcceptanceOptions& opt) {
  if (opt.jobs == 0) throw ConfigError("acceptance: jobs must be positive");
  Context cx{opt, {}, {}, 0, "built", std::nullopt, 0};
  {
    const auto t0 = Clock::now();
    cx.fresh = build_profile(ProfileParams{});
    cx.profile_seconds = seconds_since(t0);
  }
  if (opt.profile_fixture) {
    const auto t0 = Clock::now();
    cx.under_test = read_profile(*opt.profile_fixture, false);
    cx.profile_seconds = seconds_since(t0);
    cx.profile_source = opt.profile_fixture->string();
  } else {
    cx.under_test = cx.fresh;
  }

  const std::vector<Criterion> all{
      {1, "profile constants", profile_constants},
      {2, "profile asymptotics", profile_asymptotics},
      {3, "profile consistency", profile_consistency},
      {4, "profile inequalities", inequalities},
      {5, "HS exactness", hs_exactness},
      {6, "HS regularity", hs_regularity},
      {7, "CH desk-scale", ch_desk_scale},
      {8, "Burgers discrimination", burgers_discrimination},
      {9, "estimator calibration", calibration},
  };
  for (int k : opt.only)
    if (k < 1 || k > 9) throw ConfigError("acceptance: no criterion " + std::to_string(k));

  AcceptanceResult res;
  for (const auto& cr : all) {
    if (opt.quick && cr.id > 6) continue;
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), cr.id) == opt.only.end())
      continue;
    CriterionResult r;
    r.id = cr.id;
    r.name = cr.name;
    Checks c;
    const auto t0 = Clock::now();
    try {
      cr.run(cx, c, r.data);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    r.seconds = seconds_since(t0);
    r.passed = c.ok();
    r.detail = c.detail();
    res.passed = res.passed && r.passed;
    res.criteria.push_back(std::move(r));
  }
  return res;
}

std::string format_line(const CriterionResult& c) {
  return std::string(c.passed ? "[PASS] " : "[FAIL] ") + std::to_string(c.id) + " " + c.name +
         " (" + fmt(c.seconds, 3) + " s): " + c.detail;
}

nlohmann::ordered_json to_json(const AcceptanceResult& r) {
  nlohmann::ordered_json j;
  j["passed"] = r.passed;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const auto& c : r.criteria)
    cs.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail},
                  {"seconds", c.seconds}, {"data", c.data}});
  j["criteria"] = cs;
  return j;
}

}  // namespace cusplab
