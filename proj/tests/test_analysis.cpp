#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cusplab/analysis.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/selfsim.hpp"

using namespace cusplab;

namespace {

const ProfileTable& table1() {
  static const ProfileTable t = build_profile(ProfileParams{});
  return t;
}

// Symmetric geometric positions around 0 from d_min to d_max.
std::vector<double> geometric_positions(double d_min, double d_max, int per_side) {
  std::vector<double> x;
  for (int i = per_side - 1; i >= 0; --i)
    x.push_back(-d_min * std::pow(d_max / d_min, static_cast<double>(i) / (per_side - 1)));
  x.push_back(0.0);
  for (int i = 0; i < per_side; ++i)
    x.push_back(d_min * std::pow(d_max / d_min, static_cast<double>(i) / (per_side - 1)));
  return x;
}

// Exact self-similar HS state u = d^{3/2} U(x / d^{5/2}), d = -t.
FieldState self_similar_state(double t, const std::vector<double>& x) {
  const double d = -t;
  FieldState s;
  s.equation = Equation::HS;
  s.t = t;
  s.x = x;
  for (double xi : x) {
    auto p = eval_profile(table1(), xi / std::pow(d, 2.5));
    s.u.push_back(std::pow(d, 1.5) * p.u);
    s.g.push_back(p.du / d);
  }
  return s;
}

}  // namespace

TEST_CASE("pure power cusps are recovered") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  for (double a : {1.0 / 3, 0.5, 0.6}) {
    const double xs = 0.37, us = -1.2;
    std::vector<double> x, u;
    for (double d = 1e-8; d < 1e-1; d *= 1.07 * jitter(rng)) {
      for (double sgn : {-1.0, 1.0}) {
        x.push_back(xs + sgn * d);
        u.push_back(us - 2.5 * sgn * std::pow(d, a));
      }
    }
    auto f = holder_exponent(x, u, xs, us, 1e-6, 1e-3);
    CHECK(std::fabs(f.alpha_hat - a) < 1e-3);
    CHECK(f.r2 > 0.999999);
    CHECK(f.n_left >= 12);
  }
}

TEST_CASE("sampled limiting cusp of the profile gives 3/5") {
  const double c = (5.0 / 3) * std::pow(50.0, -0.2);
  auto x = geometric_positions(1e-9, 1.0, 400);
  std::vector<double> u;
  for (double v : x) u.push_back(-c * (v < 0 ? -1 : 1) * std::pow(std::fabs(v), 0.6));
  auto f = holder_exponent(x, u, 0.0, 0.0, 1e-6, 1e-2);
  CHECK(f.alpha_hat == doctest::Approx(0.6).epsilon(1e-3));
}

TEST_CASE("starved window is refused") {
  auto x = geometric_positions(1e-3, 1.0, 30);
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i];
  CHECK_THROWS_AS(holder_exponent(x, u, 0.0, 0.0, 0.1, 0.2), FitError);
}

TEST_CASE("blow-up time fit recovers synthetic histories") {
  SUBCASE("linear reciprocal") {
    std::vector<double> t, g;
    for (int i = 0; i < 60; ++i) {
      const double d = 0.5 * std::pow(10.0, -3.0 * i / 59);
      t.push_back(0.5 - d);
      g.push_back(-1.0 / d);
    }
    auto f = fit_blowup_time(t, g);
    CHECK(std::fabs(f.T_star - 0.5) < 1e-6);
    CHECK(std::fabs(f.rate - 1.0) < 1e-6);
    CHECK(std::fabs(f.a - 1.0) < 1e-6);
    CHECK(f.T_star > t.back());
  }
  SUBCASE("general power") {
    const double T = 0.3, b = 1.2, a = 2.5;
    std::vector<double> t, g;
    for (int i = 0; i < 40; ++i) {
      const double d = std::pow(10.0, -1.0 - 2.5 * i / 39);
      t.push_back(T - d);
      g.push_back(-1.0 / (a * std::pow(d, b)));
    }
    auto f = fit_blowup_time(t, g);
    CHECK(std::fabs(f.T_star - T) < 1e-6);
    CHECK(std::fabs(f.rate - b) < 1e-6);
    CHECK(std::fabs(f.a - a) < 1e-6 * a);
  }
  SUBCASE("refusals") {
    std::vector<double> t, g;
    for (int i = 0; i < 30; ++i) {
      t.push_back(-1.0 + i * 0.03);
      g.push_back(-1.0 / (0.01 + std::pow(0.9, i)));
    }
    CHECK_THROWS_AS(fit_blowup_time(t, g), FitError);  // under two decades
    std::vector<double> t2(t.begin(), t.begin() + 10), g2(g.begin(), g.begin() + 10);
    CHECK_THROWS_AS(fit_blowup_time(t2, g2, 20, 0.1), FitError);
    auto g3 = g;
    std::swap(g3[5], g3[6]);
    CHECK_THROWS_AS(fit_blowup_time(t, g3, 20, 0.1), FitError);
  }
}

TEST_CASE("seminorm of simple functions") {
  auto x = geometric_positions(1e-6, 2.0, 2000);
  FieldState s;
  s.x = x;
  s.origin = 5.0;
  for (double v : x) {
    s.u.push_back(3 * v);
    s.g.push_back(3.0);
  }
  CHECK(holder_seminorm(s, 1.0, 3.5, 6.5, 5.0) == doctest::Approx(3.0).epsilon(1e-12));
  // C^{1/2} seminorm of sqrt|x| sign x is attained across the origin
  for (std::size_t i = 0; i < x.size(); ++i)
    s.u[i] = (x[i] < 0 ? -1 : 1) * std::sqrt(std::fabs(x[i]));
  const double q = holder_seminorm(s, 0.5, 3.5, 6.5, 5.0);
  CHECK(q == doctest::Approx(std::sqrt(2.0)).epsilon(1e-2));
  CHECK_THROWS_AS(holder_seminorm(s, 0.5, 100, 101, 100.5), FitError);
}

TEST_CASE("seminorm rates on exact self-similar states") {
  auto x = geometric_positions(1e-13, 10.0, 3000);
  std::vector<Snapshot> snaps;
  for (int k = 0; k <= 16; ++k) {
    const double t = -0.02 * std::pow(10.0, -k / 8.0);
    auto st = self_similar_state(t, x);
    snaps.push_back({st, track_modulation(st)});
  }
  for (double a : {0.7, 0.8, 1.0}) {
    auto f = holder_rate(snaps, a, 0.0, -10, 10);
    CHECK(f.exponent == doctest::Approx((5 * a - 3) / 2).epsilon(0.01));
  }
  auto flat = holder_rate(snaps, 0.6, 0.0, -10, 10);
  CHECK(std::fabs(flat.exponent) < 0.02);
  CHECK_THROWS_AS(holder_rate(snaps, 0.8, 0.0, -10, 10, 2.0, 512, 40), FitError);
}

TEST_CASE("frame identities after the self-similar change of variables") {
  auto x = geometric_positions(1e-10, 1.0, 800);
  auto st = self_similar_state(-1e-2, x);
  auto m = track_modulation(st);
  CHECK(m.tau == doctest::Approx(0.0).epsilon(1e-12));
  Scaling sc;
  auto d = to_self_similar(st, m, sc);
  const std::size_t mid = x.size() / 2;
  CHECK(d.U[mid] == 0.0);
  CHECK(d.Uy[mid] == doctest::Approx(-2.0).epsilon(1e-12));
  // U_yy(0) from the neighbours
  const double h = d.y[mid + 1] - d.y[mid];
  CHECK(std::fabs((d.Uy[mid + 1] - d.Uy[mid - 1]) / (2 * h)) < 1e-6);
  for (std::size_t i = 0; i < d.y.size(); i += 97) {
    auto p = eval_profile(table1(), d.y[i]);
    CHECK(d.Uy[i] == doctest::Approx(p.du).epsilon(1e-10));
  }
  std::vector<double> grid{-1e9, -1.0, 0.0, 0.5, 2.0};
  auto r = to_self_similar(st, m, sc, grid);
  CHECK(r.truncated);
  CHECK(r.y.size() == 4);
  CHECK(r.Uy[1] == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("envelope audit passes the profile and fails a scaled gradient") {
  SelfSimilarData d;
  for (double y : geometric_positions(1e-4, 1e4, 3000)) {
    auto p = eval_profile(table1(), y);
    d.y.push_back(y);
    d.U.push_back(p.u);
    d.Uy.push_back(p.du);
  }
  auto a = envelope_audit(d, table1());
  CHECK(a.passed);
  CHECK(a.d3u0 == doctest::Approx(256).epsilon(1e-4));
  REQUIRE(a.checks.size() == 6);
  for (const auto& c : a.checks) {
    INFO(c.name);
    CHECK(c.passed);
    CHECK(c.resolved);
  }
  for (auto& v : d.Uy) v *= 1.5;
  auto b = envelope_audit(d, table1());
  CHECK_FALSE(b.passed);
  CHECK(b.checks[0].name == "gradient_near");
  CHECK_FALSE(b.checks[0].passed);
}

TEST_CASE("HS run: cusp exponent and the rate family agree") {
  InitialDataSpec spec;
  RunOptions o;
  auto run = run_to_blowup(spec, o, table1());
  auto rep = analyze_run(run, table1());
  CHECK(std::fabs(rep.blowup.T_star) < 1e-3);
  CHECK(std::fabs(rep.blowup.rate - 1) < 1e-3);
  CHECK(rep.blowup.T_star > run.snapshots.back().state.t);
  CHECK(std::fabs(rep.holder.alpha_hat - 0.6) < 0.03);
  for (const auto& f : rep.rates) {
    INFO(f.alpha);
    CHECK(std::fabs(f.exponent - f.expected) <= 0.1 * f.expected);
  }
  CHECK(rep.riccati_error < 1e-6);
  auto j = to_json(rep);
  CHECK(j["equation"] == "hs");
  CHECK(j["envelope_checks"].size() == 6);
}
