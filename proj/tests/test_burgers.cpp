#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cusplab/analysis.hpp"
#include "cusplab/burgers.hpp"
#include "cusplab/errors.hpp"

using namespace cusplab;

namespace {

// V from y = -V/2 - V^3/8 by Cardano: with V = 2w, w^3 + w + y = 0.
double cubic_profile(double y) {
  const double q = y / 2;
  const double r = std::sqrt(q * q + 1.0 / 27);
  return 2 * (std::cbrt(-q + r) + std::cbrt(-q - r));
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g{0.0};
  for (int i = 0; i <= n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / n));
  return g;
}

}  // namespace

TEST_CASE("implicit relation for the Burgers profile slope") {
  CHECK(burgers_z_of_w(0.0) == 2.0);
  double prev = 2.0;
  for (double w = 1e-6; w < 1e6; w *= 2.5) {
    const double z = burgers_z_of_w(w);
    CHECK(std::fabs(3 * w * w * z * z * z + z - 2) < 1e-13);
    CHECK(z < prev);
    CHECK(burgers_z_of_w(-w) == z);
    prev = z;
  }
}

TEST_CASE("Burgers profile matches the cubic closed form") {
  auto g = log_grid(1e-4, 1e4, 300);
  auto p = burgers_profile(g);
  CHECK(p.dv[0] == -2.0);
  CHECK(p.v[0] == 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = cubic_profile(g[i]);
    CHECK(std::fabs(p.v[i] - v) <= 1e-9 * std::max(1.0, std::fabs(v)));
    // V' from differentiating the closed form
    const double dv = -1.0 / (0.5 + 3 * v * v / 8);
    CHECK(std::fabs(p.dv[i] - dv) <= 1e-9 * std::fabs(dv));
  }
  CHECK_THROWS_AS(burgers_profile({1.0, 0.5}), ConfigError);
}

TEST_CASE("tail exponents separate the Burgers and cusp profiles") {
  auto g = log_grid(1e-3, 1e4, 400);
  auto p = burgers_profile(g);
  auto table = build_profile(ProfileParams{});
  const double sv = tail_exponent(p.nodes, p.v, 1e3, 1e4).slope;
  const double su = tail_exponent(table.nodes, table.u, 1e3, 1e4).slope;
  CHECK(std::fabs(sv - 1.0 / 3) < 0.01);
  CHECK(std::fabs(su - 0.6) < 0.01);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g[i] >= 100) CHECK(std::fabs(eval_profile(table, g[i]).u) > std::fabs(p.v[i]));
}

TEST_CASE("oracle on linear data") {
  BurgersSeed s;
  s.u0 = [](double x) { return -x; };
  s.du0 = [](double) { return -1.0; };
  s.t0 = 0.0;
  s.x_lo = -1;
  s.x_hi = 1;
  CHECK(breaking_time(s) == doctest::Approx(1.0).epsilon(1e-14));
  std::vector<double> x{-0.3, -0.1, 0.0, 0.2, 0.35};
  auto st = burgers_oracle(s, 0.4, x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(st.u[i] == doctest::Approx(-x[i] / 0.6).epsilon(1e-13));
    CHECK(st.g[i] == doctest::Approx(-1 / 0.6).epsilon(1e-13));
  }
  CHECK_THROWS_AS(burgers_oracle(s, 1.0, x), DomainError);
  CHECK_THROWS_AS(burgers_oracle(s, 0.4, {0.9}), DomainError);
}

TEST_CASE("cubic seed: gradient minimum follows -1/(T - t)") {
  auto s = cubic_burgers_seed();
  CHECK(std::fabs(breaking_time(s)) < 1e-12);
  for (double t : {-0.9, -0.5, -0.1, -1e-3}) {
    auto st = burgers_oracle(s, t, {0.0});
    CHECK(st.g[0] == doctest::Approx(1.0 / t).epsilon(1e-13));
    CHECK(st.u[0] == 0.0);
  }
  CHECK_THROWS_AS(burgers_oracle(s, 0.0, {0.0}), DomainError);
}

TEST_CASE("Burgers solver agrees with the oracle up to the threshold") {
  InitialDataSpec spec;
  spec.equation = Equation::Burgers;
  RunOptions o;
  auto table = build_profile(ProfileParams{});
  auto r = run_to_blowup(spec, o, table);
  CHECK(r.stop_reason == "gradient_threshold");
  auto seed = cubic_burgers_seed();
  for (const auto& sn : {r.snapshots[r.snapshots.size() / 2], r.snapshots.back()}) {
    const auto& st = sn.state;
    std::vector<double> xa;
    for (double x : st.x) xa.push_back(std::clamp(st.origin + x, -1.0, 1.0));
    // the map is the identity at the ends because u0(+-1) = 0
    auto ex = burgers_oracle(seed, st.t, xa);
    double umax = 0, err = 0, gerr = 0;
    for (std::size_t i = 0; i < st.size(); ++i) {
      umax = std::max(umax, std::fabs(ex.u[i]));
      err = std::max(err, std::fabs(st.u[i] - ex.u[i]));
      gerr = std::max(gerr, std::fabs(st.g[i] - ex.g[i]) / std::max(1.0, std::fabs(ex.g[i])));
    }
    CHECK(err <= 1e-7 * umax);
    CHECK(gerr <= 1e-5);
  }
  CHECK(riccati_error(r, 1e3) < 1e-10);
  CHECK(std::fabs(r.history.back().mod.tau) < 1e-10);
}
