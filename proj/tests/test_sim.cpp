#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cusplab/errors.hpp"
#include "cusplab/profile.hpp"
#include "cusplab/sim.hpp"

using namespace cusplab;

namespace {

const ProfileTable& table1() {
  static const ProfileTable t = build_profile(ProfileParams{});
  return t;
}

// Uniform three-field state on given positions, reference in the middle.
FieldState flat_state(Equation eq, const std::vector<double>& x, double u0, double g0) {
  FieldState s;
  s.equation = eq;
  s.t = -1;
  const std::size_t n = x.size();
  s.x = x;
  s.u.assign(n, u0);
  s.g.assign(n, g0);
  s.lj.assign(n, 0.0);
  s.g0 = s.g;
  s.inserted.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) s.label.push_back(static_cast<std::int64_t>(i));
  for (std::size_t i = 0; i + 1 < n; ++i) s.da.push_back(x[i + 1] - x[i]);
  s.ref = n / 2;
  s.origin = x[s.ref];
  rebuild_positions(s);
  return s;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return v;
}

// p(x) = int K(x - z) f(z) dz for f linear between markers and zero outside.
double pressure_oracle(const std::vector<double>& x, const std::vector<double>& f, double at,
                       bool derivative) {
  double sum = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    auto fz = [&](double z) {
      const double w = (z - x[i]) / (x[i + 1] - x[i]);
      const double fl = f[i] + w * (f[i + 1] - f[i]);
      const double k = 0.5 * std::exp(-std::fabs(at - z));
      return derivative ? (z > at ? k : -k) * fl : k * fl;
    };
    double a = x[i], b = x[i + 1];
    if (at > a && at < b) {
      sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fz, a, at, 8, 1e-14);
      sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fz, at, b, 8, 1e-14);
    } else {
      sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fz, a, b, 8, 1e-14);
    }
  }
  return sum;
}

}  // namespace

TEST_CASE("spec validation and derived parameters") {
  InitialDataSpec s;
  s.equation = Equation::CH;
  s.epsilon = 0.1;
  CHECK(s.beta() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.k3_value() == doctest::Approx(256e6).epsilon(1e-14));
  CHECK(s.t0() == -0.1);
  CHECK(s.theta() == doctest::Approx((6.0 / 13 - 0.46) / 3).epsilon(1e-14));
  CHECK(s.radius() == doctest::Approx(50 * std::pow(0.1, 2.5)).epsilon(1e-14));
  s.Theta = 0.4;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.Theta = 0.46;
  s.k3 = 1.0;  // below eps^{-(1 + delta0)}
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK(parse_equation("hs") == Equation::HS);
  CHECK(equation_name(Equation::Burgers) == "burgers");
  CHECK_THROWS_AS(parse_equation("kdv"), ConfigError);
}

TEST_CASE("marker layout is symmetric and contains the origin") {
  InitialDataSpec s;
  auto x = marker_positions(s);
  REQUIRE(x.size() % 2 == 1);
  CHECK(x[x.size() / 2] == 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == -x[x.size() - 1 - i]);
  for (std::size_t i = 1; i < x.size(); ++i) CHECK(x[i] > x[i - 1]);
  CHECK(x.back() == s.extent());
}

TEST_CASE("HS seed with k_v = 1 has the profile values at the origin") {
  for (double bv : {1.0, 2.0}) {
    InitialDataSpec s;
    s.beta_v = bv;
    auto d = build_initial_data(s, table1());
    const auto& st = d.state;
    const std::size_t mid = st.size() / 2;
    CHECK(st.g[mid] == -2.0);
    CHECK(st.u[mid] == 0.0);
    double d3 = 0;
    for (const auto& c : d.report.checks)
      if (c.name == "third_derivative_at_origin") d3 = c.value;
    CHECK(d3 == doctest::Approx(256 * bv).epsilon(1e-3));
    // k_v recovered from the gradient at the origin
    CHECK(-st.g[mid] / 2 == 1.0);
    CHECK(d.report.passed);
    for (std::size_t i = 0; i < st.size(); ++i) CHECK(st.u[i] == -st.u[st.size() - 1 - i]);
  }
}

TEST_CASE("untapered seed reproduces the profile exactly in the core") {
  InitialDataSpec s;
  s.taper = false;
  auto d = build_initial_data(s, table1());
  for (const auto& c : d.report.checks)
    if (c.name == "localization_core") CHECK(c.value == 0.0);

  InitialDataSpec c;
  c.equation = Equation::CH;
  c.epsilon = 0.1;
  c.taper = false;
  c.far_field = 1.0;
  auto dc = build_initial_data(c, table1());
  for (const auto& k : dc.report.checks)
    if (k.name == "localization_core") CHECK(k.value < 1e-2);  // beta rounds to 1 +- ulp
}

TEST_CASE("CH seed satisfies its point conditions and returns to zero") {
  InitialDataSpec s;
  s.equation = Equation::CH;
  s.epsilon = 0.1;
  auto d = build_initial_data(s, table1());
  CHECK(d.report.passed);
  const auto& st = d.state;
  const std::size_t mid = st.size() / 2;
  CHECK(st.g[mid] == doctest::Approx(-20.0).epsilon(1e-12));
  CHECK(st.u.front() == 0.0);
  CHECK(st.u.back() == 0.0);
  bool saw_tail = false, saw_return = false;
  for (const auto& c : d.report.checks) {
    if (c.name == "tail_decay") {
      saw_tail = true;
      CHECK(c.passed);
    }
    if (c.name == "return_to_zero") {
      saw_return = true;
      CHECK(c.passed);
    }
  }
  CHECK(saw_tail);
  CHECK(saw_return);
  // the global minimum of the gradient sits at the origin
  for (double g : st.g) CHECK(g >= st.g[mid]);
}

TEST_CASE("strict localization turns the taper envelope into an error") {
  InitialDataSpec s;
  s.strict_localization = true;
  try {
    build_initial_data(s, table1());
    FAIL("expected InitialDataError");
  } catch (const InitialDataError& e) {
    CHECK(e.condition == "localization_taper");
    CHECK(e.worst_x > s.radius());
  }
}

TEST_CASE("zero field is a fixed point of every stepper") {
  auto x = linspace(-5, 5, 41);
  for (Equation eq : {Equation::HS, Equation::CH, Equation::Burgers}) {
    auto s = flat_state(eq, x, 0.0, 0.0);
    const auto before = s;
    bool ok = eq == Equation::HS ? step_hs(s, 0.01)
              : eq == Equation::CH ? step_ch(s, 0.01, 0.0)
                                   : step_burgers(s, 0.01);
    REQUIRE(ok);
    CHECK(s.u == before.u);
    CHECK(s.g == before.g);
    CHECK(s.x == before.x);
    CHECK(s.origin == before.origin);
  }
}

TEST_CASE("HS gradient follows the Riccati closed form") {
  // g0 = -2 everywhere: the constant Riccati solution blows up at t = 0
  auto x = linspace(-1, 1, 21);
  auto s = flat_state(Equation::HS, x, 0.0, -2.0);
  for (std::size_t i = 0; i < x.size(); ++i) s.u[i] = -2 * x[i];
  const double dt = 1e-3;
  for (int k = 0; k < 900; ++k) REQUIRE(step_hs(s, dt));
  const double exact = -2.0 / (-s.t);
  for (double g : s.g) CHECK(std::fabs(g - exact) <= 1e-12 * std::fabs(exact));
  // the Jacobian follows (1 + g0 (t - t0) / 2)^2
  const double w = 1 - (s.t + 1);
  for (double lj : s.lj) CHECK(std::exp(lj) == doctest::Approx(w * w).epsilon(1e-12));
}

TEST_CASE("CH pressure matches quadrature of the kernel") {
  std::vector<double> x;
  for (double v = -6; v <= 6; v += 0.37 + 0.05 * std::sin(v)) x.push_back(v);
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) f[i] = std::exp(-x[i] * x[i]) + 0.3 * std::cos(x[i]);
  std::vector<double> p, px;
  ch_pressure(x, f, p, px);
  for (std::size_t i = 0; i < x.size(); i += 3) {
    CHECK(p[i] == doctest::Approx(pressure_oracle(x, f, x[i], false)).epsilon(1e-11));
    CHECK(px[i] == doctest::Approx(pressure_oracle(x, f, x[i], true)).epsilon(1e-10));
  }
  // fine segments use the series branch of the weights
  auto xf = linspace(-1, 1, 4001);
  std::vector<double> ff(xf.size());
  for (std::size_t i = 0; i < xf.size(); ++i) ff[i] = 1 + xf[i];
  ch_pressure(xf, ff, p, px);
  CHECK(p[2000] == doctest::Approx(pressure_oracle(xf, ff, 0.0, false)).epsilon(1e-12));
}

TEST_CASE("constant u gives p = c^2 in the interior of a wide core") {
  const double c = 0.7;
  auto x = linspace(-40, 40, 8001);
  std::vector<double> f(x.size(), c * c), p, px;
  ch_pressure(x, f, p, px);
  const std::size_t mid = x.size() / 2;
  CHECK(p[mid] == doctest::Approx(c * c).epsilon(1e-12));
  CHECK(std::fabs(px[mid]) < 1e-12);
  // so u does not move there
  auto s = flat_state(Equation::CH, x, c, 0.0);
  auto before = s.u[mid];
  REQUIRE(step_ch(s, 0.01, 0.0));
  CHECK(std::fabs(s.u[mid] - before) < 1e-12);
}

TEST_CASE("HS run: Riccati exactness, frozen blow-up time and conserved energy") {
  InitialDataSpec s;
  RunOptions o;
  o.g_max = 2e3;
  auto r = run_to_blowup(s, o, table1());
  CHECK(r.stop_reason == "gradient_threshold");
  CHECK(riccati_error(r, 1e3) < 1e-6);
  CHECK(energy_drift(r, 1e3) < 1e-4);
  const double h0 = r.history.front().energy_x;
  for (const auto& rec : r.history) {
    CHECK(std::fabs(rec.mod.tau) < 1e-6);
    CHECK(std::fabs(rec.energy_x - h0) < 1e-4 * h0);
  }
  // the global minimum is recovered at the tracked location
  const auto& last = r.snapshots.back();
  double gmin = 0;
  for (double g : last.state.g) gmin = std::min(gmin, g);
  CHECK(last.mod.g_min <= gmin);
  CHECK(last.mod.g_min == doctest::Approx(gmin).epsilon(1e-3));
}

TEST_CASE("CH run: energy, a priori bounds and the initial frame") {
  for (double gamma : {0.0, 0.5}) {
    InitialDataSpec s;
    s.equation = Equation::CH;
    s.epsilon = 0.2;
    s.gamma = gamma;
    RunOptions o;
    auto r = run_to_blowup(s, o, table1());
    CHECK(r.stop_reason == "gradient_threshold");
    const double thr = 1e3 / s.epsilon;
    CHECK(energy_drift(r, thr) < 1e-4);
    const double h0 = r.history.front().energy;
    for (const auto& rec : r.history) {
      CHECK(rec.max_abs_u <= std::sqrt(h0 / 2) * (1 + 1e-6));
      CHECK(rec.max_abs_p <= gamma * std::sqrt(h0) + 0.5 * h0);
      CHECK(rec.max_abs_px <= gamma * std::sqrt(h0) + 0.5 * h0);
    }
    const auto& m0 = r.history.front().mod;
    CHECK(m0.xi_abs == 0.0);
    CHECK(m0.kappa == 0.0);
    CHECK(m0.tau - m0.t == doctest::Approx(s.epsilon).epsilon(1e-12));
    CHECK(m0.s == doctest::Approx(-std::log(s.epsilon)).epsilon(1e-12));
  }
}

TEST_CASE("runs are bit-for-bit deterministic") {
  InitialDataSpec s;
  s.equation = Equation::CH;
  s.epsilon = 0.2;
  RunOptions o;
  o.g_max = 1e4;
  auto a = run_to_blowup(s, o, table1());
  auto b = run_to_blowup(s, o, table1());
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    CHECK(a.snapshots[k].state.x == b.snapshots[k].state.x);
    CHECK(a.snapshots[k].state.u == b.snapshots[k].state.u);
    CHECK(a.snapshots[k].state.g == b.snapshots[k].state.g);
  }
  REQUIRE(a.history.size() == b.history.size());
  CHECK(a.history.back().energy == b.history.back().energy);
}

TEST_CASE("run options are validated") {
  RunOptions o;
  o.cfl = 0;
  CHECK_THROWS_AS(o.validate(), ConfigError);
  RunOptions p;
  p.remark_ratio = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
