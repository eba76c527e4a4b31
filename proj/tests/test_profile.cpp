#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "cusplab/errors.hpp"
#include "cusplab/numerics.hpp"
#include "cusplab/profile.hpp"

using namespace cusplab;

namespace {

const ProfileTable& table1() {
  static const ProfileTable t = build_profile(ProfileParams{});
  return t;
}

// Independent oracle: the profile parameterized by a = -U' in (0, 2).
struct Oracle {
  double y, u, d2u;
};
Oracle closed_form(double a, double beta) {
  const double sb = std::sqrt(beta);
  const double r = std::sqrt(2.0 - a);
  return {r * (2 * a * a + 2 * a + 3) / (30 * sb * std::pow(a, 2.5)),
          -r * (1 + a) / (6 * sb * std::pow(a, 1.5)), 2 * sb * r * std::pow(a, 3.5)};
}

// Plain bisection on the increasing map V -> (2V-1)/(5-2V)^5.
double v_bisect(double w, double beta) {
  double lo = 0.5, hi = 2.5;
  const double target = beta * w * w;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double val = (2 * mid - 1) / std::pow(5 - 2 * mid, 5);
    (val < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("v_of_w limits and bisection oracle") {
  CHECK(v_of_w(0.0, 1.0) == 0.5);
  CHECK(v_of_w(1e12, 1.0) == doctest::Approx(2.5).epsilon(1e-4));
  CHECK(v_of_w(1e12, 1.0) < 2.5);
  CHECK(std::fabs(v_of_w(1.0, 1.0) - v_bisect(1.0, 1.0)) < 1e-14);
  for (double w : {1e-6, 1e-3, 0.3, 7.0, 450.0})
    CHECK(std::fabs(v_of_w(w, 2.0) - v_bisect(w, 2.0)) < 1e-13);
  double prev = 0.5;
  for (double w = 1e-4; w < 1e6; w *= 1.7) {
    double v = v_of_w(w, 1.0);
    CHECK(v >= prev);
    CHECK(v_of_w(-w, 1.0) == v);
    prev = v;
  }
  CHECK_THROWS_AS(v_of_w(1.0, 1.0, 0.0), ConfigError);
}

TEST_CASE("table constraints at the origin and bounds") {
  const auto& t = table1();
  CHECK(t.nodes[0] == 0.0);
  CHECK(t.u[0] == 0.0);
  CHECK(t.du[0] == -2.0);
  CHECK(t.d2u[0] == 0.0);
  CHECK(t.y_max == 1e4);
  for (std::size_t i = 1; i < t.size(); ++i) {
    CHECK_MESSAGE(t.nodes[i] > t.nodes[i - 1], "nodes increasing");
    CHECK(t.du[i] >= -2.0);
    CHECK(t.du[i] <= 0.0);
    CHECK(t.u[i] <= t.u[i - 1]);
    CHECK(t.d2u[i] >= 0.0);
    CHECK(std::fabs(t.u[i]) <= 2 * t.nodes[i]);
  }
}

TEST_CASE("closed-form and implicit-relation consistency at every node") {
  const auto& t = table1();
  double worst_c = 0, worst_w = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double du = t.du[i];
    const double cf = 2 * std::sqrt(t.beta) * std::sqrt(2 + du) * std::pow(-du, 3.5);
    worst_c = std::max(worst_c, std::fabs(t.d2u[i] - cf));
    const double w = t.u[i] + 2.5 * t.nodes[i];
    const double v = du + 2.5;
    worst_w = std::max(worst_w, std::fabs(t.beta * w * w - (2 * v - 1) / std::pow(5 - 2 * v, 5)) /
                                    std::max(1.0, t.beta * w * w));
  }
  CHECK(worst_c <= 1e-10);
  CHECK(worst_w <= 1e-8);
  CHECK(t.residual_max <= 1e-8);
  CHECK(std::fabs(profile_residual(t).value) == t.residual_max);
}

TEST_CASE("integrated table matches the closed-form parameterization") {
  const auto& t = table1();
  double worst = 0;
  for (double a = 1.999; a > 0.0121; a *= 0.93) {
    auto o = closed_form(a, 1.0);
    if (o.y > t.y_max) continue;
    auto p = eval_profile(t, o.y);
    worst = std::max(worst, std::fabs(p.u - o.u) / std::max(1.0, std::fabs(o.u)));
    CHECK(p.du == doctest::Approx(-a).epsilon(1e-9));
    CHECK(p.d2u == doctest::Approx(o.d2u).epsilon(1e-8));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("third derivative at the origin") {
  CHECK(third_derivative_at_origin(table1()) == doctest::Approx(256.0).epsilon(1e-6));
}

TEST_CASE("tail limits") {
  const auto& t = table1();
  const double c = std::pow(50.0, -0.2);
  auto at_max = tail_limits(t, 1e4);
  CHECK(std::fabs(at_max.gradient / c - 1) < 0.01);
  CHECK(std::fabs(at_max.value / c - 1) < 0.01);
  CHECK(std::fabs(at_max.curvature / c - 1) < 0.01);
  auto far = tail_limits(t, 1e6);
  CHECK(std::fabs(far.gradient / c - 1) < 1e-3);
  CHECK(std::fabs(far.value / c - 1) < 0.01);
  CHECK(std::fabs(far.curvature / c - 1) < 0.01);
  const double y = 10 * t.y_max;
  auto p = eval_profile(t, y);
  CHECK(std::fabs(p.u / (-(5.0 / 3.0) * c * std::pow(y, 0.6)) - 1) < 5e-3);
}

TEST_CASE("tail limits approach the constant monotonically") {
  const auto& t = table1();
  const double c = std::pow(50.0, -0.2);
  double pg = 1e9, pv = 1e9, pc = 1e9;
  for (double y = 30; y <= 1e4; y *= 1.5) {
    auto l = tail_limits(t, y);
    CHECK(std::fabs(l.gradient - c) < pg);
    CHECK(std::fabs(l.value - c) < pv);
    CHECK(std::fabs(l.curvature - c) < pc);
    pg = std::fabs(l.gradient - c);
    pv = std::fabs(l.value - c);
    pc = std::fabs(l.curvature - c);
  }
}

TEST_CASE("parity of evaluation") {
  const auto& t = table1();
  auto z = eval_profile(t, 0.0);
  CHECK(z.u == 0.0);
  CHECK(z.du == -2.0);
  CHECK(z.d2u == 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ly(-6, 6);
  for (int i = 0; i < 200; ++i) {
    const double y = std::pow(10.0, ly(rng));
    auto p = eval_profile(t, y), m = eval_profile(t, -y);
    CHECK(p.u + m.u == 0.0);
    CHECK(p.du == m.du);
    CHECK(p.d2u == -m.d2u);
    CHECK(y * p.u <= 0.0);
    CHECK(std::fabs(p.u) <= 2 * y);
  }
}

TEST_CASE("asymptotic_state") {
  CHECK_THROWS_AS(asymptotic_state(-2.0, 1.0), DomainError);
  CHECK_THROWS_AS(asymptotic_state(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(asymptotic_state(0.5, 1.0), DomainError);
  for (double du : {-1.999, -1.5, -1.0, -0.3, -1e-3, -1e-6}) {
    auto s = asymptotic_state(du, 1.0);
    const double res = (1 + 0.5 * du) * du + (s.u + 2.5 * s.y) * s.d2u;
    CHECK(std::fabs(res) <= 1e-10);
  }
  auto s = asymptotic_state(-2.0 + 1e-9, 1.0);
  auto p = eval_profile(table1(), s.y);
  CHECK(s.y < 1e-5);
  CHECK(s.u == doctest::Approx(p.u).epsilon(1e-6));
  CHECK(p.du == doctest::Approx(-2.0 + 1e-9).epsilon(1e-12));
  // limits as du -> 0-
  auto f = asymptotic_state(-1e-9, 1.0);
  const double c = std::pow(50.0, -0.2);
  CHECK(std::pow(f.y, 0.4) * 1e-9 == doctest::Approx(c).epsilon(1e-6));
  CHECK(std::pow(f.y, 1.4) * f.d2u == doctest::Approx(0.4 * c).epsilon(1e-6));
}

TEST_CASE("rescale_beta") {
  const auto& t = table1();
  auto same = rescale_beta(t, 1.0);
  CHECK(same.nodes == t.nodes);
  CHECK(same.u == t.u);
  auto t4 = rescale_beta(t, 4.0);
  CHECK(t4.beta == 4.0);
  CHECK(t4.residual_max <= 1e-8);
  CHECK(third_derivative_at_origin(t4) == doctest::Approx(1024.0).epsilon(1e-5));
  auto l = tail_limits(t4, 1e6);
  CHECK(l.gradient == doctest::Approx(std::pow(200.0, -0.2)).epsilon(1e-3));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ly(-4, 4);
  for (int i = 0; i < 100; ++i) {
    const double y = std::pow(10.0, ly(rng));
    const double a = 2.0 * eval_profile(t4, y).u;
    const double b = eval_profile(t, 2.0 * y).u;
    CHECK(std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)));
  }
  CHECK_THROWS_AS(rescale_beta(t4, 2.0), ConfigError);
}

TEST_CASE("residual detects a corrupted slope") {
  ProfileTable bad = table1();
  CHECK(profile_residual(bad).y >= 0);
  std::size_t k = 10;
  REQUIRE(std::fabs(1 + bad.du[k]) > 0.5);
  bad.du[k] += 1e-3;
  CHECK(std::fabs(profile_residual(bad).value) >= 1e-4);
  CHECK(profile_residual(bad).y == bad.nodes[k]);
}

TEST_CASE("tightened tolerance agrees") {
  ProfileParams loose;
  loose.rel_tol = 1e-10;
  loose.abs_tol = 1e-12;
  auto a = build_profile(loose);
  const auto& b = table1();
  double worst = 0;
  for (std::size_t i = 0; i < b.size(); ++i)
    worst = std::max(worst, std::fabs(a.u[i] - b.u[i]) / std::max(1.0, std::fabs(b.u[i])));
  CHECK(worst < 1e-8);
  CHECK(a.residual_max <= 1e-8);
}

TEST_CASE("taylor_check") {
  auto r = taylor_check(table1());
  CHECK(r.passed);
  CHECK(r.nodes_in_window >= 8);
  CHECK(r.c3 == doctest::Approx(128.0 / 3.0).epsilon(1e-3));
  CHECK(r.max_even < 1e-9);
  ProfileParams p;
  p.beta = 3.0 / 128.0;
  auto r2 = taylor_check(build_profile(p));
  CHECK(r2.passed);
  CHECK(r2.c3 == doctest::Approx(1.0).epsilon(1e-3));
  ProfileParams coarse;
  coarse.n_samples = 64;
  CHECK_THROWS_AS(taylor_check(build_profile(coarse)), ConfigError);
}

TEST_CASE("parameter validation") {
  ProfileParams p;
  p.beta = 0;
  CHECK_THROWS_AS(build_profile(p), ConfigError);
  p = {};
  p.y_max = 0.5;
  CHECK_THROWS_AS(build_profile(p), ConfigError);
  p = {};
  p.rel_tol = 1e-3;
  CHECK_THROWS_AS(build_profile(p), ConfigError);
  p = {};
  p.n_samples = 10;
  CHECK_THROWS_AS(build_profile(p), ConfigError);
}

TEST_CASE("csv round trip is bit exact") {
  const auto dir = std::filesystem::temp_directory_path() / "cusplab_profile_rt";
  std::filesystem::create_directories(dir);
  const auto path = dir / "profile.csv";
  const auto& t = table1();
  const std::string h1 = write_profile(t, path);
  auto back = read_profile(path);
  CHECK(back.nodes == t.nodes);
  CHECK(back.u == t.u);
  CHECK(back.du == t.du);
  CHECK(back.d2u == t.d2u);
  CHECK(back.beta == t.beta);
  CHECK(profile_csv(back) == profile_csv(t));
  CHECK(git_blob_hash(profile_csv(back)) == h1);
  {
    std::ofstream f(path, std::ios::app);
    f << "1e5,0,0,0\n";
  }
  CHECK_THROWS_AS(read_profile(path), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("git blob hash matches git") {
  // `printf 'hello\n' | git hash-object --stdin`
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}
