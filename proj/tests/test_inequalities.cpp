#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cusplab/errors.hpp"
#include "cusplab/inequalities.hpp"
#include "cusplab/profile.hpp"

using namespace cusplab;

namespace {

const ProfileTable& table1() {
  static const ProfileTable t = build_profile(ProfileParams{});
  return t;
}

// Profile at y from the a = -U' parameterization, found by bisection in a.
struct Exact {
  double u, du, d2u;
};
Exact exact_at(double y) {
  auto y_of = [](double a) {
    return std::sqrt(2 - a) * (2 * a * a + 2 * a + 3) / (30 * std::pow(a, 2.5));
  };
  double lo = 1e-300, hi = 2.0;  // y_of is decreasing in a
  for (int i = 0; i < 300; ++i) {
    double mid = 0.5 * (lo + hi);
    (y_of(mid) > y ? lo : hi) = mid;
  }
  double a = 0.5 * (lo + hi);
  double r = std::sqrt(2 - a);
  return {-r * (1 + a) / (6 * std::pow(a, 1.5)), -a, 2 * r * std::pow(a, 3.5)};
}

double j_quad(double y) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([](double s) { return 1.0 / (1.0 + std::pow(s, 0.4)); }, 0.0, y);
}

double num1_oracle(double y, double lambda) {
  Exact e = exact_at(y);
  double y25 = std::pow(y, 0.4);
  double j = j_quad(y);
  double l = lambda * 1e3 * y25 * (y25 + 1) * e.d2u * j;
  double r = 1e3 * y25 *
             (10.0 / (13 * (1 + y25)) + e.du - 2 * y25 / (5 * (1 + y25)) * (e.u / y + 6 * j / (13 * y)));
  return r - l;
}

}  // namespace

TEST_CASE("closed forms of the inner integrals match quadrature") {
  for (double y : {1e-9, 1e-6, 3e-4, 0.01, 0.5, 2.0, 37.0, 999.0}) {
    double q = j_quad(y);
    CHECK(std::fabs(closed_form_j(y) - q) <= 1e-10 * std::max(1.0, q));
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    double g = gk.integrate([](double s) { return s * s / (1 + s * s); }, 0.0, y, 15, 1e-14);
    CHECK(std::fabs(arctan_gap(y) - g) <= 1e-12 * std::max(1e-300, g) + 1e-300);
  }
  CHECK(closed_form_j(0.0) == 0.0);
  double prev = 0;
  for (double y = 1e-8; y < 1e6; y *= 3) {
    double j = closed_form_j(y);
    CHECK(j > prev);
    prev = j;
  }
  CHECK_THROWS_AS(closed_form_j(-1.0), DomainError);
}

TEST_CASE("origin limits of the margins") {
  const auto& t = table1();
  CHECK(std::fabs(margin_num4(t, 0.0)) < 1e-15);
  CHECK(std::fabs(margin_num2(t, 0.0)) < 1e-15);
  CHECK(std::fabs(margin_num3(t, 0.0)) < 1e-15);
  CHECK(margin_num1(t, 0.0, 1.0001) == 0.0);
  // num_6 ratio limit from the Taylor coefficients U' = -2 + 128 y^2 + ...
  const double lim = 1.01 * (256.0 / 3) / (128 + 256.0 / 3 - 1 - 0.002);
  CHECK(num6_ratio(t, 0.0, 1.01) == doctest::Approx(lim).epsilon(1e-14));
  CHECK(num6_ratio(t, 1e-4, 1.01) == doctest::Approx(lim).epsilon(1e-3));
}

TEST_CASE("num_4 margin tends to 4/5 and matches the exact profile") {
  const auto& t = table1();
  CHECK(margin_num4(t, 1e8) == doctest::Approx(0.8).epsilon(1e-2));
  for (double y : {0.01, 0.3, 4.0, 120.0}) {
    Exact e = exact_at(y);
    double m = 2 + e.du - 6 * y * y / (5 * (1 + y * y));
    CHECK(std::fabs(margin_num4(t, y) - m) < 1e-9);
  }
}

TEST_CASE("num_4, num_2, num_3 hold on the full grid") {
  const auto& t = table1();
  InequalityConfig cfg;
  for (auto r : {check_num4(t, cfg), check_num2(t, cfg), check_num3(t, cfg)}) {
    INFO(r.name);
    CHECK(r.passed);
    CHECK(r.min_margin >= -1e-9);
    CHECK(r.violations.empty());
    CHECK_FALSE(r.range_empty);
    CHECK(r.range_lo == 0.0);
    CHECK(r.range_hi == 1e4);
    CHECK(r.margins.size() == cfg.grid().size());
  }
  auto r2 = check_num2(t, cfg);
  REQUIRE(r2.aux_min_margin);
  CHECK(*r2.aux_min_margin >= -1e-9);
}

TEST_CASE("num_6 admits delta below one and grows with lambda") {
  const auto& t = table1();
  auto r = check_num6(t, 1.01);
  CHECK(r.passed);
  REQUIRE(r.delta_found);
  CHECK(*r.delta_found > 0);
  CHECK(*r.delta_found < 1);
  CHECK(r.min_margin >= -1e-9);
  auto r2 = check_num6(t, 1.5);
  REQUIRE(r2.delta_found);
  CHECK(*r2.delta_found > *r.delta_found);
  CHECK(*r2.delta_found == doctest::Approx(*r.delta_found * 1.5 / 1.01).epsilon(1e-12));
  auto big = check_num6(t, 1e3);
  CHECK_FALSE(big.delta_found);
  CHECK_FALSE(big.passed);
}

TEST_CASE("num_1 holds beyond m0 with a single crossing") {
  const auto& t = table1();
  auto r = check_num1(t, 1.0001, 93.0);
  CHECK(r.passed);
  CHECK(r.violations.empty());
  REQUIRE(r.tail_margin);
  CHECK(*r.tail_margin > 0);
  int in_range = 0;
  double c = 0;
  for (double x : r.crossings)
    if (x >= 1.0) {
      ++in_range;
      c = x;
    }
  CHECK(in_range == 1);
  CHECK(std::fabs(c - 92.882) < 0.5);
  // margin below the crossing is negative, above it positive
  CHECK(margin_num1(t, c * 0.99, 1.0001) < 0);
  CHECK(margin_num1(t, c * 1.01, 1.0001) > 0);
  CHECK(r.range_hi == 1e4);
  CHECK(r.range_lo <= 93.0);
  CHECK(r.range_lo > c);

  auto bad = check_num1(t, 1.0001, 50.0);
  CHECK_FALSE(bad.passed);
  CHECK_FALSE(bad.violations.empty());
}

TEST_CASE("num_1 margin agrees with an independent oracle") {
  const auto& t = table1();
  for (double y : {1.0, 10.0, 80.0, 92.0, 95.0, 500.0, 5000.0}) {
    double o = num1_oracle(y, 1.0001);
    CHECK(std::fabs(margin_num1(t, y, 1.0001) - o) <= 1e-7 * std::max(1.0, std::fabs(o)));
  }
}

TEST_CASE("config validation and report serialization") {
  const auto& t = table1();
  InequalityConfig cfg;
  cfg.lambda = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  InequalityConfig g2;
  g2.y_grid = {0.0, 1.0, 0.5, 1e4};
  CHECK_THROWS_AS(g2.validate(), ConfigError);
  InequalityConfig g3;
  g3.y_grid = {0.0, 1.0, 10.0};
  CHECK_THROWS_AS(check_num4(t, g3), ConfigError);

  auto r = check_num6(t, 1.01);
  auto j = to_json(r);
  CHECK(j["name"] == "num_6");
  CHECK(j["delta_found"].get<double>() == *r.delta_found);
  CHECK(j["grid_hash"].get<std::string>().size() == 40);
  auto r2 = check_num6(t, 1.01);
  CHECK(to_json(r2).dump() == j.dump());
  auto csv = margins_csv(r);
  CHECK(csv.rfind("y,lhs,rhs,margin\n", 0) == 0);
}
