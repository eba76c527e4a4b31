#include "cusplab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cusplab/errors.hpp"
#include "cusplab/numerics.hpp"

namespace cusplab {

void InequalityConfig::validate() const {
  if (!(lambda > 1)) throw ConfigError("inequalities: lambda must exceed 1");
  if (!(m0 > 0)) throw ConfigError("inequalities: m0 must be positive");
  if (!(margin_tol >= 0)) throw ConfigError("inequalities: margin_tol must be nonnegative");
  const auto& g = grid();
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw ConfigError("inequalities: grid must be strictly increasing");
  if (g.empty() || g.front() > 1e-3 || g.back() < 1e4)
    throw ConfigError("inequalities: grid must cover [1e-3, 1e4]");
  if (g.front() < 0) throw ConfigError("inequalities: grid must be nonnegative");
}

const std::vector<double>& InequalityConfig::grid() const {
  if (!y_grid.empty()) return y_grid;
  if (default_grid_.empty()) default_grid_ = default_inequality_grid();
  return default_grid_;
}

std::vector<double> default_inequality_grid(std::size_t n_log, std::size_t n_lin) {
  std::vector<double> g;
  g.reserve(n_log + n_lin + 1);
  g.push_back(0.0);
  for (std::size_t i = 1; i <= n_lin; ++i)
    g.push_back(1e-3 * static_cast<double>(i) / static_cast<double>(n_lin + 1));
  const double l0 = std::log(1e-3), l1 = std::log(1e4);
  for (std::size_t i = 0; i < n_log; ++i)
    g.push_back(std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(n_log - 1)));
  g[n_lin + 1] = 1e-3;
  g.back() = 1e4;
  return g;
}

double arctan_gap(double y) {
  const double ay = std::fabs(y);
  if (ay < 0.02) {
    const double y2 = y * y;
    double term = y * y2, sum = 0;
    for (int k = 1; k < 12; ++k) {
      sum += ((k % 2) ? 1.0 : -1.0) * term / (2 * k + 1);
      term *= y2;
    }
    return sum;
  }
  return y - std::atan(y);
}

double closed_form_j(double y) {
  if (y < 0) throw DomainError("closed_form_j: y must be nonnegative");
  const double t = std::pow(y, 0.2);
  if (t < 0.2) {
    // J = 5 sum_{k>=2} (-1)^k t^{2k+1} / (2k+1)
    const double t2 = t * t;
    double term = std::pow(t, 5), sum = 0;
    for (int k = 2; k < 40; ++k) {
      sum += ((k % 2) ? -1.0 : 1.0) * term / (2 * k + 1);
      term *= t2;
    }
    return 5.0 * sum;
  }
  return 5.0 / 3.0 * t * t * t - 5.0 * (t - std::atan(t));
}

namespace {

// U/y with its limit U'(0) = -2 at the origin.
double u_over_y(const ProfilePoint& p, double y) { return y == 0 ? -2.0 : p.u / y; }

struct Sides {
  double lhs;
  double rhs;
};

Sides sides_num4(const ProfileTable& t, double y) {
  auto p = eval_profile(t, y);
  return {6 * y * y / (5 * (1 + y * y)), 2 + p.du};
}

Sides sides_num2(const ProfileTable& t, double y) {
  auto p = eval_profile(t, y);
  const double q = 1 + y * y;
  return {y * y / (5 * q), 1 + p.du + 2 / q * (2.5 + u_over_y(p, y))};
}

Sides sides_num3(const ProfileTable& t, double y) {
  auto p = eval_profile(t, y);
  const double q = 1 + y * y;
  return {19 * y * y / (10 * q), 3.5 + 2 * p.du + 1 / q * (2.5 + u_over_y(p, y))};
}

Sides sides_num1(const ProfileTable& t, double y, double lambda) {
  if (y == 0) return {0.0, 0.0};
  auto p = eval_profile(t, y);
  const double y25 = std::pow(y, 0.4);
  const double j = closed_form_j(y);
  const double l = lambda * 1e3 * y25 * (y25 + 1) * std::fabs(p.d2u) * j;
  const double r = 1e3 * y25 *
                   (10.0 / (13 * (1 + y25)) + p.du -
                    2 * y25 / (5 * (1 + y25)) * (u_over_y(p, y) + 6.0 / (13 * y) * j));
  return {l, r};
}

double bisect_crossing(const std::function<double(double)>& m, double a, double b) {
  double fa = m(a);
  for (int i = 0; i < 200 && (b - a) > 1e-13 * b; ++i) {
    const double c = 0.5 * (a + b);
    const double fc = m(c);
    if ((fc >= 0) == (fa >= 0)) {
      a = c;
      fa = fc;
    } else {
      b = c;
    }
  }
  return 0.5 * (a + b);
}

InequalityReport run_check(const std::string& name, const InequalityConfig& cfg, double req_lo,
                           const std::function<Sides(double)>& sides) {
  cfg.validate();
  InequalityReport r;
  r.name = name;
  r.lambda = cfg.lambda;
  r.m0 = cfg.m0;
  const auto& g = cfg.grid();
  std::string grid_text;
  for (double y : g) grid_text += format_double(y) + '\n';
  r.grid_hash = git_blob_hash(grid_text);
  r.required_lo = std::max(req_lo, g.front());
  r.required_hi = g.back();
  r.min_margin = std::numeric_limits<double>::infinity();
  r.margins.reserve(g.size());
  for (double y : g) {
    auto s = sides(y);
    r.margins.push_back({y, s.lhs, s.rhs, s.rhs - s.lhs});
  }
  std::size_t best_len = 0, run_start = 0, run_len = 0;
  for (std::size_t i = 0; i < r.margins.size(); ++i) {
    const auto& m = r.margins[i];
    const bool ok = m.margin >= -cfg.margin_tol;
    if (ok) {
      if (run_len == 0) run_start = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        r.range_lo = r.margins[run_start].y;
        r.range_hi = m.y;
        r.range_empty = false;
      }
    } else {
      run_len = 0;
    }
    if (m.y >= r.required_lo) {
      if (m.margin < r.min_margin) {
        r.min_margin = m.margin;
        r.min_margin_y = m.y;
      }
      if (!ok) r.violations.push_back(m.y);
    }
  }
  auto margin_fn = [&sides](double y) {
    auto s = sides(y);
    return s.rhs - s.lhs;
  };
  for (std::size_t i = 1; i < r.margins.size(); ++i) {
    const double a = r.margins[i - 1].margin, b = r.margins[i].margin;
    if (a == 0 || b == 0) continue;
    if ((a > 0) != (b > 0))
      r.crossings.push_back(bisect_crossing(margin_fn, r.margins[i - 1].y, r.margins[i].y));
  }
  r.passed = r.violations.empty();
  return r;
}

}  // namespace

double margin_num4(const ProfileTable& t, double y) {
  auto s = sides_num4(t, y);
  return s.rhs - s.lhs;
}
double margin_num2(const ProfileTable& t, double y) {
  auto s = sides_num2(t, y);
  return s.rhs - s.lhs;
}
double margin_num3(const ProfileTable& t, double y) {
  auto s = sides_num3(t, y);
  return s.rhs - s.lhs;
}
double margin_num1(const ProfileTable& t, double y, double lambda) {
  auto s = sides_num1(t, y, lambda);
  return s.rhs - s.lhs;
}

Num6Terms num6_terms(const ProfileTable& t, double y, double lambda) {
  auto p = eval_profile(t, y);
  const double ay = std::fabs(y);
  const double q = 1 + y * y;
  const double bracket = 1 + p.du + 2 / q * (2.5 + u_over_y(p, ay)) - y * y / (500 * q);
  const double rhs = ay == 0 ? 0.0 : lambda * std::fabs(p.d2u) * q / (y * y) * arctan_gap(ay);
  return {bracket, rhs};
}

double num6_ratio(const ProfileTable& t, double y, double lambda) {
  if (y == 0) {
    // second-order Taylor coefficients of both sides at the origin
    const double b = t.beta;
    const double bracket2 = 128 * b + 256 * b / 3 - 1 - 1.0 / 500;
    return lambda * (256 * b / 3) / bracket2;
  }
  auto s = num6_terms(t, y, lambda);
  if (s.bracket <= 0) return s.rhs > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return s.rhs / s.bracket;
}

InequalityReport check_num4(const ProfileTable& t, const InequalityConfig& cfg) {
  return run_check("num_4", cfg, 0.0, [&t](double y) { return sides_num4(t, y); });
}

namespace {
void add_u_lower_bound(InequalityReport& r, const ProfileTable& t) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& m : r.margins) {
    const double v = eval_profile(t, m.y).u + 0.8 * m.y + 1.2 * std::atan(m.y);
    worst = std::min(worst, v);
  }
  r.aux_min_margin = worst;
}
}  // namespace

InequalityReport check_num2(const ProfileTable& t, const InequalityConfig& cfg) {
  auto r = run_check("num_2", cfg, 0.0, [&t](double y) { return sides_num2(t, y); });
  add_u_lower_bound(r, t);
  r.passed = r.passed && *r.aux_min_margin >= -cfg.margin_tol;
  return r;
}

InequalityReport check_num3(const ProfileTable& t, const InequalityConfig& cfg) {
  auto r = run_check("num_3", cfg, 0.0, [&t](double y) { return sides_num3(t, y); });
  add_u_lower_bound(r, t);
  r.passed = r.passed && *r.aux_min_margin >= -cfg.margin_tol;
  return r;
}

InequalityReport check_num6(const ProfileTable& t, double lambda, const InequalityConfig& cfg) {
  InequalityConfig c = cfg;
  c.lambda = lambda;
  c.validate();
  double worst = 0, worst_y = 0;
  for (double y : c.grid()) {
    const double q = num6_ratio(t, y, lambda);
    if (q > worst || std::isnan(q)) {
      worst = q;
      worst_y = y;
    }
  }
  const bool admissible = worst < 1.0;
  const double delta = admissible ? worst : 1.0;
  auto r = run_check("num_6", c, 0.0, [&](double y) {
    if (y == 0) return Sides{0.0, 0.0};
    auto s = num6_terms(t, y, lambda);
    return Sides{s.rhs, delta * s.bracket};
  });
  r.worst_ratio = worst;
  r.worst_ratio_y = worst_y;
  if (admissible) r.delta_found = delta;
  r.passed = admissible && r.passed;
  return r;
}

InequalityReport check_num1(const ProfileTable& t, double lambda, double m0,
                            const InequalityConfig& cfg) {
  InequalityConfig c = cfg;
  c.lambda = lambda;
  c.m0 = m0;
  auto r = run_check("num_1", c, m0, [&](double y) { return sides_num1(t, y, lambda); });
  r.tail_y = 2e6;
  r.tail_margin = margin_num1(t, r.tail_y, lambda);
  r.passed = r.passed && *r.tail_margin >= -c.margin_tol;
  return r;
}

std::vector<InequalityReport> verify_all(const ProfileTable& t, const InequalityConfig& cfg) {
  return {check_num4(t, cfg), check_num2(t, cfg), check_num3(t, cfg),
          check_num6(t, cfg.lambda, cfg), check_num1(t, cfg.lambda, cfg.m0, cfg)};
}

nlohmann::ordered_json to_json(const InequalityReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["lambda"] = r.lambda;
  if (r.name == "num_1") j["m0"] = r.m0;
  j["required_range"] = {r.required_lo, r.required_hi};
  if (r.range_empty)
    j["verified_range"] = nullptr;
  else
    j["verified_range"] = {r.range_lo, r.range_hi};
  j["crossings"] = r.crossings;
  j["min_margin"] = r.min_margin;
  j["min_margin_y"] = r.min_margin_y;
  j["violation_count"] = r.violations.size();
  std::vector<double> first(r.violations.begin(),
                            r.violations.begin() + std::min<std::size_t>(r.violations.size(), 50));
  j["violations"] = first;
  if (r.violations.size()) j["violations_max_y"] = r.violations.back();
  if (r.name == "num_6") {
    if (r.delta_found)
      j["delta_found"] = *r.delta_found;
    else
      j["delta_found"] = nullptr;
    j["worst_ratio"] = r.worst_ratio;
    j["worst_ratio_y"] = r.worst_ratio_y;
  }
  if (r.aux_min_margin) j["u_lower_bound_min_margin"] = *r.aux_min_margin;
  if (r.tail_margin) {
    j["tail_y"] = r.tail_y;
    j["tail_margin"] = *r.tail_margin;
  }
  j["grid_points"] = r.margins.size();
  j["grid_hash"] = r.grid_hash;
  return j;
}

std::string margins_csv(const InequalityReport& r) {
  std::string out = "y,lhs,rhs,margin\n";
  for (const auto& m : r.margins) {
    out += format_double(m.y) + ',' + format_double(m.lhs) + ',' + format_double(m.rhs) + ',' +
           format_double(m.margin) + '\n';
  }
  return out;
}

}  // namespace cusplab
