#include "cusplab/burgers.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/minima.hpp>

#include "cusplab/dop853.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/numerics.hpp"

namespace cusplab {

BurgersSeed cubic_burgers_seed() {
  BurgersSeed s;
  s.u0 = [](double x) { return -x + x * x * x; };
  s.du0 = [](double x) { return -1.0 + 3 * x * x; };
  s.t0 = -1.0;
  s.x_lo = -1.0;
  s.x_hi = 1.0;
  return s;
}

double breaking_time(const BurgersSeed& seed) {
  const int n = 4096;
  const double h = (seed.x_hi - seed.x_lo) / n;
  int best = 0;
  double gbest = seed.du0(seed.x_lo);
  for (int i = 1; i <= n; ++i) {
    const double g = seed.du0(seed.x_lo + i * h);
    if (g < gbest) {
      gbest = g;
      best = i;
    }
  }
  const double a = std::max(seed.x_lo, seed.x_lo + (best - 1) * h);
  const double b = std::min(seed.x_hi, seed.x_lo + (best + 1) * h);
  auto r = boost::math::tools::brent_find_minima(seed.du0, a, b, 52);
  const double gmin = std::min(gbest, r.second);
  if (!(gmin < 0)) throw DomainError("breaking_time: the datum never breaks");
  return seed.t0 - 1.0 / gmin;
}

FieldState burgers_oracle(const BurgersSeed& seed, double t, const std::vector<double>& x) {
  if (t < seed.t0) throw DomainError("burgers_oracle: t precedes the initial time");
  if (t >= breaking_time(seed)) throw DomainError("burgers_oracle: query at or after the shock");
  const double el = t - seed.t0;
  auto map = [&](double x0) { return x0 + el * seed.u0(x0); };
  const double lo = map(seed.x_lo), hi = map(seed.x_hi);
  FieldState s;
  s.equation = Equation::Burgers;
  s.t = t;
  s.x = x;
  const std::size_t n = x.size();
  s.u.resize(n);
  s.g.resize(n);
  s.lj.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi < lo || xi > hi) throw DomainError("burgers_oracle: position outside the data");
    // the characteristic map is increasing before the shock
    double x0;
    if (xi == lo) x0 = seed.x_lo;
    else if (xi == hi) x0 = seed.x_hi;
    else x0 = solve_bracketed([&](double z) { return map(z) - xi; }, seed.x_lo, seed.x_hi, 1e-15);
    const double d = seed.du0(x0);
    const double j = 1 + el * d;
    s.u[i] = seed.u0(x0);
    s.g[i] = d / j;
    s.lj[i] = std::log(j);
  }
  return s;
}

double burgers_z_of_w(double w, double tol) {
  const double q = 3 * w * w;
  if (q == 0) return 2.0;
  auto f = [q](double z) { return q * z * z * z + z - 2.0; };
  const double zc = std::cbrt(2.0 / q);
  double lo, hi;
  if (zc < 2.0) {
    hi = zc;
    lo = zc * std::cbrt((2.0 - zc) / 2.0);
  } else {
    hi = 2.0;
    lo = std::max(1.0, 2.0 - 16.0 * q);
  }
  return solve_bracketed(f, lo, hi, tol);
}

BurgersProfile burgers_profile(const std::vector<double>& y_grid, double rel_tol,
                               double abs_tol) {
  if (y_grid.empty()) throw ConfigError("burgers_profile: empty grid");
  if (!std::is_sorted(y_grid.begin(), y_grid.end()) || y_grid.front() < 0)
    throw ConfigError("burgers_profile: grid must be sorted and nonnegative");
  Dop853::Options opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = abs_tol;
  Dop853 rk([](double, std::span<const double> w, std::span<double> dw) {
    dw[0] = 0.5 * (3.0 - burgers_z_of_w(w[0]));
  }, 1, opt);
  const double w0 = 0.0;
  auto states = rk.sample(0.0, std::span<const double>(&w0, 1), y_grid.back(), y_grid);
  BurgersProfile p;
  p.nodes = y_grid;
  const std::size_t n = y_grid.size();
  p.v.resize(n);
  p.dv.resize(n);
  p.d2v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = y_grid[i];
    const double w = states[i][0];
    const double z = burgers_z_of_w(w);
    p.v[i] = 2 * w - 3 * y;
    p.dv[i] = -z;
    p.d2v[i] = w == 0 ? 0.0 : z * (1 - 0.5 * z) / w;
  }
  return p;
}

}  // namespace cusplab
