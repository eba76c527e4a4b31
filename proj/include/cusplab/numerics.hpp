#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "cusplab/errors.hpp"

namespace cusplab {

/// Root of a continuous f on [lo, hi] with f(lo), f(hi) of opposite sign.
/// Stops when the bracket is narrower than rel_tol relative to its ends.
template <class F>
double solve_bracketed(F&& f, double lo, double hi, double rel_tol,
                       std::uintmax_t max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw RootError("root not bracketed", lo, hi);
  auto tol = [rel_tol](double a, double b) {
    return std::fabs(a - b) <= rel_tol * std::fmin(std::fabs(a), std::fabs(b)) ||
           std::fabs(a - b) <= 4 * std::numeric_limits<double>::min();
  };
  std::uintmax_t iters = max_iter;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  if (iters >= max_iter && !tol(r.first, r.second))
    throw RootError("bracketed root search did not converge", r.first, r.second);
  return 0.5 * (r.first + r.second);
}

/// Ordinary least squares fit y = c0 + c1 x.
struct LineFit {
  double intercept = 0;
  double slope = 0;
  double slope_stderr = 0;
  double r2 = 0;
  std::size_t n = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least squares fit of y by sum_k c_k x^{powers[k]}; x is scaled internally.
std::vector<double> fit_powers(std::span<const double> x, std::span<const double> y,
                               std::span<const int> powers);

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t);

/// Cutoff equal to 1 on |x| <= r and 0 on |x| >= 2r.
double taper(double x, double r);

/// Compactly supported C-infinity bump on [0, 1] with unit integral.
double unit_bump(double t);

/// Cubic Hermite interpolation on [x0, x1] from values and slopes.
double hermite3(double x, double x0, double x1, double f0, double f1, double d0, double d1);

/// Quintic Hermite interpolation on [x0, x1] from values, slopes and curvatures.
double hermite5(double x, double x0, double x1, double f0, double f1, double d0, double d1,
                double c0, double c1);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

/// Git blob SHA-1 of the given bytes (hex), i.e. sha1("blob <n>\0" + data).
std::string git_blob_hash(const std::string& data);

}  // namespace cusplab
