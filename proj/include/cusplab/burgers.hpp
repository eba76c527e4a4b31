#pragma once

#include <functional>
#include <vector>

#include "cusplab/sim.hpp"

namespace cusplab {

/// Smooth initial datum of u_t + u u_x = 0 on [x_lo, x_hi] at time t0.
struct BurgersSeed {
  std::function<double(double)> u0, du0;
  double t0 = -1.0;
  double x_lo = -1.0, x_hi = 1.0;
};

/// u0 = -x + x^3 on [-1, 1] at t0 = -1; the gradient first breaks at t = 0.
BurgersSeed cubic_burgers_seed();

/// t0 - 1 / min du0, with the minimum located by sampling and Brent refinement.
double breaking_time(const BurgersSeed& seed);

/// Exact solution at absolute positions x by inverting x = x0 + (t - t0) u0(x0).
/// Throws DomainError at or after the breaking time, or outside the image of
/// [x_lo, x_hi].
FieldState burgers_oracle(const BurgersSeed& seed, double t, const std::vector<double>& x);

/// Self-similar Burgers profile with V'(0) = -2: (1 + V'/2) V' + (V/2 + 3y/2) V'' = 0.
struct BurgersProfile {
  std::vector<double> nodes, v, dv, d2v;
};

/// Z = -V' as the root in (0, 2] of 3 W^2 Z^3 + Z - 2 = 0, W = V/2 + 3y/2.
double burgers_z_of_w(double w, double tol = 1e-15);

/// Integrates W' = (3 - Z(W)) / 2 from W(0) = 0 and samples at the sorted,
/// nonnegative grid.
BurgersProfile burgers_profile(const std::vector<double>& y_grid, double rel_tol = 1e-13,
                               double abs_tol = 1e-15);

}  // namespace cusplab
