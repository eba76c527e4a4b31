#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cusplab {

/** Explicit Runge-Kutta method of order 8(5,3) with dense output of order 7
    (Dormand-Prince coefficients in the form distributed with Hairer's DOP853). */
class Dop853 {
 public:
  using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

  struct Options {
    double rel_tol = 1e-13;
    double abs_tol = 1e-15;
    double h_init = 0;            ///< 0 selects the initial step automatically
    double h_max = 0;             ///< 0 means unbounded
    std::size_t max_steps = 1000000;
  };

  struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
  };

  Dop853(Rhs f, std::size_t n, Options opt);

  /** Integrate from (t0, y0) towards t_end and return the states at the sorted
      output times t_out (each in [t0, t_end]) obtained from dense output.
      Throws IntegrationError on step size underflow or step cap. */
  std::vector<std::vector<double>> sample(double t0, std::span<const double> y0, double t_end,
                                          std::span<const double> t_out);

  const Stats& stats() const { return stats_; }

 private:
  void eval(double t, std::span<const double> y, std::vector<double>& dy);
  double initial_step(double t, double t_end);
  bool attempt(double t, double h);
  void prepare_dense(double t, double h);
  void dense(double t_old, double h, double t, std::span<double> out) const;

  Rhs f_;
  std::size_t n_;
  Options opt_;
  Stats stats_;
  double facold_ = 1e-4;
  double err_ = 0;
  std::vector<double> y_, ynew_, ytmp_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, k8_, k9_, k10_;
  std::vector<double> r1_, r2_, r3_, r4_, r5_, r6_, r7_, r8_;
};

}  // namespace cusplab
