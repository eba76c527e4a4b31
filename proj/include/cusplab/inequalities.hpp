#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cusplab/profile.hpp"

namespace cusplab {

struct InequalityConfig {
  double lambda = 1.0001;
  double m0 = 93.0;
  std::vector<double> y_grid;  ///< empty selects default_inequality_grid()
  double margin_tol = 1e-9;

  void validate() const;
  const std::vector<double>& grid() const;

 private:
  mutable std::vector<double> default_grid_;
};

/// 0, n_lin points on (0, 1e-3) and n_log log-spaced points on [1e-3, 1e4].
std::vector<double> default_inequality_grid(std::size_t n_log = 4096, std::size_t n_lin = 256);

/// One grid row. `lhs` is the side required to be the smaller one, `rhs` the
/// larger one, and margin = rhs - lhs.
struct MarginSample {
  double y;
  double lhs;
  double rhs;
  double margin;
};

struct InequalityReport {
  std::string name;
  std::vector<MarginSample> margins;
  bool range_empty = true;
  double range_lo = 0, range_hi = 0;  ///< longest run of grid nodes with margin >= -tol
  double required_lo = 0, required_hi = 0;
  std::vector<double> crossings;
  std::vector<double> violations;     ///< grid y inside the required range failing
  double min_margin = 0;              ///< over the required range
  double min_margin_y = 0;
  std::optional<double> delta_found;  ///< num_6 only: smallest admissible delta
  double worst_ratio = 0;             ///< num_6 only
  double worst_ratio_y = 0;
  std::optional<double> aux_min_margin;  ///< num_2/num_3: U + (4/5)y + (6/5)atan y
  std::optional<double> tail_margin;     ///< num_1: margin at the tail check point
  double tail_y = 0;
  double lambda = 0;
  double m0 = 0;
  std::string grid_hash;
  bool passed = false;
};

/// J(y) = int_0^y dy'/(1 + y'^{2/5}), closed form with a series near 0.
double closed_form_j(double y);

/// int_0^y y'^2/(1+y'^2) dy' = y - atan(y), with a series near 0.
double arctan_gap(double y);

/// Pointwise margins (rhs - lhs) at y >= 0; the y = 0 values are the analytic limits.
double margin_num4(const ProfileTable& t, double y);
double margin_num2(const ProfileTable& t, double y);
double margin_num3(const ProfileTable& t, double y);
double margin_num1(const ProfileTable& t, double y, double lambda);

/// Bracket and right side of num_6: delta * bracket >= rhs.
struct Num6Terms {
  double bracket;
  double rhs;
};
Num6Terms num6_terms(const ProfileTable& t, double y, double lambda);
/// lambda * rhs / bracket at y, with its analytic limit at y = 0.
double num6_ratio(const ProfileTable& t, double y, double lambda);

InequalityReport check_num4(const ProfileTable& t, const InequalityConfig& cfg = {});
InequalityReport check_num2(const ProfileTable& t, const InequalityConfig& cfg = {});
InequalityReport check_num3(const ProfileTable& t, const InequalityConfig& cfg = {});
InequalityReport check_num6(const ProfileTable& t, double lambda, const InequalityConfig& cfg = {});
InequalityReport check_num1(const ProfileTable& t, double lambda, double m0,
                            const InequalityConfig& cfg = {});

/// All five checks with cfg.lambda and cfg.m0.
std::vector<InequalityReport> verify_all(const ProfileTable& t, const InequalityConfig& cfg);

nlohmann::ordered_json to_json(const InequalityReport& r);
std::string margins_csv(const InequalityReport& r);

}  // namespace cusplab
