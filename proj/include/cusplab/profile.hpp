#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace cusplab {

/// Parameters of the tabulated profile U_beta.
struct ProfileParams {
  double beta = 1.0;
  double y_max = 1e4;
  double rel_tol = 1e-13;
  double abs_tol = 1e-15;
  std::size_t n_samples = 16384;  ///< half linear on [0, linear_end], half logarithmic above
  double linear_end = 10.0;
  double certify_tol = 1e-8;      ///< bound on the tabulated ODE residual

  void validate() const;
};

/// Samples of U_beta, U_beta' and U_beta'' on y >= 0; odd extension for y < 0.
struct ProfileTable {
  double beta = 1.0;
  double y_max = 0.0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  std::vector<double> nodes;
  std::vector<double> u, du, d2u;
  double residual_max = 0.0;
  double residual_worst_y = 0.0;

  std::size_t size() const { return nodes.size(); }
};

struct ProfilePoint {
  double u;
  double du;
  double d2u;
};

struct AsymptoticState {
  double y;
  double u;
  double d2u;
};

struct ProfileResidual {
  double y;
  double value;
};

struct TaylorOptions {
  double window = 0.01;  ///< half-width at beta = 1; scaled by beta^{-1/2}
  double c1_tol = 1e-6;
  double c3_rel_tol = 1e-3;
  double even_tol = 1e-9;
};

struct TaylorReport {
  double window = 0;
  std::size_t nodes_in_window = 0;
  double c1 = 0, c3 = 0, c5 = 0;
  double c1_error = 0;
  double c3_rel_error = 0;
  double max_even = 0;  ///< largest |c_2k| * window^2k of a full-degree fit
  bool passed = false;
};

/// The three quantities that tend to (50 beta)^{-1/5} as y grows.
struct TailLimits {
  double y = 0;
  double target = 0;
  double gradient = 0;   ///< y^{2/5} |U'|
  double value = 0;      ///< (3/5) y^{-3/5} |U|
  double curvature = 0;  ///< (5/2) y^{7/5} U''
};

/// Z = 5 - 2V(W), the root of beta W^2 Z^5 + Z - 4 = 0 in (0, 4].
double z_of_w(double w, double beta, double tol = 1e-15);

/// V(W) from beta W^2 = (2V-1)/(5-2V)^5 with V in [1/2, 5/2).
double v_of_w(double w, double beta, double tol = 1e-15);

ProfileTable build_profile(const ProfileParams& params);

/// Value, slope and curvature at any real y (tail closed form beyond y_max).
ProfilePoint eval_profile(const ProfileTable& table, double y);

/// Closed-form (y, U, U'') for a given slope U' in (-2, 0).
AsymptoticState asymptotic_state(double du, double beta);

/// Slope U_beta'(y) for y >= 0 by inverting the closed-form y(U').
double slope_from_y(double y, double beta);

/// U_beta(y) = beta^{-1/2} U_1(beta^{1/2} y) applied to a beta = 1 table.
ProfileTable rescale_beta(const ProfileTable& table, double beta);

/// Worst |(1 + U'/2) U' + (U + 5y/2) U''| over the nodes, from tabulated values.
ProfileResidual profile_residual(const ProfileTable& table);

TaylorReport taylor_check(const ProfileTable& table, const TaylorOptions& opt = {});

/// U'''(0) by a fourth-order central stencil on U' with one Richardson step.
double third_derivative_at_origin(const ProfileTable& table, double h = 1e-3);

TailLimits tail_limits(const ProfileTable& table, double y);

/// CSV text (y,u,du,d2u) with shortest round-trip formatting.
std::string profile_csv(const ProfileTable& table);

/// Writes <path> and the JSON sidecar <path>.json; returns the CSV content hash.
std::string write_profile(const ProfileTable& table, const std::filesystem::path& path);

/// Reads a CSV written by write_profile. When a sidecar exists its metadata is
/// used and, if verify_hash is set, the content hash must match.
ProfileTable read_profile(const std::filesystem::path& path, bool verify_hash = true);

}  // namespace cusplab
