#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cusplab/numerics.hpp"
#include "cusplab/profile.hpp"
#include "cusplab/selfsim.hpp"
#include "cusplab/sim.hpp"

namespace cusplab {

/// 1/|min g(t)| = a (T_star - t)^b, fitted in logs by Levenberg-Marquardt.
struct BlowupFit {
  double T_star = 0;
  double rate = 0;  ///< b
  double a = 0;
  double rms = 0;   ///< of the log residuals
  double decades = 0;
  std::size_t n = 0;
  std::vector<double> t, inv_g, residual;
};

/// Refuses fewer than min_samples, fewer than min_decades of |g| and
/// histories whose |g| is not strictly increasing.
BlowupFit fit_blowup_time(std::span<const double> t, std::span<const double> g_min,
                          std::size_t min_samples = 20, double min_decades = 2.0);

struct HolderFit {
  double alpha_hat = 0;
  double stderr_ = 0;
  double alpha_left = 0, alpha_right = 0;
  double r_min = 0, r_max = 0;
  double r2 = 0;
  double x_star = 0;
  std::size_t n_left = 0, n_right = 0;
  // per-sample fit data: side is -1 or +1
  std::vector<int> side;
  std::vector<double> log_r, log_osc, residual;
};

/// Slope of log|u - u_star| against log|x - x_star| for r_min <= r <= r_max,
/// fitted on each side and averaged. Positions may be relative to any origin
/// shared with x_star.
HolderFit holder_exponent(std::span<const double> x, std::span<const double> u, double x_star,
                          double u_star, double r_min, double r_max,
                          std::size_t min_per_side = 12);

/// Fit window in self-similar units.
struct HolderWindow {
  double y_lo = 100.0;
  double y_hi = 1000.0;
};

/// Cusp fit at a snapshot: x_star = xi, u_star = kappa, radii from the window
/// through the scaling. x_star in the result is absolute.
HolderFit holder_exponent(const FieldState& s, const ModulationState& m, const Scaling& sc,
                          const HolderWindow& w = {}, std::size_t min_per_side = 12);

/// Max over pairs of |u_i - u_j| / |x_i - x_j|^alpha among up to n_sub markers
/// in the absolute interval [omega_lo, omega_hi], sampled at geometrically
/// spaced distances from the absolute centre.
double holder_seminorm(const FieldState& s, double alpha, double omega_lo, double omega_hi,
                       double centre, std::size_t n_sub = 512);

struct RateFit {
  double alpha = 0;
  double exponent = 0;  ///< seminorm ~ (T_star - t)^(-exponent)
  double expected = 0;  ///< (5 alpha - 3) / 2; analyze_run uses the run's own scaling
  double stderr_ = 0;
  double r2 = 0;
  std::size_t n = 0;
  std::vector<double> log_dt, log_seminorm, residual;
};

/// Seminorm growth over the snapshots within `decades` of the last distance to T_star.
RateFit holder_rate(const std::vector<Snapshot>& snaps, double alpha, double T_star,
                    double omega_lo, double omega_hi, double decades = 2.0,
                    std::size_t n_sub = 512, std::size_t min_samples = 5);

struct AuditOptions {
  double M = 1208925819614629174706176.0;  ///< 2^80
  double noise_floor = 1e-8;  ///< envelopes smaller than this are not resolvable
  double y_max = 1e4;         ///< outer edge of the audited range
  double d3_window = 0.02;    ///< |y| range of the fit giving the third derivative at 0
  std::size_t d3_min_samples = 8;
};

struct EnvelopeCheck {
  std::string name;
  double value = 0;       ///< largest ratio |quantity| / bound
  double min_margin = 0;  ///< smallest bound - |quantity|
  double worst_y = 0;
  std::size_t samples = 0;
  bool resolved = true;
  bool passed = true;
};

struct EnvelopeAudit {
  double t = 0, s = 0;
  double y_lo = 0, y_hi = 0;  ///< audited range
  double d3u0 = 0;
  std::vector<EnvelopeCheck> checks;
  bool passed = true;
};

/// Checks the six bootstrap envelopes on self-similar samples against the
/// beta = 1 profile `table`.
EnvelopeAudit envelope_audit(const SelfSimilarData& d, const ProfileTable& table,
                             const AuditOptions& opt = {});

/// Log-log slope of |f| against y over the samples with y_lo <= y <= y_hi.
LineFit tail_exponent(std::span<const double> y, std::span<const double> f, double y_lo,
                      double y_hi);

struct AnalysisOptions {
  HolderWindow window;
  std::vector<double> alphas{0.7, 0.8, 1.0};
  double fit_decades = 2.0;   ///< tail of the min-gradient history used by the time fit
  double rate_decades = 2.0;  ///< tail of the snapshots used by the seminorm rates
  double omega_half_width = 0;  ///< 0 selects 10 core scales
  std::size_t subsample = 512;
  AuditOptions audit;

  void validate() const;
};

struct BlowupReport {
  std::string equation;
  BlowupFit blowup;
  double x_star = 0;
  HolderFit holder;
  std::vector<RateFit> rates;
  double omega_lo = 0, omega_hi = 0;
  double riccati_error = 0;
  double energy_drift = 0;
  double energy_x_drift = 0;
  double drift_threshold = 0;
  double max_abs_u = 0;
  double u_bound = 0;  ///< sqrt(H(t0) / 2) for CH, 0 otherwise
  std::vector<EnvelopeAudit> audits;
  bool envelopes_passed = true;
};

/// Threshold on max|g| up to which drift and Riccati error are measured:
/// 1e3 (HS, Burgers) or 1e3 / eps (CH).
double drift_threshold(const InitialDataSpec& spec);

BlowupReport analyze_run(const RunResult& run, const ProfileTable& table,
                         const AnalysisOptions& opt = {});

nlohmann::ordered_json to_json(const HolderFit& f);
nlohmann::ordered_json to_json(const BlowupReport& r);

std::string holder_csv(const HolderFit& f);
std::string rate_csv(const std::vector<RateFit>& fits);
std::string blowup_csv(const BlowupFit& f);
std::string audit_csv(const std::vector<EnvelopeAudit>& audits);

}  // namespace cusplab
