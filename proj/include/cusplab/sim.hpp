#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cusplab/profile.hpp"

namespace cusplab {

enum class Equation { CH, HS, Burgers };

std::string equation_name(Equation e);
Equation parse_equation(const std::string& name);

struct InitialDataSpec {
  Equation equation = Equation::HS;
  double epsilon = 0.1;  ///< CH gradient scale; the run starts at t = -epsilon
  double gamma = 0.0;
  double k3 = 0.0;       ///< CH third derivative at 0; 0 selects 256 eps^-6, i.e. beta = 1
  double delta0 = 0.5;   ///< admissible k3 lies in [eps^-(1+delta0), eps^-(11-delta0)]
  double beta_v = 1.0;   ///< HS profile parameter
  double k_v = 1.0;      ///< HS gradient scale, blow-up at -1 + 1/k_v
  double Theta = 0.46;   ///< in (50^{-1/5}, 6/13)
  double cutoff_radius = 0.0;  ///< 0 selects 50 eps^{5/2} (CH) or 50 (HS)
  bool taper = true;
  bool strict_localization = false;  ///< make the taper-region envelope fatal

  // marker layout: spacing h(x) = min(h_max, h_min_rel * L0 + growth * |x|)
  double h_min_rel = 2e-5;
  double growth = 0.01;
  double h_max = 0.05;
  double far_field = 25.0;  ///< CH markers extend this far beyond the data support

  double beta() const;        ///< CH: eps^6 k3 / 256; HS: beta_v; Burgers: 1
  double k3_value() const;
  double theta() const;       ///< (6/13 - Theta) / 3
  double t0() const;          ///< -epsilon (CH) or -1
  double core_scale() const;  ///< L0: eps^{5/2}/sqrt(beta), 1/sqrt(beta_v) or 1
  double radius() const;      ///< taper starts here
  double extent() const;      ///< half-width of the marker cloud
  void validate() const;
};

nlohmann::ordered_json to_json(const InitialDataSpec& s);

/// Markers in structure-of-arrays form, sorted by position.
///
/// Positions are not integrated directly: the spacing between markers obeys
/// l'' = g^2 l / 2 near the cusp, whose parasitic mode grows like the inverse
/// cube of the physical one. Each marker instead carries the log of the
/// Jacobian dx/da, which satisfies d(lj)/dt = g, and positions are rebuilt
/// from the label spacings `da` outward from marker `ref`. Positions are
/// relative to `origin` (the physical position of `ref`), so that the
/// shrinking core keeps full precision while it drifts.
struct FieldState {
  Equation equation = Equation::HS;
  double t = 0;
  double origin = 0;
  std::size_t ref = 0;
  std::vector<std::int64_t> label;
  std::vector<double> x, u, g;
  std::vector<double> lj;             ///< log Jacobian per marker
  std::vector<double> da;             ///< label spacing per segment (size n-1)
  std::vector<double> g0;             ///< gradient at t0 (NaN for inserted markers)
  std::vector<std::uint8_t> inserted;

  std::size_t size() const { return x.size(); }
};

/// Rebuilds x from lj and da with x[ref] = 0.
void rebuild_positions(FieldState& s);

/// Moves the reference marker to index r, shifting origin and x.
void set_reference(FieldState& s, std::size_t r);

struct ConditionCheck {
  std::string name;
  double value = 0;  ///< realized quantity (a ratio for envelopes)
  double bound = 0;
  double worst_x = 0;
  bool enforced = true;
  bool passed = true;
};

struct InitialDataReport {
  double beta = 0;
  double theta = 0;
  double k3 = 0;
  std::vector<ConditionCheck> checks;
  double c2 = 0, c3 = 0, c4 = 0;  ///< realized constants of the three sup bounds
  bool passed = true;
};

nlohmann::ordered_json to_json(const InitialDataReport& r);

/// Verification of an initial datum failed; names the condition and worst x.
class InitialDataError : public std::runtime_error {
 public:
  InitialDataError(const std::string& what, std::string condition, double worst_x)
      : std::runtime_error(what), condition(std::move(condition)), worst_x(worst_x) {}
  std::string condition;
  double worst_x;
};

struct InitialData {
  FieldState state;
  InitialDataReport report;
};

/// Symmetric marker positions on [-extent, extent], always including 0.
std::vector<double> marker_positions(const InitialDataSpec& spec);

/// Seeds the markers and verifies the admissibility conditions. `table` must
/// be a beta = 1 profile; it is rescaled internally. Throws InitialDataError.
InitialData build_initial_data(const InitialDataSpec& spec, const ProfileTable& table);

/// Cumulative trapezoid q_x = -1/2 int_{-inf}^x g^2 with q_x = 0 at the left end.
std::vector<double> hs_qx(const std::vector<double>& x, const std::vector<double>& g);

/// p = K * f and p_x for K = exp(-|x|)/2 and f piecewise linear on the markers.
void ch_pressure(const std::vector<double>& x, const std::vector<double>& f,
                 std::vector<double>& p, std::vector<double>& px);

/// One step; false when marker positions stopped being increasing.
/// The reference marker is advected with its own velocity.
bool step_hs(FieldState& s, double dt);
bool step_ch(FieldState& s, double dt, double gamma);
bool step_burgers(FieldState& s, double dt);

/// Frame at one instant, extracted from the gradient minimum.
struct ModulationState {
  double t = 0;
  double tau = 0;
  double kappa = 0;
  double xi = 0;       ///< relative to the state's origin
  double xi_abs = 0;   ///< origin + xi
  double s = 0;
  double g_min = 0;
  double d3u_at_min = 0;
  std::size_t i_min = 0;
};

/// Parabola through the three lowest-gradient markers. Throws DomainError
/// when the minimum sits on the boundary of the marker cloud.
ModulationState track_modulation(const FieldState& s);

/// Blow-up time constant: tau - t = c / |g_min| (2 for CH/HS, 1 for Burgers).
double riccati_constant(Equation e);

struct RunOptions {
  double g_max = 0.0;  ///< 0 selects 1e4 (HS, Burgers) or 1e4/eps (CH)
  double cfl = 0.05;   ///< dt = min(dt_max, cfl / max|g|)
  double dt_max = 0.01;
  double dt_min = 1e-300;
  int snapshots_per_decade = 4;
  std::size_t max_steps = 1000000;
  double remark_ratio = 10.0;

  void validate() const;
};

nlohmann::ordered_json to_json(const RunOptions& o);

struct StepRecord {
  double t = 0;
  double dt = 0;
  ModulationState mod;
  double max_abs_g = 0;
  double max_abs_u = 0;
  double energy = 0;          ///< H, integrated in the label variable
  double energy_x = 0;        ///< H by the trapezoid rule in x
  double max_abs_p = 0;       ///< CH pressure sup, HS sup |q_x|
  double max_abs_px = 0;
  double riccati_error = 0;   ///< max relative error of g on original markers (HS, Burgers)
  std::size_t markers = 0;
};

struct Snapshot {
  FieldState state;
  ModulationState mod;
};

struct RunResult {
  InitialDataSpec spec;
  RunOptions options;
  InitialDataReport initial_report;
  std::vector<Snapshot> snapshots;
  std::vector<StepRecord> history;
  std::string stop_reason;
  std::size_t steps = 0;
  std::size_t remarks = 0;
  double g_max = 0;
};

/// Integrates until min g <= -g_max, or a stopping condition is hit.
RunResult run_to_blowup(const InitialDataSpec& spec, const RunOptions& opt,
                        const ProfileTable& table);

double effective_g_max(const InitialDataSpec& spec, const RunOptions& opt);

/// Relative energy drift over records with max|g| <= threshold.
double energy_drift(const RunResult& r, double threshold);

/// Largest Riccati error over records with max|g| <= threshold.
double riccati_error(const RunResult& r, double threshold);

/// Cubic Hermite value of u at a position relative to the state's origin.
double field_at(const FieldState& s, double x_rel);

}  // namespace cusplab
