#pragma once

#include <vector>

#include "cusplab/sim.hpp"

namespace cusplab {

/// Exponents of the self-similar change of variables
///   y = sqrt(beta) (x - xi) / (tau - t)^space,  U = amp sqrt(beta) (u - kappa) / (tau - t)^value
/// with space = value + 1 so that U_y = amp (tau - t) u_x.
struct Scaling {
  double space = 2.5;
  double value = 1.5;
  double amp = 1.0;
  double beta = 1.0;
};

/// 5/2 and 3/2 for CH and HS; 3/2 and 1/2 with amplitude 2 for Burgers, so
/// that U_y(0) = -2 in every case.
Scaling scaling_for(const InitialDataSpec& spec);

struct SelfSimilarData {
  double t = 0;
  double s = 0;
  std::vector<double> y, U, Uy;
  bool truncated = false;  ///< part of the requested grid lay outside the data
};

/// Marker samples in self-similar variables.
SelfSimilarData to_self_similar(const FieldState& state, const ModulationState& mod,
                                const Scaling& sc);

/// Resampled on a sorted y grid: U by cubic Hermite, U_y linearly. Grid points
/// outside the data are dropped and flagged.
SelfSimilarData to_self_similar(const FieldState& state, const ModulationState& mod,
                                const Scaling& sc, const std::vector<double>& y_grid);

}  // namespace cusplab
