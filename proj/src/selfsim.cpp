#include "cusplab/selfsim.hpp"

#include <algorithm>
#include <cmath>

#include "cusplab/errors.hpp"
#include "cusplab/numerics.hpp"

namespace cusplab {

Scaling scaling_for(const InitialDataSpec& spec) {
  Scaling sc;
  if (spec.equation == Equation::Burgers) {
    sc.space = 1.5;
    sc.value = 0.5;
    sc.amp = 2.0;
    sc.beta = 1.0;
  } else {
    sc.beta = spec.beta();
  }
  return sc;
}

SelfSimilarData to_self_similar(const FieldState& st, const ModulationState& mod,
                                const Scaling& sc) {
  const double d = mod.tau - st.t;
  if (!(d > 0)) throw DomainError("to_self_similar: tau must exceed t");
  const double sb = std::sqrt(sc.beta);
  const double ys = sb / std::pow(d, sc.space);
  const double us = sc.amp * sb / std::pow(d, sc.value);
  SelfSimilarData out;
  out.t = st.t;
  out.s = mod.s;
  const std::size_t n = st.size();
  out.y.resize(n);
  out.U.resize(n);
  out.Uy.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.y[i] = (st.x[i] - mod.xi) * ys;
    out.U[i] = (st.u[i] - mod.kappa) * us;
    out.Uy[i] = sc.amp * d * st.g[i];
  }
  return out;
}

SelfSimilarData to_self_similar(const FieldState& st, const ModulationState& mod,
                                const Scaling& sc, const std::vector<double>& y_grid) {
  if (!std::is_sorted(y_grid.begin(), y_grid.end()))
    throw ConfigError("to_self_similar: y grid must be sorted");
  const auto raw = to_self_similar(st, mod, sc);
  SelfSimilarData out;
  out.t = raw.t;
  out.s = raw.s;
  const auto& y = raw.y;
  for (double q : y_grid) {
    if (q < y.front() || q > y.back()) {
      out.truncated = true;
      continue;
    }
    auto it = std::upper_bound(y.begin(), y.end(), q);
    std::size_t j = static_cast<std::size_t>(it - y.begin());
    if (j == y.size()) j = y.size() - 1;
    const std::size_t i = j - 1;
    const double w = (q - y[i]) / (y[j] - y[i]);
    out.y.push_back(q);
    out.U.push_back(hermite3(q, y[i], y[j], raw.U[i], raw.U[j], raw.Uy[i], raw.Uy[j]));
    out.Uy.push_back(raw.Uy[i] + w * (raw.Uy[j] - raw.Uy[i]));
  }
  return out;
}

}  // namespace cusplab
