#include "cusplab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cusplab/errors.hpp"
#include "cusplab/numerics.hpp"

namespace cusplab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string equation_name(Equation e) {
  switch (e) {
    case Equation::CH: return "ch";
    case Equation::HS: return "hs";
    case Equation::Burgers: return "burgers";
  }
  return "?";
}

Equation parse_equation(const std::string& name) {
  std::string n;
  for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "ch") return Equation::CH;
  if (n == "hs") return Equation::HS;
  if (n == "burgers") return Equation::Burgers;
  throw ConfigError("unknown equation '" + name + "' (expected ch, hs or burgers)");
}

double InitialDataSpec::beta() const {
  switch (equation) {
    case Equation::CH: return k3 == 0 ? 1.0 : std::pow(epsilon, 6) * k3 / 256.0;
    case Equation::HS: return beta_v;
    case Equation::Burgers: return 1.0;
  }
  return 1.0;
}

double InitialDataSpec::k3_value() const {
  switch (equation) {
    case Equation::CH: return k3 == 0 ? 256.0 * std::pow(epsilon, -6) : k3;
    case Equation::HS: return 256.0 * beta_v * k_v;
    case Equation::Burgers: return 6.0;
  }
  return 0;
}

double InitialDataSpec::theta() const { return (6.0 / 13.0 - Theta) / 3.0; }

double InitialDataSpec::t0() const { return equation == Equation::CH ? -epsilon : -1.0; }

double InitialDataSpec::core_scale() const {
  switch (equation) {
    case Equation::CH: return std::pow(epsilon, 2.5) / std::sqrt(beta());
    case Equation::HS: return 1.0 / std::sqrt(beta_v);
    case Equation::Burgers: return 1.0;
  }
  return 1.0;
}

double InitialDataSpec::radius() const {
  if (cutoff_radius > 0) return cutoff_radius;
  switch (equation) {
    case Equation::CH: return 50.0 * std::pow(epsilon, 2.5);
    case Equation::HS: return 50.0;
    case Equation::Burgers: return 1.0;
  }
  return 1.0;
}

double InitialDataSpec::extent() const {
  const double r = radius();
  switch (equation) {
    case Equation::CH: return taper ? 3 * r + far_field : 2 * r;
    case Equation::HS: return taper ? 2.1 * r : 2 * r;
    case Equation::Burgers: return 1.0;
  }
  return r;
}

void InitialDataSpec::validate() const {
  if (!(h_min_rel > 0) || !(growth > 0) || !(growth < 0.5) || !(h_max > 0))
    throw ConfigError("initial data: marker spacing parameters must be positive (growth < 0.5)");
  switch (equation) {
    case Equation::CH: {
      if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("initial data: epsilon must lie in (0, 1)");
      if (!(gamma >= 0)) throw ConfigError("initial data: gamma must be nonnegative");
      if (!(delta0 > 0 && delta0 < 1)) throw ConfigError("initial data: delta0 must lie in (0, 1)");
      const double k = k3_value();
      const double lo = std::pow(epsilon, -(1 + delta0)), hi = std::pow(epsilon, -(11 - delta0));
      if (!(k >= lo && k <= hi))
        throw ConfigError("initial data: k3 = " + format_double(k) + " outside [" +
                          format_double(lo) + ", " + format_double(hi) + "]");
      if (!(far_field > 0)) throw ConfigError("initial data: far_field must be positive");
      break;
    }
    case Equation::HS:
      if (!(beta_v > 0)) throw ConfigError("initial data: beta_v must be positive");
      if (!(k_v > 0)) throw ConfigError("initial data: k_v must be positive");
      break;
    case Equation::Burgers: break;
  }
  if (equation != Equation::Burgers) {
    const double lo = std::pow(50.0, -0.2);
    if (!(Theta > lo && Theta < 6.0 / 13.0))
      throw ConfigError("initial data: Theta must lie in (50^{-1/5}, 6/13)");
    if (!(cutoff_radius >= 0)) throw ConfigError("initial data: cutoff_radius must be nonnegative");
  }
}

nlohmann::ordered_json to_json(const InitialDataSpec& s) {
  nlohmann::ordered_json j;
  j["equation"] = equation_name(s.equation);
  if (s.equation == Equation::CH) {
    j["epsilon"] = s.epsilon;
    j["gamma"] = s.gamma;
    j["k3"] = s.k3_value();
    j["delta0"] = s.delta0;
  }
  if (s.equation == Equation::HS) {
    j["beta_v"] = s.beta_v;
    j["k_v"] = s.k_v;
  }
  j["beta"] = s.beta();
  if (s.equation != Equation::Burgers) {
    j["Theta"] = s.Theta;
    j["theta"] = s.theta();
    j["cutoff_radius"] = s.radius();
    j["taper"] = s.taper;
    j["strict_localization"] = s.strict_localization;
  }
  j["t0"] = s.t0();
  j["core_scale"] = s.core_scale();
  j["extent"] = s.extent();
  j["h_min_rel"] = s.h_min_rel;
  j["growth"] = s.growth;
  j["h_max"] = s.h_max;
  if (s.equation == Equation::CH) j["far_field"] = s.far_field;
  return j;
}

nlohmann::ordered_json to_json(const InitialDataReport& r) {
  nlohmann::ordered_json j;
  j["beta"] = r.beta;
  j["theta"] = r.theta;
  j["k3"] = r.k3;
  j["passed"] = r.passed;
  j["sup_constants"] = {{"second", r.c2}, {"third", r.c3}, {"fourth", r.c4}};
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    arr.push_back({{"name", c.name},
                   {"value", c.value},
                   {"bound", c.bound},
                   {"worst_x", c.worst_x},
                   {"enforced", c.enforced},
                   {"passed", c.passed}});
  }
  j["checks"] = arr;
  return j;
}

std::vector<double> marker_positions(const InitialDataSpec& spec) {
  const double ext = spec.extent();
  const double h0 = spec.h_min_rel * spec.core_scale();
  std::vector<double> pos{0.0};
  double x = 0;
  while (true) {
    const double h = std::min(spec.h_max, h0 + spec.growth * x);
    x += h;
    if (x >= ext - 0.5 * h) {
      pos.push_back(ext);
      break;
    }
    pos.push_back(x);
  }
  std::vector<double> out;
  out.reserve(2 * pos.size() - 1);
  for (std::size_t i = pos.size(); i-- > 1;) out.push_back(-pos[i]);
  out.insert(out.end(), pos.begin(), pos.end());
  return out;
}

namespace {

// Seed gradient g(x) = A U'_beta(x / L) chi(x) + lobe(x) and its antiderivative.
struct Seed {
  Equation eq;
  const ProfileTable* tb = nullptr;
  double amp = 1, len = 1, r = 1;
  bool taper = true;
  double lobe_mass = 0;  // u at 2R before the return lobe (CH)

  double profile_part(double x) const {
    const double c = taper ? cusplab::taper(x, r) : 1.0;
    if (c == 0) return 0.0;
    return amp * eval_profile(*tb, x / len).du * c;
  }
  double lobe(double x) const {
    if (eq != Equation::CH || !taper) return 0.0;
    const double ax = std::fabs(x);
    if (ax <= 2 * r || ax >= 3 * r) return 0.0;
    return -lobe_mass * unit_bump((ax - 2 * r) / r) / r;
  }
  double grad(double x) const {
    if (eq == Equation::Burgers) return -1.0 + 3 * x * x;
    return profile_part(x) + lobe(x);
  }
};

double segment_integral(const Seed& s, double a, double b) {
  if (a == b) return 0.0;
  auto f = [&s](double z) { return s.grad(z); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 6, 1e-15);
}

}  // namespace

InitialData build_initial_data(const InitialDataSpec& spec, const ProfileTable& table) {
  spec.validate();
  InitialData out;
  auto& st = out.state;
  auto& rep = out.report;
  st.equation = spec.equation;
  st.t = spec.t0();
  const auto xs = marker_positions(spec);
  const std::size_t n = xs.size();
  const std::size_t mid = n / 2;  // index of x = 0
  st.x = xs;
  st.u.assign(n, 0.0);
  st.g.assign(n, 0.0);
  rep.beta = spec.beta();
  rep.theta = spec.theta();
  rep.k3 = spec.k3_value();

  if (spec.equation == Equation::Burgers) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = xs[i];
      st.u[i] = -x + x * x * x;
      st.g[i] = -1 + 3 * x * x;
    }
    rep.checks.push_back({"gradient_at_origin", st.g[mid], -1.0, 0.0, true, st.g[mid] == -1.0});
  } else {
    if (table.beta != 1.0) throw ConfigError("initial data: profile table must be at beta = 1");
    const double beta = spec.beta();
    const ProfileTable tb = rescale_beta(table, beta);
    Seed sd;
    sd.eq = spec.equation;
    sd.tb = &tb;
    sd.r = spec.radius();
    sd.taper = spec.taper;
    if (spec.equation == Equation::CH) {
      sd.amp = 1.0 / spec.epsilon;
      sd.len = std::pow(spec.epsilon, 2.5);
    } else {
      sd.amp = spec.k_v;
      sd.len = 1.0;
    }
    const double R = sd.r;
    auto core_u = [&](double x) { return sd.amp * sd.len * eval_profile(tb, x / sd.len).u; };
    if (spec.equation == Equation::CH && spec.taper) {
      sd.lobe_mass = core_u(R) + segment_integral(sd, R, 2 * R);
    }

    // u on x >= 0 by closed form in the core and cumulative quadrature outside
    double acc = 0;
    for (std::size_t i = mid; i < n; ++i) {
      const double x = xs[i];
      if (!spec.taper || x <= R) {
        st.u[i] = core_u(x);
      } else {
        const double a = xs[i - 1];
        if (a < R) acc = core_u(R) + segment_integral(sd, R, x);
        else acc += segment_integral(sd, a, x);
        st.u[i] = acc;
      }
      st.g[i] = sd.grad(x);
    }
    double return_residual = 0;
    if (spec.equation == Equation::CH && spec.taper) {
      for (std::size_t i = mid; i < n; ++i) {
        if (xs[i] >= 3 * R) {
          return_residual = std::max(return_residual, std::fabs(st.u[i]));
          st.u[i] = 0.0;
        }
      }
    }
    for (std::size_t i = 0; i < mid; ++i) {
      st.u[i] = -st.u[n - 1 - i];
      st.g[i] = st.g[n - 1 - i];
    }

    const double eps = spec.equation == Equation::CH ? spec.epsilon : 1.0 / spec.k_v;
    const double k3 = spec.k3_value();

    // point conditions at the origin
    const double g00 = st.g[mid];
    rep.checks.push_back({"gradient_at_origin", g00, -2 * sd.amp, 0.0, true,
                          std::fabs(g00 + 2 * sd.amp) <= 1e-12 * 2 * sd.amp});
    const double d2 = sd.amp / sd.len * tb.d2u[0];
    rep.checks.push_back({"second_derivative_at_origin", d2, 0.0, 0.0, true,
                          std::fabs(d2) <= 1e-10 * sd.amp / sd.len});
    const double d3 = sd.amp / (sd.len * sd.len) * third_derivative_at_origin(tb, 1e-3 / std::sqrt(beta));
    rep.checks.push_back({"third_derivative_at_origin", d3, k3, 0.0, true,
                          std::fabs(d3 - k3) <= 1e-3 * k3});

    // sup bounds; the derivative sups are recorded against their scalings
    double gsup = 0, gsup_x = 0, s2 = 0, s3 = 0, s4 = 0;
    const double hfd = 1e-3 * sd.len / std::sqrt(beta);
    const double hfd4 = 1e-2 * sd.len / std::sqrt(beta);
    const double support = spec.taper ? (spec.equation == Equation::CH ? 3 * R : 2 * R) : xs.back();
    for (std::size_t i = mid; i < n; ++i) {
      const double x = xs[i];
      if (std::fabs(st.g[i]) > gsup) {
        gsup = std::fabs(st.g[i]);
        gsup_x = x;
      }
      const double xm = i + 1 < n ? 0.5 * (x + xs[i + 1]) : x;
      const double gm = std::fabs(sd.grad(xm));
      if (gm > gsup) {
        gsup = gm;
        gsup_x = xm;
      }
      if (x > support + 2 * hfd4) continue;
      const double gp = sd.grad(x + hfd), gn = sd.grad(x - hfd), g0 = st.g[i];
      s2 = std::max(s2, std::fabs((gp - gn) / (2 * hfd)));
      s3 = std::max(s3, std::fabs((gp - 2 * g0 + gn) / (hfd * hfd)));
      const double a1 = sd.grad(x + hfd4), a2 = sd.grad(x + 2 * hfd4);
      const double b1 = sd.grad(x - hfd4), b2 = sd.grad(x - 2 * hfd4);
      s4 = std::max(s4, std::fabs((a2 - 2 * a1 + 2 * b1 - b2) / (2 * hfd4 * hfd4 * hfd4)));
    }
    rep.checks.push_back({"gradient_sup", gsup, 2 * sd.amp, gsup_x, true,
                          gsup <= 2 * sd.amp * (1 + 1e-12)});
    rep.c2 = s2 / (std::sqrt(k3) / std::sqrt(eps));
    rep.c3 = s3 / k3;
    rep.c4 = s4 / (std::pow(k3, 1.5) * std::sqrt(eps));

    // pointwise localization envelopes
    const double b15 = std::pow(beta, 0.2);
    double core_worst = 0, core_x = 0, tap_worst = 0, tap_x = 0;
    for (std::size_t i = mid; i < n; ++i) {
      const double x = xs[i];
      const double y = x / sd.len;
      const double diff = std::fabs(st.g[i] / sd.amp - eval_profile(tb, y).du);
      const double near = beta * y * y / (3000 * (1 + beta * y * y));
      const double far = spec.Theta / (1 + b15 * std::pow(std::fabs(y), 0.4));
      const double bound = std::min(near, far);
      const double ratio = diff == 0 ? 0.0 : (bound > 0 ? diff / bound : 1e300);
      if (x <= R || !spec.taper) {
        if (ratio > core_worst) {
          core_worst = ratio;
          core_x = x;
        }
      } else if (ratio > tap_worst) {
        tap_worst = ratio;
        tap_x = x;
      }
    }
    rep.checks.push_back({"localization_core", core_worst, 1.0, core_x, true, core_worst <= 1.0});
    if (spec.taper) {
      rep.checks.push_back({"localization_taper", tap_worst, 1.0, tap_x,
                            spec.strict_localization, tap_worst <= 1.0});
    }

    // tail: |x|^{2/5} |g| at the outer edge of the marker cloud
    const double xe = xs.back();
    const double tail = std::pow(xe, 0.4) * std::fabs(st.g.back());
    const double tail_bound = spec.theta() / (2 * b15);
    rep.checks.push_back({"tail_decay", tail, tail_bound, xe, spec.taper, tail <= tail_bound});
    if (spec.equation == Equation::CH && spec.taper) {
      const double scale = std::fabs(sd.lobe_mass);
      rep.checks.push_back({"return_to_zero", return_residual, 1e-10 * scale, 3 * R, true,
                            return_residual <= 1e-10 * scale});
    }
  }

  st.label.resize(n);
  for (std::size_t i = 0; i < n; ++i) st.label[i] = static_cast<std::int64_t>(i);
  st.g0 = st.g;
  st.inserted.assign(n, 0);
  st.lj.assign(n, 0.0);
  st.da.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) st.da[i] = xs[i + 1] - xs[i];
  st.ref = mid;
  rebuild_positions(st);

  for (auto& c : rep.checks) {
    if (!c.passed && c.enforced) rep.passed = false;
  }
  for (const auto& c : rep.checks) {
    if (!c.passed && c.enforced) {
      throw InitialDataError("initial data violates " + c.name + ": value " +
                                 format_double(c.value) + " against bound " +
                                 format_double(c.bound) + " at x = " + format_double(c.worst_x),
                             c.name, c.worst_x);
    }
  }
  return out;
}

std::vector<double> hs_qx(const std::vector<double>& x, const std::vector<double>& g) {
  std::vector<double> q(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    q[i] = q[i - 1] - 0.25 * (g[i - 1] * g[i - 1] + g[i] * g[i]) * (x[i] - x[i - 1]);
  return q;
}

namespace {

// Weights of the exact kernel integral over one segment of width h:
// e0 = 1 - e^{-h}, w_up = (h - e0)/h, w_dn = (e0 - h e^{-h})/h.
struct KernelWeights {
  double decay, e0, w_up, w_dn;
};

KernelWeights kernel_weights(double h) {
  KernelWeights k;
  k.decay = std::exp(-h);
  k.e0 = -std::expm1(-h);
  if (h < 1e-3) {
    // series in h; the closed forms lose digits to cancellation here
    double p = h, up = 0, dn = 0, fact = 1;
    for (int m = 2; m < 9; ++m) {
      p *= h;
      fact *= m;
      const double sgn = (m % 2) ? -1.0 : 1.0;
      up += sgn * p / fact;
      dn += sgn * (m - 1) * p / fact;
    }
    k.w_up = up / h;
    k.w_dn = dn / h;
  } else {
    k.w_up = (h - k.e0) / h;
    k.w_dn = (k.e0 - h * k.decay) / h;
  }
  return k;
}

}  // namespace

void ch_pressure(const std::vector<double>& x, const std::vector<double>& f,
                 std::vector<double>& p, std::vector<double>& px) {
  const std::size_t n = x.size();
  std::vector<double> a(n, 0.0), b(n, 0.0);
  std::vector<KernelWeights> w(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i + 1 < n; ++i) w[i] = kernel_weights(x[i + 1] - x[i]);
  // a_i = int_{-inf}^{x_i} e^{-(x_i - z)} f,  b_i = int_{x_i}^{inf} e^{-(z - x_i)} f
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& k = w[i];
    a[i + 1] = k.decay * a[i] + f[i] * k.e0 + (f[i + 1] - f[i]) * k.w_up;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    const auto& k = w[i];
    b[i] = k.decay * b[i + 1] + f[i] * k.e0 + (f[i + 1] - f[i]) * k.w_dn;
  }
  p.resize(n);
  px.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = 0.5 * (a[i] + b[i]);
    px[i] = 0.5 * (b[i] - a[i]);
  }
}

namespace {

bool increasing(const std::vector<double>& x) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) return false;
  return true;
}

// Segment lengths int J da by the trapezoid rule with the Euler-Maclaurin end
// correction; J' comes from three-point differences in the label.
void positions(const std::vector<double>& lj, const std::vector<double>& da, std::size_t ref,
               std::vector<double>& x) {
  const std::size_t n = lj.size();
  std::vector<double> j(n), dj(n);
  for (std::size_t i = 0; i < n; ++i) j[i] = std::exp(lj[i]);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      dj[i] = (j[1] - j[0]) / da[0];
    } else if (i + 1 == n) {
      dj[i] = (j[i] - j[i - 1]) / da[i - 1];
    } else {
      const double hl = da[i - 1], hr = da[i];
      dj[i] = (hl * hl * (j[i + 1] - j[i]) + hr * hr * (j[i] - j[i - 1])) / (hl * hr * (hl + hr));
    }
  }
  auto seg = [&](std::size_t i) {
    const double h = da[i];
    const double len = 0.5 * h * (j[i] + j[i + 1]) + h * h * (dj[i] - dj[i + 1]) / 12.0;
    // the correction is only trusted while it is small
    const double lo = h * std::min(j[i], j[i + 1]);
    return std::max(len, lo);
  };
  x.resize(n);
  x[ref] = 0.0;
  for (std::size_t i = ref + 1; i < n; ++i) x[i] = x[i - 1] + seg(i - 1);
  for (std::size_t i = ref; i-- > 0;) x[i] = x[i + 1] - seg(i);
}

}  // namespace

void rebuild_positions(FieldState& s) { positions(s.lj, s.da, s.ref, s.x); }

void set_reference(FieldState& s, std::size_t r) {
  if (r >= s.size()) throw DomainError("set_reference: index out of range");
  s.origin += s.x[r];
  s.ref = r;
  rebuild_positions(s);
}

bool step_hs(FieldState& s, double dt) {
  const std::size_t n = s.size();
  const std::size_t r = s.ref;
  // the Riccati flow is exact: g and lj at the stage times are closed forms
  std::vector<double> gh(n), gf(n), ljh(n), ljf(n), xh, xf;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = s.g[i];
    gh[i] = g / (1 + g * dt / 4);
    gf[i] = g / (1 + g * dt / 2);
    ljh[i] = s.lj[i] + 2 * std::log1p(g * dt / 4);
    ljf[i] = s.lj[i] + 2 * std::log1p(g * dt / 2);
  }
  positions(ljh, s.da, r, xh);
  positions(ljf, s.da, r, xf);
  if (!increasing(xf)) return false;
  // dv/dt = -q_x depends on time only through x and g, so the two middle
  // stages coincide
  const auto q1 = hs_qx(s.x, s.g);
  const auto q2 = hs_qx(xh, gh);
  const auto q4 = hs_qx(xf, gf);
  const double v = s.u[r];
  const double k1r = v;
  const double k2r = v - 0.5 * dt * q1[r];
  const double k3r = v - 0.5 * dt * q2[r];
  const double k4r = v - dt * q2[r];
  for (std::size_t i = 0; i < n; ++i) s.u[i] -= dt / 6 * (q1[i] + 4 * q2[i] + q4[i]);
  s.origin += dt / 6 * (k1r + 2 * k2r + 2 * k3r + k4r);
  s.g = std::move(gf);
  s.lj = std::move(ljf);
  s.x = std::move(xf);
  s.t += dt;
  return true;
}

bool step_ch(FieldState& s, double dt, double gamma) {
  const std::size_t n = s.size();
  const std::size_t r = s.ref;
  std::vector<double> f(n), p, px, x;
  struct K {
    std::vector<double> lj, u, g;
    double ref = 0;
  };
  auto rhs = [&](const std::vector<double>& lj, const std::vector<double>& u,
                 const std::vector<double>& g, K& k) {
    positions(lj, s.da, r, x);
    for (std::size_t i = 0; i < n; ++i) f[i] = 2 * gamma * u[i] + u[i] * u[i] + 0.5 * g[i] * g[i];
    ch_pressure(x, f, p, px);
    k.lj = g;
    k.u.resize(n);
    k.g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      k.u[i] = -px[i];
      k.g[i] = -0.5 * g[i] * g[i] + u[i] * u[i] + 2 * gamma * u[i] - p[i];
    }
    k.ref = u[r];
  };
  K k1, k2, k3, k4;
  std::vector<double> ls(n), us(n), gs(n);
  auto stage = [&](const K& k, double c) {
    for (std::size_t i = 0; i < n; ++i) {
      ls[i] = s.lj[i] + c * dt * k.lj[i];
      us[i] = s.u[i] + c * dt * k.u[i];
      gs[i] = s.g[i] + c * dt * k.g[i];
    }
  };
  rhs(s.lj, s.u, s.g, k1);
  stage(k1, 0.5);
  rhs(ls, us, gs, k2);
  stage(k2, 0.5);
  rhs(ls, us, gs, k3);
  stage(k3, 1.0);
  rhs(ls, us, gs, k4);
  for (std::size_t i = 0; i < n; ++i) {
    ls[i] = s.lj[i] + dt / 6 * (k1.lj[i] + 2 * k2.lj[i] + 2 * k3.lj[i] + k4.lj[i]);
    us[i] = s.u[i] + dt / 6 * (k1.u[i] + 2 * k2.u[i] + 2 * k3.u[i] + k4.u[i]);
    gs[i] = s.g[i] + dt / 6 * (k1.g[i] + 2 * k2.g[i] + 2 * k3.g[i] + k4.g[i]);
  }
  positions(ls, s.da, r, x);
  if (!increasing(x)) return false;
  s.origin += dt / 6 * (k1.ref + 2 * k2.ref + 2 * k3.ref + k4.ref);
  s.lj = std::move(ls);
  s.u = std::move(us);
  s.g = std::move(gs);
  s.x = std::move(x);
  s.t += dt;
  return true;
}

bool step_burgers(FieldState& s, double dt) {
  const std::size_t n = s.size();
  std::vector<double> lj(n), x;
  for (std::size_t i = 0; i < n; ++i) lj[i] = s.lj[i] + std::log1p(s.g[i] * dt);
  positions(lj, s.da, s.ref, x);
  if (!increasing(x)) return false;
  s.origin += dt * s.u[s.ref];
  s.lj = std::move(lj);
  s.x = std::move(x);
  for (auto& g : s.g) g = g / (1 + g * dt);
  s.t += dt;
  return true;
}

double riccati_constant(Equation e) { return e == Equation::Burgers ? 1.0 : 2.0; }

double field_at(const FieldState& s, double x_rel) {
  const auto& x = s.x;
  if (x.empty()) throw DomainError("field_at: empty state");
  if (x_rel <= x.front()) return s.u.front();
  if (x_rel >= x.back()) return s.u.back();
  auto it = std::upper_bound(x.begin(), x.end(), x_rel);
  const std::size_t j = static_cast<std::size_t>(it - x.begin());
  const std::size_t i = j - 1;
  return hermite3(x_rel, x[i], x[j], s.u[i], s.u[j], s.g[i], s.g[j]);
}

ModulationState track_modulation(const FieldState& s) {
  const std::size_t n = s.size();
  if (n < 3) throw DomainError("track_modulation: fewer than three markers");
  std::size_t i = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (s.g[k] < s.g[i]) i = k;
  if (i == 0 || i == n - 1)
    throw DomainError("track_modulation: gradient minimum on the boundary at x = " +
                      format_double(s.origin + s.x[i]));
  if (!(s.g[i] < 0)) throw DomainError("track_modulation: no negative gradient");
  const double x0 = s.x[i - 1], x1 = s.x[i], x2 = s.x[i + 1];
  const double g0 = s.g[i - 1], g1 = s.g[i], g2 = s.g[i + 1];
  const double d01 = (g1 - g0) / (x1 - x0), d12 = (g2 - g1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  const double b = (d01 * (x2 - x1) + d12 * (x1 - x0)) / (x2 - x0);
  double off = 0;
  if (a > 0) off = std::clamp(-b / (2 * a), x0 - x1, x2 - x1);
  ModulationState m;
  m.t = s.t;
  m.i_min = i;
  m.xi = x1 + off;
  m.xi_abs = s.origin + m.xi;
  m.g_min = std::min(g1 + b * off + a * off * off, g1);
  m.d3u_at_min = 2 * a;
  m.kappa = field_at(s, m.xi);
  const double c = riccati_constant(s.equation);
  m.tau = s.t - c / m.g_min;
  m.s = -std::log(m.tau - s.t);
  return m;
}

void RunOptions::validate() const {
  if (!(g_max >= 0)) throw ConfigError("run: g_max must be nonnegative");
  if (!(cfl > 0 && cfl <= 0.5)) throw ConfigError("run: cfl must lie in (0, 0.5]");
  if (!(dt_max > 0)) throw ConfigError("run: dt_max must be positive");
  if (!(dt_min > 0 && dt_min < dt_max)) throw ConfigError("run: dt_min must lie in (0, dt_max)");
  if (snapshots_per_decade < 1) throw ConfigError("run: snapshots_per_decade must be >= 1");
  if (max_steps < 1) throw ConfigError("run: max_steps must be >= 1");
  if (!(remark_ratio > 2)) throw ConfigError("run: remark_ratio must exceed 2");
}

nlohmann::ordered_json to_json(const RunOptions& o) {
  nlohmann::ordered_json j;
  j["g_max"] = o.g_max;
  j["cfl"] = o.cfl;
  j["dt_max"] = o.dt_max;
  j["dt_min"] = o.dt_min;
  j["snapshots_per_decade"] = o.snapshots_per_decade;
  j["max_steps"] = o.max_steps;
  j["remark_ratio"] = o.remark_ratio;
  return j;
}

double effective_g_max(const InitialDataSpec& spec, const RunOptions& opt) {
  if (opt.g_max > 0) return opt.g_max;
  return spec.equation == Equation::CH ? 1e4 / spec.epsilon : 1e4;
}

namespace {

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
  double s = 0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (f[i - 1] + f[i]) * (x[i] - x[i - 1]);
  return s;
}

// Splits segments whose length exceeds ratio times a neighbour's.
std::size_t remark(FieldState& s, double ratio, std::int64_t& next_label) {
  const std::size_t n = s.size();
  std::set<std::size_t> split;  // segment k joins markers k and k+1
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dl = s.x[i] - s.x[i - 1], dr = s.x[i + 1] - s.x[i];
    if (dr > ratio * dl) split.insert(i);
    if (dl > ratio * dr) split.insert(i - 1);
  }
  if (split.empty()) return 0;
  FieldState o;
  o.equation = s.equation;
  o.t = s.t;
  o.origin = s.origin;
  const std::size_t m = n + split.size();
  o.u.reserve(m);
  o.g.reserve(m);
  o.lj.reserve(m);
  o.da.reserve(m - 1);
  o.g0.reserve(m);
  o.label.reserve(m);
  o.inserted.reserve(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == s.ref) o.ref = o.u.size();
    o.u.push_back(s.u[i]);
    o.g.push_back(s.g[i]);
    o.lj.push_back(s.lj[i]);
    o.g0.push_back(s.g0[i]);
    o.label.push_back(s.label[i]);
    o.inserted.push_back(s.inserted[i]);
    if (i + 1 == n) break;
    if (split.count(i)) {
      const double xm = 0.5 * (s.x[i] + s.x[i + 1]);
      o.da.push_back(0.5 * s.da[i]);
      o.da.push_back(0.5 * s.da[i]);
      o.u.push_back(hermite3(xm, s.x[i], s.x[i + 1], s.u[i], s.u[i + 1], s.g[i], s.g[i + 1]));
      o.g.push_back(0.5 * (s.g[i] + s.g[i + 1]));
      o.lj.push_back(0.5 * (s.lj[i] + s.lj[i + 1]));
      o.g0.push_back(kNaN);
      o.label.push_back(next_label++);
      o.inserted.push_back(1);
    } else {
      o.da.push_back(s.da[i]);
    }
  }
  rebuild_positions(o);
  s = std::move(o);
  return split.size();
}

}  // namespace

RunResult run_to_blowup(const InitialDataSpec& spec, const RunOptions& opt,
                        const ProfileTable& table) {
  opt.validate();
  RunResult res;
  res.spec = spec;
  res.options = opt;
  auto init = build_initial_data(spec, table);
  res.initial_report = init.report;
  FieldState s = std::move(init.state);
  res.g_max = effective_g_max(spec, opt);
  const double g_init = -*std::min_element(s.g.begin(), s.g.end());
  if (res.g_max < 1e3 * g_init)
    throw ConfigError("run: g_max must be at least 1e3 times the initial gradient magnitude");
  const double c = riccati_constant(spec.equation);
  const double t0 = spec.t0();
  std::int64_t next_label = static_cast<std::int64_t>(s.size());
  const double snap_factor = std::pow(10.0, -1.0 / opt.snapshots_per_decade);

  auto record = [&](double dt, const ModulationState& m) {
    StepRecord r;
    r.t = s.t;
    r.dt = dt;
    r.mod = m;
    r.markers = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
      r.max_abs_g = std::max(r.max_abs_g, std::fabs(s.g[i]));
      r.max_abs_u = std::max(r.max_abs_u, std::fabs(s.u[i]));
    }
    std::vector<double> dens(s.size());
    switch (spec.equation) {
      case Equation::CH: {
        std::vector<double> f(s.size()), p, px;
        for (std::size_t i = 0; i < s.size(); ++i) {
          dens[i] = s.u[i] * s.u[i] + s.g[i] * s.g[i];
          f[i] = 2 * spec.gamma * s.u[i] + s.u[i] * s.u[i] + 0.5 * s.g[i] * s.g[i];
        }
        ch_pressure(s.x, f, p, px);
        for (std::size_t i = 0; i < s.size(); ++i) {
          r.max_abs_p = std::max(r.max_abs_p, std::fabs(p[i]));
          r.max_abs_px = std::max(r.max_abs_px, std::fabs(px[i]));
        }
        break;
      }
      case Equation::HS: {
        for (std::size_t i = 0; i < s.size(); ++i) dens[i] = s.g[i] * s.g[i];
        auto q = hs_qx(s.x, s.g);
        for (double v : q) r.max_abs_px = std::max(r.max_abs_px, std::fabs(v));
        break;
      }
      case Equation::Burgers:
        for (std::size_t i = 0; i < s.size(); ++i) dens[i] = s.u[i] * s.u[i];
        break;
    }
    // H as int e J da: the same integral in labels, where J is known per marker
    // and the quadrature does not see the nonuniform physical spacing.
    r.energy_x = trapezoid(s.x, dens);
    r.energy = 0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
      r.energy += 0.5 * s.da[i] * (dens[i] * std::exp(s.lj[i]) + dens[i + 1] * std::exp(s.lj[i + 1]));
    if (spec.equation != Equation::CH) {
      const double el = s.t - t0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.inserted[i]) continue;
        const double g0 = s.g0[i];
        const double exact = g0 / (1 + g0 * el / c);
        if (exact == 0) continue;
        r.riccati_error = std::max(r.riccati_error, std::fabs(s.g[i] - exact) / std::fabs(exact));
      }
    }
    res.history.push_back(r);
  };

  ModulationState mod = track_modulation(s);
  record(0.0, mod);
  res.snapshots.push_back({s, mod});
  double next_snap = (mod.tau - s.t) * snap_factor;

  while (true) {
    const double gmin = *std::min_element(s.g.begin(), s.g.end());
    if (gmin <= -res.g_max) {
      res.stop_reason = "gradient_threshold";
      break;
    }
    if (res.steps >= opt.max_steps) {
      res.stop_reason = "max_steps";
      break;
    }
    const double dt = std::min(opt.dt_max, opt.cfl / res.history.back().max_abs_g);
    if (dt < opt.dt_min) {
      res.stop_reason = "dt_underflow";
      break;
    }
    FieldState prev = s;
    bool ok = false;
    switch (spec.equation) {
      case Equation::CH: ok = step_ch(s, dt, spec.gamma); break;
      case Equation::HS: ok = step_hs(s, dt); break;
      case Equation::Burgers: ok = step_burgers(s, dt); break;
    }
    if (!ok) {
      s = std::move(prev);
      res.stop_reason = "marker_crossing";
      break;
    }
    ++res.steps;
    res.remarks += remark(s, opt.remark_ratio, next_label);
    // keep the frame origin on the lowest-gradient marker
    std::size_t imin = 0;
    for (std::size_t k = 1; k < s.size(); ++k)
      if (s.g[k] < s.g[imin]) imin = k;
    set_reference(s, imin);

    try {
      mod = track_modulation(s);
    } catch (const DomainError&) {
      res.stop_reason = "lost_minimum";
      break;
    }
    record(dt, mod);
    if (mod.tau - s.t <= next_snap) {
      res.snapshots.push_back({s, mod});
      while (next_snap >= mod.tau - s.t) next_snap *= snap_factor;
    }
  }
  if (res.snapshots.back().state.t != s.t) res.snapshots.push_back({s, mod});
  return res;
}

double energy_drift(const RunResult& r, double threshold) {
  if (r.history.empty()) return 0;
  const double h0 = r.history.front().energy;
  double worst = 0;
  for (const auto& rec : r.history) {
    if (rec.max_abs_g > threshold) break;
    worst = std::max(worst, std::fabs(rec.energy - h0) / std::fabs(h0));
  }
  return worst;
}

double riccati_error(const RunResult& r, double threshold) {
  double worst = 0;
  for (const auto& rec : r.history) {
    if (rec.max_abs_g > threshold) break;
    worst = std::max(worst, rec.riccati_error);
  }
  return worst;
}

}  // namespace cusplab
