#include "cusplab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cusplab/dop853.hpp"
#include "cusplab/errors.hpp"
#include "cusplab/numerics.hpp"

namespace cusplab {

void ProfileParams::validate() const {
  if (!(beta > 0)) throw ConfigError("profile: beta must be positive");
  if (!(y_max >= 1)) throw ConfigError("profile: y_max must be at least 1");
  if (!(rel_tol > 0 && rel_tol <= 1e-6) || !(abs_tol > 0 && abs_tol <= 1e-6))
    throw ConfigError("profile: tolerances must lie in (0, 1e-6]");
  if (n_samples < 64) throw ConfigError("profile: n_samples must be at least 64");
  if (!(linear_end > 0)) throw ConfigError("profile: linear_end must be positive");
}

double z_of_w(double w, double beta, double tol) {
  if (!(tol > 0)) throw ConfigError("v_of_w: tol must be positive");
  const double q = beta * w * w;
  if (q == 0) return 4.0;
  auto f = [q](double z) { return q * std::pow(z, 5) + z - 4.0; };
  const double zc = std::pow(4.0 / q, 0.2);
  double lo, hi;
  if (zc < 4.0) {
    hi = zc;
    lo = zc * std::pow((4.0 - zc) / 4.0, 0.2);
  } else {
    hi = 4.0;
    lo = std::max(0.0, 4.0 - 1024.0 * q);
  }
  return solve_bracketed(f, lo, hi, tol);
}

double v_of_w(double w, double beta, double tol) { return 0.5 * (5.0 - z_of_w(w, beta, tol)); }

namespace {

std::vector<double> make_nodes(const ProfileParams& p) {
  std::vector<double> nodes;
  const double lin_end = std::min(p.linear_end, p.y_max);
  const bool has_log = p.y_max > lin_end;
  const std::size_t n_lin = has_log ? p.n_samples / 2 : p.n_samples;
  const std::size_t n_log = p.n_samples - n_lin;
  nodes.reserve(p.n_samples);
  for (std::size_t i = 0; i < n_lin; ++i)
    nodes.push_back(lin_end * static_cast<double>(i) / static_cast<double>(n_lin - 1));
  if (has_log) {
    const double l0 = std::log(lin_end), l1 = std::log(p.y_max);
    for (std::size_t i = 1; i <= n_log; ++i)
      nodes.push_back(std::exp(l0 + (l1 - l0) * static_cast<double>(i) / n_log));
    nodes.back() = p.y_max;
  }
  return nodes;
}

// Slope and curvature from W = U + 5y/2 through the algebraic relation.
// 2 + U' = beta W^2 Z^5 / 2, so U'' = 2 sqrt(beta) (2+U')^{1/2} (-U')^{7/2} = beta W Z^6 / 8.
void fill_derivatives(double w, double beta, double& du, double& d2u) {
  const double z = z_of_w(w, beta);
  du = -0.5 * z;
  d2u = beta * std::fabs(w) * std::pow(z, 6) / 8.0;
}

double residual_at(double y, double u, double du, double d2u) {
  return (1.0 + 0.5 * du) * du + (u + 2.5 * y) * d2u;
}

void certify(ProfileTable& t, double tol) {
  auto r = profile_residual(t);
  t.residual_max = std::fabs(r.value);
  t.residual_worst_y = r.y;
  if (!(t.residual_max <= tol))
    throw CertificationError("profile residual certification failed", r.y, r.value);
}

}  // namespace

ProfileTable build_profile(const ProfileParams& params) {
  params.validate();
  ProfileTable t;
  t.beta = params.beta;
  t.y_max = params.y_max;
  t.rel_tol = params.rel_tol;
  t.abs_tol = params.abs_tol;
  t.nodes = make_nodes(params);

  const double beta = params.beta;
  Dop853::Options opt;
  opt.rel_tol = params.rel_tol;
  opt.abs_tol = params.abs_tol;
  Dop853 rk([beta](double, std::span<const double> w, std::span<double> dw) {
    dw[0] = 0.5 * (5.0 - z_of_w(w[0], beta));
  }, 1, opt);
  const double w0 = 0.0;
  auto states = rk.sample(0.0, std::span<const double>(&w0, 1), t.y_max, t.nodes);

  const std::size_t n = t.nodes.size();
  t.u.resize(n);
  t.du.resize(n);
  t.d2u.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = t.nodes[i];
    const double w = states[i][0];
    t.u[i] = w - 2.5 * y;
    fill_derivatives(w, beta, t.du[i], t.d2u[i]);
  }
  t.u[0] = 0.0;
  t.du[0] = -2.0;
  t.d2u[0] = 0.0;
  certify(t, params.certify_tol);
  return t;
}

AsymptoticState asymptotic_state(double du, double beta) {
  if (!(du > -2.0 && du < 0.0)) throw DomainError("asymptotic_state: slope must lie in (-2, 0)");
  if (!(beta > 0)) throw DomainError("asymptotic_state: beta must be positive");
  const double a = -du;
  const double sb = std::sqrt(beta);
  const double r = std::sqrt(2.0 + du);
  AsymptoticState s;
  s.y = r * (2 * a * a + 2 * a + 3) / (30.0 * sb * std::pow(a, 2.5));
  s.u = -r * (1 + a) / (6.0 * sb * std::pow(a, 1.5));
  s.d2u = 2.0 * sb * r * std::pow(a, 3.5);
  return s;
}

double slope_from_y(double y, double beta) {
  if (!(y >= 0)) throw DomainError("slope_from_y: y must be nonnegative");
  if (y == 0) return -2.0;
  const double ly = std::log(y) + std::log(30.0 * std::sqrt(beta));
  // log y(a) - log y, decreasing in a on (0, 2)
  auto g = [ly](double a) {
    return 0.5 * std::log(2.0 - a) + std::log(2 * a * a + 2 * a + 3) - 2.5 * std::log(a) - ly;
  };
  double a0 = std::pow(3.0 * std::sqrt(2.0) / (30.0 * std::sqrt(beta) * y), 0.4);
  double lo = std::min(a0, 1.0) * 0.5;
  while (g(lo) < 0) lo *= 0.5;
  double hi = std::min(2.0 * a0, 1.5);
  while (g(hi) > 0) hi = 0.5 * (hi + 2.0);
  return -solve_bracketed(g, lo, hi, 1e-15);
}

ProfilePoint eval_profile(const ProfileTable& t, double y) {
  const double ay = std::fabs(y);
  const double sign = y < 0 ? -1.0 : 1.0;
  ProfilePoint p;
  if (ay == 0) return {0.0, -2.0, 0.0};
  if (ay > t.y_max) {
    const double du = slope_from_y(ay, t.beta);
    auto s = asymptotic_state(du, t.beta);
    p = {s.u, du, s.d2u};
  } else {
    auto it = std::upper_bound(t.nodes.begin(), t.nodes.end(), ay);
    std::size_t k = static_cast<std::size_t>(it - t.nodes.begin());
    if (k == t.nodes.size()) k = t.nodes.size() - 1;
    const std::size_t j = k - 1;
    if (t.nodes[j] == ay) {
      p = {t.u[j], t.du[j], t.d2u[j]};
    } else {
      const double u = hermite5(ay, t.nodes[j], t.nodes[k], t.u[j], t.u[k], t.du[j], t.du[k],
                                t.d2u[j], t.d2u[k]);
      p.u = u;
      fill_derivatives(u + 2.5 * ay, t.beta, p.du, p.d2u);
    }
  }
  return {sign * p.u, p.du, sign * p.d2u};
}

ProfileTable rescale_beta(const ProfileTable& src, double beta) {
  if (src.beta != 1.0) throw ConfigError("rescale_beta: source table must be at beta = 1");
  if (!(beta > 0)) throw ConfigError("rescale_beta: beta must be positive");
  if (beta == 1.0) return src;
  ProfileTable t = src;
  const double sb = std::sqrt(beta);
  t.beta = beta;
  t.y_max = src.y_max / sb;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.nodes[i] = src.nodes[i] / sb;
    t.u[i] = src.u[i] / sb;
    t.d2u[i] = src.d2u[i] * sb;
  }
  auto r = profile_residual(t);
  t.residual_max = std::fabs(r.value);
  t.residual_worst_y = r.y;
  return t;
}

ProfileResidual profile_residual(const ProfileTable& t) {
  ProfileResidual worst{0.0, 0.0};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = residual_at(t.nodes[i], t.u[i], t.du[i], t.d2u[i]);
    if (std::fabs(r) > std::fabs(worst.value) || std::isnan(r)) worst = {t.nodes[i], r};
  }
  return worst;
}

TaylorReport taylor_check(const ProfileTable& t, const TaylorOptions& opt) {
  TaylorReport rep;
  rep.window = opt.window / std::sqrt(t.beta);
  std::vector<double> xs, us;
  for (std::size_t i = 0; i < t.size() && t.nodes[i] <= rep.window; ++i) {
    ++rep.nodes_in_window;
    xs.push_back(t.nodes[i]);
    us.push_back(t.u[i]);
    if (t.nodes[i] > 0) {
      xs.push_back(-t.nodes[i]);
      us.push_back(-t.u[i]);
    }
  }
  if (rep.nodes_in_window < 8)
    throw ConfigError("taylor_check: fit window holds fewer than 8 nodes");
  const int odd[] = {1, 3, 5};
  auto c = fit_powers(xs, us, odd);
  rep.c1 = c[0];
  rep.c3 = c[1];
  rep.c5 = c[2];
  const double c3_ref = 128.0 * t.beta / 3.0;
  rep.c1_error = std::fabs(rep.c1 + 2.0);
  rep.c3_rel_error = std::fabs(rep.c3 - c3_ref) / c3_ref;
  const int all[] = {0, 1, 2, 3, 4, 5};
  auto full = fit_powers(xs, us, all);
  for (int k : {0, 2, 4})
    rep.max_even = std::max(rep.max_even, std::fabs(full[k]) * std::pow(rep.window, k));
  rep.passed = rep.c1_error <= opt.c1_tol && rep.c3_rel_error <= opt.c3_rel_tol &&
               rep.max_even <= opt.even_tol;
  return rep;
}

double third_derivative_at_origin(const ProfileTable& t, double h) {
  auto stencil = [&t](double s) {
    auto f = [&t](double y) { return eval_profile(t, y).du; };
    return (-f(2 * s) + 16 * f(s) - 30 * f(0) + 16 * f(-s) - f(-2 * s)) / (12 * s * s);
  };
  return (16.0 * stencil(0.5 * h) - stencil(h)) / 15.0;
}

TailLimits tail_limits(const ProfileTable& t, double y) {
  auto p = eval_profile(t, y);
  TailLimits l;
  l.y = y;
  l.target = std::pow(50.0 * t.beta, -0.2);
  l.gradient = std::pow(y, 0.4) * std::fabs(p.du);
  l.value = 0.6 * std::pow(y, -0.6) * std::fabs(p.u);
  l.curvature = 2.5 * std::pow(y, 1.4) * p.d2u;
  return l;
}

std::string profile_csv(const ProfileTable& t) {
  std::string out = "y,u,du,d2u\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += format_double(t.nodes[i]);
    out += ',';
    out += format_double(t.u[i]);
    out += ',';
    out += format_double(t.du[i]);
    out += ',';
    out += format_double(t.d2u[i]);
    out += '\n';
  }
  return out;
}

std::string write_profile(const ProfileTable& t, const std::filesystem::path& path) {
  const std::string csv = profile_csv(t);
  const std::string hash = git_blob_hash(csv);
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << csv;
  }
  nlohmann::ordered_json j;
  j["beta"] = t.beta;
  j["y_max"] = t.y_max;
  j["rel_tol"] = t.rel_tol;
  j["abs_tol"] = t.abs_tol;
  j["n_samples"] = t.size();
  j["residual_max"] = t.residual_max;
  j["residual_worst_y"] = t.residual_worst_y;
  j["content_hash"] = hash;
  std::ofstream s(path.string() + ".json", std::ios::binary);
  s << j.dump(2) << '\n';
  return hash;
}

ProfileTable read_profile(const std::filesystem::path& path, bool verify_hash) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string csv = ss.str();
  ProfileTable t;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("y,u,du,d2u", 0) != 0)
    throw ConfigError("profile csv: missing header in " + path.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double v[4];
    for (double& x : v) {
      if (!std::getline(row, cell, ',')) throw ConfigError("profile csv: short row");
      x = parse_double(cell);
    }
    t.nodes.push_back(v[0]);
    t.u.push_back(v[1]);
    t.du.push_back(v[2]);
    t.d2u.push_back(v[3]);
  }
  if (t.nodes.size() < 2) throw ConfigError("profile csv: too few rows");
  t.y_max = t.nodes.back();
  const std::filesystem::path side = path.string() + ".json";
  if (std::filesystem::exists(side)) {
    std::ifstream sf(side);
    auto j = nlohmann::json::parse(sf);
    t.beta = j.at("beta").get<double>();
    t.rel_tol = j.value("rel_tol", 0.0);
    t.abs_tol = j.value("abs_tol", 0.0);
    if (verify_hash && j.at("content_hash").get<std::string>() != git_blob_hash(csv))
      throw ConfigError("profile csv: content hash mismatch for " + path.string());
  }
  auto r = profile_residual(t);
  t.residual_max = std::fabs(r.value);
  t.residual_worst_y = r.y;
  return t;
}

}  // namespace cusplab
