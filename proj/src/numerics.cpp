#include "cusplab/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <openssl/evp.h>

namespace cusplab {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw FitError("fit_line needs at least two paired samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw FitError("fit_line: degenerate abscissae");
  LineFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.r2 = syy > 0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  f.slope_stderr = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  return f;
}

std::vector<double> fit_powers(std::span<const double> x, std::span<const double> y,
                               std::span<const int> powers) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto m = static_cast<Eigen::Index>(powers.size());
  if (n < m || y.size() != x.size()) throw FitError("fit_powers: too few samples");
  double scale = 0;
  for (double v : x) scale = std::max(scale, std::fabs(v));
  if (scale == 0) scale = 1;
  Eigen::MatrixXd a(n, m);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = x[i] / scale;
    for (Eigen::Index k = 0; k < m; ++k) a(i, k) = std::pow(t, powers[k]);
    b(i) = y[i];
  }
  Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  std::vector<double> out(m);
  for (Eigen::Index k = 0; k < m; ++k) out[k] = c(k) / std::pow(scale, powers[k]);
  return out;
}

double smooth_step(double t) {
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double taper(double x, double r) { return 1.0 - smooth_step((std::fabs(x) - r) / r); }

namespace {
double raw_bump(double t) {
  if (t <= 0 || t >= 1) return 0.0;
  return std::exp(-1.0 / (t * (1.0 - t)));
}
double bump_mass() {
  static const double m =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(raw_bump, 0.0, 1.0, 15, 1e-15);
  return m;
}
}  // namespace

double unit_bump(double t) { return raw_bump(t) / bump_mass(); }

double hermite3(double x, double x0, double x1, double f0, double f1, double d0, double d1) {
  double h = x1 - x0;
  double t = (x - x0) / h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

double hermite5(double x, double x0, double x1, double f0, double f1, double d0, double d1,
                double c0, double c1) {
  double h = x1 - x0;
  double t = (x - x0) / h;
  double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
  double h20 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  double h01 = 10 * t3 - 15 * t4 + 6 * t5;
  double h11 = -4 * t3 + 7 * t4 - 3 * t5;
  double h21 = 0.5 * (t3 - 2 * t4 + t5);
  return h00 * f0 + h10 * h * d0 + h20 * h * h * c0 + h01 * f1 + h11 * h * d1 + h21 * h * h * c1;
}

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  if (b < e && *b == '+') ++b;
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) throw ConfigError("not a number: '" + s + "'");
  return v;
}

std::string git_blob_hash(const std::string& data) {
  std::string header = "blob " + std::to_string(data.size());
  header.push_back('\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

}  // namespace cusplab
