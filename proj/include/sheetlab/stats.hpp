#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sheetlab {

constexpr double kZ975 = 1.959963984540054;

struct Ci {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval: always positive width, half-width bounded by
// z/(2*sqrt(n)).
inline Ci wilson_ci(std::int64_t hits, std::int64_t trials, double z = kZ975) {
  if (trials <= 0) throw std::domain_error("wilson_ci needs trials > 0");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {p, center - half, center + half};
}

// Normal-theory interval for a sample mean given additive accumulators.
inline Ci mean_ci(double sum, double sum_sq, std::int64_t n, double z = kZ975) {
  if (n <= 0) throw std::domain_error("mean_ci needs n > 0");
  const double m = sum / static_cast<double>(n);
  double var = 0.0;
  if (n > 1) var = std::max(0.0, (sum_sq - sum * m) / static_cast<double>(n - 1));
  const double half = z * std::sqrt(var / static_cast<double>(n));
  return {m, m - half, m + half};
}

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  int n = 0;
};

// Weighted least squares line fit; weights default to 1.
inline FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& w = {}) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line needs >= 2 matching points");
  const std::size_t n = x.size();
  std::vector<double> wt = w.empty() ? std::vector<double>(n, 1.0) : w;
  if (wt.size() != n) throw std::invalid_argument("fit_line weight size mismatch");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) { sw += wt[i]; sx += wt[i] * x[i]; sy += wt[i] * y[i]; }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += wt[i] * (x[i] - mx) * (x[i] - mx);
    sxy += wt[i] * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_line has degenerate abscissae");
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.n = static_cast<int>(n);
  if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - (r.intercept + r.slope * x[i]);
      rss += wt[i] * e * e;
    }
    // Reduced-chi-square scaling; reduces to the classic rss/(n-2) for unit
    // weights and keeps precision weights on their own scale.
    r.slope_se = std::sqrt(std::max(0.0, rss / (n - 2.0)) / sxx);
  }
  return r;
}

}  // namespace sheetlab
