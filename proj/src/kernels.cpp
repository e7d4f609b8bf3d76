#include "sheetlab/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "sheetlab/quadrature.hpp"
#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

void check_params(double eps, int d, double r) {
  if (!(eps > 0.0)) throw std::domain_error("kernel width must be positive");
  if (d < 1) throw std::domain_error("kernel dimension must be >= 1");
  if (!(r >= 0.0)) throw std::domain_error("kernel distance must be >= 0");
}

// int_a^b u^(-d/2) du for 0 < a <= b.
double riesz_half_integral(int d, double a, double b) {
  if (d == 2) return std::log(b / a);
  const double e = 1.0 - 0.5 * d;
  return (std::pow(b, e) - std::pow(a, e)) / e;
}

}  // namespace

double small_ball_kernel(double eps, int d, double r) {
  check_params(eps, d, r);
  const double e2 = eps * eps;
  if (r <= e2) return 1.0;
  return std::pow(e2 / r, 0.5 * d);
}

double small_ball_line_avg(double eps, int d, double r) {
  check_params(eps, d, r);
  const double e2 = eps * eps;
  // Integrate the kernel over [r, r+1]: flat at 1 below eps^2, power tail above.
  double flat = 0.0, tail = 0.0;
  if (r < e2) flat = std::min(e2, r + 1.0) - r;
  if (r + 1.0 > e2) {
    const double a = std::max(r, e2);
    tail = std::pow(eps, static_cast<double>(d)) * riesz_half_integral(d, a, r + 1.0);
  }
  return flat + tail;
}

double small_ball_square_avg(double eps, int d, double r, double rel_tol) {
  check_params(eps, d, r);
  const auto f = [&](double y) { return small_ball_line_avg(eps, d, y + r); };
  const double scale = std::max(f(0.0), 1e-300);
  const double tol = rel_tol * scale;
  // The line average has one kink where y + r crosses eps^2; split there.
  const double split = eps * eps - r;
  if (split > 0.0 && split < 1.0)
    return integrate(f, 0.0, split, tol * split) + integrate(f, split, 1.0, tol * (1.0 - split));
  return integrate(f, 0.0, 1.0, tol);
}

BallProb gaussian_ball_prob(double sigma, double eps, int d, std::int64_t trials,
                            std::uint64_t key) {
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
  if (!(eps > 0.0)) throw std::domain_error("eps must be positive");
  if (d < 1) throw std::domain_error("dimension must be >= 1");
  if (trials < 1) throw std::domain_error("need at least one trial");
  BallProb out;
  out.trials = trials;
  const double thresh = eps / sigma;
  for (std::int64_t t = 0; t < trials; ++t) {
    double norm1 = 0.0;
    for (int c = 0; c < d; ++c)
      norm1 += std::fabs(rng_normal(key, static_cast<std::uint64_t>(t) * d + c));
    if (norm1 <= thresh) ++out.hits;
  }
  out.ci = wilson_ci(out.hits, out.trials);
  return out;
}

}  // namespace sheetlab
