#pragma once

#include <cstdint>

#include "sheetlab/stats.hpp"

namespace sheetlab {

// Small-ball kernel family on l1 distances r >= 0, with width eps > 0 and
// coordinate count d >= 1:
//   small_ball_kernel(r)      = min(eps / sqrt(r), 1)^d   (1 on r <= eps^2)
//   small_ball_line_avg(r)    = int_0^1 small_ball_kernel(y + r) dy, closed form
//   small_ball_square_avg(r)  = int_0^1 small_ball_line_avg(y + r) dy, quadrature
double small_ball_kernel(double eps, int d, double r);
double small_ball_line_avg(double eps, int d, double r);
double small_ball_square_avg(double eps, int d, double r, double rel_tol = 1e-10);

// Monte Carlo estimate of P{ sigma |g|_1 <= eps } for a standard d-dim normal.
struct BallProb {
  Ci ci;
  std::int64_t hits = 0;
  std::int64_t trials = 0;
};
BallProb gaussian_ball_prob(double sigma, double eps, int d, std::int64_t trials,
                            std::uint64_t key);

}  // namespace sheetlab
