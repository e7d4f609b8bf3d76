#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sheetlab/setkit.hpp"

namespace sheetlab {

// Riesz-type radial kernel on l1 distances:
//   beta < 0 : constant 1
//   beta = 0 : log_+(1/r) with log_+(y) := max(log y, 1)
//   beta > 0 : r^(-beta)
double riesz_kernel(double beta, double r);

// Radial kernels used by energies and capacities. `projected` averages the
// base kernel over unit-cube offsets in m extra coordinates; the plain form
// averages k(r + u) over u in [0,1]^m, the symmetrized form averages over the
// difference of two independent cube points, which is the version under which
// product capacities match projected capacities.
struct Kernel {
  enum class Tag { Constant, Riesz, SmallBall, SmallBallLineAvg, SmallBallSquareAvg, Projected };
  Tag tag = Tag::Constant;
  double beta = 0.0;                   // Riesz order
  double eps = 1.0;                    // small-ball family width
  int d = 3;                           // small-ball family coordinate count
  std::shared_ptr<const Kernel> base;  // projected
  int proj_m = 1;
  bool symmetrized = false;

  double operator()(double r) const;
  bool singular_at_zero() const;
  std::string text() const;
  static Kernel parse(const std::string& s);

  static Kernel constant();
  static Kernel riesz(double beta);
  static Kernel small_ball(double eps, int d);
  static Kernel small_ball_line_avg(double eps, int d);
  static Kernel small_ball_square_avg(double eps, int d);
  static Kernel projected(Kernel base, int m, bool symmetrized = false);
};

double l1_dist(const std::vector<double>& a, const std::vector<double>& b);

// Finitely supported probability measure in R^dim.
struct DiscreteMeasure {
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;
  int dim = 1;

  static DiscreteMeasure make(std::vector<std::vector<double>> atoms,
                              std::vector<double> weights);
  static DiscreteMeasure uniform_on(const std::vector<double>& pts_1d);
  std::string text() const;
  static DiscreteMeasure parse(const std::string& s);
};

// Double sum of k over atom pairs. Off-diagonal terms use exact distances;
// the diagonal uses k evaluated at half the minimum positive atom gap (k(0)
// when every pairwise distance is zero). Returns +infinity when a singular
// kernel meets a coincident pair.
double energy(const DiscreteMeasure& mu, const Kernel& k);
double bilinear_energy(const DiscreteMeasure& sigma, const DiscreteMeasure& rho,
                       const Kernel& k);

struct CapacityOptions {
  double gap_tol = 1e-9;
  int max_iters = 100000;
};

struct CapacityResult {
  double capacity = 0.0;
  double energy = std::numeric_limits<double>::infinity();
  std::vector<double> weights;
  std::vector<std::vector<double>> atoms;
  double gap = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;
};

// Minimum quadratic energy over the probability simplex on the given atoms
// (pairwise-step descent with away moves and exact line search; the reported
// gap is the simplex linearization bound, so it certifies optimality).
CapacityResult capacity(const std::vector<std::vector<double>>& atoms, const Kernel& k,
                        const CapacityOptions& opts = {});

// Equispaced atoms on each component, allocation proportional to length with
// at least two atoms per non-degenerate component and one per point.
std::vector<double> place_atoms(const CompactSet1D& f, int target);
// Tensor grid on [0,1]^m times a 1-D atom list (atom dim becomes m+1).
std::vector<std::vector<double>> product_atoms(int m, int per_axis,
                                               const std::vector<double>& f_atoms);

CapacityResult set_capacity(const CompactSet1D& f, const Kernel& k, int atoms,
                            const CapacityOptions& opts = {});

// Compares the capacity of [0,1]^m x F under k against the capacity of F
// under the symmetrized projection of k.
struct ProjectionCheck {
  CapacityResult product;
  CapacityResult projected;
  double rel_gap = 0.0;
  bool conclusive = false;
};
ProjectionCheck projection_theorem_check(const CompactSet1D& f, const Kernel& k, int m,
                                         int cube_atoms_per_axis, int set_atoms,
                                         const CapacityOptions& opts = {});

// sup over atoms x and listed radii r of mu(ball(x, r)) / r^alpha.
struct FrostmanResult {
  double ratio = 0.0;
  std::size_t atom = 0;
  double radius = 0.0;
};
FrostmanResult frostman_ratio(const DiscreteMeasure& mu, double alpha,
                              std::vector<double> radii);

}  // namespace sheetlab
