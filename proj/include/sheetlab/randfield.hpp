#pragma once

#include <cstdint>
#include <vector>

namespace sheetlab {

// Regular grid of ns x nt cells on [0, s_max] x [0, t_max]; field values live
// on the (ns+1) x (nt+1) node lattice. The seed fully determines every sample
// drawn on the grid.
struct GridSpec {
  double s_max = 1.0;
  double t_max = 1.0;
  int ns = 2;
  int nt = 2;
  int dim = 1;
  std::uint64_t seed = 0;

  double ds() const { return s_max / ns; }
  double dt() const { return t_max / nt; }
  std::size_t nodes() const {
    return static_cast<std::size_t>(ns + 1) * static_cast<std::size_t>(nt + 1);
  }
};

// White-noise cells: independent centered Gaussians, per-coordinate variance
// ds*dt, one d-vector per cell. Cell (i, j) coordinate c lives at
// (i*nt + j)*dim + c.
struct NoiseGrid {
  GridSpec spec;
  std::vector<double> cells;

  double cell(int i, int j, int c) const {
    return cells[(static_cast<std::size_t>(i) * spec.nt + j) * spec.dim + c];
  }
};

NoiseGrid sample_white_noise(const GridSpec& spec);

// dim-coordinate Brownian sheet sampled on the node lattice: independent
// coordinates, covariance min(s,s')min(t,t') per coordinate. Built from the
// white-noise cells via 2-D prefix sums with a fixed summation order (row
// prefix over t, then accumulate over s), so a given spec reproduces the
// lattice bit for bit.
struct SheetSample {
  GridSpec spec;
  std::vector<double> values;  // (i*(nt+1) + j)*dim + c

  double at(int i, int j, int c) const {
    return values[(static_cast<std::size_t>(i) * (spec.nt + 1) + j) * spec.dim + c];
  }
  std::vector<double> node(int i, int j) const;
};

SheetSample build_sheet(const NoiseGrid& noise);
// Same result without materializing the noise grid.
SheetSample build_sheet(const GridSpec& spec);

// A path t -> R^dim on explicit time stamps; values flattened as k*dim + c.
struct Path {
  std::vector<double> times;  // strictly increasing
  std::vector<double> values;
  int dim = 1;

  double at(int k, int c) const {
    return values[static_cast<std::size_t>(k) * dim + c];
  }
  std::vector<double> point(int k) const;
};

// Restriction of the sheet to its nearest grid line s = const. The requested
// coordinate is snapped to the closest multiple of ds and both are reported.
struct SliceResult {
  Path path;
  double s_requested = 0.0;
  double s_actual = 0.0;
  int index = 0;
};

SliceResult slice(const SheetSample& sheet, double s);

// Standard dim-coordinate Brownian motion at the given times (non-negative,
// strictly increasing), one normal draw per increment and coordinate.
Path sample_bm(int dim, const std::vector<double>& times, std::uint64_t seed);

// Streaming column-by-column evaluation of build_sheet: after i calls to
// advance(), values() equals node column i of the full lattice bit for bit,
// while holding only one column in memory.
class SheetColumnWalker {
 public:
  explicit SheetColumnWalker(const GridSpec& spec);

  int column() const { return i_; }
  double s() const { return i_ * spec_.ds(); }
  bool done() const { return i_ >= spec_.ns; }
  // Current column B(s_i, t_j), flattened as j*dim + c.
  const std::vector<double>& values() const { return cur_; }
  void advance();

 private:
  GridSpec spec_;
  int i_ = 0;
  std::vector<double> cur_;
};

}  // namespace sheetlab
