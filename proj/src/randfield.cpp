#include "sheetlab/randfield.hpp"

#include <cmath>
#include <stdexcept>

#include "sheetlab/rng.hpp"

namespace sheetlab {

namespace {

void check_spec(const GridSpec& spec) {
  if (spec.ns < 2 || spec.nt < 2 || spec.dim < 1 || !(spec.s_max > 0.0) ||
      !(spec.t_max > 0.0))
    throw std::invalid_argument("bad grid spec");
  const double count = static_cast<double>(spec.ns) * spec.nt * spec.dim;
  if (count > 9e15) throw std::invalid_argument("grid too large to index");
}

// White-noise increment of cell (i, j), coordinate c.
inline double cell_noise(const GridSpec& spec, double scale, int i, int j, int c) {
  const std::uint64_t idx =
      (static_cast<std::uint64_t>(i) * spec.nt + j) * spec.dim + c;
  return scale * rng_normal(spec.seed, idx);
}

}  // namespace

NoiseGrid sample_white_noise(const GridSpec& spec) {
  check_spec(spec);
  NoiseGrid g;
  g.spec = spec;
  g.cells.resize(static_cast<std::size_t>(spec.ns) * spec.nt * spec.dim);
  const double scale = std::sqrt(spec.ds() * spec.dt());
  for (std::size_t idx = 0; idx < g.cells.size(); ++idx)
    g.cells[idx] = scale * rng_normal(spec.seed, idx);
  return g;
}

std::vector<double> SheetSample::node(int i, int j) const {
  std::vector<double> out(spec.dim);
  for (int c = 0; c < spec.dim; ++c) out[c] = at(i, j, c);
  return out;
}

SheetSample build_sheet(const NoiseGrid& noise) {
  const GridSpec& spec = noise.spec;
  check_spec(spec);
  SheetSample s;
  s.spec = spec;
  s.values.assign(spec.nodes() * spec.dim, 0.0);
  const std::size_t stride = static_cast<std::size_t>(spec.nt + 1) * spec.dim;
  std::vector<double> rowsum(spec.dim);
  for (int i = 1; i <= spec.ns; ++i) {
    double* cur = s.values.data() + i * stride;
    const double* prev = s.values.data() + (i - 1) * stride;
    for (int c = 0; c < spec.dim; ++c) rowsum[c] = 0.0;
    for (int j = 1; j <= spec.nt; ++j)
      for (int c = 0; c < spec.dim; ++c) {
        rowsum[c] += noise.cell(i - 1, j - 1, c);
        cur[static_cast<std::size_t>(j) * spec.dim + c] =
            prev[static_cast<std::size_t>(j) * spec.dim + c] + rowsum[c];
      }
  }
  return s;
}

SheetSample build_sheet(const GridSpec& spec) {
  check_spec(spec);
  SheetSample s;
  s.spec = spec;
  s.values.assign(spec.nodes() * spec.dim, 0.0);
  const double scale = std::sqrt(spec.ds() * spec.dt());
  const std::size_t stride = static_cast<std::size_t>(spec.nt + 1) * spec.dim;
  std::vector<double> rowsum(spec.dim);
  for (int i = 1; i <= spec.ns; ++i) {
    double* cur = s.values.data() + i * stride;
    const double* prev = s.values.data() + (i - 1) * stride;
    for (int c = 0; c < spec.dim; ++c) rowsum[c] = 0.0;
    for (int j = 1; j <= spec.nt; ++j)
      for (int c = 0; c < spec.dim; ++c) {
        rowsum[c] += cell_noise(spec, scale, i - 1, j - 1, c);
        cur[static_cast<std::size_t>(j) * spec.dim + c] =
            prev[static_cast<std::size_t>(j) * spec.dim + c] + rowsum[c];
      }
  }
  return s;
}

std::vector<double> Path::point(int k) const {
  std::vector<double> out(dim);
  for (int c = 0; c < dim; ++c) out[c] = at(k, c);
  return out;
}

SliceResult slice(const SheetSample& sheet, double s) {
  const GridSpec& spec = sheet.spec;
  if (!(s >= 0.0) || s > spec.s_max) throw std::domain_error("slice outside grid");
  int i = static_cast<int>(std::lround(s / spec.ds()));
  if (i < 0) i = 0;
  if (i > spec.ns) i = spec.ns;
  SliceResult out;
  out.s_requested = s;
  out.s_actual = i * spec.ds();
  out.index = i;
  out.path.dim = spec.dim;
  out.path.times.resize(spec.nt + 1);
  out.path.values.resize(static_cast<std::size_t>(spec.nt + 1) * spec.dim);
  for (int j = 0; j <= spec.nt; ++j) {
    out.path.times[j] = j * spec.dt();
    for (int c = 0; c < spec.dim; ++c)
      out.path.values[static_cast<std::size_t>(j) * spec.dim + c] = sheet.at(i, j, c);
  }
  return out;
}

Path sample_bm(int dim, const std::vector<double>& times, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (times.empty()) throw std::invalid_argument("need at least one time");
  if (!(times[0] >= 0.0)) throw std::domain_error("times must be non-negative");
  Path p;
  p.dim = dim;
  p.times = times;
  p.values.resize(times.size() * dim);
  std::vector<double> w(dim, 0.0);
  double t_prev = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k && !(times[k] > times[k - 1]))
      throw std::domain_error("times must be strictly increasing");
    const double scale = std::sqrt(times[k] - t_prev);
    for (int c = 0; c < dim; ++c) {
      w[c] += scale * rng_normal(seed, k * dim + c);
      p.values[k * dim + c] = w[c];
    }
    t_prev = times[k];
  }
  return p;
}

SheetColumnWalker::SheetColumnWalker(const GridSpec& spec) : spec_(spec) {
  check_spec(spec);
  cur_.assign(static_cast<std::size_t>(spec.nt + 1) * spec.dim, 0.0);
}

void SheetColumnWalker::advance() {
  if (done()) throw std::logic_error("walker already at the last column");
  const double scale = std::sqrt(spec_.ds() * spec_.dt());
  std::vector<double> rowsum(spec_.dim, 0.0);
  for (int j = 1; j <= spec_.nt; ++j)
    for (int c = 0; c < spec_.dim; ++c) {
      rowsum[c] += cell_noise(spec_, scale, i_, j - 1, c);
      cur_[static_cast<std::size_t>(j) * spec_.dim + c] += rowsum[c];
    }
  ++i_;
}

}  // namespace sheetlab
