#include "sheetlab/capkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "sheetlab/kernels.hpp"
#include "sheetlab/quadrature.hpp"

namespace sheetlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double riesz_kernel(double beta, double r) {
  if (!(r >= 0.0)) throw std::domain_error("kernel distance must be >= 0");
  if (beta < 0.0) return 1.0;
  if (r == 0.0) return kInf;
  if (beta == 0.0) return std::max(std::log(1.0 / r), 1.0);
  return std::pow(r, -beta);
}

namespace {

// int_a^b v^(-beta) dv and int_a^b v^(1-beta) dv for 0 <= a < b.
double power_integral(double p, double a, double b) {
  if (p == -1.0) return std::log(b / a);
  const double e = p + 1.0;
  return (std::pow(b, e) - std::pow(a, e)) / e;
}

// int_a^b max(-log v, 1) dv, the log_+ kernel mass over [a,b], 0 <= a < b.
double logplus_integral(double a, double b) {
  const double c = std::exp(-1.0);
  auto head = [](double v) {  // antiderivative of -log v
    return v == 0.0 ? 0.0 : v - v * std::log(v);
  };
  double out = 0.0;
  if (a < c) {
    const double hi = std::min(b, c);
    out += head(hi) - head(a);
  }
  if (b > c) out += b - std::max(a, c);
  return out;
}

// int_a^b v * max(-log v, 1) dv.
double logplus_v_integral(double a, double b) {
  const double c = std::exp(-1.0);
  auto head = [](double v) {  // antiderivative of -v log v
    return v == 0.0 ? 0.0 : 0.25 * v * v - 0.5 * v * v * std::log(v);
  };
  double out = 0.0;
  if (a < c) {
    const double hi = std::min(b, c);
    out += head(hi) - head(a);
  }
  if (b > c) {
    const double lo = std::max(a, c);
    out += 0.5 * (b * b - lo * lo);
  }
  return out;
}

// Plain cube average of a Riesz kernel in one extra coordinate:
// S(r) = int_0^1 riesz(beta, r+u) du.
double riesz_line_avg(double beta, double r) {
  if (beta < 0.0) return 1.0;
  if (beta == 0.0) return logplus_integral(r, r + 1.0);
  if (beta == 1.0) return r == 0.0 ? kInf : std::log((r + 1.0) / r);
  if (beta > 1.0 && r == 0.0) return kInf;
  return power_integral(-beta, r, r + 1.0);
}

// Symmetrized average: D(r) = 2 int_0^1 (1-u) riesz(beta, r+u) du
//                            = 2 [ (1+r) S(r) - int_r^{r+1} v k(v) dv ].
double riesz_line_avg_sym(double beta, double r) {
  if (beta < 0.0) return 1.0;
  const double s = riesz_line_avg(beta, r);
  if (!std::isfinite(s)) return kInf;
  double v_int;
  if (beta == 0.0)
    v_int = logplus_v_integral(r, r + 1.0);
  else
    v_int = power_integral(1.0 - beta, r, r + 1.0);
  return 2.0 * ((1.0 + r) * s - v_int);
}

double eval_projected(const Kernel& base, int m, bool symmetrized, double r);

double eval_kernel(const Kernel& k, double r) {
  switch (k.tag) {
    case Kernel::Tag::Constant: return 1.0;
    case Kernel::Tag::Riesz: return riesz_kernel(k.beta, r);
    case Kernel::Tag::SmallBall: return small_ball_kernel(k.eps, k.d, r);
    case Kernel::Tag::SmallBallLineAvg: return small_ball_line_avg(k.eps, k.d, r);
    case Kernel::Tag::SmallBallSquareAvg: return small_ball_square_avg(k.eps, k.d, r);
    case Kernel::Tag::Projected: return eval_projected(*k.base, k.proj_m, k.symmetrized, r);
  }
  return 0.0;
}

double eval_projected(const Kernel& base, int m, bool symmetrized, double r) {
  if (m == 0) return eval_kernel(base, r);
  if (m == 1) {
    if (base.tag == Kernel::Tag::Constant) return 1.0;
    if (base.tag == Kernel::Tag::Riesz)
      return symmetrized ? riesz_line_avg_sym(base.beta, r) : riesz_line_avg(base.beta, r);
    if (base.tag == Kernel::Tag::SmallBall && !symmetrized)
      return small_ball_line_avg(base.eps, base.d, r);
  }
  // Generic numeric level: one cube coordinate at a time. Endpoint values of
  // singular integrands are clamped a hair inside the cell.
  const auto inner = [&](double u) {
    const double uu = std::max(u, 1e-12);
    const double v = eval_projected(base, m - 1, symmetrized, r + uu);
    return symmetrized ? 2.0 * (1.0 - uu) * v : v;
  };
  const double probe = inner(0.5);
  if (!std::isfinite(probe)) return kInf;
  const double tol = 1e-11 * std::max(probe, 1e-12);
  return integrate(inner, 0.0, 1.0, tol);
}

}  // namespace

double Kernel::operator()(double r) const {
  if (!(r >= 0.0)) throw std::domain_error("kernel distance must be >= 0");
  return eval_kernel(*this, r);
}

bool Kernel::singular_at_zero() const { return !std::isfinite((*this)(0.0)); }

Kernel Kernel::constant() { return Kernel{}; }

Kernel Kernel::riesz(double beta) {
  Kernel k;
  k.tag = Tag::Riesz;
  k.beta = beta;
  return k;
}

Kernel Kernel::small_ball(double eps, int d) {
  if (!(eps > 0.0) || d < 1) throw std::invalid_argument("bad small-ball parameters");
  Kernel k;
  k.tag = Tag::SmallBall;
  k.eps = eps;
  k.d = d;
  return k;
}

Kernel Kernel::small_ball_line_avg(double eps, int d) {
  Kernel k = small_ball(eps, d);
  k.tag = Tag::SmallBallLineAvg;
  return k;
}

Kernel Kernel::small_ball_square_avg(double eps, int d) {
  Kernel k = small_ball(eps, d);
  k.tag = Tag::SmallBallSquareAvg;
  return k;
}

Kernel Kernel::projected(Kernel base, int m, bool symmetrized) {
  if (m < 1) throw std::invalid_argument("projection needs m >= 1");
  Kernel k;
  k.tag = Tag::Projected;
  k.base = std::make_shared<const Kernel>(std::move(base));
  k.proj_m = m;
  k.symmetrized = symmetrized;
  return k;
}

std::string Kernel::text() const {
  switch (tag) {
    case Tag::Constant: return "constant";
    case Tag::Riesz: return "riesz " + fmt17(beta);
    case Tag::SmallBall: return "ball " + fmt17(eps) + " " + std::to_string(d);
    case Tag::SmallBallLineAvg: return "ball_line " + fmt17(eps) + " " + std::to_string(d);
    case Tag::SmallBallSquareAvg: return "ball_square " + fmt17(eps) + " " + std::to_string(d);
    case Tag::Projected:
      return "projected " + std::to_string(proj_m) + " " + (symmetrized ? "sym" : "plain") +
             " " + base->text();
  }
  return "";
}

namespace {

Kernel parse_kernel_tokens(std::istringstream& in) {
  std::string tag;
  if (!(in >> tag)) throw std::invalid_argument("empty kernel literal");
  if (tag == "constant") return Kernel::constant();
  if (tag == "riesz") {
    double b;
    if (!(in >> b)) throw std::invalid_argument("riesz kernel needs an order");
    return Kernel::riesz(b);
  }
  if (tag == "ball" || tag == "ball_line" || tag == "ball_square") {
    double e;
    int d;
    if (!(in >> e >> d)) throw std::invalid_argument("small-ball kernel needs eps and d");
    if (tag == "ball") return Kernel::small_ball(e, d);
    if (tag == "ball_line") return Kernel::small_ball_line_avg(e, d);
    return Kernel::small_ball_square_avg(e, d);
  }
  if (tag == "projected") {
    int m;
    std::string mode;
    if (!(in >> m >> mode) || (mode != "sym" && mode != "plain"))
      throw std::invalid_argument("projected kernel needs m and sym|plain");
    return Kernel::projected(parse_kernel_tokens(in), m, mode == "sym");
  }
  throw std::invalid_argument("unknown kernel tag: " + tag);
}

}  // namespace

Kernel Kernel::parse(const std::string& s) {
  std::istringstream in(s);
  Kernel k = parse_kernel_tokens(in);
  std::string rest;
  if (in >> rest) throw std::invalid_argument("trailing kernel tokens: " + rest);
  return k;
}

double l1_dist(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

DiscreteMeasure DiscreteMeasure::make(std::vector<std::vector<double>> atoms,
                                      std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw std::invalid_argument("measure needs matching non-empty atoms and weights");
  const std::size_t dim = atoms.front().size();
  if (dim == 0) throw std::invalid_argument("atoms need at least one coordinate");
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != dim) throw std::invalid_argument("ragged atom list");
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("negative weight");
    sum += weights[i];
  }
  if (!(sum > 0.0)) throw std::invalid_argument("zero total mass");
  for (auto& w : weights) w /= sum;
  DiscreteMeasure mu;
  mu.atoms = std::move(atoms);
  mu.weights = std::move(weights);
  mu.dim = static_cast<int>(dim);
  return mu;
}

DiscreteMeasure DiscreteMeasure::uniform_on(const std::vector<double>& pts_1d) {
  std::vector<std::vector<double>> atoms;
  atoms.reserve(pts_1d.size());
  for (double p : pts_1d) atoms.push_back({p});
  return make(std::move(atoms), std::vector<double>(pts_1d.size(), 1.0));
}

std::string DiscreteMeasure::text() const {
  std::string out = "measure " + std::to_string(dim) + " " + std::to_string(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    out += "\n" + fmt17(weights[i]);
    for (double c : atoms[i]) out += " " + fmt17(c);
  }
  return out;
}

DiscreteMeasure DiscreteMeasure::parse(const std::string& s) {
  std::istringstream in(s);
  std::string tag;
  int dim = 0;
  std::size_t n = 0;
  if (!(in >> tag >> dim >> n) || tag != "measure")
    throw std::invalid_argument("bad measure literal");
  std::vector<std::vector<double>> atoms(n, std::vector<double>(dim));
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> w[i])) throw std::invalid_argument("truncated measure literal");
    for (int c = 0; c < dim; ++c)
      if (!(in >> atoms[i][c])) throw std::invalid_argument("truncated measure literal");
  }
  return make(std::move(atoms), std::move(w));
}

namespace {

// Half the minimum positive pairwise distance, or 0 when there is none.
double half_min_gap(const std::vector<std::vector<double>>& atoms) {
  double best = kInf;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      const double d = l1_dist(atoms[i], atoms[j]);
      if (d > 0.0 && d < best) best = d;
    }
  return std::isfinite(best) ? 0.5 * best : 0.0;
}

double diag_value(const Kernel& k, double half_gap) {
  return half_gap > 0.0 ? k(half_gap) : k(0.0);
}

}  // namespace

double energy(const DiscreteMeasure& mu, const Kernel& k) {
  const double diag = diag_value(k, half_min_gap(mu.atoms));
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    sum += mu.weights[i] * mu.weights[i] * diag;
    for (std::size_t j = i + 1; j < mu.atoms.size(); ++j) {
      const double d = l1_dist(mu.atoms[i], mu.atoms[j]);
      const double v = d > 0.0 ? k(d) : diag;
      sum += 2.0 * mu.weights[i] * mu.weights[j] * v;
    }
  }
  return sum;
}

double bilinear_energy(const DiscreteMeasure& sigma, const DiscreteMeasure& rho,
                       const Kernel& k) {
  if (sigma.dim != rho.dim) throw std::invalid_argument("measure dimension mismatch");
  std::vector<std::vector<double>> all = sigma.atoms;
  all.insert(all.end(), rho.atoms.begin(), rho.atoms.end());
  const double diag = diag_value(k, half_min_gap(all));
  double sum = 0.0;
  for (std::size_t i = 0; i < sigma.atoms.size(); ++i)
    for (std::size_t j = 0; j < rho.atoms.size(); ++j) {
      const double d = l1_dist(sigma.atoms[i], rho.atoms[j]);
      sum += sigma.weights[i] * rho.weights[j] * (d > 0.0 ? k(d) : diag);
    }
  return sum;
}

CapacityResult capacity(const std::vector<std::vector<double>>& atoms, const Kernel& k,
                        const CapacityOptions& opts) {
  const std::size_t n = atoms.size();
  if (n == 0) throw std::invalid_argument("capacity needs atoms");
  const double diag = diag_value(k, half_min_gap(atoms));

  CapacityResult res;
  res.atoms = atoms;
  res.weights.assign(n, 0.0);
  if (!std::isfinite(diag)) {
    // Only possible when every atom coincides: the energy of any weighting is
    // infinite, so the capacity is exactly zero.
    res.capacity = 0.0;
    res.energy = kInf;
    res.gap = 0.0;
    res.converged = true;
    res.weights[0] = 1.0;
    return res;
  }

  // Lazily materialized kernel matrix columns.
  std::vector<std::vector<double>> cols(n);
  const auto col = [&](std::size_t j) -> const std::vector<double>& {
    auto& c = cols[j];
    if (c.empty()) {
      c.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (i == j) {
          c[i] = diag;
        } else {
          const double d = l1_dist(atoms[i], atoms[j]);
          c[i] = d > 0.0 ? k(d) : diag;
          if (!std::isfinite(c[i]))
            throw std::invalid_argument("coincident atoms under a singular kernel");
        }
      }
    }
    return c;
  };

  std::vector<double> w(n, 0.0), kw(n, 0.0);
  const std::size_t start = n / 2;
  w[start] = 1.0;
  kw = col(start);
  double e = diag;

  const auto refresh = [&]() {
    std::fill(kw.begin(), kw.end(), 0.0);
    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) mass += w[j];
    for (std::size_t j = 0; j < n; ++j) {
      if (w[j] <= 0.0) continue;
      w[j] /= mass;
      const auto& cj = col(j);
      for (std::size_t i = 0; i < n; ++i) kw[i] += w[j] * cj[i];
    }
    e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += w[i] * kw[i];
  };

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if ((it & 2047) == 2047) refresh();
    // Gradient is 2*kw; directional improvements of the two candidate moves.
    std::size_t i_fw = 0, j_aw = n;
    double best_fw = kInf, best_aw = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (kw[i] < best_fw) { best_fw = kw[i]; i_fw = i; }
      if (w[i] > 0.0 && kw[i] > best_aw) { best_aw = kw[i]; j_aw = i; }
    }
    res.gap = 2.0 * (e - best_fw);
    if (res.gap < opts.gap_tol) { res.converged = true; break; }

    const double gain_fw = e - best_fw;
    const double gain_aw = j_aw < n ? best_aw - e : -kInf;
    if (gain_fw >= gain_aw) {
      const auto& ci = col(i_fw);
      const double a = kw[i_fw];
      const double curv = ci[i_fw] - 2.0 * a + e;
      double step = curv > 0.0 ? (e - a) / curv : 1.0;
      step = std::clamp(step, 0.0, 1.0);
      if (step <= 0.0) break;
      const double keep = 1.0 - step;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= keep;
        kw[i] = keep * kw[i] + step * ci[i];
      }
      w[i_fw] += step;
      e = keep * keep * e + 2.0 * step * keep * a + step * step * ci[i_fw];
    } else {
      const auto& cj = col(j_aw);
      const double b = kw[j_aw];
      const double curv = e - 2.0 * b + cj[j_aw];
      const double cap_step = w[j_aw] < 1.0 ? w[j_aw] / (1.0 - w[j_aw]) : kInf;
      double step = curv > 0.0 ? (b - e) / curv : cap_step;
      if (!std::isfinite(step)) break;
      step = std::clamp(step, 0.0, cap_step);
      if (step <= 0.0) break;
      const double grow = 1.0 + step;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= grow;
        kw[i] = grow * kw[i] - step * cj[i];
      }
      w[j_aw] -= step;
      if (w[j_aw] < 1e-15) w[j_aw] = 0.0;
      e = grow * grow * e - 2.0 * step * grow * b + step * step * cj[j_aw];
    }
  }
  refresh();
  // Recompute the certificate after the refresh so the reported numbers are
  // consistent with the returned weights.
  double best = kInf;
  for (std::size_t i = 0; i < n; ++i) best = std::min(best, kw[i]);
  res.gap = 2.0 * (e - best);
  if (res.gap < opts.gap_tol) res.converged = true;
  res.iters = it;
  res.energy = e;
  res.capacity = e > 0.0 ? 1.0 / e : kInf;
  res.weights = std::move(w);
  return res;
}

std::vector<double> place_atoms(const CompactSet1D& f, int target) {
  if (target < 1) throw std::invalid_argument("atom target must be >= 1");
  const auto& comps = f.components();
  std::vector<double> lens;
  int points = 0;
  double total_len = 0.0;
  for (const auto& c : comps) {
    const double len = (c.b - c.a).to_double();
    lens.push_back(len);
    if (len == 0.0) ++points;
    total_len += len;
  }
  const int n_int = static_cast<int>(comps.size()) - points;
  std::vector<int> alloc(comps.size(), 0);
  int used = points + 2 * n_int;
  for (std::size_t i = 0; i < comps.size(); ++i) alloc[i] = lens[i] > 0.0 ? 2 : 1;
  int extra = std::max(0, target - used);
  if (extra > 0 && total_len > 0.0) {
    // Largest-remainder split proportional to component length.
    std::vector<std::pair<double, std::size_t>> rem;
    int given = 0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (lens[i] <= 0.0) continue;
      const double share = extra * lens[i] / total_len;
      const int whole = static_cast<int>(std::floor(share));
      alloc[i] += whole;
      given += whole;
      rem.push_back({share - whole, i});
    }
    std::sort(rem.rbegin(), rem.rend());
    for (int k = 0; k < extra - given && k < static_cast<int>(rem.size()); ++k)
      alloc[rem[k].second] += 1;
  }
  std::vector<double> atoms;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double a = comps[i].a.to_double(), b = comps[i].b.to_double();
    if (lens[i] == 0.0) {
      atoms.push_back(a);
      continue;
    }
    for (int j = 0; j < alloc[i]; ++j)
      atoms.push_back(a + (b - a) * static_cast<double>(j) / (alloc[i] - 1));
  }
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  return atoms;
}

std::vector<std::vector<double>> product_atoms(int m, int per_axis,
                                               const std::vector<double>& f_atoms) {
  if (m < 1 || per_axis < 2) throw std::invalid_argument("bad product grid");
  if (f_atoms.empty()) throw std::invalid_argument("empty set atoms");
  std::vector<std::vector<double>> grid = {{}};
  for (int axis = 0; axis < m; ++axis) {
    std::vector<std::vector<double>> next;
    next.reserve(grid.size() * per_axis);
    for (const auto& g : grid)
      for (int i = 0; i < per_axis; ++i) {
        auto h = g;
        h.push_back(static_cast<double>(i) / (per_axis - 1));
        next.push_back(std::move(h));
      }
    grid = std::move(next);
  }
  std::vector<std::vector<double>> out;
  out.reserve(grid.size() * f_atoms.size());
  for (const auto& g : grid)
    for (double x : f_atoms) {
      auto h = g;
      h.push_back(x);
      out.push_back(std::move(h));
    }
  return out;
}

CapacityResult set_capacity(const CompactSet1D& f, const Kernel& k, int atoms,
                            const CapacityOptions& opts) {
  if (atoms < 2) throw std::invalid_argument("set capacity needs >= 2 atoms");
  const auto pts = place_atoms(f, atoms);
  std::vector<std::vector<double>> lifted;
  lifted.reserve(pts.size());
  for (double p : pts) lifted.push_back({p});
  return capacity(lifted, k, opts);
}

ProjectionCheck projection_theorem_check(const CompactSet1D& f, const Kernel& k, int m,
                                         int cube_atoms_per_axis, int set_atoms,
                                         const CapacityOptions& opts) {
  ProjectionCheck out;
  const auto f_atoms = place_atoms(f, set_atoms);
  out.product = capacity(product_atoms(m, cube_atoms_per_axis, f_atoms), k, opts);
  std::vector<std::vector<double>> lifted;
  for (double p : f_atoms) lifted.push_back({p});
  out.projected = capacity(lifted, Kernel::projected(k, m, true), opts);
  const double hi = std::max(out.product.capacity, out.projected.capacity);
  out.rel_gap = hi > 0.0 ? std::fabs(out.product.capacity - out.projected.capacity) / hi : 0.0;
  out.conclusive = out.product.converged && out.projected.converged;
  return out;
}

FrostmanResult frostman_ratio(const DiscreteMeasure& mu, double alpha,
                              std::vector<double> radii) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (radii.empty()) throw std::invalid_argument("need at least one radius");
  std::sort(radii.begin(), radii.end());
  if (!(radii.front() > 0.0)) throw std::invalid_argument("radii must be positive");
  FrostmanResult best;
  std::vector<double> bucket(radii.size());
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    std::fill(bucket.begin(), bucket.end(), 0.0);
    for (std::size_t j = 0; j < mu.atoms.size(); ++j) {
      const double d = l1_dist(mu.atoms[i], mu.atoms[j]);
      const auto it = std::lower_bound(radii.begin(), radii.end(), d);
      if (it != radii.end()) bucket[it - radii.begin()] += mu.weights[j];
    }
    double mass = 0.0;
    for (std::size_t r = 0; r < radii.size(); ++r) {
      mass += bucket[r];
      const double ratio = mass / std::pow(radii[r], alpha);
      if (ratio > best.ratio) best = {ratio, i, radii[r]};
    }
  }
  return best;
}

}  // namespace sheetlab
