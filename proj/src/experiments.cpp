#include "sheetlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>

#include "sheetlab/capkit.hpp"
#include "sheetlab/kernels.hpp"
#include "sheetlab/parallel.hpp"
#include "sheetlab/randfield.hpp"
#include "sheetlab/rng.hpp"
#include "sheetlab/setkit.hpp"
#include "sheetlab/stats.hpp"

namespace sheetlab {
namespace {

// ---------------------------------------------------------------------------
// small utilities

std::string str_f(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

std::string fmt_g(double v) { return str_f("%.6g", v); }

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (const auto& t : out)
    if (t.empty()) throw std::invalid_argument("empty entry in comma-separated list");
  return out;
}

double l1(const double* v, int d) {
  double s = 0.0;
  for (int c = 0; c < d; ++c) s += std::fabs(v[c]);
  return s;
}

bool contains_d(const std::vector<std::pair<double, double>>& comps, double x, double tol) {
  for (const auto& c : comps)
    if (x >= c.first - tol && x <= c.second + tol) return true;
  return false;
}

void parse_grid_pair(const std::string& s, int& ns, int& nt) {
  const auto pos = s.find('x');
  if (pos == std::string::npos || pos == 0 || pos + 1 >= s.size())
    throw std::invalid_argument("grid must look like 32x32");
  ns = static_cast<int>(std::strtol(s.substr(0, pos).c_str(), nullptr, 10));
  nt = static_cast<int>(std::strtol(s.substr(pos + 1).c_str(), nullptr, 10));
  if (ns < 2 || nt < 2) throw std::invalid_argument("grid sides must be >= 2");
}

void set_default(ExpConfig& c, const std::string& key, const std::string& val) {
  if (!c.kv.count(key)) c.kv[key] = val;
}

ExperimentReport scaffold(const ExpConfig& c) {
  ExperimentReport rep;
  rep.name = c.require_str("experiment");
  rep.config = c.kv;
  // Scheduling and plumbing keys never influence results, so they stay out of
  // the persisted echo (reports must match byte for byte across thread counts).
  rep.config.erase("threads");
  rep.config.erase("plot");
  rep.config.erase("out");
  rep.seed = c.get_u64("seed", 1234);
  rep.structural_hash = c.structural_hash();
  rep.trial_lo = c.get_int("trial_offset", 0);
  rep.trial_hi = rep.trial_lo + c.get_int("trials", 1);
  if (rep.trial_hi <= rep.trial_lo) throw std::invalid_argument("trials must be positive");
  return rep;
}

void add_binom(ExperimentReport& rep, const std::string& key, double param, std::int64_t n,
               double hits) {
  PointRow& r = upsert_row(rep.rows, key, param, "binom");
  r.n += n;
  r.acc += hits;
}

void add_mean(ExperimentReport& rep, const std::string& key, double param, std::int64_t n,
              double sum, double sum_sq) {
  PointRow& r = upsert_row(rep.rows, key, param, "mean");
  r.n += n;
  r.acc += sum;
  r.acc2 += sum_sq;
}

void add_check(ExperimentReport& rep, const std::string& name, bool pass,
               const std::string& detail) {
  rep.checks.push_back({name, pass, detail});
}

struct SeriesPt {
  double param = 0.0;
  PointRow row;
  RowSummary sum;
};

std::vector<SeriesPt> get_series(const ExperimentReport& rep, const std::string& key) {
  std::vector<SeriesPt> out;
  for (const auto& r : rep.rows)
    if (r.key == key) out.push_back({r.param, r, summarize_row(r)});
  return out;
}

double se_of(const RowSummary& s) { return (s.ci.hi - s.ci.lo) / (2.0 * kZ975); }

// Weighted log-log fit of estimate vs param; weights come from the CI width
// of log(estimate). Returns n = 0 when fewer than two usable points remain.
FitResult fit_loglog(const std::vector<SeriesPt>& pts) {
  std::vector<double> x, y, w;
  for (const auto& p : pts) {
    if (p.sum.estimate <= 0.0 || p.param <= 0.0) continue;
    double se_log = se_of(p.sum) / p.sum.estimate;
    se_log = std::max(se_log, 1e-4);
    x.push_back(std::log(p.param));
    y.push_back(std::log(p.sum.estimate));
    w.push_back(1.0 / (se_log * se_log));
  }
  if (x.size() < 2) return FitResult{};
  return fit_line(x, y, w);
}

// Composite Simpson rule on [a, b] with n (even) intervals.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

constexpr std::uint64_t kAuxPairsSalt = 0x8000000000000001ULL;
constexpr std::uint64_t kAuxCrossSalt = 0x7000000000000000ULL;
constexpr std::uint64_t kAuxKernelSalt = 0x4b00000000000000ULL;

// ---------------------------------------------------------------------------
// survival refinement for l1-ball hits along a Brownian node chain
//
// Between consecutive nodes the path is filled in with exact Brownian-bridge
// midpoints until, for every still-alive radius r, either the local minimum
// sits out of reach (min > r + 6 sd of the segment) or the step is fine
// enough (d * rate * h <= r^2 / 32) that the one-dimensional crossing bound
//   P(hit) = 1 - exp(-2 (a - r)(b - r) / (d * rate * h))
// applied to the l1 norm is accurate. Radii must be sorted ascending.

class HitRefiner {
 public:
  HitRefiner(std::vector<double> radii, int d, double rate)
      : radii_(std::move(radii)), d_(d) {
    if (d_ < 1 || d_ > 8) throw std::invalid_argument("refiner supports 1..8 coordinates");
    for (std::size_t i = 1; i < radii_.size(); ++i)
      if (radii_[i] <= radii_[i - 1])
        throw std::invalid_argument("refiner radii must increase");
    surv_.assign(radii_.size(), 1.0);
    reset(rate);
  }

  void reset(double rate) {
    rate_ = rate;
    inv32_ = 1.0 / (32.0 * d_ * rate_);
    std::fill(surv_.begin(), surv_.end(), 1.0);
    dead_ = false;
    rmin_ = std::numeric_limits<double>::infinity();
  }

  bool dead() const { return dead_; }
  const std::vector<double>& survival() const { return surv_; }
  // smallest l1 norm seen across endpoint nodes and sampled bridge midpoints
  double refined_min() const { return rmin_; }

  void segment(CounterRng& rng, const double* xa, const double* xb, double h) {
    double a[8], b[8];
    std::copy(xa, xa + d_, a);
    std::copy(xb, xb + d_, b);
    const double la = l1(a, d_), lb = l1(b, d_);
    rmin_ = std::min(rmin_, std::min(la, lb));
    if (dead_) return;
    rec(rng, a, b, la, lb, h, 0);
  }

 private:
  static constexpr int kMaxDepth = 30;

  void apply(double la, double lb, double h) {
    const double var = d_ * rate_ * h;
    const double sd = std::sqrt(var);
    const double m = std::min(la, lb);
    for (std::size_t i = 0; i < radii_.size(); ++i) {
      const double r = radii_[i];
      if (m <= r) {
        surv_[i] = 0.0;
        continue;
      }
      if (m > r + 6.0 * sd) continue;
      surv_[i] *= 1.0 - std::exp(-2.0 * (la - r) * (lb - r) / var);
    }
    // radii ascend, so surv_[0] bounds the rest from above
    if (surv_[0] == 0.0) dead_ = true;
  }

  void rec(CounterRng& rng, const double* a, const double* b, double la, double lb, double h,
           int depth) {
    const double sd = std::sqrt(d_ * rate_ * h);
    const double m = std::min(la, lb);
    bool need_split = false;
    if (depth < kMaxDepth) {
      for (std::size_t i = 0; i < radii_.size(); ++i) {
        if (surv_[i] == 0.0) continue;
        const double r = radii_[i];
        if (m > r + 6.0 * sd) continue;
        if (h > r * r * inv32_) {
          need_split = true;
          break;
        }
      }
    }
    if (!need_split) {
      apply(la, lb, h);
      return;
    }
    double mid[8];
    const double msd = std::sqrt(rate_ * h * 0.25);
    for (int c = 0; c < d_; ++c) mid[c] = 0.5 * (a[c] + b[c]) + msd * rng.normal();
    const double lm = l1(mid, d_);
    rmin_ = std::min(rmin_, lm);
    rec(rng, a, mid, la, lm, 0.5 * h, depth + 1);
    if (dead_) return;
    rec(rng, mid, b, lm, lb, 0.5 * h, depth + 1);
  }

  std::vector<double> radii_;
  int d_;
  double rate_ = 1.0;
  double inv32_ = 1.0;
  std::vector<double> surv_;
  bool dead_ = false;
  double rmin_ = std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
// column sampler for the sheet restricted to [a0, *] x [t0, t0 + nt*dtu]
//
// B(s, t) = anchor + walk_t(t) + walk_s(s) + inner_sheet(s - a0, t - t0);
// the four pieces integrate disjoint regions of the driving white noise, so
// every covariance matches the full prefix construction exactly. The column
// holds nt+1 nodes t = t0 + j*dtu and is advanced in s by arbitrary steps.

class AnchoredSheet {
 public:
  AnchoredSheet(CounterRng& rng, int d, double a0, double t0, int nt, double dtu)
      : d_(d), t0_(t0), nt_(nt), dtu_(dtu),
        prof_(static_cast<std::size_t>(nt + 1) * d) {
    if (d_ < 1 || d_ > 8) throw std::invalid_argument("anchored sampler supports 1..8 coords");
    if (a0 < 0.0 || t0 <= 0.0) throw std::invalid_argument("anchored sampler needs a0 >= 0, t0 > 0");
    const double asd = std::sqrt(a0 * t0);
    for (int c = 0; c < d_; ++c) prof_[c] = asd * rng.normal();
    const double xsd = std::sqrt(a0 * dtu);
    for (int j = 1; j <= nt_; ++j)
      for (int c = 0; c < d_; ++c)
        prof_[static_cast<std::size_t>(j) * d_ + c] =
            prof_[static_cast<std::size_t>(j - 1) * d_ + c] + xsd * rng.normal();
  }

  void advance(CounterRng& rng, double ds) {
    const double ysd = std::sqrt(t0_ * ds);
    const double ssd = std::sqrt(ds * dtu_);
    double dy[8], cum[8];
    for (int c = 0; c < d_; ++c) {
      dy[c] = ysd * rng.normal();
      cum[c] = 0.0;
      prof_[c] += dy[c];
    }
    for (int j = 1; j <= nt_; ++j)
      for (int c = 0; c < d_; ++c) {
        cum[c] += ssd * rng.normal();
        prof_[static_cast<std::size_t>(j) * d_ + c] += dy[c] + cum[c];
      }
  }

  const double* node(int j) const { return prof_.data() + static_cast<std::size_t>(j) * d_; }
  int nt() const { return nt_; }

 private:
  int d_;
  double t0_;
  int nt_;
  double dtu_;
  std::vector<double> prof_;
};

// ---------------------------------------------------------------------------
// shared finalizer machinery

void reset_analysis(ExperimentReport& rep) {
  rep.stats.clear();
  rep.checks.clear();
  rep.policies.clear();
}

void settle_verdict(ExperimentReport& rep, bool inconclusive) {
  if (inconclusive) {
    rep.verdict = "inconclusive";
    return;
  }
  for (const auto& c : rep.checks)
    if (!c.pass) {
      rep.verdict = "fail";
      return;
    }
  rep.verdict = "pass";
}

// Fitted-constant sandwich against exact predictions: constants come from the
// even-position points of `idx`, the odd positions validate them with a 1.5x
// slack plus a 5-standard-error allowance.
struct SandwichResult {
  double c_up = 0.0;
  double c_lo = 0.0;
  bool upper_ok = true;
  bool lower_ok = true;
  bool usable = false;
  std::string detail;
};

SandwichResult fit_sandwich(const std::vector<SeriesPt>& pts, const std::vector<double>& pred,
                            const std::vector<int>& idx) {
  SandwichResult out;
  if (idx.size() < 4) {
    out.detail = "needs >= 4 usable points";
    return out;
  }
  for (std::size_t pos = 0; pos < idx.size(); pos += 2) {
    const int i = idx[pos];
    const double est = pts[i].sum.estimate;
    if (pred[i] <= 0.0) continue;
    out.c_up = std::max(out.c_up, est / pred[i]);
    if (est > 0.0) out.c_lo = std::max(out.c_lo, pred[i] / est);
  }
  if (out.c_up <= 0.0 || out.c_lo <= 0.0) {
    out.detail = "fit points carry no hits";
    return out;
  }
  out.usable = true;
  for (std::size_t pos = 1; pos < idx.size(); pos += 2) {
    const int i = idx[pos];
    const double est = pts[i].sum.estimate;
    const double se = se_of(pts[i].sum);
    if (est > 1.5 * out.c_up * pred[i] + 5.0 * se) {
      out.upper_ok = false;
      out.detail += str_f("[up@%.4g est=%.4g cap=%.4g]", pts[i].param, est,
                          1.5 * out.c_up * pred[i] + 5.0 * se);
    }
    if (est < pred[i] / (1.5 * out.c_lo) - 5.0 * se) {
      out.lower_ok = false;
      out.detail += str_f("[lo@%.4g est=%.4g floor=%.4g]", pts[i].param, est,
                          pred[i] / (1.5 * out.c_lo) - 5.0 * se);
    }
  }
  if (out.detail.empty())
    out.detail = str_f("c_up=%.4g c_lo=%.4g", out.c_up, out.c_lo);
  return out;
}

// ---------------------------------------------------------------------------
// sheet_diagnostics

struct CovPair {
  int i1, j1, c1, i2, j2, c2;
};

std::vector<CovPair> cov_pairs(std::uint64_t seed, int ns, int nt, int d, int count) {
  CounterRng rng(rng_derive(seed, kAuxPairsSalt));
  std::vector<CovPair> out;
  out.reserve(count);
  for (int p = 0; p < count; ++p) {
    CovPair cp;
    cp.i1 = 1 + static_cast<int>(rng.below(ns));
    cp.j1 = 1 + static_cast<int>(rng.below(nt));
    cp.c1 = static_cast<int>(rng.below(d));
    cp.i2 = 1 + static_cast<int>(rng.below(ns));
    cp.j2 = 1 + static_cast<int>(rng.below(nt));
    cp.c2 = static_cast<int>(rng.below(d));
    out.push_back(cp);
  }
  return out;
}

void fin_sheet_diagnostics(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  int ns, nt;
  parse_grid_pair(c.require_str("grid"), ns, nt);
  const int d = static_cast<int>(c.get_int("d", 2));
  const int npairs = static_cast<int>(c.get_int("pairs", 20));
  const auto pairs = cov_pairs(rep.seed, ns, nt, d, npairs);
  const double ds = 1.0 / ns, dt = 1.0 / nt;
  rep.policies = {"node pairs drawn from an auxiliary stream keyed off the master seed",
                  "targets min(s,u)*min(t,v)*[same coordinate] recomputed at finalize"};
  const auto pts = get_series(rep, "cov");
  bool incomplete = pts.size() != pairs.size();
  double worst = 0.0;
  bool all_ok = true;
  for (std::size_t p = 0; p < pts.size() && p < pairs.size(); ++p) {
    const auto& cp = pairs[p];
    const double target = std::min(cp.i1, cp.i2) * ds * std::min(cp.j1, cp.j2) * dt *
                          (cp.c1 == cp.c2 ? 1.0 : 0.0);
    const double se = se_of(pts[p].sum);
    const double dev = std::fabs(pts[p].sum.estimate - target);
    if (se <= 0.0) {
      incomplete = true;
      continue;
    }
    worst = std::max(worst, dev / se);
    if (dev > 5.0 * se) {
      all_ok = false;
      add_check(rep, str_f("cov_pair_%zu", p), false,
                str_f("est=%.5g target=%.5g dev=%.3g se=%.3g", pts[p].sum.estimate, target, dev,
                      se));
    }
  }
  rep.stats["worst_dev_in_se"] = worst;
  add_check(rep, "covariance_within_5se", all_ok, str_f("worst |dev|/se = %.3g", worst));
  settle_verdict(rep, incomplete);
}

}  // namespace

ExperimentReport sheet_diagnostics(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "sheet_diagnostics";
  set_default(c, "seed", "1234");
  set_default(c, "d", "2");
  set_default(c, "grid", "32x32");
  set_default(c, "trials", "10000");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  set_default(c, "pairs", "20");
  int ns, nt;
  parse_grid_pair(c.require_str("grid"), ns, nt);
  const int d = static_cast<int>(c.get_int("d", 2));
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  const int npairs = static_cast<int>(c.get_int("pairs", 20));
  ExperimentReport rep = scaffold(c);
  const auto pairs = cov_pairs(rep.seed, ns, nt, d, npairs);
  const std::int64_t trials = rep.trial_hi - rep.trial_lo;
  const int threads = static_cast<int>(c.get_int("threads", 1));
  const std::uint64_t master = rep.seed;
  const std::int64_t lo = rep.trial_lo;

  auto one = [&](std::int64_t i) {
    GridSpec spec{1.0, 1.0, ns, nt, d, rng_derive(master, static_cast<std::uint64_t>(lo + i))};
    const SheetSample sheet = build_sheet(spec);
    std::vector<double> prods(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto& cp = pairs[p];
      prods[p] = sheet.at(cp.i1, cp.j1, cp.c1) * sheet.at(cp.i2, cp.j2, cp.c2);
    }
    return prods;
  };
  const auto results = run_trials<std::vector<double>>(trials, threads, one);
  for (const auto& prods : results)
    for (std::size_t p = 0; p < prods.size(); ++p)
      add_mean(rep, "cov", static_cast<double>(p), 1, prods[p], prods[p] * prods[p]);
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// hit_prob_bm

void fin_hit_prob_bm(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  const int d = static_cast<int>(c.get_int("d", 3));
  rep.policies = {"bridge-bisection survival: stop at h <= r^2/(32 d); reach cutoff 6 sd",
                  "slope from CI-weighted log-log fit"};
  const auto pts = get_series(rep, "hit");
  bool positive = true;
  for (const auto& p : pts)
    if (p.sum.estimate <= 0.0) positive = false;
  const FitResult fit = fit_loglog(pts);
  bool inconclusive = !positive || fit.n < 3;
  if (fit.n >= 2) {
    rep.stats["slope"] = fit.slope;
    rep.stats["slope_se"] = fit.slope_se;
    rep.stats["intercept"] = fit.intercept;
  }
  rep.stats["target_slope"] = d - 2.0;
  const double band = std::max(0.1, 0.1 * (d - 2));
  rep.stats["slope_band"] = band;
  add_check(rep, "positive_estimates", positive,
            positive ? "all radii saw hits" : "some radius saw zero hits");
  if (fit.n >= 3)
    add_check(rep, "slope_matches_d_minus_2", std::fabs(fit.slope - (d - 2.0)) <= band,
              str_f("slope=%.4f target=%d band=%.2f se=%.3f", fit.slope, d - 2, band,
                    fit.slope_se));
  else
    inconclusive = true;
  settle_verdict(rep, inconclusive);
}

}  // namespace

ExperimentReport hit_prob_bm(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "hit_prob_bm";
  set_default(c, "seed", "1234");
  set_default(c, "d", "3");
  set_default(c, "r_ladder", "0.02,0.03,0.045,0.07,0.1,0.15");
  set_default(c, "steps", "256");
  set_default(c, "trials", "50000");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const int d = static_cast<int>(c.get_int("d", 3));
  if (d < 3) throw std::invalid_argument("transient hit probe needs d >= 3");
  if (d > 8) throw std::invalid_argument("d must be <= 8");
  const auto radii = c.get_ladder("r_ladder", "");
  const int steps = static_cast<int>(c.get_int("steps", 256));
  if (steps < 2) throw std::invalid_argument("steps must be >= 2");
  ExperimentReport rep = scaffold(c);
  const std::int64_t trials = rep.trial_hi - rep.trial_lo;
  const int threads = static_cast<int>(c.get_int("threads", 1));
  const std::uint64_t master = rep.seed;
  const std::int64_t lo = rep.trial_lo;
  const double h = 1.0 / steps;

  auto one = [&](std::int64_t i) {
    CounterRng rng(rng_derive(master, static_cast<std::uint64_t>(lo + i)));
    double x[8], nx[8];
    for (int cc = 0; cc < d; ++cc) x[cc] = rng.normal();
    HitRefiner ref(radii, d, 1.0);
    const double sd = std::sqrt(h);
    for (int st = 0; st < steps && !ref.dead(); ++st) {
      for (int cc = 0; cc < d; ++cc) nx[cc] = x[cc] + sd * rng.normal();
      ref.segment(rng, x, nx, h);
      std::copy(nx, nx + d, x);
    }
    std::vector<double> p(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) p[k] = 1.0 - ref.survival()[k];
    return p;
  };
  const auto results = run_trials<std::vector<double>>(trials, threads, one);
  for (const auto& p : results)
    for (std::size_t k = 0; k < radii.size(); ++k)
      add_mean(rep, "hit", radii[k], 1, p[k], p[k] * p[k]);
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// hit_prob_two_bm

void fin_hit_prob_two_bm(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  const int d = static_cast<int>(c.get_int("d", 3));
  const double r = c.get_double("r", 0.05);
  rep.policies = {"plain node-minimum indicators (no bridge refinement)",
                  "conditional ratios use the background hits as the denominator",
                  "domination constant fitted on even rho indices, validated on odd"};
  const auto base = get_series(rep, "base");
  const auto joint = get_series(rep, "joint");
  bool inconclusive = base.size() != 1 || joint.empty();
  std::int64_t base_hits = 0;
  double base_est = 0.0;
  if (!inconclusive) {
    base_hits = static_cast<std::int64_t>(std::llround(base[0].row.acc));
    base_est = base[0].sum.estimate;
    rep.stats["base_est"] = base_est;
    rep.stats["base_hits"] = static_cast<double>(base_hits);
    if (base_hits < 50) {
      add_check(rep, "enough_base_hits", false, str_f("only %lld background hits",
                                                      static_cast<long long>(base_hits)));
      inconclusive = true;
    }
  }
  if (!inconclusive) {
    std::vector<SeriesPt> cond;
    for (const auto& j : joint) {
      SeriesPt p = j;
      const std::int64_t jh = static_cast<std::int64_t>(std::llround(j.row.acc));
      const Ci ci = wilson_ci(jh, base_hits);
      p.sum.estimate = ci.estimate;
      p.sum.ci = ci;
      cond.push_back(p);
      rep.stats["cond_" + fmt_g(j.param)] = ci.estimate;
    }
    double c_dom = 0.0;
    for (std::size_t i = 0; i < cond.size(); i += 2)
      c_dom = std::max(c_dom, cond[i].sum.estimate * std::pow(cond[i].param / r, d - 2.0));
    rep.stats["c_dom"] = c_dom;
    bool dom_ok = c_dom > 0.0;
    std::string dom_detail = str_f("c=%.4g", c_dom);
    for (std::size_t i = 1; i < cond.size(); i += 2) {
      const double cap =
          1.5 * c_dom * std::pow(r / cond[i].param, d - 2.0) + 5.0 * se_of(cond[i].sum);
      if (cond[i].sum.estimate > cap) {
        dom_ok = false;
        dom_detail += str_f("[rho=%.3g est=%.4g cap=%.4g]", cond[i].param,
                            cond[i].sum.estimate, cap);
      }
    }
    add_check(rep, "conditional_dominated_by_fitted_power", dom_ok, dom_detail);
    const FitResult fit = fit_loglog(cond);
    if (fit.n >= 3) {
      rep.stats["cond_slope"] = fit.slope;
      if (d == 3)
        add_check(rep, "conditional_decay_trend", fit.slope >= -1.6 && fit.slope <= -0.4,
                  str_f("slope=%.3f band=[-1.6,-0.4]", fit.slope));
      else
        add_check(rep, "conditional_decay_trend", fit.slope <= -0.2,
                  str_f("slope=%.3f (expect decreasing)", fit.slope));
    } else {
      inconclusive = true;
    }
    if (!cond.empty() && base_est > 0.0) {
      const double ratio = cond.back().sum.estimate / base_est;
      rep.stats["far_rho_ratio"] = ratio;
      add_check(rep, "far_rho_near_independent", ratio >= 0.2 && ratio <= 5.0,
                str_f("cond(max rho)/base = %.3g, band [0.2,5]", ratio));
    }
  }
  settle_verdict(rep, inconclusive);
}

}  // namespace

ExperimentReport hit_prob_two_bm(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "hit_prob_two_bm";
  set_default(c, "seed", "1234");
  set_default(c, "d", "3");
  set_default(c, "rho_ladder", "0.1,0.141,0.2,0.283,0.4,0.566,0.8");
  set_default(c, "r", "0.08");
  set_default(c, "steps", "256");
  set_default(c, "trials", "60000");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const int d = static_cast<int>(c.get_int("d", 3));
  if (d < 3) throw std::invalid_argument("two-walker probe needs d >= 3");
  if (d > 8) throw std::invalid_argument("d must be <= 8");
  const auto rhos = c.get_ladder("rho_ladder", "");
  const double r = c.get_double("r", 0.05);
  if (!(r > 0.0) || r >= rhos.front())
    throw std::invalid_argument("background radius must sit strictly below the rho ladder");
  const int steps = static_cast<int>(c.get_int("steps", 256));
  ExperimentReport rep = scaffold(c);
  const std::int64_t trials = rep.trial_hi - rep.trial_lo;
  const int threads = static_cast<int>(c.get_int("threads", 1));
  const std::uint64_t master = rep.seed;
  const std::int64_t lo = rep.trial_lo;
  const double h = 1.0 / steps;

  struct Out {
    std::uint8_t hit_base = 0;
    std::vector<std::uint8_t> hit_joint;
  };
  auto one = [&](std::int64_t i) {
    CounterRng rng(rng_derive(master, static_cast<std::uint64_t>(lo + i)));
    double x[8], y[8];
    for (int cc = 0; cc < d; ++cc) x[cc] = rng.normal();
    for (int cc = 0; cc < d; ++cc) y[cc] = rng.normal();
    double min_x = l1(x, d);
    std::vector<double> min_mix(rhos.size());
    double mix[8];
    for (std::size_t k = 0; k < rhos.size(); ++k) {
      for (int cc = 0; cc < d; ++cc) mix[cc] = x[cc] + rhos[k] * y[cc];
      min_mix[k] = l1(mix, d);
    }
    const double sd = std::sqrt(h);
    for (int st = 0; st < steps; ++st) {
      for (int cc = 0; cc < d; ++cc) x[cc] += sd * rng.normal();
      for (int cc = 0; cc < d; ++cc) y[cc] += sd * rng.normal();
      min_x = std::min(min_x, l1(x, d));
      for (std::size_t k = 0; k < rhos.size(); ++k) {
        for (int cc = 0; cc < d; ++cc) mix[cc] = x[cc] + rhos[k] * y[cc];
        min_mix[k] = std::min(min_mix[k], l1(mix, d));
      }
    }
    Out o;
    o.hit_base = min_x <= r ? 1 : 0;
    o.hit_joint.resize(rhos.size());
    for (std::size_t k = 0; k < rhos.size(); ++k)
      o.hit_joint[k] = (o.hit_base && min_mix[k] <= r) ? 1 : 0;
    return o;
  };
  const auto results = run_trials<Out>(trials, threads, one);
  for (const auto& o : results) {
    add_binom(rep, "base", r, 1, o.hit_base);
    for (std::size_t k = 0; k < rhos.size(); ++k)
      add_binom(rep, "joint", rhos[k], 1, o.hit_joint[k]);
  }
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// hit_prob_sheet

struct SheetDesign {
  std::string variant;           // "entropy" | "width"
  int d = 5;
  int k = 160;
  CompactSet1D set = CompactSet1D::parse("1,2");
  bool interval_mode = true;
  bool with_single = false;
  std::vector<double> eps;       // threshold per series point (entropy / width)
  std::vector<Rational> eps2;    // exact squared thresholds
  std::vector<double> widths;    // width variant only
  std::vector<double> points;    // point mode only
};

SheetDesign sheet_design(const ExpConfig& c) {
  SheetDesign dz;
  dz.variant = c.get_str("variant", "entropy");
  dz.d = static_cast<int>(c.get_int("d", 5));
  if (dz.d < 3) throw std::invalid_argument("sheet hit probe needs d >= 3");
  if (dz.d > 8) throw std::invalid_argument("d must be <= 8");
  dz.k = static_cast<int>(c.get_int("k", 160));
  if (dz.k < 8) throw std::invalid_argument("k must be >= 8");
  if (dz.variant == "width") {
    const auto wtok = split_tokens(c.require_str("widths"));
    const Rational s0 = Rational::parse(c.require_str("eps_scale"));
    if (!(s0.to_double() > 0.0)) throw std::invalid_argument("eps_scale must be positive");
    for (const auto& t : wtok) {
      const Rational w = Rational::parse(t);
      const double wd = w.to_double();
      if (!(wd > 0.0) || wd > 1.0 + 1e-12)
        throw std::invalid_argument("widths must lie in (0, 1]");
      if (!dz.widths.empty() && wd <= dz.widths.back())
        throw std::invalid_argument("widths must increase");
      dz.widths.push_back(wd);
      dz.eps2.push_back(w * s0 * s0);
      dz.eps.push_back(std::sqrt(wd) * s0.to_double());
    }
    dz.interval_mode = true;
    return dz;
  }
  if (dz.variant != "entropy") throw std::invalid_argument("variant must be entropy or width");
  dz.set = CompactSet1D::parse(c.require_str("set"));
  if (dz.set.min_point() < Rational(1) || dz.set.max_point() > Rational(2))
    throw std::invalid_argument("hit set must lie inside [1,2]");
  dz.interval_mode = dz.set.has_interval_part();
  if (!dz.interval_mode) {
    for (const auto& comp : dz.set.components()) dz.points.push_back(comp.a.to_double());
  }
  const auto etok = split_tokens(c.require_str("eps_ladder"));
  for (const auto& t : etok) {
    const Rational e = Rational::parse(t);
    const double ed = e.to_double();
    if (!(ed > 0.0) || ed >= 1.0) throw std::invalid_argument("eps must lie in (0,1)");
    if (!dz.eps.empty() && ed <= dz.eps.back())
      throw std::invalid_argument("eps ladder must increase");
    dz.eps.push_back(ed);
    dz.eps2.push_back(e * e);
  }
  dz.with_single = c.get_int("with_single", 0) != 0;
  return dz;
}

// Thresholds whose cell diagonal exceeds eps/4 are below the sampling
// resolution and get excluded from analysis.
std::vector<int> included_eps(const SheetDesign& dz) {
  std::vector<int> idx;
  const double floor_eps = 4.0 * std::sqrt(2.0) / dz.k;
  for (std::size_t i = 0; i < dz.eps.size(); ++i)
    if (dz.eps[i] + 1e-12 >= floor_eps) idx.push_back(static_cast<int>(i));
  return idx;
}

// One trial of the interval-mode hit estimator.
//
// Phase 1 walks the anchored column sampler across [a0, b0], keeping every
// column profile; each in-set column is probed in t with exact Brownian
// bridge fills that bisect down to steps of order eps^2 near any potential
// dip.  Phase 2 closes the gap between the column spacing and the eps^2 dip
// scale: wherever the one-dimensional crossing bound across an s-gap admits
// a miss probability above 1e-6, a midpoint column is inserted with its
// exact conditional law (the average of its neighbours plus an independent
// Brownian motion in t of rate gap/4, anchored at t = 0 — its residual is
// uncorrelated with both neighbours) and probed recursively until some
// column passes within ~eps/4 of the dip bottom.  The trial then scores a
// plain indicator: hit iff some witnessed value (node, bridge fill, or
// inserted column) has l1 norm at most eps.  Probability formulas steer the
// sampling but never enter the estimate, so every residual deficiency (the
// leaf-scale boundary layer, the witness-spacing smear) scales with eps and
// leaves the threshold scaling of the estimate faithful.
struct IntervalHitOut {
  std::vector<double> set_p, single_p;
};

IntervalHitOut interval_hit_trial(CounterRng& rng, int d, int k, double a0, double b0,
                                  const std::vector<std::pair<double, double>>& comps,
                                  const std::vector<double>& eps, bool with_single,
                                  const std::vector<double>& agg_hi) {
  const double dtu = 1.0 / k;
  const int ns = static_cast<int>(std::llround((b0 - a0) * k));
  const int ne = static_cast<int>(eps.size());
  const double eps_max = eps.back();
  const std::size_t rowsz = static_cast<std::size_t>(k + 1) * d;

  std::vector<double> vals(static_cast<std::size_t>(ns + 1) * rowsz);
  std::vector<double> l1v(static_cast<std::size_t>(ns + 1) * (k + 1));
  std::vector<double> rmin(static_cast<std::size_t>(ns + 1),
                           std::numeric_limits<double>::infinity());
  std::vector<char> in_f(static_cast<std::size_t>(ns + 1), 0);

  IntervalHitOut o;
  bool all_hit = false;
  {
    AnchoredSheet sheet(rng, d, a0, 1.0, k, dtu);
    HitRefiner ref(eps, d, a0);
    for (int col = 0;; ++col) {
      const double s = a0 + col * dtu;
      double* cv = vals.data() + static_cast<std::size_t>(col) * rowsz;
      std::copy(sheet.node(0), sheet.node(0) + rowsz, cv);
      double* cl = l1v.data() + static_cast<std::size_t>(col) * (k + 1);
      for (int j = 0; j <= k; ++j) cl[j] = l1(cv + static_cast<std::size_t>(j) * d, d);
      if (contains_d(comps, s, 1e-9)) {
        in_f[col] = 1;
        ref.reset(s);
        for (int j = 1; j <= k; ++j)
          ref.segment(rng, cv + static_cast<std::size_t>(j - 1) * d,
                      cv + static_cast<std::size_t>(j) * d, dtu);
        rmin[col] = ref.refined_min();
        if (rmin[col] <= eps[0]) all_hit = true;
        if (with_single && o.single_p.empty()) {
          o.single_p.resize(ne);
          for (int e = 0; e < ne; ++e) o.single_p[e] = rmin[col] <= eps[e] ? 1.0 : 0.0;
        }
      }
      if (col == ns) break;
      sheet.advance(rng, dtu);
    }
  }

  struct InsCol {
    double s;
    double rmin;
    char member;
    int j0;
    std::vector<double> v;
  };
  std::deque<InsCol> ins;

  if (!all_hit) {
    int budget = 4096;
    HitRefiner iref(eps, d, a0);
    const double t_hi = 1.0 + k * dtu;
    const double fire_c = d * t_hi * 6.9078;  // crossing bound above 1e-6 fires
    const auto ds_min = [&](double e) { return e * e / (20.5 * d * d * t_hi); };

    struct View {
      const double* p;
      int j0, d;
      const double* row(int j) const { return p + static_cast<std::size_t>(j - j0) * d; }
    };

    std::function<void(View, View, double, double, double, double, int, int, int)> rec_pair =
        [&](View A, View B, double sA, double sB, double lA, double lB, int j0, int j1,
            int depth) {
          const double gap = sB - sA;
          bool live = false;
          for (int e = 0; e < ne && !live; ++e)
            live = (lA - eps[e]) * (lB - eps[e]) <= fire_c * gap && gap > ds_min(eps[e]);
          if (!live || depth >= 16 || budget <= 0) return;
          --budget;
          const double sm = 0.5 * (sA + sB);
          const double lam = 0.25 * gap;
          InsCol M;
          M.s = sm;
          M.j0 = j0;
          M.member = contains_d(comps, sm, 1e-9) ? 1 : 0;
          M.v.resize(static_cast<std::size_t>(j1 - j0 + 1) * d);
          double g[8];
          const double g0sd = std::sqrt(lam * (1.0 + j0 * dtu));
          const double gisd = std::sqrt(lam * dtu);
          for (int c = 0; c < d; ++c) g[c] = g0sd * rng.normal();
          for (int j = j0; j <= j1; ++j) {
            double* out = M.v.data() + static_cast<std::size_t>(j - j0) * d;
            const double* ra = A.row(j);
            const double* rb = B.row(j);
            if (j > j0)
              for (int c = 0; c < d; ++c) g[c] += gisd * rng.normal();
            for (int c = 0; c < d; ++c) out[c] = 0.5 * (ra[c] + rb[c]) + g[c];
          }
          iref.reset(sm);
          const View VM{M.v.data(), j0, d};
          for (int j = j0 + 1; j <= j1; ++j) iref.segment(rng, VM.row(j - 1), VM.row(j), dtu);
          const double lM = iref.refined_min();
          M.rmin = lM;
          ins.push_back(std::move(M));
          const View VS{ins.back().v.data(), j0, d};
          rec_pair(A, VS, sA, sm, lA, lM, j0, j1, depth + 1);
          rec_pair(VS, B, sm, sB, lM, lB, j0, j1, depth + 1);
        };

    for (int colA = 0; colA < ns; ++colA) {
      if (!in_f[colA] || !in_f[colA + 1]) continue;
      const double sA = a0 + colA * dtu, sB = sA + dtu;
      const double lA = rmin[colA], lB = rmin[colA + 1];
      bool live = false;
      for (int e = 0; e < ne && !live; ++e)
        live = (lA - eps[e]) * (lB - eps[e]) <= fire_c * dtu && dtu > ds_min(eps[e]);
      if (!live) continue;
      const double* la_ = l1v.data() + static_cast<std::size_t>(colA) * (k + 1);
      const double* lb_ = l1v.data() + static_cast<std::size_t>(colA + 1) * (k + 1);
      const double m_t = 6.0 * std::sqrt(d * sB * dtu);
      int j0 = -1, j1 = -1;
      for (int j = 0; j <= k; ++j) {
        const double pot =
            std::min(la_[j], lb_[j]) - m_t - d * std::sqrt(dtu * (1.0 + j * dtu));
        if (pot <= eps_max) {
          if (j0 < 0) j0 = j;
          j1 = j;
        }
      }
      if (j0 < 0) continue;
      j0 = std::max(0, j0 - 4);
      j1 = std::min(k, j1 + 4);
      const View VA{vals.data() + static_cast<std::size_t>(colA) * rowsz, 0, d};
      const View VB{vals.data() + static_cast<std::size_t>(colA + 1) * rowsz, 0, d};
      rec_pair(VA, VB, sA, sB, lA, lB, j0, j1, 0);
    }
  }

  o.set_p.assign(ne, 0.0);
  for (int e = 0; e < ne; ++e) {
    const double hi = agg_hi[e];
    double best = std::numeric_limits<double>::infinity();
    for (int col = 0; col <= ns; ++col)
      if (in_f[col] && a0 + col * dtu <= hi + 1e-12)
        best = std::min(best, rmin[col]);
    for (const auto& m : ins)
      if (m.member && m.s <= hi + 1e-12) best = std::min(best, m.rmin);
    o.set_p[e] = best <= eps[e] ? 1.0 : 0.0;
  }
  return o;
}

void fin_hit_prob_sheet(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  const SheetDesign dz = sheet_design(c);
  rep.policies = {
      "interval trials score an indicator over witnessed field values; crossing bounds "
      "steer the sampling but never enter the estimate",
      "sub-column-spacing dips are resolved by exact conditional midpoint-column insertion",
      "thresholds below the cell-diagonal resolution rule are excluded from fits",
      "predictions use exact rational packing counts",
      "sandwich constants fitted on even series positions, validated on odd"};
  const bool width = dz.variant == "width";
  const auto pts = get_series(rep, width ? "width" : "set");
  const auto idx_all = included_eps(dz);
  bool inconclusive = pts.size() != dz.eps.size();

  // exact predictions per series point
  std::vector<double> pred(dz.eps.size(), 0.0);
  for (std::size_t i = 0; i < dz.eps.size(); ++i) {
    CompactSet1D f = dz.set;
    if (width)
      f = CompactSet1D::make({Interval{Rational(1), Rational(1) + Rational::parse(split_tokens(
                                  c.require_str("widths"))[i])}});
    const std::int64_t K = kolmogorov_entropy(f, dz.eps2[i], false).count;
    pred[i] = std::min(1.0, std::pow(dz.eps[i], dz.d - 2.0) * static_cast<double>(K));
    rep.stats[str_f("pred_%s", fmt_g(width ? dz.widths[i] : dz.eps[i]).c_str())] = pred[i];
  }

  if (!inconclusive) {
    // slope on included, unsaturated points
    std::vector<SeriesPt> fit_pts;
    std::vector<double> lx, ly;
    for (int i : idx_all) {
      if (pred[i] >= 1.0) continue;
      fit_pts.push_back(pts[i]);
      lx.push_back(std::log(pts[i].param));
      ly.push_back(std::log(pred[i]));
    }
    const FitResult fit = fit_loglog(fit_pts);
    if (fit.n >= 3 && lx.size() >= 3) {
      const FitResult pfit = fit_line(lx, ly);
      const double target = width ? (dz.d - 2.0) / 2.0 : pfit.slope;
      const double band = width ? 0.3 : 0.2;
      rep.stats["slope"] = fit.slope;
      rep.stats["slope_se"] = fit.slope_se;
      rep.stats["target_slope"] = target;
      add_check(rep, width ? "slope_matches_half_power" : "slope_matches_prediction",
                std::fabs(fit.slope - target) <= band,
                str_f("slope=%.4f target=%.4f band=%.2f", fit.slope, target, band));
    } else {
      inconclusive = true;
    }

    // sandwich against the prediction on all included points
    std::vector<double> pr(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pr[i] = pred[i];
    const SandwichResult sw = fit_sandwich(pts, pr, idx_all);
    if (sw.usable) {
      rep.stats["c_up"] = sw.c_up;
      rep.stats["c_lo"] = sw.c_lo;
      add_check(rep, "sandwich_upper", sw.upper_ok, sw.detail);
      add_check(rep, "sandwich_lower", sw.lower_ok, sw.detail);
    } else {
      inconclusive = true;
      add_check(rep, "sandwich_upper", false, sw.detail);
    }

    // multi-point level ratio against the single-column series
    if (dz.with_single && !dz.interval_mode && dz.set.n_components() >= 2) {
      const auto single = get_series(rep, "single");
      if (single.size() == pts.size()) {
        double logsum = 0.0;
        int cnt = 0;
        bool nested = true;
        for (int i : idx_all) {
          if (pts[i].sum.estimate < single[i].sum.estimate - 1e-12) nested = false;
          if (pts[i].sum.estimate > 0.0 && single[i].sum.estimate > 0.0) {
            logsum += std::log(pts[i].sum.estimate / single[i].sum.estimate);
            ++cnt;
          }
        }
        add_check(rep, "set_dominates_single_pointwise", nested,
                  "per-trial coupling makes the set series dominate");
        if (cnt >= 2) {
          const double ratio = std::exp(logsum / cnt);
          const double m = static_cast<double>(dz.set.n_components());
          rep.stats["level_ratio"] = ratio;
          add_check(rep, "level_ratio_counts_components", std::fabs(ratio - m) <= 1.0,
                    str_f("ratio=%.3f components=%g band=1", ratio, m));
        } else {
          inconclusive = true;
        }
      } else {
        inconclusive = true;
      }
    }
  }
  settle_verdict(rep, inconclusive);
}

}  // namespace

ExperimentReport hit_prob_sheet(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "hit_prob_sheet";
  set_default(c, "seed", "1234");
  set_default(c, "variant", "entropy");
  set_default(c, "d", "5");
  const bool width = c.get_str("variant", "entropy") == "width";
  if (width) {
    set_default(c, "widths", "0.0625,0.125,0.25,0.5,1");
    set_default(c, "eps_scale", "0.35");
    set_default(c, "k", "160");
    set_default(c, "trials", "1500");
  } else {
    set_default(c, "set", "1,2");
    const bool interval = CompactSet1D::parse(c.require_str("set")).has_interval_part();
    set_default(c, "k", interval ? "160" : "256");
    set_default(c, "eps_ladder",
                interval ? "0.08,0.11,0.15,0.2,0.27,0.36" : "0.025,0.035,0.05,0.07,0.1,0.14");
    set_default(c, "with_single", interval ? "0" : "1");
    set_default(c, "trials", interval ? "8000" : "20000");
  }
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const SheetDesign dz = sheet_design(c);
  ExperimentReport rep = scaffold(c);
  const std::int64_t trials = rep.trial_hi - rep.trial_lo;
  const int threads = static_cast<int>(c.get_int("threads", 1));
  const std::uint64_t master = rep.seed;
  const std::int64_t lo = rep.trial_lo;
  const double dtu = 1.0 / dz.k;
  const int d = dz.d;

  struct Out {
    std::vector<double> set_p, single_p;
  };

  std::function<Out(std::int64_t)> one;
  if (dz.variant == "width") {
    std::vector<double> agg_hi(dz.widths.size());
    for (std::size_t wi = 0; wi < dz.widths.size(); ++wi) agg_hi[wi] = 1.0 + dz.widths[wi];
    const std::vector<std::pair<double, double>> comps{{1.0, 2.0}};
    one = [&, dz, agg_hi, comps](std::int64_t i) {
      CounterRng rng(rng_derive(master, static_cast<std::uint64_t>(lo + i)));
      const auto r = interval_hit_trial(rng, d, dz.k, 1.0, 2.0, comps, dz.eps, false, agg_hi);
      Out o;
      o.set_p = r.set_p;
      return o;
    };
  } else if (dz.interval_mode) {
    const double a0 = dz.set.min_point().to_double();
    const double b0 = dz.set.max_point().to_double();
    const auto comps = dz.set.double_components();
    const std::vector<double> agg_hi(dz.eps.size(), b0);
    one = [&, dz, a0, b0, comps, agg_hi](std::int64_t i) {
      CounterRng rng(rng_derive(master, static_cast<std::uint64_t>(lo + i)));
      const auto r =
          interval_hit_trial(rng, d, dz.k, a0, b0, comps, dz.eps, dz.with_single, agg_hi);
      Out o;
      o.set_p = r.set_p;
      o.single_p = r.single_p;
      return o;
    };
  } else {
    one = [&, dz](std::int64_t i) {
      CounterRng rng(rng_derive(master, static_cast<std::uint64_t>(lo + i)));
      AnchoredSheet sheet(rng, d, dz.points[0], 1.0, dz.k, dtu);
      HitRefiner ref(dz.eps, d, dz.points[0]);
      std::vector<double> total(dz.eps.size(), 1.0);
      Out o;
      for (std::size_t pi = 0; pi < dz.points.size(); ++pi) {
        if (pi > 0) sheet.advance(rng, dz.points[pi] - dz.points[pi - 1]);
        ref.reset(dz.points[pi]);
        for (int j = 1; j <= dz.k; ++j) ref.segment(rng, sheet.node(j - 1), sheet.node(j), dtu);
        const auto& sv = ref.survival();
        for (std::size_t e = 0; e < total.size(); ++e) total[e] *= sv[e];
        if (pi == 0 && dz.with_single) {
          o.single_p.resize(sv.size());
          for (std::size_t e = 0; e < sv.size(); ++e) o.single_p[e] = 1.0 - sv[e];
        }
        if (total[0] == 0.0 && (!dz.with_single || !o.single_p.empty())) break;
      }
      o.set_p.resize(total.size());
      for (std::size_t e = 0; e < total.size(); ++e) o.set_p[e] = 1.0 - total[e];
      return o;
    };
  }

  const auto results = run_trials<Out>(trials, threads, one);
  const bool width_mode = dz.variant == "width";
  for (const auto& o : results) {
    for (std::size_t e = 0; e < o.set_p.size(); ++e) {
      const double param = width_mode ? dz.widths[e] : dz.eps[e];
      add_mean(rep, width_mode ? "width" : "set", param, 1, o.set_p[e],
               o.set_p[e] * o.set_p[e]);
    }
    for (std::size_t e = 0; e < o.single_p.size(); ++e)
      add_mean(rep, "single", dz.eps[e], 1, o.single_p[e], o.single_p[e] * o.single_p[e]);
  }
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// zero_projection_scan

double zero_eps(int k) { return 2.0 * std::sqrt(std::log(static_cast<double>(k)) / k); }

void fin_zero_projection_scan(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  const int d = static_cast<int>(c.get_int("d", 2));
  rep.policies = {"column marked when some node with t in [1,2] dips below 2 sqrt(log k / k)",
                  "box counts averaged over seeds, dimension fitted on the averages"};
  const auto dim = get_series(rep, "dim");
  const auto marked = get_series(rep, "marked");
  const auto counts = get_series(rep, "count");
  bool inconclusive = dim.size() != 1 || marked.size() != 1 || counts.size() < 2;
  if (!inconclusive) {
    const double target = std::min(1.0, 2.0 - d / 2.0);
    const double band = d <= 2 ? 0.1 : 0.15;
    const FitResult fit = fit_loglog(counts);
    rep.stats["dim_pooled"] = fit.slope;
    rep.stats["dim_seed_mean"] = dim[0].sum.estimate;
    rep.stats["dim_target"] = target;
    rep.stats["marked_mean"] = marked[0].sum.estimate;
    if (marked[0].sum.estimate < 1.0 || fit.n < 2) {
      add_check(rep, "marked_columns_exist", false,
                str_f("mean marked columns %.3g", marked[0].sum.estimate));
      inconclusive = true;
    } else {
      add_check(rep, "dimension_matches_projection_profile",
                std::fabs(fit.slope - target) <= band,
                str_f("dim=%.3f target=%.2f band=%.2f", fit.slope, target, band));
    }
  }
  settle_verdict(rep, inconclusive);
}

struct MarkOut {
  double dim = 0.0;
  std::int64_t marked = 0;
  std::vector<std::int64_t> counts;
  std::uint8_t empty = 0;
};

MarkOut cloud_fit(const std::vector<double>& cloud, const std::vector<std::int64_t>& scales) {
  MarkOut o;
  o.marked = static_cast<std::int64_t>(cloud.size());
  if (cloud.empty()) {
    o.empty = 1;
    o.counts.assign(scales.size(), 0);
    return o;
  }
  const DimFit fit = box_dimension(cloud, scales);
  o.dim = fit.fit_full;
  o.counts.reserve(scales.size());
  for (const auto& cn : fit.counts) o.counts.push_back(cn.second);
  return o;
}

}  // namespace

ExperimentReport zero_projection_scan(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "zero_projection_scan";
  set_default(c, "seed", "1234");
  set_default(c, "d", "2");
  const int d = static_cast<int>(c.get_int("d", 2));
  if (d < 1 || d > 4) throw std::invalid_argument("zero projection scan supports d in 1..4");
  set_default(c, "grid", d <= 2 ? "2048" : "4096");
  set_default(c, "scales", d <= 2 ? "16,32,64,128,256,512,1024,2048" : "6,12,24,48,96,192,384");
  set_default(c, "trials", "8");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const int grid = static_cast<int>(c.get_int("grid", 2048));
  if (grid < 8 || grid % 2) throw std::invalid_argument("grid must be even and >= 8");
  const auto scales = c.get_int_ladder("scales", "");
  ExperimentReport rep = scaffold(c);
  const std::int64_t trials = rep.trial_hi - rep.trial_lo;
  const int threads = static_cast<int>(c.get_int("threads", 1));
  const std::uint64_t master = rep.seed;
  const std::int64_t lo = rep.trial_lo;
  const int k = grid / 2;
  const double eps = zero_eps(k);

  auto one = [&](std::int64_t i) {
    GridSpec spec{2.0, 2.0, grid, grid, d,
                  rng_derive(master, static_cast<std::uint64_t>(lo + i))};
    SheetColumnWalker w(spec);
    std::vector<double> cloud;
    for (;;) {
      const double s = w.column() * spec.ds();
      const auto& vals = w.values();
      for (int j = grid / 2; j <= grid; ++j) {
        if (l1(vals.data() + static_cast<std::size_t>(j) * d, d) <= eps) {
          cloud.push_back(s / spec.s_max);
          break;
        }
      }
      if (w.done()) break;
      w.advance();
    }
    return cloud_fit(cloud, scales);
  };
  const auto results = run_trials<MarkOut>(trials, threads, one);
  for (const auto& o : results) {
    add_mean(rep, "dim", 0.0, 1, o.dim, o.dim * o.dim);
    add_mean(rep, "marked", 0.0, 1, static_cast<double>(o.marked),
             static_cast<double>(o.marked) * static_cast<double>(o.marked));
    for (std::size_t si = 0; si < scales.size(); ++si) {
      const double v = static_cast<double>(o.counts[si]);
      add_mean(rep, "count", static_cast<double>(scales[si]), 1, v, v * v);
    }
  }
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// good_cell_counts

double cell_norm(int d, int k, double max_n) {
  const double lk = std::log(static_cast<double>(k));
  if (d == 1) return max_n / (std::sqrt(static_cast<double>(k)) * std::pow(lk, 1.5));
  return max_n / std::pow(lk, (8.0 - d) / 2.0);
}

void fin_good_cell_counts(ExperimentReport& rep) {
  reset_analysis(rep);
  rep.policies = {"cell marked when its lower-left corner value dips below the modulus",
                  "anchored-block sampling of the unit square at s,t >= 1"};
  const auto norms = get_series(rep, "norm");
  bool inconclusive = norms.size() < 2;
  if (!inconclusive) {
    const double base = norms.front().sum.estimate;
    double mx = -1e300;
    for (const auto& p : norms) mx = std::max(mx, p.sum.estimate);
    rep.stats["norm_base"] = base;
    rep.stats["norm_max"] = mx;
    if (base <= 0.0) {
      add_check(rep, "good_cells_present_at_base_size", false,
                "no dips at the smallest lattice size; growth cap unanchored");
      inconclusive = true;
    } else {
      const double ratio = mx / base;
      rep.stats["norm_growth"] = ratio;
      add_check(rep, "normalized_max_counts_never_double", ratio <= 2.0,
                str_f("max over ladder / base = %.3f (cap 2)", ratio));
    }
  }
  settle_verdict(rep, inconclusive);
}

}  // namespace

ExperimentReport good_cell_counts(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "good_cell_counts";
  set_default(c, "seed", "1234");
  set_default(c, "d", "2");
  set_default(c, "k_ladder", "256,512,1024,2048,4096");
  set_default(c, "n_modulus", "2");
  set_default(c, "trials", "24");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const int d = static_cast<int>(c.get_int("d", 2));
  if (d < 1 || d > 3) throw std::invalid_argument("good cell counts supports d in 1..3");
  const auto ks = c.get_int_ladder("k_ladder", "");
  const double n_mod = c.get_double("n_modulus", 2.0);
  ExperimentReport rep = scaffold(c);
  const std::int64_t trials = rep.trial_hi - rep.trial_lo;
  const int threads = static_cast<int>(c.get_int("threads", 1));
  const std::uint64_t master = rep.seed;
  const std::int64_t lo = rep.trial_lo;

  struct Out {
    std::vector<double> norms, maxs;
  };
  auto one = [&](std::int64_t i) {
    const std::uint64_t tk = rng_derive(master, static_cast<std::uint64_t>(lo + i));
    Out o;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const int k = static_cast<int>(ks[ki]);
      CounterRng rng(rng_derive(tk, ki));
      const double dtu = 1.0 / k;
      AnchoredSheet sheet(rng, d, 1.0, 1.0, k, dtu);
      const double thr = n_mod * std::sqrt(std::log(static_cast<double>(k)) / k);
      std::int64_t best = 0;
      for (int col = 0;; ++col) {
        if (col < k) {  // corners live at s in [1,2)
          std::int64_t cnt = 0;
          for (int j = 0; j < k; ++j)
            if (l1(sheet.node(j), d) <= thr) ++cnt;
          best = std::max(best, cnt);
        }
        if (col == k - 1) break;
        sheet.advance(rng, dtu);
      }
      o.maxs.push_back(static_cast<double>(best));
      o.norms.push_back(cell_norm(d, k, static_cast<double>(best)));
    }
    return o;
  };
  const auto results = run_trials<Out>(trials, threads, one);
  for (const auto& o : results)
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      add_mean(rep, "norm", static_cast<double>(ks[ki]), 1, o.norms[ki],
               o.norms[ki] * o.norms[ki]);
      add_mean(rep, "maxN", static_cast<double>(ks[ki]), 1, o.maxs[ki], o.maxs[ki] * o.maxs[ki]);
    }
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// double_point_scan

void fin_double_point_scan(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  const int d = static_cast<int>(c.get_int("d", 4));
  rep.policies = {"pair search windowed on the first coordinate",
                  "cross-covariance of the two constructed sheets checked per pair",
                  "box counts averaged over seeds, dimension fitted on the averages"};
  const auto dim = get_series(rep, "dim");
  const auto marked = get_series(rep, "marked");
  const auto cross = get_series(rep, "crosscov");
  const auto counts = get_series(rep, "count");
  bool inconclusive = dim.size() != 1 || marked.size() != 1 || counts.size() < 2;
  if (!inconclusive) {
    const double target = std::min(1.0, 3.0 - d / 2.0);
    const double band = d <= 4 ? 0.15 : 0.2;
    const FitResult fit = fit_loglog(counts);
    rep.stats["dim_pooled"] = fit.slope;
    rep.stats["dim_seed_mean"] = dim[0].sum.estimate;
    rep.stats["dim_target"] = target;
    rep.stats["marked_mean"] = marked[0].sum.estimate;
    if (marked[0].sum.estimate < 1.0 || fit.n < 2) {
      add_check(rep, "marked_columns_exist", false,
                str_f("mean marked columns %.3g", marked[0].sum.estimate));
      inconclusive = true;
    } else {
      add_check(rep, "dimension_matches_double_profile",
                std::fabs(fit.slope - target) <= band,
                str_f("dim=%.3f target=%.2f band=%.2f", fit.slope, target, band));
    }
    bool cc_ok = true;
    double worst = 0.0;
    for (const auto& p : cross) {
      const double se = se_of(p.sum);
      if (se <= 0.0) continue;
      worst = std::max(worst, std::fabs(p.sum.estimate) / se);
      if (std::fabs(p.sum.estimate) > 5.0 * se) cc_ok = false;
    }
    rep.stats["crosscov_worst_se"] = worst;
    add_check(rep, "half_sheets_uncorrelated", cc_ok,
              str_f("worst |mean|/se = %.3g (cap 5)", worst));
  }
  settle_verdict(rep, inconclusive);
}

}  // namespace

ExperimentReport double_point_scan(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "double_point_scan";
  set_default(c, "seed", "1234");
  set_default(c, "d", "4");
  const int d = static_cast<int>(c.get_int("d", 4));
  if (d < 3 || d > 6) throw std::invalid_argument("double point scan supports d in 3..6");
  set_default(c, "k", "512");
  set_default(c, "scales", d <= 4 ? "8,16,32,64,128" : "4,8,16,32,64");
  set_default(c, "trials", "8");
  set_default(c, "cc_per", "250");
  set_default(c, "cc_pairs", "10");
  set_default(c, "cc_k", "12");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const int k = static_cast<int>(c.get_int("k", 512));
  if (k < 8 || k % 2) throw std::invalid_argument("k must be even and >= 8");
  const auto scales = c.get_int_ladder("scales", "");
  const int cc_per = static_cast<int>(c.get_int("cc_per", 250));
  const int cc_pairs = static_cast<int>(c.get_int("cc_pairs", 10));
  const int cck = static_cast<int>(c.get_int("cc_k", 12));
  if (cck < 4 || cck % 2) throw std::invalid_argument("cc_k must be even and >= 4");
  ExperimentReport rep = scaffold(c);
  const std::int64_t trials = rep.trial_hi - rep.trial_lo;
  const int threads = static_cast<int>(c.get_int("threads", 1));
  const std::uint64_t master = rep.seed;
  const std::int64_t lo = rep.trial_lo;
  // pair detection confronts the difference of two independent t-increments,
  // so the modulus allowance carries a sqrt(2) on top of the zero-scan scale
  const double eps = std::sqrt(2.0) * zero_eps(k);

  // fixed query pairs for the cross-covariance block
  struct CcPair {
    int is, it, iu, iv, c1, c2;
  };
  std::vector<CcPair> qp;
  {
    CounterRng rng(rng_derive(master, kAuxPairsSalt));
    for (int p = 0; p < cc_pairs; ++p) {
      CcPair q;
      q.is = cck + static_cast<int>(rng.below(cck + 1));
      q.it = 1 + static_cast<int>(rng.below(cck));
      q.iu = cck + static_cast<int>(rng.below(cck + 1));
      q.iv = 1 + static_cast<int>(rng.below(cck));
      q.c1 = static_cast<int>(rng.below(d));
      q.c2 = static_cast<int>(rng.below(d));
      qp.push_back(q);
    }
  }

  struct Out {
    double dim = 0.0;
    std::int64_t marked = 0;
    std::vector<std::int64_t> counts;
    std::uint8_t empty = 0;
    std::vector<double> cc_sum, cc_sum2;
  };
  auto one = [&](std::int64_t i) {
    const std::uint64_t tk = rng_derive(master, static_cast<std::uint64_t>(lo + i));
    CounterRng rng(tk);
    const double dtu = 1.0 / k;
    // column over t' in [1/2, 9/2]; the two half-sheets read nodes
    // j in [0, k] (low side, t' = 1/2 + j/k) and j in [3k, 4k] (high side)
    AnchoredSheet sheet(rng, d, 0.0, 0.5, 4 * k, dtu);
    std::vector<double> cloud;
    std::vector<int> order(k + 1);
    std::vector<double> lowc(static_cast<std::size_t>(k + 1) * d);
    for (int col = 0;; ++col) {
      const double s = col * dtu;
      for (int j = 0; j <= k; ++j)
        for (int cc2 = 0; cc2 < d; ++cc2)
          lowc[static_cast<std::size_t>(j) * d + cc2] = sheet.node(j)[cc2];
      for (int j = 0; j <= k; ++j) order[j] = j;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return lowc[static_cast<std::size_t>(a) * d] < lowc[static_cast<std::size_t>(b) * d];
      });
      bool hit = false;
      for (int j = 3 * k; j <= 4 * k && !hit; ++j) {
        const double* hi = sheet.node(j);
        // window on the first coordinate
        int loi = 0, hii = k + 1;
        {
          int a = 0, b = k + 1;
          while (a < b) {
            const int m = (a + b) / 2;
            if (lowc[static_cast<std::size_t>(order[m]) * d] < hi[0] - eps) a = m + 1;
            else b = m;
          }
          loi = a;
        }
        for (int m = loi; m < hii; ++m) {
          const double* lp = lowc.data() + static_cast<std::size_t>(order[m]) * d;
          if (lp[0] > hi[0] + eps) break;
          double dist = 0.0;
          for (int cc2 = 0; cc2 < d; ++cc2) dist += std::fabs(hi[cc2] - lp[cc2]);
          if (dist <= eps) {
            hit = true;
            break;
          }
        }
      }
      if (hit) cloud.push_back(s / 2.0);
      if (col == 2 * k) break;
      sheet.advance(rng, dtu);
    }
    const MarkOut mo = cloud_fit(cloud, scales);
    Out o;
    o.dim = mo.dim;
    o.marked = mo.marked;
    o.counts = mo.counts;
    o.empty = mo.empty;
    // independent small-sheet cross-covariance block
    o.cc_sum.assign(qp.size(), 0.0);
    o.cc_sum2.assign(qp.size(), 0.0);
    const int mid = static_cast<int>(std::llround(2.5 * cck));
    for (int q = 0; q < cc_per; ++q) {
      GridSpec spec{2.0, 4.5, 2 * cck, static_cast<int>(std::llround(4.5 * cck)), d,
                    rng_derive(tk, kAuxCrossSalt + static_cast<std::uint64_t>(q))};
      const SheetSample sh = build_sheet(spec);
      for (std::size_t p = 0; p < qp.size(); ++p) {
        const auto& pr = qp[p];
        const double x1 = sh.at(pr.is, mid - pr.it, pr.c1) - sh.at(pr.is, mid, pr.c1);
        const double x2 = sh.at(pr.iu, mid + pr.iv, pr.c2) - sh.at(pr.iu, mid, pr.c2);
        const double v = x1 * x2;
        o.cc_sum[p] += v;
        o.cc_sum2[p] += v * v;
      }
    }
    return o;
  };
  const auto results = run_trials<Out>(trials, threads, one);
  for (const auto& o : results) {
    add_mean(rep, "dim", 0.0, 1, o.dim, o.dim * o.dim);
    add_mean(rep, "marked", 0.0, 1, static_cast<double>(o.marked),
             static_cast<double>(o.marked) * static_cast<double>(o.marked));
    for (std::size_t si = 0; si < scales.size(); ++si) {
      const double v = static_cast<double>(o.counts[si]);
      add_mean(rep, "count", static_cast<double>(scales[si]), 1, v, v * v);
    }
    for (std::size_t p = 0; p < o.cc_sum.size(); ++p)
      add_mean(rep, "crosscov", static_cast<double>(p), cc_per, o.cc_sum[p], o.cc_sum2[p]);
  }
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// escape_rate_probe

void fin_escape_rate_probe(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  const int d = static_cast<int>(c.get_int("d", 5));
  const int epochs = static_cast<int>(c.get_int("epochs", 40));
  const double rate_lo = c.get_double("rate_lo", 0.004);
  const double rate_hi = c.get_double("rate_hi", 0.01);
  const std::string mode = c.get_str("mode", "point");
  const auto alphas = c.get_ladder("alphas", "1,7");
  rep.policies = {"fresh rescaled path per dyadic epoch",
                  "late-half hit rate classifies transient vs recurrent"};
  const CompactSet1D f = mode == "set" ? CompactSet1D::parse(c.require_str("set"))
                                       : CompactSet1D::parse("1,1");
  bool inconclusive = false;
  if (epochs < 8) {
    add_check(rep, "enough_epochs", false, str_f("%d dyadic epochs (need >= 8)", epochs));
    inconclusive = true;
  }
  for (const double a : alphas) {
    const auto pts = get_series(rep, "hit_a" + fmt_g(a));
    if (static_cast<int>(pts.size()) != epochs) {
      inconclusive = true;
      continue;
    }
    double late_hits = 0.0;
    std::int64_t late_n = 0;
    for (const auto& p : pts)
      if (p.param >= epochs / 2.0) {
        late_hits += p.row.acc;
        late_n += p.row.n;
      }
    const double rate = late_n > 0 ? late_hits / static_cast<double>(late_n) : 0.0;
    rep.stats["rate_late_a" + fmt_g(a)] = rate;
    std::string mc = "inconclusive";
    if (rate <= rate_lo) mc = "transient";
    else if (rate >= rate_hi) mc = "recurrent";
    const EscapeIntegral ei = escape_integral(f, PsiFunction::log_pow(a), d);
    rep.stats["critical_alpha"] = ei.critical_alpha;
    const std::string expect = ei.cls == TailClass::Finite ? "transient" : "recurrent";
    if (mc == "inconclusive") {
      add_check(rep, "alpha_" + fmt_g(a) + "_classified", false,
                str_f("late rate %.4g sits between thresholds [%g, %g]", rate, rate_lo,
                      rate_hi));
      inconclusive = true;
    } else {
      add_check(rep, "alpha_" + fmt_g(a) + "_classified", mc == expect,
                str_f("probe=%s integral-test=%s late-rate=%.4g", mc.c_str(), expect.c_str(),
                      rate));
    }
  }
  settle_verdict(rep, inconclusive);
}

}  // namespace

ExperimentReport escape_rate_probe(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "escape_rate_probe";
  set_default(c, "seed", "1234");
  set_default(c, "mode", "point");
  set_default(c, "d", "5");
  const std::string mode = c.get_str("mode", "point");
  if (mode != "point" && mode != "set")
    throw std::invalid_argument("mode must be point or set");
  const bool setm = mode == "set";
  set_default(c, "alphas", setm ? "0.5,2" : "1,7");
  set_default(c, "epochs", "40");
  set_default(c, "trials", setm ? "640" : "1000");
  set_default(c, "nodes", "64");
  set_default(c, "k", "96");
  if (setm) set_default(c, "set", "1,2");
  set_default(c, "rate_lo", setm ? "0.0008" : "0.002");
  set_default(c, "rate_hi", setm ? "0.002" : "0.004");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const int d = static_cast<int>(c.get_int("d", 5));
  if (d < 3) throw std::invalid_argument("escape probe needs d >= 3");
  if (d > 8) throw std::invalid_argument("d must be <= 8");
  const auto alphas = c.get_ladder("alphas", "");
  const int epochs = static_cast<int>(c.get_int("epochs", 40));
  if (epochs < 1 || epochs > 60) throw std::invalid_argument("epochs must lie in 1..60");
  const int nodes = static_cast<int>(c.get_int("nodes", 64));
  const int k = static_cast<int>(c.get_int("k", 96));
  CompactSet1D f = CompactSet1D::parse(setm ? c.require_str("set") : "1,1");
  if (setm && (f.min_point() < Rational(1) || f.max_point() > Rational(2)))
    throw std::invalid_argument("escape set must lie inside [1,2]");
  ExperimentReport rep = scaffold(c);
  const std::int64_t trials = rep.trial_hi - rep.trial_lo;
  const int threads = static_cast<int>(c.get_int("threads", 1));
  const std::uint64_t master = rep.seed;
  const std::int64_t lo = rep.trial_lo;

  // scaling factor tables phi[alpha][epoch][node]
  const int M = setm ? k : nodes;
  const double du = 1.0 / M;
  std::vector<std::vector<std::vector<double>>> phi(alphas.size());
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const PsiFunction psi = PsiFunction::log_pow(alphas[ai]);
    phi[ai].assign(epochs, std::vector<double>(M + 1, 0.0));
    for (int j = 0; j < epochs; ++j) {
      const double two_j = std::ldexp(1.0, j);
      for (int m = 0; m <= M; ++m) {
        const double u = 1.0 + m * du;
        phi[ai][j][m] = std::sqrt(psi(two_j * u) / u);
      }
    }
  }

  const double a0 = setm ? f.min_point().to_double() : 1.0;
  const double b0 = setm ? f.max_point().to_double() : 1.0;
  const int ns_span = setm ? static_cast<int>(std::llround((b0 - a0) * k)) : 0;
  const auto comps = f.double_components();

  auto one = [&](std::int64_t i) {
    const std::uint64_t rk = rng_derive(master, static_cast<std::uint64_t>(lo + i));
    std::vector<std::uint8_t> hits(alphas.size() * static_cast<std::size_t>(epochs), 0);
    std::vector<double> minvec(M + 1);
    for (int j = 0; j < epochs; ++j) {
      CounterRng rng(rng_derive(rk, static_cast<std::uint64_t>(j)));
      if (!setm) {
        double x[8];
        for (int cc = 0; cc < d; ++cc) x[cc] = rng.normal();
        minvec[0] = l1(x, d);
        const double sd = std::sqrt(du);
        for (int m = 1; m <= M; ++m) {
          for (int cc = 0; cc < d; ++cc) x[cc] += sd * rng.normal();
          minvec[m] = l1(x, d);
        }
      } else {
        std::fill(minvec.begin(), minvec.end(), 1e300);
        AnchoredSheet sheet(rng, d, a0, 1.0, M, du);
        for (int col = 0;; ++col) {
          const double s = a0 + col * du;
          if (contains_d(comps, s, 1e-9))
            for (int m = 0; m <= M; ++m)
              minvec[m] = std::min(minvec[m], l1(sheet.node(m), d));
          if (col == ns_span) break;
          sheet.advance(rng, du);
        }
      }
      for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        for (int m = 0; m <= M; ++m)
          if (minvec[m] * phi[ai][j][m] <= 1.0) {
            hits[ai * epochs + j] = 1;
            break;
          }
      }
    }
    return hits;
  };
  const auto results = run_trials<std::vector<std::uint8_t>>(trials, threads, one);
  for (const auto& hits : results)
    for (std::size_t ai = 0; ai < alphas.size(); ++ai)
      for (int j = 0; j < epochs; ++j)
        add_binom(rep, "hit_a" + fmt_g(alphas[ai]), static_cast<double>(j), 1,
                  hits[ai * epochs + j]);
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// capacity_scan

void fin_capacity_scan(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  const double beta = c.get_double("beta", 1.0);
  rep.policies = {"pairwise descent with certified duality gap per ladder point"};
  const auto caps = get_series(rep, "cap");
  const auto gaps = get_series(rep, "gap");
  const auto energies = get_series(rep, "energy");
  bool inconclusive = caps.empty() || caps.size() != gaps.size() ||
                      caps.size() != energies.size();
  if (!inconclusive) {
    rep.stats["final_capacity"] = caps.back().sum.estimate;
    const double gap_cap = 100.0 * c.get_double("gap_tol", 1e-8);
    bool conv_ok = true;
    double worst_gap = 0.0;
    for (const auto& g : gaps) {
      worst_gap = std::max(worst_gap, g.sum.estimate);
      if (!(g.sum.estimate <= gap_cap)) conv_ok = false;
    }
    add_check(rep, "gaps_certify_convergence", conv_ok,
              str_f("worst duality gap %.3g (cap %.3g)", worst_gap, gap_cap));
    if (!conv_ok) inconclusive = true;  // unconverged solves prove nothing
    if (beta == 1.0) {
      bool mono = true;
      std::string detail;
      for (std::size_t i = 1; i < caps.size(); ++i) {
        const double e_prev = energies[i - 1].sum.estimate;
        const double e_cur = energies[i].sum.estimate;
        const double slack = gaps[i - 1].sum.estimate / (e_prev * e_prev) +
                             gaps[i].sum.estimate / (e_cur * e_cur) + 1e-12;
        if (caps[i].sum.estimate > caps[i - 1].sum.estimate + slack) {
          mono = false;
          detail += str_f("[m=%g rises %.6g -> %.6g]", caps[i].param,
                          caps[i - 1].sum.estimate, caps[i].sum.estimate);
        }
      }
      add_check(rep, "capacity_decreases_with_refinement", mono,
                mono ? "monotone within certificate slack" : detail);
      if (caps.back().param >= 4096.0)
        add_check(rep, "log_divergence_trend", caps.back().sum.estimate < 0.25,
                  str_f("capacity at %g atoms = %.4f (cap 0.25)", caps.back().param,
                        caps.back().sum.estimate));
    }
    if (beta == 0.5 && caps.size() >= 2) {
      double c1024 = -1.0, c4096 = -1.0;
      for (const auto& p : caps) {
        if (p.param == 1024.0) c1024 = p.sum.estimate;
        if (p.param == 4096.0) c4096 = p.sum.estimate;
      }
      if (c1024 > 0.0 && c4096 > 0.0)
        add_check(rep, "refinement_stability", std::fabs(c4096 / c1024 - 1.0) < 0.05,
                  str_f("cap(4096)/cap(1024) - 1 = %.4g", c4096 / c1024 - 1.0));
    }
  }
  settle_verdict(rep, inconclusive);
}

}  // namespace

ExperimentReport capacity_scan(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "capacity_scan";
  set_default(c, "seed", "1234");
  set_default(c, "set", "0,1");
  set_default(c, "beta", "1");
  set_default(c, "atoms_ladder", "32,64,128,256,512,1024,2048,4096");
  set_default(c, "gap_tol", "1e-8");
  set_default(c, "max_iters", "200000");
  set_default(c, "trials", "1");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const CompactSet1D f = CompactSet1D::parse(c.require_str("set"));
  const double beta = c.get_double("beta", 1.0);
  const auto ladder = c.get_int_ladder("atoms_ladder", "");
  CapacityOptions opts;
  opts.gap_tol = c.get_double("gap_tol", 1e-8);
  opts.max_iters = static_cast<int>(c.get_int("max_iters", 200000));
  ExperimentReport rep = scaffold(c);
  const Kernel kern = Kernel::riesz(beta);
  for (const auto m : ladder) {
    const CapacityResult res = set_capacity(f, kern, static_cast<int>(m), opts);
    add_mean(rep, "cap", static_cast<double>(m), 1, res.capacity, res.capacity * res.capacity);
    add_mean(rep, "gap", static_cast<double>(m), 1, res.gap, res.gap * res.gap);
    add_mean(rep, "energy", static_cast<double>(m), 1, res.energy, res.energy * res.energy);
  }
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// dimension_scan

void fin_dimension_scan(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  const CompactSet1D f = CompactSet1D::parse(c.require_str("set"));
  const auto scales = c.get_int_ladder("scales", "");
  rep.policies = {"exact integer cell counts; no floating point in the counts"};
  const DimFit fit = minkowski_dimension(f, scales);
  rep.stats["fit_full"] = fit.fit_full;
  rep.stats["fit_fine"] = fit.fit_fine;
  rep.stats["upper"] = fit.upper;
  rep.stats["lower"] = fit.lower;
  rep.stats["saturated"] = fit.saturated ? 1.0 : 0.0;
  bool inconclusive = false;
  if (c.has("expect")) {
    const double expect = c.get_double("expect", 0.0);
    const double tol = c.get_double("expect_tol", 0.05);
    add_check(rep, "matches_expected_dimension", std::fabs(fit.fit_full - expect) <= tol,
              str_f("fit=%.4f expect=%.4f tol=%.3f", fit.fit_full, expect, tol));
  } else {
    add_check(rep, "fit_bracketed", fit.lower <= fit.upper + 1e-12,
              str_f("lower=%.4f upper=%.4f", fit.lower, fit.upper));
  }
  settle_verdict(rep, inconclusive);
}

}  // namespace

ExperimentReport dimension_scan(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "dimension_scan";
  set_default(c, "seed", "1234");
  set_default(c, "set", "0,1");
  set_default(c, "scales", "16,32,64,128,256,512,1024,2048,4096");
  set_default(c, "trials", "1");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const CompactSet1D f = CompactSet1D::parse(c.require_str("set"));
  const auto scales = c.get_int_ladder("scales", "");
  ExperimentReport rep = scaffold(c);
  for (const auto n : scales) {
    const double v = static_cast<double>(minkowski_content(f, n));
    add_mean(rep, "count", static_cast<double>(n), 1, v, v * v);
  }
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

namespace {

// ---------------------------------------------------------------------------
// kernel_sandwich

const double kSigFit[] = {0.5, 1.0, 2.0};
const double kSigVal[] = {0.7, 1.4};
const double kEpsFit[] = {0.0625, 0.125, 0.25, 0.5};
const double kEpsVal[] = {0.175, 0.35};

std::vector<double> ygrid_fit() {
  std::vector<double> y;
  for (int i = 0; i < 25; ++i) y.push_back(1e-4 * std::pow(2.0 / 1e-4, i / 24.0));
  return y;
}

std::vector<double> ygrid_val() {
  std::vector<double> y;
  for (int i = 0; i < 24; ++i) y.push_back(1e-4 * std::pow(2.0 / 1e-4, (i + 0.5) / 24.0));
  return y;
}

// Independent quadrature of int_a^b min(1, (eps/sqrt(r))^d) dr: the flat part
// below the kink r = eps^2 is exact, the power tail integrates in log space
// where Simpson converges fast enough for a 1e-9 comparison.
double integral_of_kernel(double eps, int d, double a, double b) {
  const double kink = eps * eps;
  double total = 0.0;
  if (a < kink) {
    total += std::min(b, kink) - a;
    a = kink;
  }
  if (a >= b) return total;
  auto g = [&](double z) {
    const double r = std::exp(z);
    return std::pow(eps / std::sqrt(r), d) * r;
  };
  return total + simpson(g, std::log(a), std::log(b), 2048);
}

// int_0^2 line_avg(x + y) dy, Simpson split at the derivative kink.
double integral_of_line_avg(double eps, int d, double x) {
  auto f = [&](double y) { return small_ball_line_avg(eps, d, x + y); };
  const double kink = eps * eps - x;
  if (kink > 0.0 && kink < 2.0)
    return simpson(f, 0.0, kink, 512) + simpson(f, kink, 2.0, 512);
  return simpson(f, 0.0, 2.0, 1024);
}

void fin_kernel_sandwich(ExperimentReport& rep) {
  reset_analysis(rep);
  const ExpConfig c{rep.config};
  const auto ds = c.get_int_ladder("d_list", "3,4,5");
  rep.policies = {"constants fitted on the fit grid, validated on held-out points with 1.5x slack",
                  "ball-probability points with fewer than 25 observed hits excluded from constant fits"};
  bool inconclusive = false;
  for (const auto dl : ds) {
    const int d = static_cast<int>(dl);
    const std::string tag = str_f("_d%d", d);
    // --- MC ball probabilities vs the kernel
    const auto probe = [&](double sig) { return get_series(rep, "ball" + tag + "_s" + fmt_g(sig)); };
    bool upper_ok = true;
    double c_lo = 0.0;
    std::vector<double> fit_ratio_by_eps;
    bool lower_fit_ok = true;
    for (const double sig : kSigFit) {
      const auto pts = probe(sig);
      if (pts.empty()) { inconclusive = true; continue; }
      for (const auto& p : pts) {
        const double fpred = small_ball_kernel(p.param, d, sig * sig);
        if (p.sum.estimate > fpred + 5.0 * se_of(p.sum)) upper_ok = false;
      }
    }
    for (const double sig : kSigVal) {
      const auto pts = probe(sig);
      if (pts.empty()) { inconclusive = true; continue; }
      for (const auto& p : pts) {
        const double fpred = small_ball_kernel(p.param, d, sig * sig);
        if (p.sum.estimate > fpred + 5.0 * se_of(p.sum)) upper_ok = false;
      }
    }
    add_check(rep, "ball_prob_bounded_by_kernel" + tag, upper_ok,
              "MC estimate <= kernel value + 5 se at every grid point");
    // lower constant on fit grid, per-eps stability
    for (const double ep : kEpsFit) {
      double ce = 0.0;
      for (const double sig : kSigFit) {
        const auto pts = probe(sig);
        for (const auto& p : pts) {
          if (p.param != ep) continue;
          const double fpred = small_ball_kernel(p.param, d, sig * sig);
          if (p.row.acc < 25.0) continue;
          if (p.sum.estimate > 0.0) ce = std::max(ce, fpred / p.sum.estimate);
          else lower_fit_ok = false;
        }
      }
      if (ce > 0.0) fit_ratio_by_eps.push_back(ce);
      c_lo = std::max(c_lo, ce);
    }
    if (c_lo <= 0.0) {
      inconclusive = true;
    } else {
      rep.stats["ball_c_lo" + tag] = c_lo;
      bool lower_ok = lower_fit_ok;
      for (const double sig : kSigVal) {
        const auto pts = probe(sig);
        for (const auto& p : pts) {
          const double fpred = small_ball_kernel(p.param, d, sig * sig);
          if (p.row.acc < 25.0) continue;
          if (p.sum.estimate < fpred / (1.5 * c_lo) - 5.0 * se_of(p.sum)) lower_ok = false;
        }
      }
      add_check(rep, "ball_prob_lower_constant" + tag, lower_ok,
                str_f("c_lo=%.3f validated with 1.5x slack", c_lo));
      if (fit_ratio_by_eps.size() >= 2) {
        const double mx = *std::max_element(fit_ratio_by_eps.begin(), fit_ratio_by_eps.end());
        const double mn = *std::min_element(fit_ratio_by_eps.begin(), fit_ratio_by_eps.end());
        rep.stats["ball_c_stability" + tag] = mx / mn;
        add_check(rep, "ball_constant_eps_stable" + tag, mx / mn <= 4.0,
                  str_f("per-eps constant spread %.3f (cap 4)", mx / mn));
      }
    }
    // --- line average vs riesz((d-2)/2), square average vs riesz((d-4)/2)
    const auto yf = ygrid_fit();
    const auto yv = ygrid_val();
    struct AvgSpec {
      const char* name;
      double shift;  // riesz order = (d - shift) / 2
      std::function<double(double, int, double)> avg;
    };
    const AvgSpec specs[] = {
        {"line_avg", 2.0, [](double e, int dd, double y) { return small_ball_line_avg(e, dd, y); }},
        {"square_avg", 4.0,
         [](double e, int dd, double y) { return small_ball_square_avg(e, dd, y); }}};
    for (const auto& spec : specs) {
      const double order = (d - spec.shift) / 2.0;
      double cu = 0.0, clo2 = 0.0;
      for (const double ep : {0.25, 0.0625}) {
        for (const double y : yf) {
          const double u = riesz_kernel(order, y);
          const double val = spec.avg(ep, d, y);
          const double scale = std::pow(ep, d) * u;
          if (scale > 0.0) cu = std::max(cu, val / scale);
          if (y >= ep * ep && val > 0.0) clo2 = std::max(clo2, scale / val);
        }
      }
      bool ok_up = cu > 0.0, ok_lo = clo2 > 0.0;
      for (const double ep : {0.125, 0.03125}) {
        for (const double y : yv) {
          const double u = riesz_kernel(order, y);
          const double val = spec.avg(ep, d, y);
          const double scale = std::pow(ep, d) * u;
          if (val > 1.5 * cu * scale + 1e-12) ok_up = false;
          if (y >= ep * ep && val < scale / (1.5 * clo2) - 1e-12) ok_lo = false;
        }
      }
      rep.stats[std::string(spec.name) + "_c_up" + tag] = cu;
      rep.stats[std::string(spec.name) + "_c_lo" + tag] = clo2;
      add_check(rep, std::string(spec.name) + "_sandwich" + tag, ok_up && ok_lo,
                str_f("c_up=%.3f c_lo=%.3f validated with 1.5x slack", cu, clo2));
    }
    // --- square average dominates half the integrated line average
    bool quad_ok = true;
    double worst_gap = 0.0;
    for (const double ep : {0.25, 0.125, 0.0625}) {
      for (int xi = 0; xi <= 10; ++xi) {
        const double x = xi * 0.1;
        const double lhs = small_ball_square_avg(ep, d, x);
        const double rhs = 0.5 * integral_of_line_avg(ep, d, x);
        worst_gap = std::min(worst_gap, lhs - rhs);
        if (lhs < rhs * (1.0 - 1e-6) - 1e-12) quad_ok = false;
      }
    }
    rep.stats["square_vs_integral_margin" + tag] = worst_gap;
    add_check(rep, "square_avg_dominates_integral" + tag, quad_ok,
              str_f("worst margin %.3g", worst_gap));
    // --- closed-form line average vs direct quadrature
    CounterRng qr(rng_derive(rep.seed, kAuxKernelSalt + static_cast<std::uint64_t>(d)));
    double max_err = 0.0;
    for (int q = 0; q < 100; ++q) {
      const double ep = 0.05 * std::pow(0.9 / 0.05, qr.uniform());
      const double x = 2.0 * qr.uniform() * qr.uniform();
      const double closed = small_ball_line_avg(ep, d, x);
      const double quad = integral_of_kernel(ep, d, x, x + 1.0);
      max_err = std::max(max_err, std::fabs(closed - quad) / std::max(1.0, closed));
    }
    rep.stats["line_avg_quad_err" + tag] = max_err;
    add_check(rep, "line_avg_matches_quadrature" + tag, max_err <= 1e-9,
              str_f("max relative error %.3g (cap 1e-9)", max_err));
  }
  settle_verdict(rep, inconclusive);
}

}  // namespace

ExperimentReport kernel_sandwich(const ExpConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExpConfig c = cfg;
  c.kv["experiment"] = "kernel_sandwich";
  set_default(c, "seed", "1234");
  set_default(c, "d_list", "3,4,5");
  set_default(c, "trials", "400000");
  set_default(c, "trial_offset", "0");
  set_default(c, "threads", "1");
  const auto ds = c.get_int_ladder("d_list", "");
  ExperimentReport rep = scaffold(c);
  const std::int64_t trials = rep.trial_hi - rep.trial_lo;
  const int threads = static_cast<int>(c.get_int("threads", 1));
  const std::uint64_t master = rep.seed;
  const std::int64_t lo = rep.trial_lo;

  struct Point {
    int d;
    double sig, eps;
    std::uint64_t key;
  };
  std::vector<Point> points;
  std::uint64_t p_idx = 0;
  for (const auto dl : ds) {
    std::vector<double> sigs(std::begin(kSigFit), std::end(kSigFit));
    sigs.insert(sigs.end(), std::begin(kSigVal), std::end(kSigVal));
    std::sort(sigs.begin(), sigs.end());
    std::vector<double> epss(std::begin(kEpsFit), std::end(kEpsFit));
    epss.insert(epss.end(), std::begin(kEpsVal), std::end(kEpsVal));
    std::sort(epss.begin(), epss.end());
    for (const double sg : sigs)
      for (const double ep : epss)
        points.push_back({static_cast<int>(dl), sg, ep,
                          rng_derive(master, kAuxKernelSalt + 0x1000 + p_idx++)});
  }

  auto one = [&](std::int64_t i) {
    const std::uint64_t g = static_cast<std::uint64_t>(lo + i);
    std::vector<std::uint8_t> hits(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
      const auto& pt = points[p];
      double s = 0.0;
      for (int cc = 0; cc < pt.d; ++cc)
        s += std::fabs(rng_normal(pt.key, g * 8 + static_cast<std::uint64_t>(cc)));
      hits[p] = pt.sig * s <= pt.eps ? 1 : 0;
    }
    return hits;
  };
  const auto results = run_trials<std::vector<std::uint8_t>>(trials, threads, one);
  for (const auto& hits : results)
    for (std::size_t p = 0; p < points.size(); ++p)
      add_binom(rep, str_f("ball_d%d_s%s", points[p].d, fmt_g(points[p].sig).c_str()),
                points[p].eps, 1, hits[p]);
  sort_rows(rep.rows);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  finalize_report(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// ExpConfig

std::string ExpConfig::get_str(const std::string& key, const std::string& dflt) const {
  const auto it = kv.find(key);
  return it == kv.end() ? dflt : it->second;
}

std::string ExpConfig::require_str(const std::string& key) const {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("missing config key: " + key);
  return it->second;
}

std::int64_t ExpConfig::get_int(const std::string& key, std::int64_t dflt) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  char* end = nullptr;
  const long long v = std::strtoll(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw std::invalid_argument("bad integer for config key " + key + ": " + it->second);
  return v;
}

double ExpConfig::get_double(const std::string& key, double dflt) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0')
    throw std::invalid_argument("bad number for config key " + key + ": " + it->second);
  return v;
}

std::uint64_t ExpConfig::get_u64(const std::string& key, std::uint64_t dflt) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw std::invalid_argument("bad unsigned integer for config key " + key + ": " + it->second);
  return v;
}

std::vector<double> ExpConfig::get_ladder(const std::string& key,
                                          const std::string& dflt) const {
  const std::string raw = get_str(key, dflt);
  if (raw.empty()) throw std::invalid_argument("missing ladder for config key " + key);
  std::vector<double> out;
  for (const auto& t : split_tokens(raw)) {
    const double v = Rational::parse(t).to_double();
    if (!(v > 0.0)) throw std::invalid_argument("ladder entries must be positive: " + key);
    if (!out.empty() && v <= out.back())
      throw std::invalid_argument("ladder must strictly increase: " + key);
    out.push_back(v);
  }
  return out;
}

std::vector<std::int64_t> ExpConfig::get_int_ladder(const std::string& key,
                                                    const std::string& dflt) const {
  const std::string raw = get_str(key, dflt);
  if (raw.empty()) throw std::invalid_argument("missing ladder for config key " + key);
  std::vector<std::int64_t> out;
  for (const auto& t : split_tokens(raw)) {
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0' || v <= 0)
      throw std::invalid_argument("integer ladder entries must be positive: " + key);
    if (!out.empty() && v <= out.back())
      throw std::invalid_argument("ladder must strictly increase: " + key);
    out.push_back(v);
  }
  return out;
}

std::uint64_t ExpConfig::structural_hash() const {
  static const char* kExcluded[] = {"trials", "trial_offset", "threads", "plot", "out"};
  std::uint64_t h = 14695981039346656037ULL;
  auto eat = [&h](const std::string& s) {
    for (const char ch : s) {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : kv) {
    bool skip = false;
    for (const char* ex : kExcluded)
      if (k == ex) skip = true;
    if (skip) continue;
    eat(k);
    eat("=");
    eat(v);
    eat("\n");
  }
  return h;
}

// ---------------------------------------------------------------------------
// dispatch

void finalize_report(ExperimentReport& rep) {
  using Fin = void (*)(ExperimentReport&);
  static const std::map<std::string, Fin> table = {
      {"sheet_diagnostics", fin_sheet_diagnostics},
      {"hit_prob_bm", fin_hit_prob_bm},
      {"hit_prob_two_bm", fin_hit_prob_two_bm},
      {"hit_prob_sheet", fin_hit_prob_sheet},
      {"zero_projection_scan", fin_zero_projection_scan},
      {"good_cell_counts", fin_good_cell_counts},
      {"double_point_scan", fin_double_point_scan},
      {"escape_rate_probe", fin_escape_rate_probe},
      {"capacity_scan", fin_capacity_scan},
      {"dimension_scan", fin_dimension_scan},
      {"kernel_sandwich", fin_kernel_sandwich},
  };
  const auto it = table.find(rep.name);
  if (it == table.end())
    throw std::invalid_argument("unknown experiment in report: " + rep.name);
  it->second(rep);
}

ExperimentReport run_experiment(const ExpConfig& cfg) {
  const std::string name = cfg.require_str("experiment");
  using Runner = ExperimentReport (*)(const ExpConfig&);
  static const std::map<std::string, Runner> table = {
      {"sheet_diagnostics", sheet_diagnostics},
      {"hit_prob_bm", hit_prob_bm},
      {"hit_prob_two_bm", hit_prob_two_bm},
      {"hit_prob_sheet", hit_prob_sheet},
      {"zero_projection_scan", zero_projection_scan},
      {"good_cell_counts", good_cell_counts},
      {"double_point_scan", double_point_scan},
      {"escape_rate_probe", escape_rate_probe},
      {"capacity_scan", capacity_scan},
      {"dimension_scan", dimension_scan},
      {"kernel_sandwich", kernel_sandwich},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown experiment: " + name);
  return it->second(cfg);
}

ExperimentReport merge_reports(const ExperimentReport& a, const ExperimentReport& b) {
  ExperimentReport rep = merge_raw(a, b);
  finalize_report(rep);
  return rep;
}

}  // namespace sheetlab
