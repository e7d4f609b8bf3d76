#include "sheetlab/setkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sheetlab/stats.hpp"

namespace sheetlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

CompactSet1D CompactSet1D::parse(const std::string& text) {
  std::vector<Interval> comps;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t semi = text.find(';', pos);
    std::string part = trim(text.substr(pos, semi == std::string::npos ? std::string::npos
                                                                       : semi - pos));
    if (part.empty()) throw std::invalid_argument("empty component in set literal");
    std::size_t comma = part.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("set component needs \"a,b\": " + part);
    Rational a = Rational::parse(trim(part.substr(0, comma)));
    Rational b = Rational::parse(trim(part.substr(comma + 1)));
    if (a > b) throw std::invalid_argument("reversed endpoints in set literal: " + part);
    comps.push_back({a, b});
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  return make(std::move(comps));
}

CompactSet1D CompactSet1D::make(std::vector<Interval> comps) {
  if (comps.empty()) throw std::invalid_argument("empty set");
  for (const auto& c : comps)
    if (c.a > c.b) throw std::invalid_argument("reversed endpoints");
  std::sort(comps.begin(), comps.end(),
            [](const Interval& x, const Interval& y) {
              return x.a < y.a || (x.a == y.a && x.b < y.b);
            });
  std::vector<Interval> merged;
  for (const auto& c : comps) {
    if (!merged.empty() && c.a <= merged.back().b) {
      if (c.b > merged.back().b) merged.back().b = c.b;
    } else {
      merged.push_back(c);
    }
  }
  CompactSet1D out;
  out.comps_ = std::move(merged);
  return out;
}

std::string CompactSet1D::text() const {
  std::string s;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    if (i) s += ';';
    s += comps_[i].a.text() + "," + comps_[i].b.text();
  }
  return s;
}

bool CompactSet1D::has_interval_part() const {
  for (const auto& c : comps_)
    if (!c.is_point()) return true;
  return false;
}

Rational CompactSet1D::total_length() const {
  Rational len(0);
  for (const auto& c : comps_) len = len + (c.b - c.a);
  return len;
}

bool CompactSet1D::contains(const Rational& x) const {
  for (const auto& c : comps_) {
    if (x < c.a) return false;
    if (x <= c.b) return true;
  }
  return false;
}

bool CompactSet1D::contains_set(const CompactSet1D& sub) const {
  std::size_t i = 0;
  for (const auto& e : sub.comps_) {
    while (i < comps_.size() && comps_[i].b < e.a) ++i;
    if (i == comps_.size() || comps_[i].a > e.a || comps_[i].b < e.b) return false;
  }
  return true;
}

CompactSet1D CompactSet1D::clipped(const Rational& lo, const Rational& hi) const {
  if (lo > hi) throw std::invalid_argument("clip window reversed");
  std::vector<Interval> out;
  for (const auto& c : comps_) {
    Rational a = c.a < lo ? lo : c.a;
    Rational b = c.b > hi ? hi : c.b;
    if (a <= b) out.push_back({a, b});
  }
  if (out.empty()) throw std::out_of_range("clip window misses the set");
  return make(std::move(out));
}

std::vector<std::pair<double, double>> CompactSet1D::double_components() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(comps_.size());
  for (const auto& c : comps_) out.emplace_back(c.a.to_double(), c.b.to_double());
  return out;
}

std::int64_t minkowski_content(const CompactSet1D& f, std::int64_t n) {
  if (n <= 0) throw std::domain_error("cell count needs n >= 1");
  // A point x lies in exactly the cell floor(x*n), so component [a,b] meets
  // cells floor(a*n) .. floor(b*n). Components are sorted, so the id ranges
  // are too; count their union.
  std::int64_t total = 0;
  bool have_prev = false;
  std::int64_t prev_hi = 0;
  for (const auto& c : f.components()) {
    std::int64_t lo = c.a.floor_mul(n);
    std::int64_t hi = c.b.floor_mul(n);
    if (have_prev && lo <= prev_hi) lo = prev_hi + 1;
    if (!have_prev || hi > prev_hi) {
      if (lo <= hi) total += hi - lo + 1;
      prev_hi = hi;
      have_prev = true;
    }
  }
  return total;
}

EntropyResult kolmogorov_entropy(const CompactSet1D& f, const Rational& eps,
                                 bool with_witness) {
  if (eps <= Rational(0)) throw std::domain_error("separation must be positive");
  EntropyResult r;
  bool have_cur = false;
  Rational cur(0);
  for (const auto& c : f.components()) {
    Rational start = c.a;
    if (have_cur) {
      Rational need = cur + eps;
      if (need > c.b) continue;
      if (need > start) start = need;
    }
    std::int64_t extra = c.b > start ? ((c.b - start) / eps).floor() : 0;
    if (with_witness) {
      for (std::int64_t k = 0; k <= extra; ++k)
        r.witness.push_back(start + eps * Rational(k));
    }
    r.count += extra + 1;
    cur = start + eps * Rational(extra);
    have_cur = true;
  }
  return r;
}

std::int64_t entropy_count(const std::vector<std::pair<double, double>>& comps,
                           double eps) {
  if (!(eps > 0.0)) throw std::domain_error("separation must be positive");
  std::int64_t count = 0;
  bool have_cur = false;
  double cur = 0.0;
  for (const auto& [a, b] : comps) {
    double start = a;
    if (have_cur) {
      double need = cur + eps;
      if (need > b) continue;
      if (need > start) start = need;
    }
    std::int64_t extra = b > start ? static_cast<std::int64_t>(std::floor((b - start) / eps)) : 0;
    count += extra + 1;
    cur = start + eps * static_cast<double>(extra);
    have_cur = true;
  }
  return count;
}

ContentCheck check_entropy_content(const CompactSet1D& f, std::int64_t n) {
  ContentCheck c;
  c.packing = kolmogorov_entropy(f, Rational(1, n), false).count;
  c.content = minkowski_content(f, n);
  c.ok = c.packing <= c.content && c.content <= 3 * c.packing;
  return c;
}

bool check_entropy_doubling(const CompactSet1D& e, const CompactSet1D& f,
                            const Rational& eps) {
  if (!f.contains_set(e)) throw std::invalid_argument("doubling check needs E inside F");
  std::int64_t ke = kolmogorov_entropy(e, eps, false).count;
  std::int64_t kf = kolmogorov_entropy(f, eps * Rational(2), false).count;
  return ke <= 6 * kf;
}

bool check_entropy_doubling(const CompactSet1D& f, const Rational& eps) {
  return check_entropy_doubling(f, f, eps);
}

namespace {

DimFit fit_counts(std::vector<std::pair<std::int64_t, std::int64_t>> counts) {
  if (counts.size() < 3) throw std::invalid_argument("dimension fit needs >= 3 scales");
  std::sort(counts.begin(), counts.end());
  DimFit fit;
  fit.counts = counts;
  std::vector<double> x, y;
  for (auto& [n, m] : counts) {
    x.push_back(std::log(static_cast<double>(n)));
    y.push_back(std::log(static_cast<double>(std::max<std::int64_t>(m, 1))));
  }
  fit.fit_full = fit_line(x, y).slope;
  std::size_t half = (counts.size() + 1) / 2;
  if (counts.size() - half >= 2) {
    std::vector<double> xf(x.begin() + half, x.end());
    std::vector<double> yf(y.begin() + half, y.end());
    fit.fit_fine = fit_line(xf, yf).slope;
  } else {
    fit.fit_fine = fit.fit_full;
  }
  fit.upper = std::max(fit.fit_full, fit.fit_fine);
  fit.lower = std::min(fit.fit_full, fit.fit_fine);
  fit.saturated = std::all_of(counts.begin(), counts.end(),
                              [&](const auto& p) { return p.second == counts[0].second; });
  return fit;
}

std::vector<std::int64_t> checked_scales(std::vector<std::int64_t> scales) {
  std::sort(scales.begin(), scales.end());
  scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  if (scales.size() < 3) throw std::invalid_argument("dimension fit needs >= 3 scales");
  if (scales.front() < 1) throw std::domain_error("scales must be >= 1");
  return scales;
}

}  // namespace

DimFit minkowski_dimension(const CompactSet1D& f, const std::vector<std::int64_t>& scales) {
  std::vector<std::pair<std::int64_t, std::int64_t>> counts;
  for (std::int64_t n : checked_scales(scales))
    counts.emplace_back(n, minkowski_content(f, n));
  return fit_counts(std::move(counts));
}

DimFit box_dimension(const std::vector<double>& cloud, const std::vector<std::int64_t>& scales) {
  if (cloud.empty()) throw std::invalid_argument("empty point cloud");
  std::vector<std::pair<std::int64_t, std::int64_t>> counts;
  std::vector<std::int64_t> ids;
  ids.reserve(cloud.size());
  for (std::int64_t n : checked_scales(scales)) {
    ids.clear();
    for (double v : cloud)
      ids.push_back(static_cast<std::int64_t>(std::floor(v * static_cast<double>(n))));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    counts.emplace_back(n, static_cast<std::int64_t>(ids.size()));
  }
  return fit_counts(std::move(counts));
}

PackingFit packing_dimension(const std::vector<CompactSet1D>& decomposition,
                             const std::vector<std::int64_t>& scales) {
  if (decomposition.empty()) throw std::invalid_argument("empty decomposition");
  PackingFit out;
  out.estimate = 0.0;
  for (const auto& m : decomposition) {
    out.members.push_back(minkowski_dimension(m, scales));
    out.estimate = std::max(out.estimate, out.members.back().upper);
  }
  return out;
}

double zero_set_gauge(int d, double x) {
  if (d != 2 && d != 3) throw std::domain_error("zero_set_gauge needs d in {2,3}");
  if (!(x > 0.0)) throw std::domain_error("zero_set_gauge needs x > 0");
  const double lp = std::max(std::log(1.0 / x), 1.0);
  return std::pow(lp, -0.5 * (8.0 - d));
}

MeasureFunction MeasureFunction::power(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("power gauge needs alpha > 0");
  MeasureFunction m;
  m.tag_ = Tag::Power;
  m.alpha_ = alpha;
  m.doubling_ = std::pow(2.0, alpha);
  return m;
}

MeasureFunction MeasureFunction::zero_set_gauge(int d) {
  if (d != 2 && d != 3) throw std::invalid_argument("zero-set gauge needs d in {2,3}");
  MeasureFunction m;
  m.tag_ = Tag::ZeroGauge;
  m.d_ = d;
  double worst = 1.0;
  for (double x = 1e-9; x < 0.18; x *= 1.5)
    worst = std::max(worst, sheetlab::zero_set_gauge(d, 2.0 * x) /
                                sheetlab::zero_set_gauge(d, x));
  m.doubling_ = worst;
  return m;
}

MeasureFunction MeasureFunction::table(std::vector<std::pair<double, double>> pts) {
  if (pts.size() < 2) throw std::invalid_argument("gauge table needs >= 2 points");
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].first > 0.0) || !(pts[i].second > 0.0))
      throw std::invalid_argument("gauge table needs positive entries");
    if (i && pts[i].second < pts[i - 1].second)
      throw std::invalid_argument("gauge table must be non-decreasing");
  }
  MeasureFunction m;
  m.tag_ = Tag::Table;
  m.pts_ = std::move(pts);
  double worst = 1.0;
  for (const auto& [x, phi] : m.pts_) {
    const double p2 = m(std::min(2.0 * x, m.pts_.back().first));
    if (phi > 0.0) worst = std::max(worst, p2 / phi);
  }
  m.doubling_ = worst;
  return m;
}

double MeasureFunction::operator()(double x) const {
  switch (tag_) {
    case Tag::Power:
      if (!(x >= 0.0)) throw std::domain_error("gauge needs x >= 0");
      return std::pow(x, alpha_);
    case Tag::ZeroGauge:
      return sheetlab::zero_set_gauge(d_, x);
    case Tag::Table: {
      if (x <= pts_.front().first) return pts_.front().second;
      if (x >= pts_.back().first) return pts_.back().second;
      auto it = std::lower_bound(pts_.begin(), pts_.end(), std::make_pair(x, 0.0));
      auto lo = it - 1;
      const double t = (x - lo->first) / (it->first - lo->first);
      return lo->second + t * (it->second - lo->second);
    }
  }
  return 0.0;
}

std::string MeasureFunction::describe() const {
  switch (tag_) {
    case Tag::Power: return "power(" + std::to_string(alpha_) + ")";
    case Tag::ZeroGauge: return "zero_set_gauge(d=" + std::to_string(d_) + ")";
    case Tag::Table: return "table(" + std::to_string(pts_.size()) + " pts)";
  }
  return "";
}

namespace {

std::int64_t guarded_ceil(double v) {
  double g = std::ceil(v - 1e-9 * std::max(1.0, std::fabs(v)));
  return static_cast<std::int64_t>(std::max(0.0, g));
}

}  // namespace

CoverBound hausdorff_measure_upper(const CompactSet1D& f, const MeasureFunction& phi,
                                   double r) {
  if (!(r > 0.0)) throw std::domain_error("cover radius must be positive");
  CoverBound out;
  double covered_to = -std::numeric_limits<double>::infinity();
  for (const auto& c : f.components()) {
    const double a = c.a.to_double(), b = c.b.to_double();
    if (b <= covered_to) continue;
    const double x = std::max(a, covered_to);
    const std::int64_t n = std::max<std::int64_t>(1, guarded_ceil((b - x) / (2.0 * r)));
    out.balls += n;
    covered_to = x + 2.0 * r * static_cast<double>(n);
  }
  out.bound = static_cast<double>(out.balls) * phi(r);
  return out;
}

CoverBound hausdorff_measure_upper(std::vector<double> cloud, const MeasureFunction& phi,
                                   double r) {
  if (!(r > 0.0)) throw std::domain_error("cover radius must be positive");
  if (cloud.empty()) throw std::invalid_argument("empty point cloud");
  std::sort(cloud.begin(), cloud.end());
  CoverBound out;
  double covered_to = -std::numeric_limits<double>::infinity();
  for (double x : cloud) {
    if (x <= covered_to) continue;
    ++out.balls;
    covered_to = x + 2.0 * r;
  }
  out.bound = static_cast<double>(out.balls) * phi(r);
  return out;
}

PsiFunction PsiFunction::log_pow(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("clock gauge needs alpha > 0");
  PsiFunction p;
  p.tag_ = Tag::LogPow;
  p.alpha_ = alpha;
  p.diverges_ = true;
  return p;
}

PsiFunction PsiFunction::table(std::vector<std::pair<double, double>> pts) {
  if (pts.size() < 2) throw std::invalid_argument("clock table needs >= 2 points");
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].first >= 1.0) || !(pts[i].second > 0.0))
      throw std::invalid_argument("clock table needs x >= 1 and psi > 0");
    if (i && pts[i].second < pts[i - 1].second)
      throw std::invalid_argument("clock table must be non-decreasing");
  }
  PsiFunction p;
  p.tag_ = Tag::Table;
  const auto& a = pts[pts.size() - 2];
  const auto& b = pts[pts.size() - 1];
  p.diverges_ = b.second > a.second;
  p.pts_ = std::move(pts);
  return p;
}

double PsiFunction::operator()(double x) const {
  if (!(x > 0.0)) throw std::domain_error("clock gauge needs x > 0");
  if (tag_ == Tag::LogPow)
    return std::pow(std::max(std::log(x), 1.0), 2.0 / alpha_);
  // Log-linear interpolation, extended by the last segment slope.
  const double lx = std::log(x);
  if (x <= pts_.front().first) return pts_.front().second;
  std::size_t hi = pts_.size() - 1;
  for (std::size_t i = 1; i < pts_.size(); ++i) {
    if (x <= pts_[i].first) { hi = i; break; }
  }
  const auto& p0 = pts_[hi - 1];
  const auto& p1 = pts_[hi];
  const double t = (lx - std::log(p0.first)) / (std::log(p1.first) - std::log(p0.first));
  const double ly = std::log(p0.second) + t * (std::log(p1.second) - std::log(p0.second));
  return std::exp(ly);
}

std::string PsiFunction::describe() const {
  if (tag_ == Tag::LogPow) return "log_pow(alpha=" + std::to_string(alpha_) + ")";
  return "table(" + std::to_string(pts_.size()) + " pts)";
}

EscapeIntegral escape_integral(const CompactSet1D& f, const PsiFunction& psi, int d,
                               double x_max, int nodes) {
  if (d < 3) throw std::domain_error("escape integral needs d >= 3");
  if (!(x_max > 1.0) || nodes < 3) throw std::invalid_argument("bad quadrature window");
  if (!psi.diverges()) throw std::invalid_argument("clock gauge must diverge");
  const auto comps = f.double_components();
  const double half = 0.5 * (d - 2);
  const double umax = std::log(x_max);
  double sum = 0.0;
  double prev = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double u = umax * static_cast<double>(i) / (nodes - 1);
    const double ps = psi(std::exp(u));
    const double k = static_cast<double>(entropy_count(comps, 1.0 / ps));
    const double integrand = std::min(1.0, k / std::pow(ps, half));
    if (i) sum += 0.5 * (integrand + prev) * (umax / (nodes - 1));
    prev = integrand;
  }
  EscapeIntegral out;
  out.value = sum;
  if (psi.has_tail_model()) {
    const double delta = f.has_interval_part() ? 1.0 : 0.0;
    out.critical_alpha = d - 2.0 - 2.0 * delta;
    out.p_exponent = out.critical_alpha / psi.alpha();
    out.cls = out.p_exponent > 1.0 ? TailClass::Finite : TailClass::Infinite;
  } else {
    out.cls = TailClass::Inconclusive;
    out.p_exponent = std::numeric_limits<double>::quiet_NaN();
    out.critical_alpha = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

LocalFiniteness classify_local_finiteness(const std::vector<CompactSet1D>& decomposition,
                                          const PsiFunction& psi, int d) {
  if (decomposition.empty()) throw std::invalid_argument("empty decomposition");
  LocalFiniteness out;
  out.all_finite = true;
  for (const auto& m : decomposition) {
    const auto r = escape_integral(m, psi, d, 1e10, 4001);
    if (r.cls == TailClass::Inconclusive)
      throw std::invalid_argument("member classification needs a tail model");
    out.members.push_back(r.cls);
    if (r.cls != TailClass::Finite) out.all_finite = false;
  }
  return out;
}

}  // namespace sheetlab
