#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sheetlab/rational.hpp"

namespace sheetlab {

// Closed subsets of the line kept as sorted disjoint closed intervals with
// exact rational endpoints (a == b encodes a point). All cell/packing counts
// below are computed in integer arithmetic; no floating point is involved in
// any membership or boundary decision.
struct Interval {
  Rational a, b;
  bool is_point() const { return a == b; }
};

class CompactSet1D {
 public:
  // Text form: semicolon-separated "a,b" pairs, e.g. "1,3/2;2,2".
  static CompactSet1D parse(const std::string& text);
  static CompactSet1D make(std::vector<Interval> comps);

  std::string text() const;
  const std::vector<Interval>& components() const { return comps_; }
  std::size_t n_components() const { return comps_.size(); }
  bool has_interval_part() const;
  Rational min_point() const { return comps_.front().a; }
  Rational max_point() const { return comps_.back().b; }
  Rational total_length() const;
  bool contains(const Rational& x) const;
  bool contains_set(const CompactSet1D& sub) const;
  // Intersection with [lo, hi]; throws std::out_of_range when empty.
  CompactSet1D clipped(const Rational& lo, const Rational& hi) const;
  // Endpoint pairs as doubles, for float-threshold scan codepaths.
  std::vector<std::pair<double, double>> double_components() const;

 private:
  std::vector<Interval> comps_;
};

// Number of half-open grid cells [i/n, (i+1)/n) that meet the set. Exact.
std::int64_t minkowski_content(const CompactSet1D& f, std::int64_t n);

// Maximum cardinality of an eps-separated subset (greedy left-to-right scan,
// which is optimal on the line). Witness points are eps-separated members.
struct EntropyResult {
  std::int64_t count = 0;
  std::vector<Rational> witness;
};
EntropyResult kolmogorov_entropy(const CompactSet1D& f, const Rational& eps,
                                 bool with_witness = true);

// Float-threshold packing count for scan loops that sweep many eps values.
std::int64_t entropy_count(const std::vector<std::pair<double, double>>& comps,
                           double eps);

// Exact sandwich K(1/n) <= M_n <= 3 K(1/n).
struct ContentCheck {
  std::int64_t packing = 0;
  std::int64_t content = 0;
  bool ok = false;
};
ContentCheck check_entropy_content(const CompactSet1D& f, std::int64_t n);

// Exact subset comparison K_E(eps) <= 6 K_F(2 eps); requires E subset of F.
bool check_entropy_doubling(const CompactSet1D& e, const CompactSet1D& f,
                            const Rational& eps);
// Same check with E = F.
bool check_entropy_doubling(const CompactSet1D& f, const Rational& eps);

// Log-log slope fits of cell counts across a scale ladder. `upper`/`lower`
// bracket the estimate with the full-ladder fit and the fine-scale-half fit;
// the true asymptotic limsup/liminf are out of reach at any finite ladder.
struct DimFit {
  double upper = 0.0;
  double lower = 0.0;
  double fit_full = 0.0;
  double fit_fine = 0.0;
  bool saturated = false;  // all counts equal (finite sets at fine scales)
  std::vector<std::pair<std::int64_t, std::int64_t>> counts;  // (n, M_n)
};
DimFit minkowski_dimension(const CompactSet1D& f, const std::vector<std::int64_t>& scales);
// Same fit for a sampled point cloud (cell ids via floor(x*n) in doubles).
DimFit box_dimension(const std::vector<double>& cloud, const std::vector<std::int64_t>& scales);

// Supremum of member upper estimates over a finite closed decomposition.
struct PackingFit {
  double estimate = 0.0;
  std::vector<DimFit> members;
};
PackingFit packing_dimension(const std::vector<CompactSet1D>& decomposition,
                             const std::vector<std::int64_t>& scales);

// Gauge functions used in covering sums: plain powers, the logarithmic gauge
// attached to slice zero sets, or a user table.
class MeasureFunction {
 public:
  static MeasureFunction power(double alpha);
  static MeasureFunction zero_set_gauge(int d);  // [log_+(1/x)]^{-(8-d)/2}, d in {2,3}
  static MeasureFunction table(std::vector<std::pair<double, double>> pts);
  double operator()(double x) const;
  double doubling_constant() const { return doubling_; }
  std::string describe() const;

 private:
  enum class Tag { Power, ZeroGauge, Table } tag_ = Tag::Power;
  double alpha_ = 1.0;
  int d_ = 2;
  std::vector<std::pair<double, double>> pts_;
  double doubling_ = 2.0;
};

// The zero-set gauge evaluated directly. log_+(y) := max(log y, 1).
double zero_set_gauge(int d, double x);

// Greedy covering of the set by closed balls of radius exactly r; returns the
// ball count and the covering sum `balls * phi(r)`. Upper bound only.
struct CoverBound {
  double bound = 0.0;
  std::int64_t balls = 0;
};
CoverBound hausdorff_measure_upper(const CompactSet1D& f, const MeasureFunction& phi,
                                   double r);
CoverBound hausdorff_measure_upper(std::vector<double> cloud, const MeasureFunction& phi,
                                   double r);

// Clock gauges for escape integrals: psi(x) = [log_+ x]^{2/alpha} or a user
// table (log-linear interpolation, extended by the last slope).
class PsiFunction {
 public:
  static PsiFunction log_pow(double alpha);
  static PsiFunction table(std::vector<std::pair<double, double>> pts);
  double operator()(double x) const;
  bool diverges() const { return diverges_; }
  bool has_tail_model() const { return tag_ == Tag::LogPow; }
  double alpha() const { return alpha_; }
  std::string describe() const;

 private:
  enum class Tag { LogPow, Table } tag_ = Tag::LogPow;
  double alpha_ = 1.0;
  std::vector<std::pair<double, double>> pts_;
  bool diverges_ = true;
};

enum class TailClass { Finite, Infinite, Inconclusive };

// Escape test integral: int_1^inf [K_F(1/psi(x)) / psi(x)^{(d-2)/2} ^ 1] dx/x,
// reported as a truncated quadrature value plus a symbolic tail
// classification (exact for the log_pow family: the class flips at
// alpha = d - 2 - 2*delta, delta = 1 for sets with interval part, else 0).
struct EscapeIntegral {
  double value = 0.0;
  TailClass cls = TailClass::Inconclusive;
  double p_exponent = 0.0;
  double critical_alpha = 0.0;
};
EscapeIntegral escape_integral(const CompactSet1D& f, const PsiFunction& psi, int d,
                               double x_max = 1e12, int nodes = 10001);

// All-members-finite classification over a finite closed decomposition.
// Throws std::invalid_argument if any member comes back Inconclusive (a tail
// model is required to classify).
struct LocalFiniteness {
  std::vector<TailClass> members;
  bool all_finite = false;
};
LocalFiniteness classify_local_finiteness(const std::vector<CompactSet1D>& decomposition,
                                          const PsiFunction& psi, int d);

}  // namespace sheetlab
