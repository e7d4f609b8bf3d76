#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sheetlab/report.hpp"

namespace sheetlab {

// Flat key=value experiment configuration. Common keys:
//   experiment    dispatch name (required for run_experiment)
//   d             ambient dimension
//   seed          master seed; per-trial streams derive from (seed, index)
//   trials        trial count of this run
//   trial_offset  global index of the first trial (for split runs)
//   threads       worker threads; results are independent of this value
//   set           CompactSet1D text, e.g. "1,2" or "1,1;13/10,13/10"
// Experiment-specific keys are documented with each runner below.
struct ExpConfig {
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) != 0; }
  std::string get_str(const std::string& key, const std::string& dflt) const;
  std::string require_str(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t dflt) const;
  double get_double(const std::string& key, double dflt) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
  // Comma-separated strictly increasing positive doubles.
  std::vector<double> get_ladder(const std::string& key, const std::string& dflt) const;
  std::vector<std::int64_t> get_int_ladder(const std::string& key,
                                           const std::string& dflt) const;

  // FNV-1a over sorted "key=value" pairs, excluding trial-shape keys
  // (trials, trial_offset, threads, plot, out) so that split runs of the
  // same design share a hash and may merge.
  std::uint64_t structural_hash() const;
};

// Dispatches on kv["experiment"]; the returned report is finalized.
ExperimentReport run_experiment(const ExpConfig& cfg);

// Recomputes stats/checks/verdict from the raw rows (used after merges).
void finalize_report(ExperimentReport& rep);

// Raw pooling + re-finalization. Requires equal name and structural hash and
// disjoint trial ranges; throws std::invalid_argument otherwise.
ExperimentReport merge_reports(const ExperimentReport& a, const ExperimentReport& b);

// Sheet covariance diagnostics: `pairs` random node/coordinate pairs checked
// against min(s,u)*min(t,v)*delta_ij within 5 MC standard errors.
// Keys: d, grid ("32x32"), trials, pairs.
ExperimentReport sheet_diagnostics(const ExpConfig& cfg);

// P{inf_{1<=t<=2} |X(t)|_1 <= r} for BM in R^d with crossing-corrected step
// survival; weighted log-log slope vs r compared to d-2.
// Keys: d (>=3), r_ladder, trials, steps.
ExperimentReport hit_prob_bm(const ExpConfig& cfg);

// Conditional hit probability P(inf|rho Y + X| <= r | inf|X| <= r) over a
// rho ladder, dominated by a fitted multiple of rho^{d-2}.
// Keys: d (>=3), rho_ladder, r (< min rho), trials, steps.
ExperimentReport hit_prob_two_bm(const ExpConfig& cfg);

// P{inf_{s in F} inf_{1<=t<=2} |B(s,t)|_1 <= eps} with the exact entropy
// prediction min(1, eps^{d-2} K_F(eps^2)); fitted-constant sandwich plus a
// slope check against the prediction's own slope. variant=width runs the
// fixed-eps width ladder F=[1,1+w] with target exponent (d-2)/2.
// Keys: d (>=3), set, eps_ladder, k (grid per unit), trials, with_single,
//       variant ("entropy"|"width"), widths, eps_scale.
ExperimentReport hit_prob_sheet(const ExpConfig& cfg);

// Marks s-columns whose slice dips below eps_zero(k) = 2 sqrt(log k / k) on
// t in [1,2]; box-counting dimension of the marked set vs 1 ^ (2 - d/2).
// Keys: d (2 or 3), grid (nodes per side over [0,2]^2), trials (= seeds),
//       scales (box-count ladder).
ExperimentReport zero_projection_scan(const ExpConfig& cfg);

// Per-column counts N_{i,k} of cells of [1,2]^2 whose corner value dips
// below n sqrt(log k / k); reports max_i N_{i,k} normalized by
// (log k)^{(8-d)/2} (d in {2,3}) or k^{1/2} (log k)^{3/2} (d = 1), and
// checks the ladder ratio stays below 2.
// Keys: d (1..3), k_ladder, n_modulus, trials (= seeds).
ExperimentReport good_cell_counts(const ExpConfig& cfg);

// Double-point scan of the two-sheet construction B(s, 5/2 +- t): marks
// columns where some pair t1, t2 in [1,2]^2 has
// |B(s,5/2+t2) - B(s,5/2-t1)|_1 <= eps_zero(k); marked-set box dimension vs
// 1 ^ (3 - d/2), plus a cross-covariance independence check of the two
// constructed sheets.
// Keys: d, k, trials (= seeds), scales, cc_per, cc_pairs, cc_k.
ExperimentReport double_point_scan(const ExpConfig& cfg);

// Dyadic-epoch escape probe: per epoch j the statistic
// min (psi_alpha(2^j u)/u)^{1/2} |B~(u)|_1 over u in [1,2] (and over F's
// columns in set mode) with a fresh scaled path per epoch; late-epoch hit
// rates classify each alpha as transient/recurrent and are compared with the
// symbolic tail classifier.
// Keys: mode ("point"|"set"), d (>=3), alphas, epochs, trials (= reps),
//       nodes, k, set, rate_lo, rate_hi.
ExperimentReport escape_rate_probe(const ExpConfig& cfg);

// Deterministic capacity ladder over atom counts for riesz(beta) on a set;
// checks certificate-slack monotone decrease, and for beta = 1 on [0,1] the
// log-divergence trend (final estimate below 0.25 at 2^12 atoms).
// Keys: set, beta, atoms_ladder, gap_tol, max_iters.
ExperimentReport capacity_scan(const ExpConfig& cfg);

// Exact Minkowski cell counts over a scale ladder with the dimension fit.
// Keys: set, scales.
ExperimentReport dimension_scan(const ExpConfig& cfg);

// Small-ball kernel sandwich battery per d: MC ball probabilities vs the
// kernel bound, line/square averages vs Riesz comparisons with fitted
// constants on disjoint fit/validation grids, closed form vs quadrature.
// Keys: d_list, trials, seed.
ExperimentReport kernel_sandwich(const ExpConfig& cfg);

}  // namespace sheetlab
