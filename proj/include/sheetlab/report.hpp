#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sheetlab/stats.hpp"

namespace sheetlab {

// One (series, parameter) accumulator. Rows are additive so reports over
// disjoint trial ranges merge by summing n/acc/acc2 and re-finalizing.
//   kind == "binom": acc = hit count, estimate = acc/n with a Wilson CI.
//   kind == "mean":  acc = sum, acc2 = sum of squares, normal CI.
struct PointRow {
  std::string key;
  double param = 0.0;
  std::string kind = "binom";
  std::int64_t n = 0;
  double acc = 0.0;
  double acc2 = 0.0;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RowSummary {
  double estimate = 0.0;
  Ci ci;
};

struct ExperimentReport {
  std::string name;
  std::map<std::string, std::string> config;  // full echo, including trial keys
  std::uint64_t seed = 0;
  std::uint64_t structural_hash = 0;          // config hash minus trial-shape keys
  std::int64_t trial_lo = 0;                  // global trial-index range [lo, hi)
  std::int64_t trial_hi = 0;
  std::vector<PointRow> rows;                 // sorted by (key, param)
  std::map<std::string, double> stats;        // slopes, fitted constants, ...
  std::vector<CheckResult> checks;
  std::string verdict = "inconclusive";       // "pass" | "fail" | "inconclusive"
  std::vector<std::string> policies;          // ledger-policy identifiers
  double wall_ms = 0.0;                       // in-memory only, never serialized
};

// Estimate and 95% CI for a row (Wilson for binom, normal for mean rows).
RowSummary summarize_row(const PointRow& row);

// Locates or creates the row for (key, param, kind), keeping rows sorted.
PointRow& upsert_row(std::vector<PointRow>& rows, const std::string& key, double param,
                     const std::string& kind);

void sort_rows(std::vector<PointRow>& rows);

// Pools raw accumulators; requires equal name/structural hash and disjoint
// trial ranges. Stats/checks/verdict are cleared — callers re-finalize.
ExperimentReport merge_raw(const ExperimentReport& a, const ExperimentReport& b);

// CSV body: header line `param,estimate,ci_lo,ci_hi,n_trials` then one line
// per row in (key, param) order, numbers printed with 17 significant digits.
std::string to_csv(const ExperimentReport& rep);

// JSON header sidecar: config echo, hashes, seed, trial range, policies, raw
// rows, stats, checks, verdict. Deterministic key order; wall-clock excluded.
std::string to_json_header(const ExperimentReport& rep);
ExperimentReport from_json_header(const std::string& text);

std::string hash_hex(std::uint64_t h);

}  // namespace sheetlab
