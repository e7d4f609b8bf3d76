#include "sheetlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "nlohmann/json.hpp"

namespace sheetlab {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool row_less(const PointRow& a, const PointRow& b) {
  if (a.key != b.key) return a.key < b.key;
  return a.param < b.param;
}

}  // namespace

RowSummary summarize_row(const PointRow& row) {
  RowSummary s;
  if (row.n <= 0) return s;
  const double n = static_cast<double>(row.n);
  if (row.kind == "binom") {
    s.ci = wilson_ci(static_cast<std::int64_t>(std::llround(row.acc)), row.n);
    s.estimate = row.acc / n;
  } else {
    s.estimate = row.acc / n;
    double half = 0.0;
    if (row.n >= 2) {
      const double var = std::max(0.0, (row.acc2 - row.acc * row.acc / n) / (n - 1.0));
      half = kZ975 * std::sqrt(var / n);
    }
    s.ci = {s.estimate, s.estimate - half, s.estimate + half};
  }
  return s;
}

PointRow& upsert_row(std::vector<PointRow>& rows, const std::string& key, double param,
                     const std::string& kind) {
  for (auto& r : rows) {
    if (r.key == key && r.param == param) {
      if (r.kind != kind) throw std::invalid_argument("row kind mismatch for " + key);
      return r;
    }
  }
  PointRow r;
  r.key = key;
  r.param = param;
  r.kind = kind;
  rows.push_back(std::move(r));
  return rows.back();
}

void sort_rows(std::vector<PointRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), row_less);
}

ExperimentReport merge_raw(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.name != b.name) throw std::invalid_argument("merge refused: experiment name mismatch");
  if (a.structural_hash != b.structural_hash)
    throw std::invalid_argument("merge refused: config hash mismatch");
  const bool disjoint = a.trial_hi <= b.trial_lo || b.trial_hi <= a.trial_lo;
  if (!disjoint) throw std::invalid_argument("merge refused: overlapping trial ranges");

  ExperimentReport out;
  out.name = a.name;
  out.config = a.config;
  out.seed = a.seed;
  out.structural_hash = a.structural_hash;
  out.trial_lo = std::min(a.trial_lo, b.trial_lo);
  out.trial_hi = std::max(a.trial_hi, b.trial_hi);
  out.policies = a.policies;
  out.rows = a.rows;
  for (const auto& r : b.rows) {
    auto& dst = upsert_row(out.rows, r.key, r.param, r.kind);
    dst.n += r.n;
    dst.acc += r.acc;
    dst.acc2 += r.acc2;
  }
  sort_rows(out.rows);
  return out;
}

std::string to_csv(const ExperimentReport& rep) {
  std::string out = "param,estimate,ci_lo,ci_hi,n_trials\n";
  for (const auto& r : rep.rows) {
    const auto s = summarize_row(r);
    out += fmt17(r.param);
    out += ',';
    out += fmt17(s.estimate);
    out += ',';
    out += fmt17(s.ci.lo);
    out += ',';
    out += fmt17(s.ci.hi);
    out += ',';
    out += std::to_string(r.n);
    out += '\n';
  }
  return out;
}

std::string to_json_header(const ExperimentReport& rep) {
  nlohmann::ordered_json j;
  j["experiment"] = rep.name;
  j["config"] = rep.config;
  j["config_hash"] = hash_hex(rep.structural_hash);
  j["seed"] = rep.seed;
  j["trial_range"] = {rep.trial_lo, rep.trial_hi};
  j["policies"] = rep.policies;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : rep.rows) {
    nlohmann::ordered_json jr;
    jr["key"] = r.key;
    jr["param"] = r.param;
    jr["kind"] = r.kind;
    jr["n"] = r.n;
    jr["acc"] = r.acc;
    jr["acc2"] = r.acc2;
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);
  j["stats"] = rep.stats;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : rep.checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["detail"] = c.detail;
    checks.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks);
  j["verdict"] = rep.verdict;
  return j.dump(2) + "\n";
}

ExperimentReport from_json_header(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentReport rep;
  rep.name = j.at("experiment").get<std::string>();
  rep.config = j.at("config").get<std::map<std::string, std::string>>();
  rep.structural_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
  rep.seed = j.at("seed").get<std::uint64_t>();
  rep.trial_lo = j.at("trial_range").at(0).get<std::int64_t>();
  rep.trial_hi = j.at("trial_range").at(1).get<std::int64_t>();
  rep.policies = j.at("policies").get<std::vector<std::string>>();
  for (const auto& jr : j.at("rows")) {
    PointRow r;
    r.key = jr.at("key").get<std::string>();
    r.param = jr.at("param").get<double>();
    r.kind = jr.at("kind").get<std::string>();
    r.n = jr.at("n").get<std::int64_t>();
    r.acc = jr.at("acc").get<double>();
    r.acc2 = jr.at("acc2").get<double>();
    rep.rows.push_back(std::move(r));
  }
  rep.stats = j.at("stats").get<std::map<std::string, double>>();
  for (const auto& jc : j.at("checks")) {
    CheckResult c;
    c.name = jc.at("name").get<std::string>();
    c.pass = jc.at("pass").get<bool>();
    c.detail = jc.at("detail").get<std::string>();
    rep.checks.push_back(std::move(c));
  }
  rep.verdict = j.at("verdict").get<std::string>();
  return rep;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sheetlab
