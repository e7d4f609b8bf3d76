#pragma once

#include <cmath>
#include <cstdint>

namespace sheetlab {

// Counter-based randomness: every variate is a pure function of a 64-bit key
// and a 64-bit counter, so results do not depend on evaluation order or on
// how work is split across threads.

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kRngGamma = 0x9e3779b97f4a7c15ULL;

// n-th word of the stream identified by `key`.
inline std::uint64_t rng_word(std::uint64_t key, std::uint64_t n) {
  return mix64(key + (n + 1) * kRngGamma);
}

// Derive an independent stream key (used to split master seed -> trial ->
// purpose without correlation between streams).
inline std::uint64_t rng_derive(std::uint64_t key, std::uint64_t salt) {
  return mix64(mix64(key ^ 0x6a09e667f3bcc909ULL) + (salt + 1) * kRngGamma);
}

// Uniform on (0,1), strictly inside the interval.
inline double rng_uniform(std::uint64_t key, std::uint64_t n) {
  return (static_cast<double>(rng_word(key, n) >> 11) + 0.5) * 0x1p-53;
}

// Inverse standard normal CDF (Wichura's rational approximations, accurate to
// about 1e-15 over (0,1)).
double normal_quantile(double p);

inline double rng_normal(std::uint64_t key, std::uint64_t n) {
  return normal_quantile(rng_uniform(key, n));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

// Convenience wrapper: a stream handle with sequential consumption for code
// that wants generator-style access while staying schedule-independent.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key), n_(0) {}
  double uniform() { return rng_uniform(key_, n_++); }
  double normal() { return rng_normal(key_, n_++); }
  std::uint64_t word() { return rng_word(key_, n_++); }
  // Uniform integer in [0, m) by rejection-free scaling (m << 2^64).
  std::uint64_t below(std::uint64_t m) { return word() % m; }

 private:
  std::uint64_t key_;
  std::uint64_t n_;
};

}  // namespace sheetlab
