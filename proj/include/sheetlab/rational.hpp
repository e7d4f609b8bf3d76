#pragma once

#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sheetlab {

// Exact rational arithmetic on int64 numerator/denominator. Set endpoints,
// grid scales and separation thresholds all fit comfortably; any intermediate
// that would leave the int64 range throws instead of silently wrapping.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // Accepts "3", "-7/2" and plain decimals like "1.25".
  static Rational parse(const std::string& s);
  std::string text() const;

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(checked((__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_),
                    checked((__int128)a.den_ * b.den_), 0);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(checked((__int128)a.num_ * b.den_ - (__int128)b.num_ * a.den_),
                    checked((__int128)a.den_ * b.den_), 0);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(checked((__int128)a.num_ * b.num_),
                    checked((__int128)a.den_ * b.den_), 0);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return Rational(checked((__int128)a.num_ * b.den_),
                    checked((__int128)a.den_ * b.num_), 0);
  }
  Rational operator-() const { return Rational(-num_, den_); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return (__int128)a.num_ * b.den_ < (__int128)b.num_ * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return (__int128)a.num_ * b.den_ <= (__int128)b.num_ * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

  // floor(this), exact.
  std::int64_t floor() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }

  // floor(this * n), exact for any int64 n.
  std::int64_t floor_mul(std::int64_t n) const {
    __int128 p = (__int128)num_ * n;
    __int128 q = p / den_;
    if (p % den_ != 0 && p < 0) --q;
    return checked(q);
  }

 private:
  // Internal ctor from possibly wide values (tag disambiguates overloads).
  Rational(std::int64_t n, std::int64_t d, int) : num_(n), den_(d) { normalize(); }

  static std::int64_t checked(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN)
      throw std::overflow_error("rational overflow");
    return static_cast<std::int64_t>(v);
  }

  void normalize() {
    if (den_ == 0) throw std::domain_error("rational with zero denominator");
    if (den_ < 0) { num_ = -num_; den_ = -den_; }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) { num_ /= g; den_ /= g; }
    if (num_ == 0) den_ = 1;
  }

  std::int64_t num_;
  std::int64_t den_;
};

inline Rational Rational::parse(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  auto parse_int = [](const std::string& t) -> std::int64_t {
    if (t.empty()) throw std::invalid_argument("bad rational literal");
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(t, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad rational literal: " + t);
    }
    if (pos != t.size()) throw std::invalid_argument("bad rational literal: " + t);
    return v;
  };
  if (slash != std::string::npos) {
    return Rational(parse_int(s.substr(0, slash)), parse_int(s.substr(slash + 1)));
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(parse_int(s));
  std::string head = s.substr(0, dot), frac = s.substr(dot + 1);
  if (frac.empty() || frac.size() > 17)
    throw std::invalid_argument("bad decimal literal: " + s);
  bool neg = !head.empty() && head[0] == '-';
  std::int64_t ip = head.empty() || head == "-" ? 0 : std::llabs(parse_int(head));
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) {
    if (frac[i] < '0' || frac[i] > '9')
      throw std::invalid_argument("bad decimal literal: " + s);
    den *= 10;
  }
  std::int64_t fp = frac.empty() ? 0 : parse_int(frac);
  __int128 num = (__int128)ip * den + fp;
  if (neg) num = -num;
  return Rational(checked(num), den, 0);
}

inline std::string Rational::text() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace sheetlab
