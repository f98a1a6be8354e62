#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "sofickit/errors.hpp"

namespace sofickit {

// Exact rational arithmetic on 64-bit numerator/denominator, normalized to
// lowest terms with positive denominator. Intermediates run through __int128;
// a result that does not fit 64 bits throws Overflow. All metric and trace
// computations in the library go through this type; there is no floating
// point anywhere in the core.
class Rational {
public:
  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ - i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Overflow("division by zero rational");
    return from_i128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const { return Rational(-num_, den_); }

  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  Rational abs() const { return num_ < 0 ? Rational(-num_, den_) : *this; }

  // floor(*this * k) for k >= 0; used for perturbation support budgets.
  std::int64_t floor_times(std::int64_t k) const {
    __int128 n = i128(num_) * k;
    __int128 q = n / den_;
    if (n % den_ != 0 && n < 0) --q;
    return to_i64(q);
  }

  // Lowest-terms "p/q" rendering, used verbatim in every file format.
  std::string str() const {
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "p/q" or a bare integer "p".
  static Rational parse(const std::string& s) {
    try {
      auto slash = s.find('/');
      if (slash == std::string::npos) return Rational(std::stoll(s));
      std::int64_t n = std::stoll(s.substr(0, slash));
      std::int64_t d = std::stoll(s.substr(slash + 1));
      return Rational(n, d);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("bad rational literal '" + s + "'");
    }
  }

private:
  static __int128 i128(std::int64_t v) { return static_cast<__int128>(v); }

  static std::int64_t to_i64(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw Overflow("rational out of 64-bit range");
    return static_cast<std::int64_t>(v);
  }

  static Rational from_i128(__int128 n, __int128 d) {
    if (d == 0) throw Overflow("zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    Rational r;
    r.num_ = to_i64(n);
    r.den_ = to_i64(d);
    return r;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) { __int128 t = a % b; a = b; b = t; }
    return a == 0 ? 1 : a;
  }

  void assign(std::int64_t n, std::int64_t d) {
    Rational r = from_i128(i128(n), i128(d));
    num_ = r.num_;
    den_ = r.den_;
  }

  std::int64_t num_;
  std::int64_t den_;
};

inline std::int64_t lcm64(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  __int128 l = static_cast<__int128>(a) / std::gcd(a, b) * b;
  if (l > INT64_MAX) throw Overflow("lcm out of range");
  return static_cast<std::int64_t>(l);
}

}  // namespace sofickit
