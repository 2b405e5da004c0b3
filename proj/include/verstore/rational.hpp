#ifndef VERSTORE_RATIONAL_HPP
#define VERSTORE_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <string>

#include "verstore/errors.hpp"

namespace verstore {

// Exact rational with 64-bit parts. Comparisons cross-multiply in 128 bits so
// greedy tie behavior never depends on floating point.
struct Rational {
  long long num = 0;
  long long den = 1;  // always > 0

  Rational() = default;
  Rational(long long n, long long d = 1) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw Error("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// Parses "p/q" or a plain decimal ("3", "0.25") exactly.
Rational parse_rational(const std::string& text);

}  // namespace verstore

#endif
