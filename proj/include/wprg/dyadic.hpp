#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wprg {

/// Exact rational with a power-of-two denominator: num / 2^exp.
/// Covers every quantity produced by averaging over bit strings at the
/// scales the enumeration caps allow.
struct Dyadic {
  __int128 num = 0;
  int exp = 0;  // denominator 2^exp, exp >= 0

  Dyadic() = default;
  Dyadic(__int128 n, int e) : num(n), exp(e) { normalize(); }

  static Dyadic from_count(unsigned long long count, int denom_bits) {
    return Dyadic(static_cast<__int128>(count), denom_bits);
  }
  static Dyadic zero() { return Dyadic(); }
  static Dyadic one() { return Dyadic(1, 0); }

  void normalize() {
    if (num == 0) {
      exp = 0;
      return;
    }
    while (exp > 0 && (num & 1) == 0) {
      num >>= 1;
      --exp;
    }
  }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    int e = a.exp > b.exp ? a.exp : b.exp;
    __int128 an = a.num << (e - a.exp);
    __int128 bn = b.num << (e - b.exp);
    return Dyadic(an + bn, e);
  }
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) {
    int e = a.exp > b.exp ? a.exp : b.exp;
    return Dyadic((a.num << (e - a.exp)) - (b.num << (e - b.exp)), e);
  }
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    return Dyadic(a.num * b.num, a.exp + b.exp);
  }
  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.num == b.num && a.exp == b.exp;
  }
  friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }

  double to_double() const {
    return static_cast<double>(num) / static_cast<double>(__int128(1) << exp);
  }

  std::string to_string() const {
    bool neg = num < 0;
    unsigned __int128 v = neg ? -num : num;
    std::string digits;
    if (v == 0) digits = "0";
    while (v > 0) {
      digits.insert(digits.begin(), char('0' + int(v % 10)));
      v /= 10;
    }
    std::string out = (neg ? "-" : "") + digits;
    if (exp > 0) out += "/2^" + std::to_string(exp);
    return out;
  }
};

}  // namespace wprg
