#pragma once

// Double-double arithmetic (an unevaluated sum hi + lo of two doubles, about
// 106 bits of significand). Orbit positions are tracked in this type so that
// images of very short intervals and orbits passing close to critical values
// keep their relative precision.

#include <cmath>
#include <string>
#include <string_view>

namespace inducer {

struct dd {
  double hi = 0.0;
  double lo = 0.0;

  constexpr dd() = default;
  constexpr dd(double h) : hi(h), lo(0.0) {}  // NOLINT: implicit by intent
  constexpr dd(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi + lo; }
};

namespace dd_detail {

inline dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

inline dd quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace dd_detail

inline dd operator+(const dd& a, const dd& b) {
  dd s = dd_detail::two_sum(a.hi, b.hi);
  dd t = dd_detail::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = dd_detail::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return dd_detail::quick_two_sum(s.hi, s.lo);
}

inline dd operator-(const dd& a) { return {-a.hi, -a.lo}; }
inline dd operator-(const dd& a, const dd& b) { return a + (-b); }

inline dd operator*(const dd& a, const dd& b) {
  dd p = dd_detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return dd_detail::quick_two_sum(p.hi, p.lo);
}

inline dd operator/(const dd& a, const dd& b) {
  double q1 = a.hi / b.hi;
  dd r = a - b * dd(q1);
  double q2 = r.hi / b.hi;
  r = r - b * dd(q2);
  double q3 = r.hi / b.hi;
  dd q = dd_detail::quick_two_sum(q1, q2);
  return q + dd(q3);
}

inline dd& operator+=(dd& a, const dd& b) { return a = a + b; }
inline dd& operator-=(dd& a, const dd& b) { return a = a - b; }
inline dd& operator*=(dd& a, const dd& b) { return a = a * b; }
inline dd& operator/=(dd& a, const dd& b) { return a = a / b; }

inline bool operator==(const dd& a, const dd& b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(const dd& a, const dd& b) { return !(a == b); }
inline bool operator<(const dd& a, const dd& b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(const dd& a, const dd& b) { return b < a; }
inline bool operator<=(const dd& a, const dd& b) { return !(b < a); }
inline bool operator>=(const dd& a, const dd& b) { return !(a < b); }

inline dd abs(const dd& a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }
inline dd ldexp(const dd& a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }
inline double to_double(const dd& a) { return a.hi + a.lo; }
inline double to_double(double a) { return a; }

dd exp(const dd& a);
dd log(const dd& a);
/// x^p for x >= 0 and a real exponent p.
dd pow(const dd& x, double p);
/// exp(a) - 1 and log(1 + a), accurate for small |a|.
dd expm1(const dd& a);
dd log1p(const dd& a);
dd midpoint(const dd& a, const dd& b);

/// Decimal representation with 32 significant digits; parse_dd inverts it.
std::string to_string(const dd& a);
dd parse_dd(std::string_view text);

}  // namespace inducer
