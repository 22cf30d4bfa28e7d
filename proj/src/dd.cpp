#include "inducer/dd.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace inducer {

namespace {

constexpr dd kLn2{6.931471805599452862e-01, 2.319046813846299558e-17};

dd pow10(int k) {
  dd result(1.0);
  dd base(10.0);
  bool negative = k < 0;
  unsigned n = negative ? static_cast<unsigned>(-k) : static_cast<unsigned>(k);
  while (n != 0) {
    if (n & 1U) result *= base;
    base *= base;
    n >>= 1U;
  }
  return negative ? dd(1.0) / result : result;
}

const std::array<dd, 13>& inverse_factorials() {
  static const std::array<dd, 13> table = [] {
    std::array<dd, 13> t{};
    t[0] = dd(1.0);
    for (int i = 1; i < 13; ++i) t[i] = t[i - 1] / dd(static_cast<double>(i));
    return t;
  }();
  return table;
}

}  // namespace

namespace {

// exp by argument halving, used to build the table below
dd exp_reduced(const dd& r0) {
  dd r = ldexp(r0, -9);
  const auto& inv = inverse_factorials();
  dd sum = inv[10];
  for (int i = 9; i >= 1; --i) sum = inv[i] + sum * r;
  sum = sum * r;
  for (int i = 0; i < 9; ++i) sum = ldexp(sum, 1) + sum * sum;
  return sum + dd(1.0);
}

constexpr int kTableHalf = 90;

// e^{j/256} for |j| <= 90
const std::array<dd, 2 * kTableHalf + 1>& exp_table() {
  static const std::array<dd, 2 * kTableHalf + 1> table = [] {
    std::array<dd, 2 * kTableHalf + 1> t{};
    for (int j = -kTableHalf; j <= kTableHalf; ++j) t[j + kTableHalf] = exp_reduced(dd(j / 256.0));
    return t;
  }();
  return table;
}

}  // namespace

dd exp(const dd& a) {
  if (a.hi > 709.0) return dd(std::numeric_limits<double>::infinity());
  if (a.hi < -745.0) return dd(0.0);
  if (a.hi == 0.0 && a.lo == 0.0) return dd(1.0);

  double k = std::nearbyint(a.hi / kLn2.hi);
  dd r = a - kLn2 * dd(k);
  int j = static_cast<int>(std::nearbyint(r.hi * 256.0));
  j = std::max(-kTableHalf, std::min(kTableHalf, j));
  dd s = r - dd(j / 256.0);

  // expm1(s), |s| <= 1/512, by Taylor series in Horner form
  const auto& inv = inverse_factorials();
  dd sum = inv[10];
  for (int i = 9; i >= 1; --i) sum = inv[i] + sum * s;
  sum = sum * s;
  const dd& t = exp_table()[static_cast<std::size_t>(j + kTableHalf)];
  return ldexp(t + t * sum, static_cast<int>(k));
}

namespace {

dd log_newton(const dd& a) {
  dd y(std::log(a.hi));
  // one Newton step doubles the number of correct digits
  return y + a * exp(-y) - dd(1.0);
}

// log(1 + j/128) for j = 0..128
const std::array<dd, 129>& log_table() {
  static const std::array<dd, 129> table = [] {
    std::array<dd, 129> t{};
    for (int j = 0; j <= 128; ++j) t[static_cast<std::size_t>(j)] = log_newton(dd(1.0 + j / 128.0));
    return t;
  }();
  return table;
}

// 1 / (2k + 1)
const std::array<dd, 8>& odd_reciprocals() {
  static const std::array<dd, 8> table = [] {
    std::array<dd, 8> t{};
    for (int k = 0; k < 8; ++k) t[static_cast<std::size_t>(k)] = dd(1.0) / dd(2.0 * k + 1.0);
    return t;
  }();
  return table;
}

}  // namespace

dd log(const dd& a) {
  if (a.hi <= 0.0) return dd(std::numeric_limits<double>::quiet_NaN());
  if (!std::isfinite(a.hi)) return a;
  int e = 0;
  std::frexp(a.hi, &e);
  dd x = ldexp(a, 1 - e);  // [1, 2)
  int j = static_cast<int>(std::nearbyint((x.hi - 1.0) * 128.0));
  j = std::max(0, std::min(128, j));
  const double t = 1.0 + j / 128.0;
  // log(x / t) = 2 atanh(s), s = (x - t) / (x + t), |s| < 1/512
  dd s = (x - dd(t)) / (x + dd(t));
  dd s2 = s * s;
  const auto& odd = odd_reciprocals();
  dd sum = odd[7];
  for (int k = 6; k >= 0; --k) sum = odd[static_cast<std::size_t>(k)] + sum * s2;
  sum = ldexp(sum * s, 1);
  return kLn2 * dd(static_cast<double>(e - 1)) + log_table()[static_cast<std::size_t>(j)] + sum;
}

dd pow(const dd& x, double p) {
  if (x.hi == 0.0) return dd(p > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  if (p == 1.0) return x;
  if (p == 2.0) return x * x;
  return exp(dd(p) * log(x));
}

dd expm1(const dd& a) {
  if (std::fabs(a.hi) > 0.5) return exp(a) - dd(1.0);
  int halvings = 0;
  dd r = a;
  while (std::fabs(r.hi) > 1e-3) {
    r = ldexp(r, -1);
    ++halvings;
  }
  dd term = r;
  dd sum = r;
  for (int i = 2; i <= 12; ++i) {
    term = term * r / dd(static_cast<double>(i));
    sum += term;
    if (std::fabs(term.hi) <= 1e-34 * std::fabs(sum.hi)) break;
  }
  for (int i = 0; i < halvings; ++i) sum = sum * (dd(2.0) + sum);
  return sum;
}

dd log1p(const dd& a) {
  if (a.hi <= -1.0) return dd(std::numeric_limits<double>::quiet_NaN());
  if (std::fabs(a.hi) > 0.5) return log(dd(1.0) + a);
  if (a.hi == 0.0) return a;
  dd y(std::log1p(a.hi));
  dd e = expm1(y);
  y = y + (a - e) / (dd(1.0) + e);
  return y;
}

dd midpoint(const dd& a, const dd& b) { return ldexp(a + b, -1); }

std::string to_string(const dd& a) {
  if (std::isnan(a.hi)) return "nan";
  if (std::isinf(a.hi)) return a.hi > 0 ? "inf" : "-inf";
  if (a.hi == 0.0) return "0";

  std::string out;
  dd v = a;
  if (v.hi < 0.0) {
    out.push_back('-');
    v = -v;
  }
  int e10 = static_cast<int>(std::floor(std::log10(v.hi)));
  dd m = v / pow10(e10);
  if (m.hi >= 10.0) {
    m /= dd(10.0);
    ++e10;
  } else if (m.hi < 1.0) {
    m *= dd(10.0);
    --e10;
  }

  constexpr int kDigits = 32;
  std::string digits;
  for (int i = 0; i < kDigits; ++i) {
    int d = static_cast<int>(std::floor(m.hi));
    if (d < 0) d = 0;
    if (d > 9) d = 9;
    m = (m - dd(static_cast<double>(d))) * dd(10.0);
    if (m.hi < 0.0) {
      // borrow from the previous digit when the residual went negative
      --d;
      m += dd(10.0);
    }
    digits.push_back(static_cast<char>('0' + d));
  }
  out.push_back(digits[0]);
  out.push_back('.');
  out.append(digits, 1, std::string::npos);
  char buf[16];
  std::snprintf(buf, sizeof buf, "e%+d", e10);
  out += buf;
  return out;
}

dd parse_dd(std::string_view text) {
  std::size_t i = 0;
  auto fail = [&] { throw std::invalid_argument("malformed number: " + std::string(text)); };
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';

  dd mantissa(0.0);
  int exponent = 0;
  bool any = false;
  bool after_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.') {
      if (after_point) fail();
      after_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      mantissa = mantissa * dd(10.0) + dd(static_cast<double>(c - '0'));
      if (after_point) --exponent;
      any = true;
    } else {
      break;
    }
  }
  if (!any) fail();
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    int sign = 1;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) sign = text[i++] == '-' ? -1 : 1;
    int e = 0;
    bool digits = false;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      e = e * 10 + (text[i] - '0');
      digits = true;
    }
    if (!digits) fail();
    exponent += sign * e;
  }
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i != text.size()) fail();
  dd v = exponent == 0 ? mantissa : mantissa * pow10(exponent);
  return negative ? -v : v;
}

}  // namespace inducer
