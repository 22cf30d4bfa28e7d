#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "inducer/dd.hpp"

namespace inducer {

/// A single additive term of a branch formula.
///   Poly:  coef * (x - center)^k,   k a non-negative integer
///   Power: coef * |x - center|^p,  p > 0 real
struct Term {
  enum class Kind { Poly, Power };
  Kind kind = Kind::Poly;
  double coef = 0.0;
  double center = 0.0;
  double exponent = 0.0;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sum of terms. Derivatives are exact because the grammar is closed under
/// differentiation on any interval not containing a power-term center.
class Expression {
 public:
  Expression() = default;
  explicit Expression(std::vector<Term> terms) : terms_(std::move(terms)) {}

  /// Grammar (whitespace insensitive):
  ///   expr   := ['+'|'-'] term (('+'|'-') term)*
  ///   term   := number ['*' factor] | factor
  ///   factor := base ['^' number]
  ///   base   := 'x' | '(' 'x' ('+'|'-') number ')' | '|' 'x' [('+'|'-') number] '|'
  /// Parenthesised and bare bases take integer exponents; |...| bases take any
  /// positive real exponent.
  static Expression parse(std::string_view text);

  template <typename T>
  T eval(const T& x) const;

  double deriv(double x) const;
  double deriv2(double x) const;

  const std::vector<Term>& terms() const { return terms_; }
  std::string to_string() const;

 private:
  std::vector<Term> terms_;
};

namespace expr_detail {

template <typename T>
T ipow(T base, int k) {
  T result(1.0);
  while (k > 0) {
    if (k & 1) result = result * base;
    base = base * base;
    k >>= 1;
  }
  return result;
}

inline double abs_value(double v) { return std::fabs(v); }
inline dd abs_value(const dd& v) { return abs(v); }
inline double power(double v, double p) { return std::pow(v, p); }
inline dd power(const dd& v, double p) { return pow(v, p); }

}  // namespace expr_detail

template <typename T>
T Expression::eval(const T& x) const {
  T sum(0.0);
  for (const auto& t : terms_) {
    T shifted = x - T(t.center);
    if (t.kind == Term::Kind::Poly) {
      sum = sum + T(t.coef) * expr_detail::ipow(shifted, static_cast<int>(t.exponent));
    } else {
      sum = sum + T(t.coef) * expr_detail::power(expr_detail::abs_value(shifted), t.exponent);
    }
  }
  return sum;
}

}  // namespace inducer
