#include "inducer/expression.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace inducer {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::vector<Term> parse() {
    std::vector<Term> terms;
    skip();
    double sign = 1.0;
    if (peek('+') || peek('-')) sign = take() == '-' ? -1.0 : 1.0;
    terms.push_back(term(sign));
    while (true) {
      skip();
      if (pos_ >= text_.size()) break;
      if (!(peek('+') || peek('-'))) fail("expected '+' or '-'");
      sign = take() == '-' ? -1.0 : 1.0;
      terms.push_back(term(sign));
    }
    return terms;
  }

 private:
  Term term(double sign) {
    skip();
    Term t;
    double coef = 1.0;
    bool has_number = false;
    if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      coef = number();
      has_number = true;
      skip();
      if (peek('*')) {
        take();
      } else {
        t.kind = Term::Kind::Poly;
        t.coef = sign * coef;
        t.exponent = 0.0;
        return t;
      }
    }
    skip();
    bool absolute = false;
    double center = 0.0;
    if (peek('x')) {
      take();
    } else if (peek('(')) {
      take();
      expect('x');
      center = shift();
      expect(')');
    } else if (peek('|')) {
      take();
      expect('x');
      center = shift();
      expect('|');
      absolute = true;
    } else {
      fail(has_number ? "expected a factor after '*'" : "expected a term");
    }
    double exponent = 1.0;
    skip();
    if (peek('^')) {
      take();
      skip();
      exponent = number();
    }
    if (absolute) {
      if (!(exponent > 0.0)) fail("power-term exponent must be positive");
      t.kind = Term::Kind::Power;
    } else {
      if (exponent < 0.0 || exponent != std::floor(exponent)) fail("polynomial exponent must be a non-negative integer");
      t.kind = Term::Kind::Poly;
    }
    t.coef = sign * coef;
    t.center = center;
    t.exponent = exponent;
    return t;
  }

  // Parses an optional "+ a" / "- a" after x and returns the center c in (x - c).
  double shift() {
    skip();
    if (peek('+') || peek('-')) {
      char s = take();
      skip();
      double v = number();
      return s == '-' ? v : -v;
    }
    return 0.0;
  }

  double number() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' || text_[pos_] == 'e' ||
            text_[pos_] == 'E' ||
            ((text_[pos_] == '-' || text_[pos_] == '+') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    if (start == pos_) fail("expected a number");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) fail("malformed number");
    return v;
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  char take() { return text_[pos_++]; }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    take();
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression \"" + std::string(text_) + "\" at column " + std::to_string(pos_) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }

double Expression::deriv(double x) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double s = x - t.center;
    if (t.kind == Term::Kind::Poly) {
      int k = static_cast<int>(t.exponent);
      if (k >= 1) sum += t.coef * k * expr_detail::ipow(s, k - 1);
    } else {
      sum += t.coef * t.exponent * std::pow(std::fabs(s), t.exponent - 1.0) * sign_of(s);
    }
  }
  return sum;
}

double Expression::deriv2(double x) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double s = x - t.center;
    if (t.kind == Term::Kind::Poly) {
      int k = static_cast<int>(t.exponent);
      if (k >= 2) sum += t.coef * k * (k - 1) * expr_detail::ipow(s, k - 2);
    } else {
      sum += t.coef * t.exponent * (t.exponent - 1.0) * std::pow(std::fabs(s), t.exponent - 2.0);
    }
  }
  return sum;
}

std::string Expression::to_string() const {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    double c = t.coef;
    if (i == 0) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    std::snprintf(buf, sizeof buf, "%.17g", std::fabs(c));
    out += buf;
    if (t.kind == Term::Kind::Poly && t.exponent == 0.0) continue;
    std::string base;
    if (t.center == 0.0) {
      base = "x";
    } else {
      std::snprintf(buf, sizeof buf, "x %c %.17g", t.center > 0 ? '-' : '+', std::fabs(t.center));
      base = buf;
    }
    if (t.kind == Term::Kind::Power) {
      out += "*|" + base + "|";
    } else {
      out += t.center == 0.0 ? "*" + base : "*(" + base + ")";
    }
    std::snprintf(buf, sizeof buf, "^%.17g", t.exponent);
    out += buf;
  }
  return out;
}

}  // namespace inducer
