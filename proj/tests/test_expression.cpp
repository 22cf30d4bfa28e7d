#include "doctest.h"
#include "inducer/expression.hpp"

using namespace inducer;

TEST_CASE("parse and evaluate") {
  auto e = Expression::parse("1 - 2*x^2");
  CHECK(e.eval(0.5) == doctest::Approx(0.5));
  CHECK(e.deriv(0.5) == doctest::Approx(-2.0));
  CHECK(e.deriv2(0.3) == doctest::Approx(-4.0));

  auto p = Expression::parse("2*|x|^0.6 - 1");
  CHECK(p.eval(0.25) == doctest::Approx(2 * std::pow(0.25, 0.6) - 1));
  CHECK(p.deriv(0.25) == doctest::Approx(1.2 * std::pow(0.25, -0.4)));

  auto s = Expression::parse("3*(x - 0.5)^3 + |x + 0.25|^1.5 + x + 4");
  CHECK(s.eval(1.0) == doctest::Approx(3 * 0.125 + std::pow(1.25, 1.5) + 5));
}

TEST_CASE("derivatives agree with finite differences") {
  auto e = Expression::parse("-1 + 3.3*|x - 0.1|^2.4 - 0.7*(x + 0.2)^3");
  for (double x : {0.3, 0.55, 0.9}) {
    double h = 1e-5;
    double fd1 = (e.eval(x + h) - e.eval(x - h)) / (2 * h);
    double fd2 = (e.eval(x + h) - 2 * e.eval(x) + e.eval(x - h)) / (h * h);
    CHECK(e.deriv(x) == doctest::Approx(fd1).epsilon(1e-7));
    CHECK(e.deriv2(x) == doctest::Approx(fd2).epsilon(1e-4));
  }
}

TEST_CASE("dd evaluation") {
  auto e = Expression::parse("1 - 2*x^2");
  dd x = dd(1.0) / dd(3.0);
  dd y = e.eval(x);
  dd expect = dd(7.0) / dd(9.0);
  CHECK(std::fabs(to_double(y - expect)) < 1e-31);
}

TEST_CASE("round trip through text") {
  auto e = Expression::parse("1 - 11.294117647058817*|x - 0.5|^2 + 0.1*(x + 1)^2");
  auto back = Expression::parse(e.to_string());
  for (double x : {-0.3, 0.2, 0.77}) CHECK(back.eval(x) == e.eval(x));
}

TEST_CASE("rejects malformed input") {
  CHECK_THROWS_AS(Expression::parse("1 - x^0.5"), ParseError);
  CHECK_THROWS_AS(Expression::parse("2*|x|^-1"), ParseError);
  CHECK_THROWS_AS(Expression::parse("1 + * x"), ParseError);
  CHECK_THROWS_AS(Expression::parse("sin(x)"), ParseError);
}
