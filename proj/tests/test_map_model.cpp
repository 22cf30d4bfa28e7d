#include <cmath>

#include "doctest.h"
#include "inducer/map_model.hpp"

using namespace inducer;

TEST_CASE("chebyshev evaluation") {
  auto f = builtin::chebyshev();
  CHECK(f.eval(0.5) == doctest::Approx(0.5));
  CHECK(f.eval(0.0, Side::left) == 1.0);
  CHECK(f.eval(0.0, Side::right) == 1.0);
  CHECK_THROWS_AS(f.eval(0.0), AmbiguityError);
  CHECK_THROWS_AS(f.eval(1.5), DomainError);
  CHECK(f.deriv(0.25) == doctest::Approx(-1.0));
  CHECK(f.deriv2(-0.7) == doctest::Approx(-4.0));
  CHECK_THROWS_AS(f.deriv(0.0), SingularPointError);
  CHECK(f.ell() == 2.0);
  CHECK(f.ell_star() == 0.0);
}

TEST_CASE("lorenz evaluation") {
  auto f = builtin::lorenz();
  CHECK(f.eval(0.0, Side::right) == -1.0);
  CHECK(f.eval(0.0, Side::left) == 1.0);
  CHECK(f.deriv(1.0) == doctest::Approx(1.2));
  CHECK(f.deriv(-1.0) == doctest::Approx(1.2));
  CHECK(f.eval(-0.3) == doctest::Approx(-f.eval(0.3)));
  CHECK(f.ell_star() == 0.6);
  CHECK(f.criticals().size() == 2);
  CHECK_FALSE(f.criticals()[0].is_critical());
}

TEST_CASE("derivatives agree with finite differences") {
  for (const auto& f : {builtin::chebyshev(), builtin::lorenz(), builtin::combined()}) {
    for (const auto& b : f.branches()) {
      for (int k = 1; k < 10; ++k) {
        double x = b.lo + (b.hi - b.lo) * k / 10.0;
        for (double h : {1e-5, 1e-6}) {
          double fd = (f.eval(x + h) - f.eval(x - h)) / (2 * h);
          CHECK(f.deriv(x) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("branches are monotone on sampled triples") {
  for (const auto& f : {builtin::chebyshev(), builtin::lorenz(), builtin::combined(), builtin::baseline(3)}) {
    for (const auto& b : f.branches()) {
      double a = f.eval(b.lo + 0.1 * (b.hi - b.lo));
      double m = f.eval(b.lo + 0.5 * (b.hi - b.lo));
      double z = f.eval(b.lo + 0.9 * (b.hi - b.lo));
      CHECK(((a < m && m < z) || (a > m && m > z)));
    }
  }
}

TEST_CASE("nondegeneracy constants") {
  auto cheb = builtin::chebyshev();
  for (const auto& c : cheb.criticals()) {
    auto r = cheb.nondegeneracy_check(c, 0.5, 100);
    CHECK(r.value_constant == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.constant == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.pass);
  }
  auto lor = builtin::lorenz();
  for (const auto& c : lor.criticals()) {
    auto r = lor.nondegeneracy_check(c, 0.5, 100);
    CHECK(r.value_constant == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.deriv_constant == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(r.deriv2_constant == doctest::Approx(1.0 / 0.48).epsilon(1e-12));
  }
  for (const auto& f : {builtin::chebyshev(), builtin::lorenz(), builtin::combined()}) {
    for (const auto& c : f.criticals()) {
      for (double radius : {1e-2, 1e-3, 1e-4}) CHECK(f.nondegeneracy_check(c, radius, 50).pass);
    }
  }
}

TEST_CASE("wrong order diverges as the radius shrinks") {
  auto f = builtin::chebyshev();
  CriticalPoint c = f.criticals()[1];
  c.order = 2.1;
  double prev = 0.0;
  for (double radius : {1e-1, 1e-3, 1e-5}) {
    double k = f.nondegeneracy_check(c, radius, 20).constant;
    CHECK(k > prev);
    prev = k;
  }
  CHECK_FALSE(f.nondegeneracy_check(c, 1e-5, 20).pass);
}

TEST_CASE("neighbourhood containing another critical point") {
  auto f = builtin::combined();
  CHECK_THROWS_AS(f.nondegeneracy_check(f.criticals()[3], 0.6, 10), ConfigurationError);
}

TEST_CASE("distance to the critical set") {
  CHECK(builtin::chebyshev().distance_to_crit(0.3) == doctest::Approx(0.3));
  auto comb = builtin::combined();
  CHECK(comb.distance_to_crit(0.4) == doctest::Approx(0.1));
  CHECK(builtin::chebyshev().distance_to_crit(Interval{0.2, 0.3}) == doctest::Approx(0.3));
  CHECK(comb.distance_to_crit(Interval{0.1, 0.4}) == doctest::Approx(0.25));
  CHECK(std::isinf(builtin::baseline().distance_to_crit(0.3)));
}

TEST_CASE("combined map structure") {
  auto f = builtin::combined();
  CHECK(f.critical_locations() == std::vector<double>{-0.5, 0.0, 0.5});
  CHECK(f.eval(0.5, Side::left) == doctest::Approx(1.0));
  CHECK(f.eval(1.0) == doctest::Approx(-1.0));
  CHECK(f.eval(-1.0) == doctest::Approx(1.0));
  for (double x : {0.1, 0.3, 0.45, 0.8}) CHECK(f.eval(-x) == doctest::Approx(-f.eval(x)));
  CHECK(std::fabs(f.deriv(1.0)) == doctest::Approx(8.0));
  // the glue at 1/4 is a C^2 join, not a special point
  CHECK_FALSE(f.is_special(0.25));
  CHECK(f.eval(0.25) == doctest::Approx(f.eval(std::nextafter(0.25, 0.0))));
}

TEST_CASE("doubling map cuts") {
  auto f = builtin::baseline();
  CHECK(f.cuts() == std::vector<double>{0.5});
  CHECK(f.eval(0.5, Side::left) == 1.0);
  CHECK(f.eval(0.5, Side::right) == 0.0);
  CHECK(f.eval(0.3) == doctest::Approx(0.6));
}

TEST_CASE("orbit steps carry the side") {
  auto f = builtin::chebyshev();
  OrbitPoint p{dd(0.0), Side::right};
  p = f.step(p);
  CHECK(p.x == dd(1.0));
  CHECK(p.side == Side::left);
  p = f.step(p);
  CHECK(p.x == dd(-1.0));
  CHECK(std::exp(f.log_abs_deriv(p)) == doctest::Approx(4.0));
  auto l = builtin::lorenz();
  OrbitPoint q{dd(0.0), Side::right};
  q = l.step(q);
  CHECK(q.x == dd(-1.0));
  CHECK(q.side == Side::right);
}

TEST_CASE("map documents") {
  const char* text = R"(# Chebyshev written out
name = cheb
domain = -1 1
periodic = false
core = -1 1
branch = -1 0 : 1 - 2*x^2
branch = 0 1 : 1 - 2*x^2
critical = 0 both 2 4
)";
  auto f = parse_map_document(text);
  CHECK(f.name() == "cheb");
  CHECK(f.criticals().size() == 2);
  CHECK(f.eval(0.5) == doctest::Approx(0.5));
  auto g = parse_map_document(builtin::combined().to_document());
  CHECK(g.eval(0.3) == builtin::combined().eval(0.3));

  CHECK_THROWS_AS(parse_map_document("domain = 0 1\nbranch = 0 1 : 1 - x\nbogus = 3\n"), ConfigurationError);
  // tent map: corner with a bounded derivative jump
  CHECK_THROWS_AS(parse_map_document("domain = 0 1\nbranch = 0 0.5 : 2*x\nbranch = 0.5 1 : 2 - 2*x\n"),
                  ConfigurationError);
  // not monotone
  CHECK_THROWS_AS(parse_map_document("domain = -1 1\nbranch = -1 1 : 1 - 2*x^2\n"), ConfigurationError);
  // leaves the domain
  CHECK_THROWS_AS(parse_map_document("domain = 0 1\nbranch = 0 1 : 3*x\n"), ConfigurationError);
}

TEST_CASE("builtin resolution") {
  CHECK(resolve_map("builtin:chebyshev").name() == "chebyshev");
  CHECK(resolve_map("builtin:baseline:3").branches().size() == 3);
  CHECK(resolve_map("builtin:combined:0.5:2.5:0.2").criticals().size() == 6);
  CHECK_THROWS_AS(resolve_map("builtin:nothing"), ConfigurationError);
}

TEST_CASE("deviation steps keep relative precision") {
  auto f = builtin::chebyshev();
  OrbitPoint c{dd(0.0), Side::right};
  dd e(std::exp(-60.0));
  dd dev = f.step_deviation(c, e);
  CHECK(to_double(dev) / (-2.0 * std::exp(-120.0)) == doctest::Approx(1.0).epsilon(1e-14));
  OrbitPoint one{dd(1.0), Side::left};
  dd dev2 = f.step_deviation(one, dev);
  // f(1 + e) - f(1) = -4e - 2e^2
  CHECK(to_double(dev2) / (-4.0 * to_double(dev)) == doctest::Approx(1.0).epsilon(1e-14));

  auto comb = builtin::combined();
  OrbitPoint half{dd(0.5), Side::left};
  dd small(-1e-40);
  dd d3 = comb.step_deviation(half, small);
  // f(1/2 - h) = 1 - b h^2 + m h^3; recover b from two moderate h
  double h1 = 1e-3, h2 = 2e-3;
  double g1 = (1.0 - comb.eval(0.5 - h1)) / (h1 * h1);
  double g2 = (1.0 - comb.eval(0.5 - h2)) / (h2 * h2);
  double b = 2.0 * g1 - g2;
  CHECK(to_double(d3) < 0.0);
  CHECK(std::fabs(to_double(d3)) / (1e-80 * b) == doctest::Approx(1.0).epsilon(1e-6));
  // a generic point compared with plain dd evaluation
  OrbitPoint p{dd(0.3), Side::none};
  dd e4(1e-9);
  dd direct = comb.eval(dd(0.3) + e4) - comb.eval(dd(0.3));
  CHECK(std::fabs(to_double(comb.step_deviation(p, e4) - direct)) < 1e-24);
}

TEST_CASE("written-out lorenz document matches the built-in") {
  auto f = parse_map_document(
      "name = lorenz\ndomain = -1 1\ncore = -1 1\nbranch = -1 0 : 1 - 2*|x|^0.6\nbranch = 0 1 : -1 + 2*|x|^0.6\n"
      "critical = 0 both 0.6 2.5\n");
  const PiecewiseMap g = builtin::lorenz();
  for (double x : {-0.9, -0.3, -1e-5, 2e-7, 0.4, 0.99}) CHECK(f.eval(x) == doctest::Approx(g.eval(x)).epsilon(1e-15));
  CHECK(f.criticals().size() == 2);
  CHECK(f.criticals()[0].cls() == PointClass::singular);
}
