#include "doctest.h"
#include "inducer/dd.hpp"

using namespace inducer;

namespace {

double rel(const dd& a, const dd& b) { return std::fabs(to_double(a - b)) / std::fabs(to_double(b)); }

}  // namespace

TEST_CASE("arithmetic keeps about 32 digits") {
  dd third = dd(1.0) / dd(3.0);
  CHECK(rel(third * dd(3.0), dd(1.0)) < 1e-31);
  dd tiny(1e-20);
  dd s = dd(1.0) + tiny;
  CHECK(to_double(s - dd(1.0)) / 1e-20 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exp matches reference digits") {
  dd e = parse_dd("2.7182818284590452353602874713527");
  CHECK(rel(exp(dd(1.0)), e) < 1e-30);
  dd e10 = parse_dd("22026.465794806716516957900645284");
  CHECK(rel(exp(dd(10.0)), e10) < 1e-30);
  dd em5 = parse_dd("0.0067379469990854670966360484231485");
  CHECK(rel(exp(dd(-5.0)), em5) < 1e-30);
}

TEST_CASE("log inverts exp") {
  for (const char* text : {"1e-12", "0.3", "1.0", "2.5", "1e8"}) {
    dd v = parse_dd(text);
    CHECK(rel(exp(log(v)), v) < 1e-29);
  }
  dd l2 = parse_dd("0.69314718055994530941723212145818");
  CHECK(rel(log(dd(2.0)), l2) < 1e-30);
}

TEST_CASE("pow") {
  dd x = parse_dd("0.123456789");
  dd r = pow(x, 0.5);
  CHECK(rel(r * r, x) < 1e-30);
  dd c = pow(x, 0.25);
  CHECK(rel(c * c * c * c, x) < 1e-30);
  CHECK(rel(pow(x, 3.0), x * x * x) < 1e-30);
  CHECK(pow(dd(0.0), 0.6) == dd(0.0));
}

TEST_CASE("decimal round trip") {
  dd v = dd(1.0) / dd(7.0);
  CHECK(rel(parse_dd(to_string(v)), v) < 1e-31);
  dd w = -dd(std::ldexp(1.0, -60)) / dd(3.0);
  CHECK(rel(parse_dd(to_string(w)), w) < 1e-31);
  CHECK(to_string(dd(0.0)) == "0");
  CHECK_THROWS(parse_dd("1.2.3"));
}

TEST_CASE("expm1 and log1p for small arguments") {
  dd tiny = parse_dd("1e-25");
  CHECK(rel(expm1(tiny), tiny + tiny * tiny / dd(2.0)) < 1e-30);
  dd v = parse_dd("0.3");
  CHECK(rel(expm1(v) + dd(1.0), exp(v)) < 1e-30);
  dd w = parse_dd("-3.7e-12");
  CHECK(rel(expm1(log1p(w)), w) < 1e-29);
  dd half = parse_dd("0.25");
  CHECK(rel(log1p(half), log(dd(1.25))) < 1e-30);
}
