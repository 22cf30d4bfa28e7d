#include <cmath>
#include <numbers>

#include "doctest.h"
#include "inducer/hypotheses.hpp"

using namespace inducer;

TEST_CASE("h1 on the doubling map has the uniform slope") {
  auto f = builtin::baseline();
  H1Options opt;
  opt.delta = 0.01;
  opt.max_block_len = 30;
  opt.samples = 500;
  opt.lambda = std::log(2.0);
  auto r = check_h1(f, opt);
  CHECK(r.lambda_hat == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(r.kappa_hat == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.pass);
}

TEST_CASE("h1 on the lorenz-like map respects the pointwise bound") {
  auto f = builtin::lorenz();
  for (double delta : {std::exp(-3.0), std::exp(-4.0), std::exp(-5.0)}) {
    H1Options opt;
    opt.delta = delta;
    opt.samples = 2000;
    opt.max_block_len = 40;
    auto r = check_h1(f, opt);
    CHECK(r.lambda_hat >= std::log(1.2) - 1e-12);
  }
}

TEST_CASE("h1 on chebyshev reports positive expansion and a witness") {
  auto f = builtin::chebyshev();
  H1Options opt;
  opt.delta = 0.05;
  opt.samples = 4000;
  opt.max_block_len = 40;
  auto r = check_h1(f, opt);
  CHECK(r.lambda_hat > 0.0);
  CHECK(r.witness_n >= 1);
  CHECK(f.distance_to_crit(r.witness_x) > opt.delta);
}

TEST_CASE("h1 tightens with longer blocks") {
  auto f = builtin::chebyshev();
  H1Options opt;
  opt.delta = 0.05;
  opt.samples = 1000;
  double prev = INFINITY;
  for (int len : {1, 5, 10, 20, 40}) {
    opt.max_block_len = len;
    double lam = check_h1(f, opt).lambda_hat;
    CHECK(lam <= prev);
    prev = lam;
  }
}

TEST_CASE("h1 is independent of the thread count") {
  auto f = builtin::combined();
  H1Options opt;
  opt.delta = 0.02;
  opt.samples = 3000;
  auto a = check_h1(f, opt);
  opt.threads = 8;
  auto b = check_h1(f, opt);
  CHECK(a.lambda_hat == b.lambda_hat);
  CHECK(a.kappa_hat == b.kappa_hat);
  CHECK(a.witness_x == b.witness_x);
}

TEST_CASE("h2 on chebyshev telescopes to log 4") {
  auto f = builtin::chebyshev();
  for (int horizon : {1, 60, 1000}) {
    auto rs = check_h2(f, std::exp(-5.0), 0.05, 1.0, horizon);
    REQUIRE(rs.size() == 2);
    for (const auto& r : rs) {
      CHECK(std::fabs(r.Lambda_hat - std::log(4.0)) <= 1e-12);
      CHECK(r.alpha_required == 0.0);
      CHECK(r.pass);
    }
  }
}

TEST_CASE("h2 is vacuous without critical points of order >= 1") {
  CHECK(check_h2(builtin::lorenz(), 0.05, 0.0, 1.0, 100).empty());
  CHECK(check_h2(builtin::baseline(), 0.05, 0.0, 1.0, 100).empty());
}

TEST_CASE("h2 reports a critical orbit landing on the critical set") {
  auto f = parse_map_document(
      "domain = -1 1\nbranch = -1 0 : 1 - x^2\nbranch = 0 1 : 1 - x^2\ncritical = 0 both 2 4\ncore = 0 1\n");
  auto rs = check_h2(f, 0.05, 1.0, 0.1, 50);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].hit_k == 2);
  CHECK_FALSE(rs[0].pass);
}

TEST_CASE("h3 on the doubling map gives dyadic gaps") {
  auto f = builtin::baseline();
  auto r = check_h3(f, 0.5, 10, 1e-12, 0.01);
  CHECK(r.max_gap[0] == doctest::Approx(0.5));
  for (int t = 1; t <= 10; ++t) CHECK(r.max_gap[t] == doctest::Approx(std::ldexp(1.0, -t)).epsilon(1e-12));
  CHECK(r.count[10] == 1024);
  CHECK(r.pass);
}

TEST_CASE("h3 on chebyshev matches the cosine preimages") {
  auto f = builtin::chebyshev();
  auto r = check_h3(f, 0.0, 12, 1e-12, 0.01);
  CHECK(r.max_gap[0] == doctest::Approx(1.0));
  CHECK(r.max_gap[12] < 0.01);
  for (int t = 2; t <= 12; ++t) CHECK(r.max_gap[t] <= r.max_gap[t - 1]);
  CHECK(r.flagged.empty());
  // f^{-t}(0) = {cos((2k+1) pi / 2^{t+1})}
  const int t = 5;
  double expect = 0.0;
  const int m = 1 << (t + 1);
  std::vector<double> pts;
  for (int k = 0; k < m / 2; ++k) pts.push_back(std::cos((2 * k + 1) * std::numbers::pi / m));
  std::sort(pts.begin(), pts.end());
  expect = std::max(pts.front() + 1.0, 1.0 - pts.back());
  for (std::size_t i = 1; i < pts.size(); ++i) expect = std::max(expect, pts[i] - pts[i - 1]);
  CHECK(r.max_gap[t] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r.count[t] == static_cast<std::size_t>(m / 2));
}

TEST_CASE("h3 flags preimages on the critical set") {
  auto f = parse_map_document(
      "domain = -1 1\nbranch = -1 0 : 1 - x^2\nbranch = 0 1 : 1 - x^2\ncritical = 0 both 2 4\ncore = 0 1\n");
  auto r = check_h3(f, 0.0, 3, 1e-12, 1.0);
  CHECK_FALSE(r.flagged.empty());
  CHECK_FALSE(r.pass);
}
