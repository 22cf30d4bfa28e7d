#include <cmath>

#include "doctest.h"
#include "inducer/partition.hpp"

using namespace inducer;

namespace {

// Brute force over a dense grid of the ring hat, iterating 1 - 2x^2 in
// double-double directly.
int brute_force_binding(int r, double delta, double alpha, int grid, int horizon) {
  double lo = std::exp(-(r + 1.0));
  double hi = std::exp(-(r - 2.0));
  int best = horizon;
  for (int i = 0; i < grid; ++i) {
    dd x = dd(lo) + (dd(hi) - dd(lo)) * dd(i) / dd(grid - 1.0);
    dd c(0.0);
    int p = horizon;
    for (int j = 0; j <= horizon; ++j) {
      x = dd(1.0) - dd(2.0) * x * x;
      c = dd(1.0) - dd(2.0) * c * c;
      if (!(std::fabs(to_double(x - c)) <= delta * std::exp(-2.0 * alpha * j))) {
        p = std::max(0, j - 1);
        break;
      }
    }
    best = std::min(best, p);
  }
  return best;
}

}  // namespace

TEST_CASE("r_delta snaps delta") {
  auto a = r_delta(std::exp(-5.0));
  CHECK(a.r_delta == 5);
  CHECK(a.delta == std::exp(-5.0));
  auto b = r_delta(0.01);
  CHECK(b.r_delta == 5);
  CHECK(b.delta == doctest::Approx(6.737946999085467e-3).epsilon(1e-12));
  auto c = r_delta(0.9999);
  CHECK(c.r_delta == 1);
  CHECK(c.delta == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(r_delta(1.5), ConfigurationError);
}

TEST_CASE("pieces tile each ring exactly") {
  for (int r = 6; r <= 40; ++r) {
    CHECK(CriticalPartition::piece(r, 1).lo == CriticalPartition::ring_lo(r));
    CHECK(CriticalPartition::piece(r, r * r).hi == CriticalPartition::ring_lo(r - 1));
    for (int j = 1; j < r * r; ++j) {
      auto a = CriticalPartition::piece(r, j);
      auto b = CriticalPartition::piece(r, j + 1);
      CHECK(a.hi == b.lo);
      CHECK(a.lo < a.hi);
    }
  }
}

TEST_CASE("locate inverts interval_of") {
  auto f = builtin::chebyshev();
  CriticalPartition part(f, std::exp(-5.0));
  for (int crit = 0; crit < 2; ++crit) {
    for (int r = 6; r <= 30; r += 3) {
      for (int j : {1, 2, r, r * r - 1, r * r}) {
        PartitionIndex idx{crit, r, j};
        auto d = part.distance_range(idx);
        auto back = part.locate_distance(crit, d.lo);
        REQUIRE(back);
        CHECK(*back == idx);
        auto mid = part.locate_distance(crit, 0.5 * (d.lo + d.hi));
        REQUIRE(mid);
        CHECK(*mid == idx);
        auto w = part.interval_of(idx);
        auto viax = part.locate(0.5 * (w.lo + w.hi));
        REQUIRE(viax);
        CHECK(*viax == idx);
      }
    }
  }
}

TEST_CASE("locate examples") {
  auto f = builtin::chebyshev();
  CriticalPartition part(f, std::exp(-5.0));
  auto idx = part.locate(std::exp(-6.5));
  REQUIRE(idx);
  CHECK(idx->r == 7);
  CHECK(f.criticals()[static_cast<std::size_t>(idx->crit)].side == Side::right);
  double lo = std::exp(-7.0), hi = std::exp(-6.0);
  int j = static_cast<int>((std::exp(-6.5) - lo) / (hi - lo) * 49) + 1;
  CHECK(idx->j == j);
  CHECK_FALSE(part.locate(2.0 * part.delta()));
  auto edge = part.locate(CriticalPartition::ring_lo(9));
  REQUIRE(edge);
  CHECK(edge->r == 9);
  CHECK(edge->j == 1);
  auto left = part.locate(-std::exp(-6.5));
  REQUIRE(left);
  CHECK(f.criticals()[static_cast<std::size_t>(left->crit)].side == Side::left);
  auto at = part.locate(0.0, Side::right);
  REQUIRE(at);
  CHECK(at->clipped);
  CHECK(at->r == part.r_max());
}

TEST_CASE("hat intervals") {
  auto f = builtin::chebyshev();
  CriticalPartition part(f, std::exp(-5.0));
  PartitionIndex mid{1, 10, 50};
  auto h = part.hat_distance(mid);
  CHECK(h.lo == CriticalPartition::piece(10, 49).lo);
  CHECK(h.hi == CriticalPartition::piece(10, 51).hi);
  PartitionIndex outer{1, 6, 36};
  auto ho = part.hat_distance(outer);
  CHECK(ho.lo == CriticalPartition::piece(6, 35).lo);
  CHECK(ho.hi == CriticalPartition::ring_lo(4));
  PartitionIndex first{1, 10, 1};
  auto hf = part.hat_distance(first);
  CHECK(hf.lo == CriticalPartition::piece(11, 121).lo);
  CHECK(hf.hi == CriticalPartition::piece(10, 2).hi);
  PartitionIndex deepest{1, part.r_max(), 1};
  CHECK(part.hat_distance(deepest).lo == 0.0);
  auto w = part.hat_interval(PartitionIndex{0, 10, 50});
  CHECK(w.hi < 0.0);
}

TEST_CASE("binding period matches the dense-grid oracle") {
  auto f = builtin::chebyshev();
  const double delta = std::exp(-5.0);
  const double alpha = 0.05;
  CriticalPartition part(f, delta);
  BindingTable table(part, alpha, 1000);
  const int expected[] = {1, 2, 4, 5, 6, 8, 9, 10, 12, 13, 15, 16, 17, 19, 20, 21, 23, 24, 25, 27, 28};
  for (int r = part.r_delta() + 1; r <= part.r_delta() + 20; ++r) {
    int p = table.period(1, r);
    CHECK(p == brute_force_binding(r, delta, alpha, 1000, 1000));
    CHECK(table.period(0, r) == p);
    CHECK(p == expected[r - 6]);
  }
}

TEST_CASE("binding length bound") {
  auto f = builtin::chebyshev();
  CriticalPartition part(f, std::exp(-5.0));
  BindingTable table(part, 0.05, 1000);
  for (int r = 6; r <= 120; ++r) {
    auto a = binding_expansion_audit(table, 1, r, 1.0, std::log(4.0));
    CHECK(a.bindlen_ok);
    CHECK_FALSE(a.capped);
  }
}

TEST_CASE("deep binding uses the deviation orbit") {
  auto f = builtin::chebyshev();
  CriticalPartition part(f, std::exp(-5.0));
  BindingTable table(part, 0.05, 1000);
  int prev = 0;
  for (int r = 30; r <= 300; r += 30) {
    auto e = table.binding(1, r);
    CHECK_FALSE(e.capped);
    CHECK(e.p > prev);
    prev = e.p;
  }
}

TEST_CASE("singular points do not bind") {
  auto f = builtin::lorenz();
  CriticalPartition part(f, std::exp(-4.0));
  BindingTable table(part, 0.05, 200);
  for (int r = 5; r <= 40; ++r) {
    CHECK(table.period(0, r) == 0);
    CHECK(table.period(1, r) == 0);
    auto a = binding_expansion_audit(table, 1, r, 1.0, 1.0);
    CHECK(a.singular_bound_ok);
    CHECK(a.theta_hat > 0.0);
  }
}

TEST_CASE("binding expansion on chebyshev") {
  auto f = builtin::chebyshev();
  CriticalPartition part(f, std::exp(-5.0));
  BindingTable table(part, 0.05, 1000);
  // the expansion lemma needs delta small against its constants; at
  // delta = e^{-5} the measured rate turns positive from r = 11 on
  for (int r = 11; r <= 60; ++r) CHECK(binding_expansion_audit(table, 1, r, 1.0, std::log(4.0)).theta_hat > 0.0);
  CHECK(binding_expansion_audit(table, 1, 6, 1.0, std::log(4.0)).theta_hat < 0.0);
}
