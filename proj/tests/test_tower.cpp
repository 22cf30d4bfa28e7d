#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "inducer/tower.hpp"

using namespace inducer;

namespace {

struct Setup {
  PiecewiseMap map;
  CriticalPartition part;
  BindingTable table;
  Setup(PiecewiseMap m, double delta) : map(std::move(m)), part(map, delta), table(part, 0.05, 1000) {}
};

std::string first_lines(const std::string& path, int n) {
  std::ifstream in(path);
  std::string line, out;
  for (int i = 0; i < n && std::getline(in, line); ++i) out += line + "\n";
  return out;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("inducer_tower_" + name)).string();
}

ReturnConfig lorenz_config(const Setup& s) {
  ReturnSearchOptions so;
  so.start_fraction = 0.5;
  return choose_delta_star(s.map, s.part.delta(), 0.0, so);
}

}  // namespace

TEST_CASE("doubling: delta* is the first trial and xi is a dyadic proportion") {
  Setup s(builtin::baseline(2), std::exp(-3.0));
  const double delta = s.part.delta();
  ReturnConfig cfg = choose_delta_star(s.map, delta, 1.0 / 3.0);
  CHECK(cfg.halvings == 0);
  CHECK(cfg.delta_star == doctest::Approx(delta / 10.0).epsilon(1e-15));
  CHECK(cfg.delta_star_found == cfg.delta_star);
  REQUIRE(cfg.xi > 0.0);
  // widest component in the worst window is |Delta*| 2^-t0
  const double t0 = std::log2(2.0 * cfg.delta_star / (cfg.xi * delta));
  CHECK(t0 == doctest::Approx(std::round(t0)).epsilon(1e-9));
  CHECK(std::round(t0) <= cfg.t_star);
}

TEST_CASE("the extra halving keeps the found value") {
  Setup s(builtin::baseline(2), std::exp(-3.0));
  ReturnSearchOptions so;
  so.extra_halving = true;
  ReturnConfig cfg = choose_delta_star(s.map, s.part.delta(), 1.0 / 3.0, so);
  CHECK(cfg.delta_star == doctest::Approx(cfg.delta_star_found / 2.0).epsilon(1e-15));
}

TEST_CASE("a window centred on a depth-one preimage returns with t0 = 1") {
  Setup s(builtin::chebyshev(), std::exp(-5.0));
  const double delta = s.part.delta();
  const Interval ds = delta_star_interval(s.map, 0.0, delta / 20.0);
  ReturnFinder finder(s.map, 0.0, ds, 10, 1u << 16);
  const double p = 1.0 / std::sqrt(2.0);  // 1 - 2p^2 = 0
  auto c = finder.find_shallowest(p - delta / 2.0, p + delta / 2.0, delta / 3.0, 10);
  REQUIRE(c.has_value());
  CHECK(c->t0 == 1);
  auto [u, v] = finder.refine(*c);
  CHECK(to_double(s.map.eval(u)) == doctest::Approx(ds.hi).epsilon(1e-14));
  CHECK(to_double(s.map.eval(v)) == doctest::Approx(ds.lo).epsilon(1e-14));
}

TEST_CASE("delta* is two-sided around an undeclared point and clipped to the domain") {
  Setup s(builtin::chebyshev(), std::exp(-5.0));
  Interval d = delta_star_interval(s.map, 0.0, 0.01);
  CHECK(d.lo == -0.01);
  CHECK(d.hi == 0.01);
  Interval e = delta_star_interval(s.map, 0.995, 0.01);
  CHECK(e.hi == 1.0);
}

TEST_CASE("the search reports the worst window when the budget runs out") {
  Setup s(builtin::chebyshev(), std::exp(-5.0));
  ReturnSearchOptions so;
  so.t_max = 1;
  so.max_halvings = 1;
  CHECK_THROWS_AS(choose_delta_star(s.map, s.part.delta(), 0.0, so), ConfigurationError);
}

TEST_CASE("doubling tower: element lengths, distortion and expansion") {
  Setup s(builtin::baseline(2), std::exp(-3.0));
  ReturnConfig cfg = choose_delta_star(s.map, s.part.delta(), 1.0 / 3.0);
  TowerOptions to;
  to.n_max = 60;
  to.mass_floor = 1e-4;
  Tower tw = build_tower(s.table, cfg, to);
  REQUIRE(!tw.elements.empty());
  CHECK(tw.tiled);
  CHECK(tw.ledger_error() < 1e-14);
  CHECK(tw.max_image_error < 1e-12);
  const double total = to_double(tw.total);
  int t_min = 1 << 20;
  for (const auto& e : tw.elements) {
    CHECK(to_double(e.b - e.a) == doctest::Approx(std::ldexp(total, -e.T)).epsilon(1e-12));
    t_min = std::min(t_min, e.T);
  }
  DistortionReport rep = distortion_audit(s.map, tw, 4, tw.elements.size(), 1);
  CHECK(rep.d_tilde == 0.0);
  CHECK(rep.lambda_prime == doctest::Approx(std::ldexp(1.0, t_min)).epsilon(1e-9));
  CHECK(rep.k_hat >= 1.0);
}

TEST_CASE("lorenz tower: ledger, tiling, images and the unresolved identity") {
  Setup s(builtin::lorenz(), std::exp(-4.0));
  ReturnConfig cfg = lorenz_config(s);
  TowerOptions to;
  to.n_max = 200;
  to.mass_floor = 1e-3;
  Tower tw = build_tower(s.table, cfg, to);
  REQUIRE(!tw.elements.empty());
  CHECK(tw.tiled);
  CHECK(tw.ledger_error() < 1e-12);
  CHECK(tw.max_image_error < 1e-12);

  // unresolved[n] = |{T > n}| + limit aborts, recomputed from the elements
  for (int n : {0, 10, 30, 100, 200}) {
    dd m(0.0);
    for (const auto& e : tw.elements)
      if (e.T > n) m += e.b - e.a;
    m += tw.aborted_limit;
    CHECK(std::fabs(to_double(m - tw.unresolved[static_cast<std::size_t>(n)])) <= 1e-30);
  }
  std::int64_t g = 0;
  for (const auto& e : tw.elements) g = std::gcd(g, static_cast<std::int64_t>(e.T));
  CHECK(tw.gcd_T == g);
  for (std::size_t i = 1; i < tw.elements.size(); ++i) {
    const auto& p = tw.elements[i - 1];
    const auto& q = tw.elements[i];
    CHECK((p.generation < q.generation || (p.generation == q.generation && p.a < q.a)));
  }
  // no samples: the estimate is the exact measure
  for (std::size_t n = 0; n < tw.unresolved.size(); ++n)
    CHECK(tw.unresolved_estimate[n] == to_double(tw.unresolved[n]));
}

TEST_CASE("followed points return with the time of their element") {
  Setup s(builtin::lorenz(), std::exp(-4.0));
  ReturnConfig cfg = lorenz_config(s);
  TowerOptions to;
  to.n_max = 200;
  to.mass_floor = 1e-4;
  Tower tw = build_tower(s.table, cfg, to);
  ReturnFollower follower(s.table, cfg, to);
  REQUIRE(tw.elements.size() > 50);
  for (std::size_t i = 0; i < tw.elements.size(); i += tw.elements.size() / 50) {
    const auto& e = tw.elements[i];
    const dd x = e.a + (e.b - e.a) * dd(0.37);
    ReturnSample r = follower.follow(x, true);
    CHECK(r.disposition == Disposition::returned);
    CHECK(r.T == e.T);
    CHECK(r.generation == e.generation);
    CHECK(r.trail.size() == static_cast<std::size_t>(e.T));
    CHECK(r.trail.front() == to_double(x));
    const dd fx = forward_from(s.map, x, Side::right, e.T);
    CHECK(std::fabs(to_double(r.image - fx)) < 1e-9 * cfg.delta_star);
  }
}

TEST_CASE("pair separation through the follower") {
  Setup s(builtin::lorenz(), std::exp(-4.0));
  ReturnConfig cfg = lorenz_config(s);
  TowerOptions to;
  ReturnFollower follower(s.table, cfg, to);
  const Interval d = cfg.delta_star_interval;
  const dd x(d.lo + 0.3 * d.length());
  PairSeparation same = follower.separation(x, x, 3);
  CHECK(same.capped);
  CHECK(same.s == 3);
  // the two sides of the singular point are chopped apart at time 0
  PairSeparation apart = follower.separation(dd(-0.25 * d.length()), dd(0.25 * d.length()), 3);
  CHECK(apart.s == 0);
  CHECK(!apart.capped);
}

TEST_CASE("deferred mass is estimated from followed samples") {
  Setup s(builtin::lorenz(), std::exp(-4.0));
  ReturnConfig cfg = lorenz_config(s);
  TowerOptions to;
  to.n_max = 300;
  to.mass_floor = 1e-3;
  to.samples = 300;
  Tower tw = build_tower(s.table, cfg, to);
  REQUIRE(tw.deferred > dd(0.0));
  CHECK(tw.samples == 300);
  CHECK(tw.sample_weight == doctest::Approx(to_double(tw.deferred) / 300.0));
  std::size_t returned = 0;
  for (const auto& r : tw.sampled) returned += r.disposition == Disposition::returned;
  CHECK(returned == 300);
  CHECK(tw.aborted_estimate < 1e-8 * to_double(tw.total));
  // the estimate starts at |Delta*| less the numerical aborts and decreases
  CHECK(tw.unresolved_estimate[0] ==
        doctest::Approx(to_double(tw.total) - tw.aborted_estimate).epsilon(1e-12));
  for (std::size_t n = 1; n < tw.unresolved_estimate.size(); ++n)
    CHECK(tw.unresolved_estimate[n] <= tw.unresolved_estimate[n - 1]);
  TailFit fit = fit_return_tail(tw, 20, 200);
  CHECK(fit.gamma > 0.0);
}

TEST_CASE("tower outputs carry the documented headers") {
  Setup s(builtin::baseline(2), std::exp(-3.0));
  ReturnConfig cfg = choose_delta_star(s.map, s.part.delta(), 1.0 / 3.0);
  TowerOptions to;
  to.n_max = 30;
  to.mass_floor = 1e-6;
  Tower tw = build_tower(s.table, cfg, to);
  DistortionReport rep = distortion_audit(s.map, tw, 2, 10, 1);
  const std::string a = temp_path("tower.csv"), b = temp_path("return_tail.csv"), c = temp_path("distortion.csv"),
                    d = temp_path("tower.cfg");
  write_tower_csv(tw, a, "abc");
  write_return_tail_csv(tw, b, "abc");
  write_distortion_csv(rep, c, "abc");
  write_tower_cfg(cfg, d, "abc");
  CHECK(first_lines(a, 2) == "# config_hash=abc\nelement_id,left,right,T,generation\n");
  CHECK(first_lines(b, 2) == "# config_hash=abc\nn,unresolved_measure,unresolved_estimate,estimate_stderr\n");
  CHECK(first_lines(c, 2) == "# config_hash=abc\nelement_id,T,d_hat,pairs\n");
  CHECK(first_lines(d, 2).rfind("# config_hash=abc\nc_star = ", 0) == 0);
  for (const auto& p : {a, b, c, d}) std::filesystem::remove(p);
}

TEST_CASE("the tower does not depend on the thread count") {
  Setup s(builtin::lorenz(), std::exp(-4.0));
  ReturnConfig cfg = lorenz_config(s);
  TowerOptions to;
  to.n_max = 200;
  to.mass_floor = 1e-3;
  to.samples = 40;
  Tower one = build_tower(s.table, cfg, to);
  to.escape.threads = 4;
  Tower four = build_tower(s.table, cfg, to);
  REQUIRE(one.elements.size() == four.elements.size());
  for (std::size_t i = 0; i < one.elements.size(); ++i) {
    CHECK(one.elements[i].a == four.elements[i].a);
    CHECK(one.elements[i].T == four.elements[i].T);
  }
  CHECK(one.unresolved_estimate == four.unresolved_estimate);
}
