#include "inducer/tower.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "inducer/util.hpp"

namespace inducer {

namespace {

double branch_inverse(const Branch& b, double y) {
  const double va = b.expr.eval(b.lo);
  const double vb = b.expr.eval(b.hi);
  if (y == va) return b.lo;
  if (y == vb) return b.hi;
  const bool inc = vb > va;
  double lo = b.lo, hi = b.hi;
  double x = lo + (hi - lo) * (y - va) / (vb - va);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double v = b.expr.eval(x) - y;
    if (v == 0.0) return x;
    if ((v < 0.0) == inc)
      lo = x;
    else
      hi = x;
    double d = b.expr.deriv(x);
    double next = x - v / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(x)))
      return next;
    x = next;
  }
  return x;
}

dd branch_inverse(const Branch& b, const dd& y, double guess) {
  dd x(guess);
  for (int it = 0; it < 4; ++it) {
    double d = b.expr.deriv(x.hi);
    if (!std::isfinite(d) || d == 0.0) break;
    dd step = (b.expr.eval(x) - y) / dd(d);
    x = x - step;
    if (std::fabs(step.hi) <= 1e-33 * std::max(1.0, std::fabs(x.hi))) break;
  }
  if (x < dd(b.lo)) x = dd(b.lo);
  if (x > dd(b.hi)) x = dd(b.hi);
  return x;
}

bool in_range(const Branch& b, double y) {
  const double va = b.expr.eval(b.lo);
  const double vb = b.expr.eval(b.hi);
  return y >= std::min(va, vb) && y <= std::max(va, vb);
}

}  // namespace

void carve_return(const EscapeEngine& engine, const ReturnFinder& finder, int t_star, const OrbitInterval& w,
                  StepResult& out) {
  const double delta = engine.partition().delta();
  auto cand = finder.find(to_double(w.lo.x), to_double(w.hi.x), delta / 3.0, t_star);
  if (!cand) {
    out.done.push_back(engine.finish(w, Disposition::aborted, AbortReason::no_return));
    return;
  }
  auto [u, v] = finder.refine(*cand);
  if (!(u > w.lo.x && v < w.hi.x && v > u)) {
    out.done.push_back(engine.finish(w, Disposition::aborted, AbortReason::no_return));
    return;
  }
  if (w.image_only) {
    // keep the part holding the first tracked point
    auto part_of = [&](const dd& y) { return y < u ? 0 : (y > v ? 2 : 1); };
    const int k = part_of(w.tracked.front().x);
    for (const auto& p : w.tracked)
      if (part_of(p.x) != k) out.separated = true;
    if (k == 1) {
      Resolved r = engine.finish(w, Disposition::returned, AbortReason::none);
      r.time = w.n + cand->t0;
      r.t0 = cand->t0;
      OrbitInterval img = w;
      img.lo = {u, Side::right};
      img.hi = {v, Side::left};
      for (int j = 0; j < cand->t0; ++j) engine.advance(img);
      r.tracked = img.tracked;
      out.done.push_back(std::move(r));
      return;
    }
    OrbitInterval f = w;
    if (k == 0)
      f.hi = {u, Side::left};
    else
      f.lo = {v, Side::right};
    f.mid = midpoint(f.lo.x, f.hi.x);
    f.free_from = w.n;
    f.generation = w.generation + 1;
    out.children.push_back(std::move(f));
    return;
  }
  const double mean_deriv = to_double(w.image_width()) / to_double(w.width());
  const double scale = std::max(std::fabs(w.a.hi), std::fabs(w.b.hi));
  const double tol = std::max(1e-14 * to_double(v - u) / mean_deriv, 1e-30 * scale);
  auto xs = engine.pullback_sorted(w, {u, v}, tol);
  if (!xs[0] || !xs[1]) {
    out.done.push_back(engine.finish(w, Disposition::aborted, AbortReason::inversion));
    return;
  }
  const dd xu = *xs[0], xv = *xs[1];
  Resolved r = engine.finish(w, Disposition::returned, AbortReason::none);
  r.a = std::min(xu, xv);
  r.b = std::max(xu, xv);
  r.time = w.n + cand->t0;
  r.t0 = cand->t0;
  if (!(r.b > r.a)) {
    out.done.push_back(engine.finish(w, Disposition::aborted, AbortReason::precision));
    return;
  }
  out.done.push_back(std::move(r));

  OrbitInterval left = w, right = w;
  left.hi = {u, Side::left};
  right.lo = {v, Side::right};
  if (w.orient > 0) {
    left.b = xu;
    right.a = xv;
  } else {
    left.a = xu;
    right.b = xv;
  }
  for (OrbitInterval* f : {&left, &right}) {
    f->mid = midpoint(f->lo.x, f->hi.x);
    f->free_from = w.n;
    f->generation = w.generation + 1;
    out.children.push_back(std::move(*f));
  }
}

namespace {

EscapeOptions follower_options(const TowerOptions& opt) {
  EscapeOptions eo = opt.escape;
  eo.n_max = opt.sample_n_max;
  eo.mass_floor = 0.0;
  return eo;
}

}  // namespace

ReturnFollower::ReturnFollower(const BindingTable& binding, const ReturnConfig& config, const TowerOptions& opt)
    : config_(&config),
      engine_(binding, follower_options(opt)),
      finder_(binding.partition().map(), config.c_star, config.delta_star_interval, config.t_star, opt.max_nodes,
              config.min_component) {}

ReturnSample ReturnFollower::follow(const dd& x, bool trail) const {
  const Interval ds = config_->delta_star_interval;
  auto carve = [&](const OrbitInterval& w, StepResult& out) { carve_return(engine_, finder_, config_->t_star, w, out); };
  OrbitInterval w = engine_.start_tracking(dd(ds.lo), dd(ds.hi), {x}, trail);
  ReturnSample s;
  s.x = x;
  while (true) {
    StepResult r = engine_.drive(w, carve);
    if (!r.done.empty()) {
      const Resolved& d = r.done.front();
      s.T = d.time;
      s.disposition = d.disposition;
      s.reason = d.reason;
      s.generation = d.generation;
      if (d.disposition == Disposition::returned) s.image = d.tracked.front().x;
      if (w.trail) s.trail = std::move(*w.trail);
      return s;
    }
    w = std::move(r.children.front());
  }
}

PairSeparation ReturnFollower::separation(const dd& x0, const dd& y0, int cap) const {
  const Interval ds = config_->delta_star_interval;
  auto carve = [&](const OrbitInterval& w, StepResult& out) { carve_return(engine_, finder_, config_->t_star, w, out); };
  PairSeparation out;
  dd x = x0, y = y0;
  while (true) {
    if (out.s >= cap) {
      out.capped = true;
      return out;
    }
    OrbitInterval w = engine_.start_tracking(dd(ds.lo), dd(ds.hi), {x, y}, false);
    while (true) {
      StepResult r = engine_.drive(w, carve);
      if (r.separated) return out;
      if (!r.done.empty()) {
        const Resolved& d = r.done.front();
        if (d.disposition != Disposition::returned) {
          out.unresolved = true;
          return out;
        }
        x = d.tracked[0].x;
        y = d.tracked[1].x;
        break;
      }
      w = std::move(r.children.front());
    }
    ++out.s;
  }
}

std::vector<ReturnSample> sample_returns(const BindingTable& binding, const ReturnConfig& config,
                                         const TowerOptions& opt, const std::vector<dd>& points, bool trail) {
  ReturnFollower follower(binding, config, opt);
  std::vector<ReturnSample> out(points.size());
  parallel_for(points.size(), opt.escape.threads,
               [&](std::size_t i) { out[i] = follower.follow(points[i], trail); });
  return out;
}

Interval delta_star_interval(const PiecewiseMap& map, double c_star, double delta_star) {
  bool left = false, right = false, declared = false;
  for (const auto& c : map.criticals()) {
    if (c.location != c_star) continue;
    declared = true;
    if (c.side == Side::left) left = true;
    if (c.side == Side::right) right = true;
  }
  if (!declared) left = right = true;
  Interval d{left ? c_star - delta_star : c_star, right ? c_star + delta_star : c_star};
  d.lo = std::max(d.lo, map.domain().lo);
  d.hi = std::min(d.hi, map.domain().hi);
  if (!(d.hi > d.lo)) throw ConfigurationError("Delta* is empty");
  return d;
}

ReturnFinder::ReturnFinder(const PiecewiseMap& map, double c_star, Interval delta_star, int t_max,
                           std::size_t max_nodes, double min_component)
    : map_(&map), delta_star_(delta_star) {
  Node root;
  root.x = c_star;
  root.u = delta_star.lo;
  root.v = delta_star.hi;
  root.valid = true;
  nodes_.push_back(root);
  std::vector<int> level{0};
  depth_ = 0;
  // Narrow nodes close to the first images of the critical values are kept:
  // their preimages near the critical points widen again.
  std::vector<double> near;
  for (const auto& c : map.criticals()) {
    if (!c.is_critical()) continue;
    OrbitPoint p{dd(map.critical_value(c)), Side::none};
    for (int j = 0; j < 3; ++j) {
      near.push_back(to_double(p.x));
      try {
        p = map.step(p);
      } catch (const std::exception&) {
        break;
      }
    }
  }
  const double radius = 1e-2 * map.domain().length();
  const double keep_width = min_component * min_component / delta_star.length();
  auto keep = [&](const Node& n) {
    if (n.v - n.u >= min_component) return true;
    if (n.v - n.u < keep_width) return false;
    for (double y : near)
      if (std::fabs(n.x - y) < radius) return true;
    return false;
  };
  for (int t = 1; t <= t_max; ++t) {
    std::vector<int> next;
    std::vector<Node> fresh;
    for (int pi : level) {
      const Node parent = nodes_[static_cast<std::size_t>(pi)];
      if (!parent.valid) continue;
      for (std::size_t bi = 0; bi < map.branches().size(); ++bi) {
        const Branch& b = map.branches()[bi];
        if (!in_range(b, parent.x)) continue;
        Node n;
        n.x = branch_inverse(b, parent.x);
        if (map.is_special(n.x) || n.x <= b.lo || n.x >= b.hi) continue;
        n.depth = t;
        n.parent = pi;
        n.branch = static_cast<int>(bi);
        if (in_range(b, parent.u) && in_range(b, parent.v)) {
          double p = branch_inverse(b, parent.u);
          double q = branch_inverse(b, parent.v);
          n.u = std::min(p, q);
          n.v = std::max(p, q);
          n.valid = n.u > b.lo && n.v < b.hi && keep(n);
        }
        if (!n.valid) continue;
        fresh.push_back(n);
      }
    }
    if (nodes_.size() + fresh.size() > max_nodes) {
      truncated_ = true;
      break;
    }
    for (auto& n : fresh) {
      next.push_back(static_cast<int>(nodes_.size()));
      nodes_.push_back(n);
    }
    level.swap(next);
    depth_ = t;
    if (level.empty()) break;
  }
  by_depth_.assign(static_cast<std::size_t>(depth_) + 1, {});
  max_width_.assign(static_cast<std::size_t>(depth_) + 1, 0.0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    auto d = static_cast<std::size_t>(n.depth);
    by_depth_[d].push_back({n.x, static_cast<int>(i)});
    if (n.valid) max_width_[d] = std::max(max_width_[d], n.v - n.u);
  }
  for (auto& v : by_depth_) std::sort(v.begin(), v.end());
}

std::optional<ReturnFinder::Candidate> ReturnFinder::find(double lo, double hi, double margin, int t_max) const {
  const double L = lo + margin, R = hi - margin;
  std::optional<Candidate> best;
  if (!(R > L)) return best;
  for (int d = 0; d <= std::min(t_max, depth_); ++d) {
    const auto du = static_cast<std::size_t>(d);
    if (best && best->v - best->u >= max_width_[du]) continue;
    const auto& v = by_depth_[du];
    for (auto it = std::lower_bound(v.begin(), v.end(), std::make_pair(L, -1)); it != v.end() && it->first <= R;
         ++it) {
      const Node& n = nodes_[static_cast<std::size_t>(it->second)];
      if (!n.valid || n.u < L || n.v > R) continue;
      if (!best || n.v - n.u > best->v - best->u) best = Candidate{it->second, d, n.u, n.v};
    }
  }
  return best;
}

std::optional<ReturnFinder::Candidate> ReturnFinder::find_shallowest(double lo, double hi, double margin,
                                                                     int t_max) const {
  const double L = lo + margin, R = hi - margin;
  if (!(R > L)) return std::nullopt;
  for (int d = 0; d <= std::min(t_max, depth_); ++d) {
    std::optional<Candidate> best;
    const auto& v = by_depth_[static_cast<std::size_t>(d)];
    for (auto it = std::lower_bound(v.begin(), v.end(), std::make_pair(L, -1)); it != v.end() && it->first <= R;
         ++it) {
      const Node& n = nodes_[static_cast<std::size_t>(it->second)];
      if (!n.valid || n.u < L || n.v > R) continue;
      if (!best || n.v - n.u > best->v - best->u) best = Candidate{it->second, d, n.u, n.v};
    }
    if (best) return best;
  }
  return std::nullopt;
}

std::pair<dd, dd> ReturnFinder::refine(const Candidate& c) const {
  std::vector<int> chain;
  for (int i = c.node; i > 0; i = nodes_[static_cast<std::size_t>(i)].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());
  dd lo(delta_star_.lo), hi(delta_star_.hi);
  for (int i : chain) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    const Branch& b = map_->branches()[static_cast<std::size_t>(n.branch)];
    if (b.increasing) {
      lo = branch_inverse(b, lo, n.u);
      hi = branch_inverse(b, hi, n.v);
    } else {
      dd l = branch_inverse(b, hi, n.u);
      dd h = branch_inverse(b, lo, n.v);
      lo = l;
      hi = h;
    }
  }
  return {lo, hi};
}

ReturnConfig choose_delta_star(const PiecewiseMap& map, double delta, double c_star, const ReturnSearchOptions& opt) {
  if (!(delta > 0.0)) throw ConfigurationError("delta must be positive");
  std::vector<double> starts;
  std::vector<Interval> core = map.core().empty() ? std::vector<Interval>{map.domain()} : map.core();
  for (const auto& I : core) {
    if (I.length() < delta) continue;
    const double mesh = delta / 10.0;
    for (double s = I.lo; s + delta <= I.hi; s += mesh) starts.push_back(s);
    starts.push_back(I.hi - delta);
  }
  if (starts.empty()) throw ConfigurationError("core holds no delta-window");

  auto evaluate = [&](double ds, ReturnConfig& cfg, double& failed_at) {
    cfg.delta = delta;
    cfg.c_star = c_star;
    cfg.delta_star = ds;
    cfg.delta_star_interval = delta_star_interval(map, c_star, ds);
    cfg.windows = starts.size();
    cfg.min_component = opt.min_component * cfg.delta_star_interval.length();
    ReturnFinder finder(map, c_star, cfg.delta_star_interval, opt.t_max, opt.max_nodes, cfg.min_component);
    cfg.xi = std::numeric_limits<double>::infinity();
    cfg.t_star = 0;
    for (double s : starts) {
      auto shallow = finder.find_shallowest(s, s + delta, delta / 3.0, finder.depth());
      if (!shallow) {
        failed_at = s;
        return false;
      }
      auto wide = finder.find(s, s + delta, delta / 3.0, finder.depth());
      cfg.t_star = std::max(cfg.t_star, shallow->t0);
      double prop = (wide->v - wide->u) / delta;
      if (prop < cfg.xi) {
        cfg.xi = prop;
        cfg.worst_window = s;
      }
    }
    return true;
  };

  double ds = opt.start_fraction * delta;
  double failed_at = 0.0;
  for (int h = 0; h <= opt.max_halvings; ++h, ds *= 0.5) {
    ReturnConfig cfg;
    if (!evaluate(ds, cfg, failed_at)) continue;
    cfg.halvings = h;
    cfg.delta_star_found = ds;
    if (opt.extra_halving) {
      ReturnConfig half;
      if (evaluate(0.5 * ds, half, failed_at)) {
        half.halvings = h + 1;
        half.delta_star_found = ds;
        return half;
      }
    }
    return cfg;
  }
  throw ConfigurationError("no delta* found within the search budget; worst window starts at " + fmt(failed_at));
}

dd forward_from(const PiecewiseMap& map, const dd& x, Side side, int n) {
  OrbitPoint p{x, side};
  for (int k = 0; k < n; ++k) p = map.step(p);
  return p.x;
}

double Tower::ledger_error() const {
  dd diff = total - returned - aborted_numerical - aborted_limit;
  return std::fabs(to_double(diff)) / to_double(total);
}

namespace {

// Stratified points over the pieces stopped at the mass floor, followed to
// their return; every sample stands for |deferred| / samples.
void estimate_deferred(const BindingTable& binding, const ReturnConfig& config, const TowerOptions& opt,
                       Tower& tower) {
  const std::size_t nn = tower.unresolved.size();
  std::vector<double> known(nn);
  const double floor_mass = to_double(tower.deferred);
  for (std::size_t n = 0; n < nn; ++n) known[n] = to_double(tower.unresolved[n]) - floor_mass;
  tower.unresolved_estimate.assign(nn, 0.0);
  tower.unresolved_stderr.assign(nn, 0.0);
  tower.aborted_estimate = to_double(tower.aborted_numerical);
  if (floor_mass <= 0.0 || opt.samples == 0) {
    for (std::size_t n = 0; n < nn; ++n) tower.unresolved_estimate[n] = to_double(tower.unresolved[n]);
    return;
  }
  std::vector<const Resolved*> pieces;
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& r : tower.aborted) {
    if (r.reason != AbortReason::mass_floor) continue;
    acc += to_double(r.b - r.a);
    pieces.push_back(&r);
    cum.push_back(acc);
  }
  std::seed_seq sq{opt.seed, std::uint64_t{0}};
  std::mt19937_64 rng(sq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<dd> points;
  for (std::size_t i = 0; i < opt.samples; ++i) {
    double m = (static_cast<double>(i) + unif(rng)) / static_cast<double>(opt.samples) * acc;
    auto k = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), m) - cum.begin());
    k = std::min(k, pieces.size() - 1);
    const Resolved& r = *pieces[k];
    double into = (m - (cum[k] - to_double(r.b - r.a))) / to_double(r.b - r.a);
    into = std::clamp(into, 0.0, 1.0);
    dd x = r.a + (r.b - r.a) * dd(into);
    if (!(x > r.a)) x = midpoint(r.a, r.b);
    if (!(x < r.b)) x = midpoint(r.a, r.b);
    points.push_back(x);
  }
  auto out = sample_returns(binding, config, opt, points, opt.sample_trails);
  tower.samples = out.size();
  const double share = floor_mass / static_cast<double>(out.size());
  tower.sample_weight = share;
  std::vector<double> returned_at(nn + 1, 0.0);
  double open = 0.0, numerical = 0.0;
  for (const auto& s : out) {
    if (s.disposition == Disposition::returned)
      returned_at[static_cast<std::size_t>(std::min<int>(s.T, static_cast<int>(nn)))] += 1.0;
    else if (is_limit(s.reason))
      open += 1.0;
    else
      numerical += 1.0;
  }
  const double N = static_cast<double>(out.size());
  tower.aborted_estimate += share * numerical;
  double remaining = N - open - numerical;
  for (std::size_t n = 0; n < nn; ++n) {
    remaining -= returned_at[n];
    const double p = (remaining + open) / N;
    tower.unresolved_estimate[n] = known[n] + floor_mass * p;
    tower.unresolved_stderr[n] = floor_mass * std::sqrt(std::max(p * (1.0 - p), 0.0) / N);
  }
  tower.sampled = std::move(out);
}

}  // namespace

Tower build_tower(const BindingTable& binding, const ReturnConfig& config, const TowerOptions& opt) {
  const PiecewiseMap& map = binding.partition().map();
  const Interval ds = config.delta_star_interval;
  Tower tower;
  tower.config = config;
  const dd A(ds.lo), B(ds.hi);
  tower.total = B - A;
  const double total = to_double(tower.total);

  EscapeOptions eo = opt.escape;
  eo.n_max = opt.n_max;
  eo.mass_floor = opt.mass_floor * total;
  EscapeEngine engine(binding, eo);
  ReturnFinder finder(map, config.c_star, ds, config.t_star, opt.max_nodes, config.min_component);

  auto carve = [&](const OrbitInterval& w, StepResult& out) {
    carve_return(engine, finder, config.t_star, w, out);
  };

  auto run = engine.run({engine.start(A, B)}, carve);
  tower.stats = run.stats;

  // the pieces tile Delta* in left-end order
  tower.tiled = !run.resolved.empty() && run.resolved.front().a == A && run.resolved.back().b == B;
  for (std::size_t i = 1; i < run.resolved.size() && tower.tiled; ++i)
    tower.tiled = run.resolved[i].a == run.resolved[i - 1].b;

  std::vector<dd> limit_at(static_cast<std::size_t>(opt.n_max) + 1, dd(0.0));
  std::vector<dd> returned_at(static_cast<std::size_t>(opt.n_max) + 2, dd(0.0));
  std::int64_t g = 0;
  for (auto& r : run.resolved) {
    const dd len = r.b - r.a;
    if (r.disposition == Disposition::returned) {
      tower.returned += len;
      tower.elements.push_back(TowerElement{r.a, r.b, r.time, r.t0, r.generation});
      returned_at[static_cast<std::size_t>(std::min(r.time, opt.n_max + 1))] += len;
      g = std::gcd(g, static_cast<std::int64_t>(r.time));
    } else {
      if (is_limit(r.reason))
        tower.aborted_limit += len;
      else
        tower.aborted_numerical += len;
      tower.aborted.push_back(std::move(r));
    }
  }
  tower.gcd_T = g;
  std::sort(tower.elements.begin(), tower.elements.end(), [](const TowerElement& x, const TowerElement& y) {
    return x.generation != y.generation ? x.generation < y.generation : x.a < y.a;
  });

  // unresolved(n) = |{T > n}| + limit aborts
  dd remaining = tower.returned;
  for (int n = 0; n <= opt.n_max; ++n) {
    remaining -= returned_at[static_cast<std::size_t>(n)];
    tower.unresolved.push_back(remaining + tower.aborted_limit);
  }

  for (const auto& r : tower.aborted)
    if (r.reason == AbortReason::mass_floor) tower.deferred += r.b - r.a;
  estimate_deferred(binding, config, opt, tower);

  std::vector<double> err(tower.elements.size(), 0.0);
  parallel_for(tower.elements.size(), eo.threads, [&](std::size_t i) {
    const auto& e = tower.elements[i];
    dd fa = forward_from(map, e.a, Side::right, e.T);
    dd fb = forward_from(map, e.b, Side::left, e.T);
    dd lo = std::min(fa, fb), hi = std::max(fa, fb);
    err[i] = std::max(std::fabs(to_double(lo - A)), std::fabs(to_double(hi - B))) / total;
  });
  for (double e : err) tower.max_image_error = std::max(tower.max_image_error, e);
  return tower;
}

TailFit fit_return_tail(const Tower& tower, int n_lo, int n_hi) {
  std::vector<dd> est;
  for (double v : tower.unresolved_estimate) est.push_back(dd(v));
  return fit_tail(est, n_lo, n_hi);
}

DistortionReport distortion_audit(const PiecewiseMap& map, const Tower& tower, int random_points,
                                  std::size_t max_elements, std::uint64_t seed, int threads) {
  DistortionReport rep;
  const auto& els = tower.elements;
  std::vector<std::size_t> order(els.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> pick;
  if (els.size() <= max_elements) {
    pick = order;
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return els[x].b - els[x].a > els[y].b - els[y].a; });
    const std::size_t widest = max_elements / 2;
    pick.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(widest));
    const std::size_t rest = max_elements - widest;
    const std::size_t left = els.size() - widest;
    for (std::size_t k = 0; k < rest; ++k) pick.push_back(order[widest + k * left / rest]);
    std::sort(pick.begin(), pick.end());
  }
  rep.elements = pick.size();
  const double total = to_double(tower.total);

  struct Out {
    DistortionRow row;
    double lambda = std::numeric_limits<double>::infinity();
    double k = 1.0;
  };
  std::vector<Out> outs(pick.size());
  parallel_for(pick.size(), threads, [&](std::size_t i) {
    const std::size_t id = pick[i];
    const TowerElement& e = els[id];
    const dd w = e.b - e.a;
    std::vector<dd> xs{e.a, e.a + w * dd(0.25), e.a + w * dd(0.5), e.a + w * dd(0.75), e.b};
    std::seed_seq sq{seed, static_cast<std::uint64_t>(id)};
    std::mt19937_64 rng(sq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < random_points; ++k) xs.push_back(e.a + w * dd(unif(rng)));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    // orbits and log |(f^T)'| per point
    const std::size_t m = xs.size();
    std::vector<std::vector<dd>> orbit(m);
    std::vector<double> logd(m, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
      Side side = p == 0 ? Side::right : (p + 1 == m ? Side::left : Side::none);
      OrbitPoint q{xs[p], side};
      orbit[p].reserve(static_cast<std::size_t>(e.T) + 1);
      orbit[p].push_back(q.x);
      for (int k = 0; k < e.T; ++k) {
        if (q.side == Side::none && map.is_special(q.x.hi) && q.x.lo == 0.0) q.side = Side::right;
        logd[p] += map.log_abs_deriv(q);
        q = map.step(q);
        orbit[p].push_back(q.x);
      }
    }
    Out o;
    o.row.element = id;
    o.row.T = e.T;
    for (std::size_t p = 0; p < m; ++p) {
      if (!std::isfinite(logd[p])) continue;
      for (std::size_t q = p + 1; q < m; ++q) {
        if (!std::isfinite(logd[q])) continue;
        const double fd = std::fabs(to_double(orbit[p].back() - orbit[q].back()));
        const double xd = std::fabs(to_double(xs[p] - xs[q]));
        if (!(fd > 0.0) || !(xd > 0.0)) continue;
        ++o.row.pairs;
        o.row.d_hat = std::max(o.row.d_hat, std::fabs(std::expm1(logd[p] - logd[q])) / fd);
        o.lambda = std::min(o.lambda, fd / xd);
        for (int k = 0; k < e.T; ++k) {
          const double dk = std::fabs(to_double(orbit[p][static_cast<std::size_t>(k)] - orbit[q][static_cast<std::size_t>(k)]));
          o.k = std::max(o.k, dk / fd);
        }
      }
    }
    // the element maps onto Delta*, so |Delta*| / |w| is a pair ratio too
    o.lambda = std::min(o.lambda, total / to_double(w));
    outs[i] = o;
  });
  rep.lambda_prime = std::numeric_limits<double>::infinity();
  rep.k_hat = 1.0;
  for (const auto& o : outs) {
    rep.rows.push_back(o.row);
    rep.d_tilde = std::max(rep.d_tilde, o.row.d_hat);
    rep.lambda_prime = std::min(rep.lambda_prime, o.lambda);
    rep.k_hat = std::max(rep.k_hat, o.k);
  }
  if (pick.empty()) rep.lambda_prime = 0.0;
  return rep;
}

void write_tower_csv(const Tower& tower, const std::string& path, const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"element_id", "left", "right", "T", "generation"});
  for (std::size_t i = 0; i < tower.elements.size(); ++i) {
    const auto& e = tower.elements[i];
    csv.row({std::to_string(i), fmt(e.a), fmt(e.b), std::to_string(e.T), std::to_string(e.generation)});
  }
}

void write_return_tail_csv(const Tower& tower, const std::string& path, const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"n", "unresolved_measure", "unresolved_estimate", "estimate_stderr"});
  for (std::size_t n = 0; n < tower.unresolved.size(); ++n)
    csv.row({std::to_string(n), fmt(to_double(tower.unresolved[n])), fmt(tower.unresolved_estimate[n]),
             fmt(tower.unresolved_stderr[n])});
}

void write_distortion_csv(const DistortionReport& report, const std::string& path, const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"element_id", "T", "d_hat", "pairs"});
  for (const auto& r : report.rows)
    csv.row({std::to_string(r.element), std::to_string(r.T), fmt(r.d_hat), std::to_string(r.pairs)});
}

void write_tower_cfg(const ReturnConfig& config, const std::string& path, const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# config_hash=" << config_hash << "\n";
  out << "c_star = " << fmt(config.c_star) << "\n";
  out << "delta_star = " << fmt(config.delta_star) << "\n";
  out << "delta_star_found = " << fmt(config.delta_star_found) << "\n";
  out << "delta_star_lo = " << fmt(config.delta_star_interval.lo) << "\n";
  out << "delta_star_hi = " << fmt(config.delta_star_interval.hi) << "\n";
  out << "t_star = " << config.t_star << "\n";
  out << "xi = " << fmt(config.xi) << "\n";
  out << "delta = " << fmt(config.delta) << "\n";
  out << "worst_window = " << fmt(config.worst_window) << "\n";
  out << "windows = " << config.windows << "\n";
  out << "halvings = " << config.halvings << "\n";
}

}  // namespace inducer
