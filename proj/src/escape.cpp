#include "inducer/escape.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "inducer/util.hpp"

namespace inducer {

ThreePiecePolicy parse_three_piece_policy(std::string_view text) {
  if (text == "chop") return ThreePiecePolicy::chop;
  if (text == "inessential") return ThreePiecePolicy::inessential;
  throw ConfigurationError("three_piece_policy must be chop or inessential");
}

std::string_view to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::none: return "none";
    case AbortReason::iterate_limit: return "iterate limit";
    case AbortReason::active_limit: return "active limit";
    case AbortReason::precision: return "precision exhausted";
    case AbortReason::inversion: return "inversion failure";
    case AbortReason::binding_horizon: return "binding horizon";
    case AbortReason::monotonicity: return "monotonicity";
    case AbortReason::domain: return "domain";
    case AbortReason::mass_floor: return "mass floor";
    case AbortReason::no_return: return "no return";
  }
  return "unknown";
}

bool is_limit(AbortReason reason) {
  return reason == AbortReason::iterate_limit || reason == AbortReason::active_limit ||
         reason == AbortReason::mass_floor;
}

std::vector<ReturnEvent> itinerary(const std::shared_ptr<const EventNode>& head) {
  std::vector<ReturnEvent> out;
  for (const EventNode* e = head.get(); e; e = e->prev.get()) out.push_back(e->event);
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

enum class CellKind { piece, outside, core };

struct Cell {
  dd lo;
  dd hi;
  CellKind kind = CellKind::outside;
  PartitionIndex idx;
  bool partial = false;
  dd length() const { return hi - lo; }
};

}  // namespace

EscapeEngine::EscapeEngine(const BindingTable& binding, EscapeOptions options)
    : partition_(&binding.partition()), binding_(&binding), options_(options) {
  if (options_.n_max < 0) throw ConfigurationError("n_max must be >= 0");
  if (!(options_.min_width > 0.0)) throw ConfigurationError("min_width must be positive");
}

OrbitInterval EscapeEngine::start(const dd& a, const dd& b) const {
  if (!(a < b)) throw ConfigurationError("starting interval must have a < b");
  OrbitInterval w;
  w.a = a;
  w.b = b;
  w.lo = {a, Side::right};
  w.hi = {b, Side::left};
  w.mid = midpoint(a, b);
  return w;
}

OrbitInterval EscapeEngine::start_tracking(const dd& a, const dd& b, const std::vector<dd>& points,
                                          bool trail) const {
  OrbitInterval w = start(a, b);
  w.image_only = true;
  for (const dd& x : points) {
    if (x < a || x > b) throw ConfigurationError("tracked point outside the starting interval");
    w.tracked.push_back({x, Side::none});
  }
  if (w.tracked.empty()) throw ConfigurationError("image mode needs a tracked point");
  if (trail) w.trail = std::make_shared<std::vector<double>>();
  return w;
}

dd EscapeEngine::forward(const dd& x, int n) const {
  OrbitPoint p{x, Side::none};
  for (int k = 0; k < n; ++k) p = map().step(p);
  return p.x;
}

dd EscapeEngine::tolerance(const OrbitInterval& w) const {
  double t = std::min(1e-13 * to_double(w.width()), 1e-3 * options_.min_width);
  return dd(std::max(t, 1e-300));
}

std::optional<dd> EscapeEngine::solve(int n, int orient, const dd& y, dd xl, dd xr, dd fl, dd fr, const dd& tol,
                                      const std::optional<dd>& guess, double* deriv_out) const {
  if (!(fl < dd(0.0))) return xl;
  if (!(fr > dd(0.0))) return xr;
  const auto& m = map();
  // Newton with the derivative of f^n carried in double; steps leaving the
  // bracket fall back to bisection
  dd x;
  if (guess && *guess > xl && *guess < xr) {
    x = *guess;
  } else {
    x = xl + (xr - xl) * (fl / (fl - fr));
    if (!(x > xl && x < xr)) x = midpoint(xl, xr);
  }
  for (int it = 0; it < 200; ++it) {
    OrbitPoint p{x, Side::none};
    double deriv = 1.0;
    for (int k = 0; k < n; ++k) {
      Side s = p.x.lo > 0.0 ? Side::right : (p.x.lo < 0.0 ? Side::left : (p.side == Side::none ? Side::right : p.side));
      deriv *= m.deriv(p.x.hi, s);
      p = m.step(p);
    }
    dd fx = p.x - y;
    if (orient < 0) fx = -fx;
    if (deriv_out) *deriv_out = std::fabs(deriv);
    if (fx.hi == 0.0) return x;
    if (fx < dd(0.0))
      xl = x;
    else
      xr = x;
    if (xr - xl <= tol) return x;
    double d = std::fabs(deriv);
    dd next;
    bool newton = std::isfinite(d) && d > 0.0;
    if (newton) {
      dd step = fx / dd(d);
      next = x - step;
      if (abs(step) <= tol && next > xl && next < xr) return next;
      newton = next > xl && next < xr;
    }
    x = newton ? next : midpoint(xl, xr);
  }
  return std::nullopt;
}

std::optional<dd> EscapeEngine::pullback(const OrbitInterval& w, const dd& y) const {
  auto r = pullback_sorted(w, {y});
  return r.front();
}

std::vector<std::optional<dd>> EscapeEngine::pullback_sorted(const OrbitInterval& w, const std::vector<dd>& ys,
                                                             double tol_override) const {
  std::vector<std::optional<dd>> out(ys.size());
  const dd tol = tol_override > 0.0 ? dd(tol_override) : tolerance(w);
  const dd va = w.orient > 0 ? w.lo.x : w.hi.x;  // f^n(a)
  const dd vb = w.orient > 0 ? w.hi.x : w.lo.x;  // f^n(b)
  if (w.n == 0) {
    for (std::size_t i = 0; i < ys.size(); ++i) out[i] = ys[i];
    return out;
  }
  std::optional<dd> guess;
  double deriv = 0.0;
  dd xl = w.a, xr = w.b;
  dd yl = w.orient > 0 ? va : vb;  // image at the moving bracket end
  for (std::size_t i = 0; i < ys.size(); ++i) {
    std::optional<dd> x;
    if (w.orient > 0)
      x = solve(w.n, 1, ys[i], xl, w.b, yl - ys[i], vb - ys[i], tol, guess, &deriv);
    else
      x = solve(w.n, -1, ys[i], w.a, xr, ys[i] - va, ys[i] - yl, tol, guess, &deriv);
    out[i] = x;
    guess.reset();
    if (!x) continue;
    if (w.orient > 0)
      xl = *x;
    else
      xr = *x;
    yl = ys[i];
    if (i + 1 < ys.size() && deriv > 0.0 && std::isfinite(deriv))
      guess = *x + dd(w.orient) * (ys[i + 1] - ys[i]) / dd(deriv);
  }
  return out;
}

Resolved EscapeEngine::finish(const OrbitInterval& w, Disposition d, AbortReason reason) const {
  Resolved r;
  r.a = w.a;
  r.b = w.b;
  r.disposition = d;
  r.time = w.n;
  r.reason = reason;
  r.generation = w.generation;
  r.events = w.events;
  r.tracked = w.tracked;
  return r;
}

bool EscapeEngine::special_inside(const OrbitInterval& w, dd& where) const {
  for (double s : map().critical_locations()) {
    if (dd(s) > w.lo.x && dd(s) < w.hi.x) {
      where = dd(s);
      return true;
    }
  }
  for (double s : map().cuts()) {
    if (dd(s) > w.lo.x && dd(s) < w.hi.x) {
      where = dd(s);
      return true;
    }
  }
  return false;
}

Classification EscapeEngine::classify(const OrbitInterval& w) const {
  Classification c;
  const CriticalPartition& part = *partition_;
  const double delta = part.delta();
  if (w.image_width() >= dd(delta)) {
    c.action = Action::escape;
    return c;
  }
  const auto& crits = map().criticals();
  int touched = 0;
  bool spans = false;
  dd d_in, d_out;
  for (std::size_t i = 0; i < crits.size(); ++i) {
    const dd loc(crits[i].location);
    const double dir = part.direction(static_cast<int>(i));
    dd da = (w.lo.x - loc) * dd(dir);
    dd db = (w.hi.x - loc) * dd(dir);
    dd lo = std::min(da, db);
    dd hi = std::max(da, db);
    if (hi <= dd(0.0) || lo >= dd(delta)) continue;
    ++touched;
    c.crit = static_cast<int>(i);
    if (lo < dd(0.0)) spans = true;
    d_in = lo;
    d_out = hi;
  }
  if (touched == 0) {
    c.action = Action::none;
    return c;
  }
  c.action = Action::chop;
  if (touched > 1 || spans || d_in.hi == 0.0) return c;

  auto inner = part.locate_distance(c.crit, to_double(d_in));
  if (!inner || inner->clipped) return c;
  PartitionIndex outer;
  if (d_out >= dd(delta)) {
    outer = {c.crit, part.r_delta() + 1, (part.r_delta() + 1) * (part.r_delta() + 1), false};
  } else {
    auto o = part.locate_distance(c.crit, to_double(d_out));
    if (!o) return c;
    outer = *o;
    if (!(outer == *inner) && dd(part.distance_range(outer).lo) >= d_out) outer = part.inner_neighbour(outer);
  }
  int count;
  if (inner->r == outer.r)
    count = outer.j - inner->j + 1;
  else if (inner->r == outer.r + 1)
    count = (inner->r * inner->r - inner->j + 1) + outer.j;
  else
    count = std::numeric_limits<int>::max();
  c.pieces = count;
  if (count <= 2 || (count == 3 && options_.policy == ThreePiecePolicy::inessential)) {
    c.action = Action::inessential;
    c.r = outer.r;
    c.j = outer.j;
  }
  return c;
}

void EscapeEngine::advance(OrbitInterval& w) const {
  const auto& m = map();
  const Side s = w.lo.x.lo > 0.0 ? Side::right : (w.lo.x.lo < 0.0 ? Side::left : w.lo.side);
  const bool inc = m.branches()[m.branch_index(w.lo.x.hi, s == Side::none ? Side::right : s)].increasing;
  OrbitPoint a = m.step(w.lo);
  OrbitPoint b = m.step(w.hi);
  if (w.trail) w.trail->push_back(to_double(w.tracked.front().x));
  for (auto& p : w.tracked) p = m.step(p);
  w.mid = m.step(OrbitPoint{w.mid, Side::none}).x;
  if (inc) {
    w.lo = a;
    w.hi = b;
  } else {
    w.lo = b;
    w.hi = a;
    w.orient = -w.orient;
  }
  ++w.n;
}

std::vector<OrbitInterval> EscapeEngine::split_at(const OrbitInterval& w, const std::vector<dd>& ys) const {
  std::vector<OrbitInterval> out;
  std::vector<dd> bx;
  if (w.image_only) {
    bx.assign(ys.size(), w.a);
  } else {
    for (const auto& x : pullback_sorted(w, ys)) {
      if (!x) throw std::runtime_error("inversion failure");
      bx.push_back(*x);
    }
  }
  // image pieces in ascending y order
  std::vector<std::pair<OrbitPoint, OrbitPoint>> images;
  OrbitPoint prev = w.lo;
  for (const dd& y : ys) {
    images.push_back({prev, OrbitPoint{y, Side::left}});
    prev = OrbitPoint{y, Side::right};
  }
  images.push_back({prev, w.hi});
  for (std::size_t k = 0; k < images.size(); ++k) {
    OrbitInterval c = w;
    c.lo = images[k].first;
    c.hi = images[k].second;
    if (w.orient > 0) {
      c.a = k == 0 ? w.a : bx[k - 1];
      c.b = k == ys.size() ? w.b : bx[k];
    } else {
      c.a = k == ys.size() ? w.a : bx[k];
      c.b = k == 0 ? w.b : bx[k - 1];
    }
    if (w.image_only) {
      c.a = w.a;
      c.b = w.b;
    }
    c.mid = midpoint(c.lo.x, c.hi.x);
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

bool holds(const OrbitInterval& w, const dd& y) { return w.lo.x <= y && y <= w.hi.x; }

// Image mode: keeps the child holding the first tracked point.
void keep_tracked(std::vector<OrbitInterval>& kids, StepResult& res) {
  for (auto& c : kids) {
    if (!holds(c, c.tracked.front().x)) continue;
    for (const auto& p : c.tracked)
      if (!holds(c, p.x)) res.separated = true;
    OrbitInterval keep = std::move(c);
    kids.clear();
    kids.push_back(std::move(keep));
    return;
  }
  throw std::runtime_error("tracked point outside its piece");
}

}  // namespace

StepResult EscapeEngine::chop(const OrbitInterval& w, const dd* target) const {
  const CriticalPartition& part = *partition_;
  const double delta = part.delta();
  const auto& crits = map().criticals();
  StepResult res;
  res.chops = 1;

  // mean derivative of f^n on w, used to estimate preimage widths of pieces
  const double mean_deriv = to_double(w.image_width()) / to_double(w.width());
  double min_image = options_.min_width * mean_deriv;
  if (w.image_only) {
    // cells far inside the deepest tracked point are lumped together
    double d_min = std::numeric_limits<double>::infinity();
    for (const auto& p : w.tracked)
      for (const auto& c : crits) d_min = std::min(d_min, std::fabs(to_double(p.x - dd(c.location))));
    min_image = std::max(1e-8 * d_min, 1e-300);
  }

  std::vector<Cell> cells;
  for (std::size_t i = 0; i < crits.size(); ++i) {
    const int ci = static_cast<int>(i);
    const dd loc(crits[i].location);
    const double dir = part.direction(ci);
    dd da = (w.lo.x - loc) * dd(dir);
    dd db = (w.hi.x - loc) * dd(dir);
    dd d_lo = std::max(std::min(da, db), dd(0.0));
    dd d_hi = std::max(da, db);
    if (d_hi <= dd(0.0) || d_lo >= dd(delta)) continue;
    auto pos = [&](const dd& d) { return loc + dd(dir) * d; };
    auto push = [&](const dd& dlo, const dd& dhi, CellKind kind, const PartitionIndex& idx, bool partial) {
      Cell cell;
      dd p1 = pos(dlo), p2 = pos(dhi);
      cell.lo = std::min(p1, p2);
      cell.hi = std::max(p1, p2);
      cell.kind = kind;
      cell.idx = idx;
      cell.partial = partial;
      cells.push_back(cell);
    };

    const int r0 = part.r_delta() + 1;
    PartitionIndex idx;
    dd top;
    if (d_hi >= dd(delta)) {
      idx = {ci, r0, r0 * r0, false};
      top = dd(delta);
    } else {
      auto o = part.locate_distance(ci, to_double(d_hi));
      idx = *o;
      if (!idx.clipped && dd(part.distance_range(idx).lo) >= d_hi) idx = part.inner_neighbour(idx);
      top = d_hi;
    }
    dd upper = top;
    int checked_ring = -1;
    while (true) {
      bool core = idx.clipped;
      if (!core && idx.r != checked_ring) {
        checked_ring = idx.r;
        double piece_len = CriticalPartition::piece(idx.r, 1).hi - CriticalPartition::piece(idx.r, 1).lo;
        if (piece_len < min_image) core = true;
      }
      if (core) {
        if (upper > d_lo) push(d_lo, upper, CellKind::core, idx, false);
        break;
      }
      auto rng = part.distance_range(idx);
      dd lo(rng.lo), hi(rng.hi);
      dd cl = std::max(lo, d_lo);
      dd ch = std::min(hi, upper);
      bool partial = lo < d_lo || hi > upper;
      if (ch > cl) push(cl, ch, CellKind::piece, idx, partial);
      upper = cl;
      if (lo <= d_lo) break;
      idx = part.inner_neighbour(idx);
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) { return x.lo < y.lo; });

  // fill the gaps with parts of the image outside Delta
  std::vector<Cell> all;
  dd cursor = w.lo.x;
  for (const auto& cell : cells) {
    if (cell.lo > cursor) all.push_back(Cell{cursor, cell.lo, CellKind::outside, {}, false});
    all.push_back(cell);
    cursor = cell.hi;
  }
  if (w.hi.x > cursor) all.push_back(Cell{cursor, w.hi.x, CellKind::outside, {}, false});
  if (!all.empty()) {
    all.front().lo = w.lo.x;
    all.back().hi = w.hi.x;
  }

  // merge end fragments into their neighbour
  auto full_piece = [](const Cell& c) { return c.kind == CellKind::piece && !c.partial; };
  auto absorbs = [&](const Cell& frag, const Cell& nb) {
    if (frag.kind == CellKind::piece && frag.partial) return full_piece(nb) || nb.kind == CellKind::core;
    if (frag.kind == CellKind::outside) return full_piece(nb) && frag.length() < nb.length();
    return false;
  };
  std::vector<Cell> groups;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const Cell& c = all[k];
    bool merged = false;
    if (!groups.empty() && absorbs(c, groups.back()) && (k + 1 == all.size() || c.kind == CellKind::piece)) {
      groups.back().hi = c.hi;
      merged = true;
    } else if (k + 1 < all.size() && absorbs(c, all[k + 1]) && (k == 0 || c.kind == CellKind::piece)) {
      all[k + 1].lo = c.lo;
      merged = true;
    }
    if (!merged) groups.push_back(c);
  }

  // with a target only the group holding it is materialized
  std::size_t first = 0, last = groups.size();
  if (target) {
    first = groups.size() - 1;
    for (std::size_t k = 0; k + 1 < groups.size(); ++k) {
      if (*target < groups[k].hi) {
        first = k;
        break;
      }
    }
    last = first + 1;
    if (w.image_only)
      for (const auto& p : w.tracked)
        if (p.x < groups[first].lo || p.x > groups[first].hi) res.separated = true;
  }
  std::vector<dd> ys;
  if (!w.image_only)
    for (std::size_t k = std::max<std::size_t>(first, 1); k <= std::min(last, groups.size() - 1); ++k)
      ys.push_back(groups[k].lo);
  auto pulled = pullback_sorted(w, ys);
  std::vector<std::optional<dd>> xs(groups.size(), w.image_only ? std::optional<dd>(w.a) : std::nullopt);
  for (std::size_t i = 0; i < pulled.size(); ++i) {
    if (!pulled[i]) {
      res.done.push_back(finish(w, Disposition::aborted, AbortReason::inversion));
      return res;
    }
    xs[std::max<std::size_t>(first, 1) + i - 1] = pulled[i];
  }

  for (std::size_t k = first; k < last; ++k) {
    const Cell& g = groups[k];
    OrbitInterval c = w;
    c.lo = k == 0 ? w.lo : OrbitPoint{g.lo, Side::right};
    c.hi = k + 1 == groups.size() ? w.hi : OrbitPoint{g.hi, Side::left};
    c.a = k == 0 ? (w.orient > 0 ? w.a : w.b) : *xs[k - 1];
    c.b = k + 1 == groups.size() ? (w.orient > 0 ? w.b : w.a) : *xs[k];
    if (c.b < c.a) std::swap(c.a, c.b);
    if (w.image_only) {
      c.a = w.a;
      c.b = w.b;
    }
    if (g.kind == CellKind::core) {
      res.done.push_back(finish(c, Disposition::aborted, AbortReason::precision));
      continue;
    }
    if (!w.image_only && (!(c.b > c.a) || c.width() < dd(options_.min_width))) {
      res.done.push_back(finish(c, Disposition::aborted, AbortReason::precision));
      continue;
    }
    c.mid = midpoint(c.lo.x, c.hi.x);
    if (g.kind == CellKind::outside) {
      c.free_from = w.n;
      res.children.push_back(std::move(c));
      continue;
    }
    BindingEntry be = binding_->binding(g.idx.crit, g.idx.r);
    ReturnEvent ev{w.n, g.idx.crit, g.idx.r, g.idx.j, true, be.p};
    c.events = std::make_shared<const EventNode>(EventNode{ev, w.events});
    if (be.exhausted) {
      res.done.push_back(finish(c, Disposition::aborted, AbortReason::precision));
      continue;
    }
    if (be.capped) {
      res.done.push_back(finish(c, Disposition::aborted, AbortReason::binding_horizon));
      continue;
    }
    c.free_from = w.n + be.p + 1;
    res.children.push_back(std::move(c));
  }
  return res;
}

StepResult EscapeEngine::drive(OrbitInterval w, const EscapeHandler& on_escape, const dd* target) const {
  StepResult res;
  const dd delta(partition_->delta());
  if (w.image_only) target = &w.tracked.front().x;
  if (!w.image_only && w.width() < dd(options_.mass_floor)) {
    res.done.push_back(finish(w, Disposition::aborted, AbortReason::mass_floor));
    return res;
  }
  try {
    while (true) {
      if (!(w.lo.x <= w.mid && w.mid <= w.hi.x)) {
        res.done.push_back(finish(w, Disposition::aborted, AbortReason::monotonicity));
        return res;
      }
      if (w.free()) {
        if (w.image_width() >= delta) {
          if (on_escape)
            on_escape(w, res);
          else
            res.done.push_back(finish(w, Disposition::escaped, AbortReason::none));
          return res;
        }
        if (!(w.image_width() > dd(0.0))) {
          res.done.push_back(finish(w, Disposition::aborted, AbortReason::precision));
          return res;
        }
        Classification c = classify(w);
        if (c.action == Action::chop) {
          dd y;
          if (target) y = w.image_only ? w.tracked.front().x : forward(*target, w.n);
          StepResult ch = chop(w, target ? &y : nullptr);
          ch.splits += res.splits;
          return ch;
        }
        if (c.action == Action::inessential) {
          BindingEntry be = binding_->binding(c.crit, c.r);
          ReturnEvent ev{w.n, c.crit, c.r, c.j, false, be.p};
          w.events = std::make_shared<const EventNode>(EventNode{ev, w.events});
          if (be.exhausted) {
            res.done.push_back(finish(w, Disposition::aborted, AbortReason::precision));
            return res;
          }
          if (be.capped) {
            res.done.push_back(finish(w, Disposition::aborted, AbortReason::binding_horizon));
            return res;
          }
          w.free_from = w.n + be.p + 1;
        }
      }
      if (w.n >= options_.n_max) {
        res.done.push_back(finish(w, Disposition::aborted, AbortReason::iterate_limit));
        return res;
      }
      dd s;
      if (special_inside(w, s)) {
        res.children = split_at(w, {s});
        if (w.image_only) keep_tracked(res.children, res);
        res.splits += 1;
        return res;
      }
      advance(w);
    }
  } catch (const DomainError&) {
    res.done.push_back(finish(w, Disposition::aborted, AbortReason::domain));
  } catch (const std::runtime_error&) {
    res.done.push_back(finish(w, Disposition::aborted, AbortReason::inversion));
  }
  return res;
}

EscapeEngine::RunResult EscapeEngine::run(std::vector<OrbitInterval> initial, const EscapeHandler& on_escape) const {
  RunResult out;
  std::vector<OrbitInterval> frontier = std::move(initial);
  while (!frontier.empty()) {
    ++out.stats.rounds;
    out.stats.peak_active = std::max(out.stats.peak_active, frontier.size());
    if (frontier.size() > options_.max_active) {
      for (std::size_t i = options_.max_active; i < frontier.size(); ++i)
        out.resolved.push_back(finish(frontier[i], Disposition::aborted, AbortReason::active_limit));
      frontier.resize(options_.max_active);
    }
    std::vector<StepResult> results(frontier.size());
    parallel_for(frontier.size(), options_.threads,
                 [&](std::size_t i) { results[i] = drive(std::move(frontier[i]), on_escape); });
    std::vector<OrbitInterval> next;
    for (auto& r : results) {
      out.stats.chops += r.chops;
      out.stats.splits += r.splits;
      for (auto& d : r.done) out.resolved.push_back(std::move(d));
      for (auto& c : r.children) next.push_back(std::move(c));
    }
    frontier.swap(next);
  }
  std::sort(out.resolved.begin(), out.resolved.end(), [](const Resolved& x, const Resolved& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return out;
}

TailHistogram tail_histogram(const std::vector<Resolved>& resolved, const dd& total, int n_last) {
  TailHistogram h;
  h.total = total;
  n_last = std::max(n_last, 0);
  std::vector<dd> at(static_cast<std::size_t>(n_last) + 1, dd(0.0));
  dd escaped_total(0.0);
  for (const auto& r : resolved) {
    dd len = r.b - r.a;
    if (r.disposition == Disposition::escaped) {
      escaped_total += len;
      if (r.time <= n_last) at[static_cast<std::size_t>(r.time)] += len;
    } else {
      h.aborted += len;
    }
  }
  dd cum(0.0);
  for (int n = 0; n <= n_last; ++n) {
    cum += at[static_cast<std::size_t>(n)];
    h.escaped.push_back(cum);
    dd act = escaped_total - cum;
    if (act < dd(0.0)) act = dd(0.0);
    h.active.push_back(act);
  }
  return h;
}

TailFit fit_tail(const std::vector<dd>& active, int n_lo, int n_hi) {
  TailFit f;
  f.n_lo = n_lo;
  f.n_hi = n_hi;
  std::vector<double> x, y;
  for (int n = std::max(n_lo, 0); n <= n_hi && n < static_cast<int>(active.size()); ++n) {
    double v = to_double(active[static_cast<std::size_t>(n)]);
    if (v > 0.0) {
      x.push_back(n);
      y.push_back(std::log(v));
    }
  }
  f.points = x.size();
  if (x.size() < 2) return f;
  LinearFit lf = fit_line(x, y);
  f.log_c = lf.intercept;
  f.gamma = -lf.slope;
  f.r2 = lf.r2;
  return f;
}

EscapePartition build_escape_partition(const EscapeEngine& engine, const dd& a, const dd& b) {
  EscapePartition ep;
  auto run = engine.run({engine.start(a, b)});
  ep.elements = std::move(run.resolved);
  ep.stats = run.stats;
  int n_last = 0;
  for (const auto& r : ep.elements) {
    if (r.disposition == Disposition::escaped) {
      ep.escaped_measure += r.b - r.a;
      n_last = std::max(n_last, r.time);
    } else {
      ep.aborted_measure += r.b - r.a;
    }
  }
  ep.tail = tail_histogram(ep.elements, b - a, n_last);
  return ep;
}

void write_escape_tail_csv(const TailHistogram& tail, const std::string& path, const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"n", "active_measure", "escaped_measure", "aborted_measure"});
  for (std::size_t n = 0; n < tail.active.size(); ++n)
    csv.row({std::to_string(n), fmt(to_double(tail.active[n])), fmt(to_double(tail.escaped[n])),
             fmt(to_double(tail.aborted))});
}

void write_events_log(const std::vector<Resolved>& resolved, const PiecewiseMap& map, const std::string& path,
                      const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# config_hash=" << config_hash << "\n";
  out << "# element left right nu c r j kind p\n";
  std::size_t id = 0;
  for (const auto& r : resolved) {
    for (const auto& e : itinerary(r.events)) {
      out << id << ' ' << to_string(r.a) << ' ' << to_string(r.b) << ' ' << e.nu << ' '
          << map.criticals()[static_cast<std::size_t>(e.crit)].label() << ' ' << e.r << ' ' << e.j << ' '
          << (e.essential ? "essential" : "inessential") << ' ' << e.p << '\n';
    }
    ++id;
  }
}

}  // namespace inducer
