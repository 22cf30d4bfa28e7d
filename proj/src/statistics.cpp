#include "inducer/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "inducer/util.hpp"

namespace inducer {

Observable make_observable(std::string_view text, double holder_alpha) {
  if (!(holder_alpha > 0.0 && holder_alpha <= 1.0)) throw ConfigurationError("Hoelder exponent must lie in (0, 1]");
  Observable phi;
  phi.expr = Expression::parse(text);
  phi.text = std::string(text);
  phi.holder_alpha = holder_alpha;
  return phi;
}

double estimate_holder_constant(const Observable& phi, Interval I, int grid) {
  std::vector<double> xs(static_cast<std::size_t>(grid) + 1), ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = I.lo + I.length() * static_cast<double>(i) / grid;
    ys[i] = phi(xs[i]);
  }
  double c = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      c = std::max(c, std::fabs(ys[i] - ys[j]) / std::pow(xs[j] - xs[i], phi.holder_alpha));
  return c;
}

Interval statistics_support(const PiecewiseMap& map) {
  if (map.core().empty()) return map.domain();
  Interval hull = map.core().front();
  for (const auto& I : map.core()) {
    hull.lo = std::min(hull.lo, I.lo);
    hull.hi = std::max(hull.hi, I.hi);
  }
  return hull;
}

double l1_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.bins() != b.bins()) throw std::invalid_argument("histograms differ in bin count");
  double s = 0.0;
  for (std::size_t i = 0; i < a.bins(); ++i) s += std::fabs(a.masses[i] - b.masses[i]);
  return s;
}

namespace {

std::vector<double> uniform_edges(Interval I, std::size_t bins) {
  if (bins == 0) throw ConfigurationError("bins must be positive");
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = I.lo + I.length() * static_cast<double>(i) / static_cast<double>(bins);
  e.back() = I.hi;
  return e;
}

std::size_t bin_of(double x, Interval I, std::size_t bins) {
  double t = (x - I.lo) / I.length() * static_cast<double>(bins);
  if (!(t > 0.0)) return 0;
  return std::min(bins - 1, static_cast<std::size_t>(t));
}

void normalize(std::vector<double>& v) {
  double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (s > 0.0)
    for (auto& x : v) x /= s;
}

}  // namespace

OrbitSampler::OrbitSampler(const PiecewiseMap& map, std::uint64_t seed, std::uint64_t stream)
    : map_(&map), unif_(0.0, 1.0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  rng_.seed(seq);
  jitter_ = std::ldexp(map.domain().length(), -52);
  Interval s = statistics_support(map);
  x_ = settle(s.lo + s.length() * unif_(rng_));
}

double OrbitSampler::settle(double x) {
  const Interval& J = map_->domain();
  x = std::clamp(x, J.lo, J.hi);
  while (map_->is_special(x) && x > J.lo && x < J.hi) {
    x = std::nextafter(x, J.hi);
    ++hits_;
  }
  return x;
}

double OrbitSampler::next() {
  double y = map_->eval(x_);
  y += jitter_ * (2.0 * unif_(rng_) - 1.0);
  x_ = settle(y);
  return x_;
}

double OrbitSampler::log_deriv() const { return std::log(std::fabs(map_->deriv(x_))); }

EmpiricalMeasure acip_orbit(const PiecewiseMap& map, std::size_t n_iter, std::size_t burn_in, std::size_t bins,
                            std::uint64_t seed) {
  Interval I = statistics_support(map);
  EmpiricalMeasure m;
  m.edges = uniform_edges(I, bins);
  m.masses.assign(bins, 0.0);
  m.estimator = "orbit-histogram";
  OrbitSampler orbit(map, seed, 0);
  for (std::size_t i = 0; i < burn_in; ++i) orbit.next();
  std::vector<std::uint64_t> counts(bins, 0);
  for (std::size_t i = 0; i < n_iter; ++i) counts[bin_of(orbit.next(), I, bins)]++;
  for (std::size_t i = 0; i < bins; ++i) m.masses[i] = static_cast<double>(counts[i]) / static_cast<double>(n_iter);
  m.samples = n_iter;
  return m;
}

EmpiricalMeasure acip_tower(const PiecewiseMap& map, const Tower& tower, std::size_t bins,
                            const TowerMeasureOptions& opt) {
  const Interval D = tower.config.delta_star_interval;
  const std::size_t nb = opt.ulam_bins;
  const std::size_t m = std::max<std::size_t>(1, opt.points_per_element);

  // Points of Delta* with known return: stratified points of each element and
  // the returned sample points, each carrying its share of Lebesgue measure.
  struct Point {
    dd x;
    int T;
    double weight;
    std::size_t from = 0;
    std::size_t to = 0;
  };
  std::vector<Point> pts;
  std::vector<const ReturnSample*> origin;  // sample behind each point, if any
  pts.reserve(tower.elements.size() * m + tower.sampled.size());
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& e : tower.elements) {
    dd len = e.b - e.a;
    for (std::size_t j = 0; j < m; ++j) {
      double t = (static_cast<double>(j) + U(rng)) / static_cast<double>(m);
      pts.push_back({e.a + len * dd(t), e.T, to_double(len) / static_cast<double>(m)});
    }
  }
  origin.assign(pts.size(), nullptr);
  for (const auto& s : tower.sampled) {
    if (s.disposition != Disposition::returned || static_cast<int>(s.trail.size()) != s.T) continue;
    pts.push_back({s.x, s.T, tower.sample_weight});
    origin.push_back(&s);
  }
  if (pts.empty()) throw ConfigurationError("tower holds no returned mass");

  parallel_for(pts.size(), opt.threads, [&](std::size_t i) {
    Point& p = pts[i];
    p.from = bin_of(to_double(p.x), D, nb);
    dd image = origin[i] ? origin[i]->image : forward_from(map, p.x, Side::right, p.T);
    p.to = bin_of(to_double(image), D, nb);
  });

  std::vector<double> row_mass(nb, 0.0);
  for (const auto& p : pts) row_mass[p.from] += p.weight;

  EmpiricalMeasure out;
  out.estimator = "tower-pushforward";
  std::vector<double> mu(nb, 0.0), next(nb);
  for (std::size_t i = 0; i < nb; ++i) mu[i] = row_mass[i];
  normalize(mu);
  out.converged = false;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (const auto& p : pts) next[p.to] += mu[p.from] * p.weight / row_mass[p.from];
    normalize(next);
    double change = 0.0;
    for (std::size_t i = 0; i < nb; ++i) change += std::fabs(next[i] - mu[i]);
    mu.swap(next);
    out.iterations = it;
    if (change < opt.tolerance) {
      out.converged = true;
      break;
    }
  }

  // Spread every point's mass along its orbit segment.
  const Interval I = statistics_support(map);
  out.edges = uniform_edges(I, bins);
  out.masses.assign(bins, 0.0);
  std::vector<double> weight(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    weight[i] = row_mass[pts[i].from] > 0.0 ? mu[pts[i].from] * pts[i].weight / row_mass[pts[i].from] : 0.0;
  std::vector<std::vector<std::uint32_t>> visits(pts.size());
  parallel_for(pts.size(), opt.threads, [&](std::size_t i) {
    visits[i].reserve(static_cast<std::size_t>(pts[i].T));
    if (origin[i]) {
      for (double y : origin[i]->trail) visits[i].push_back(static_cast<std::uint32_t>(bin_of(y, I, bins)));
      return;
    }
    OrbitPoint p{pts[i].x, Side::right};
    for (int k = 0; k < pts[i].T; ++k) {
      visits[i].push_back(static_cast<std::uint32_t>(bin_of(to_double(p.x), I, bins)));
      p = map.step(p);
    }
  });
  double norm = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    norm += weight[i] * pts[i].T;
    for (auto b : visits[i]) out.masses[b] += weight[i];
  }
  for (auto& v : out.masses) v /= norm;
  out.normalization = norm;
  out.samples = pts.size();
  return out;
}

LyapunovResult lyapunov(const PiecewiseMap& map, std::size_t n_iter, std::size_t burn_in, std::uint64_t seed) {
  constexpr std::size_t batches = 20;
  LyapunovResult r;
  OrbitSampler orbit(map, seed, 0);
  for (std::size_t i = 0; i < burn_in; ++i) orbit.next();
  const std::size_t per = std::max<std::size_t>(1, n_iter / batches);
  std::vector<double> means;
  double total = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < per; ++i) {
      double l = orbit.log_deriv();
      orbit.next();
      if (!std::isfinite(l)) {
        ++r.skipped;
        continue;
      }
      s += l;
      ++k;
    }
    if (k > 0) means.push_back(s / static_cast<double>(k));
    total += s;
    r.samples += k;
  }
  if (r.samples == 0) return r;
  r.value = total / static_cast<double>(r.samples);
  double v = 0.0;
  for (double x : means) v += (x - r.value) * (x - r.value);
  if (means.size() > 1) r.stderr_ = std::sqrt(v / static_cast<double>(means.size() - 1) / static_cast<double>(means.size()));
  return r;
}

namespace {

// C_n over indices [lo, hi) of the orbit arrays, signed.
std::vector<double> cross_moments(const std::vector<double>& ph, const std::vector<double>& ps, std::size_t lo,
                                  std::size_t hi, int n_max) {
  std::vector<double> c(static_cast<std::size_t>(n_max) + 1);
  const double len = static_cast<double>(hi - lo);
  double psi_mean = 0.0;
  for (std::size_t i = lo; i < hi; ++i) psi_mean += ps[i];
  psi_mean /= len;
  for (int n = 0; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    double prod = 0.0, phi_mean = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      prod += ps[i] * ph[i + k];
      phi_mean += ph[i + k];
    }
    c[k] = prod / len - psi_mean * (phi_mean / len);
  }
  return c;
}

}  // namespace

CorrelationResult correlation(const PiecewiseMap& map, const Observable& phi, const Observable& psi, int n_max,
                              std::size_t N, std::uint64_t seed) {
  constexpr std::size_t batches = 20;
  if (n_max < 0) throw ConfigurationError("n_max must be non-negative");
  if (static_cast<double>(n_max) >= static_cast<double>(N) / 10.0) throw ConfigurationError("n_max must stay below N/10");
  const std::size_t len = N + static_cast<std::size_t>(n_max);
  std::vector<double> ph(len), ps(len);
  OrbitSampler orbit(map, seed, 1);
  for (int i = 0; i < 1000; ++i) orbit.next();
  for (std::size_t i = 0; i < len; ++i) {
    double x = orbit.next();
    ph[i] = phi(x);
    ps[i] = psi(x);
  }
  CorrelationResult r;
  r.c_signed = cross_moments(ph, ps, 0, N, n_max);
  r.c.resize(r.c_signed.size());
  for (std::size_t n = 0; n < r.c.size(); ++n) r.c[n] = std::fabs(r.c_signed[n]);

  const std::size_t per = N / batches;
  std::vector<std::vector<double>> bc;
  for (std::size_t b = 0; b < batches; ++b) bc.push_back(cross_moments(ph, ps, b * per, (b + 1) * per, n_max));
  r.batch_stderr.assign(r.c.size(), 0.0);
  for (std::size_t n = 0; n < r.c.size(); ++n) {
    double mean = 0.0;
    for (const auto& v : bc) mean += v[n];
    mean /= batches;
    double var = 0.0;
    for (const auto& v : bc) var += (v[n] - mean) * (v[n] - mean);
    r.batch_stderr[n] = std::sqrt(var / (batches - 1) / batches);
  }
  if (r.c.size() > 1) {
    double s = 0.0;
    for (std::size_t n = 1; n < r.c.size(); ++n) s += r.batch_stderr[n];
    r.floor = s / static_cast<double>(r.c.size() - 1);
  } else {
    r.floor = r.batch_stderr[0];
  }
  for (std::size_t n = 0; n < r.c.size(); ++n)
    if (r.c[n] < 10.0 * r.floor) {
      r.first_below = static_cast<int>(n);
      break;
    }
  r.fit_lo = 0;
  r.fit_hi = n_max;
  for (std::size_t n = 0; n < r.c.size(); ++n)
    if (r.c[n] <= 3.0 * r.floor) {
      r.fit_hi = static_cast<int>(n);
      break;
    }
  std::vector<double> xs, ys;
  for (int n = r.fit_lo; n <= r.fit_hi; ++n) {
    double v = r.c[static_cast<std::size_t>(n)];
    if (v > 0.0) {
      xs.push_back(n);
      ys.push_back(std::log(v));
    }
  }
  if (xs.size() >= 2) {
    LinearFit f = fit_line(xs, ys);
    r.slope = f.slope;
    r.r2 = f.r2;
  }
  r.fit_points = xs.size();
  return r;
}

double ks_normal(std::vector<double> sample, double mean, double sigma2) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  const double sd = std::sqrt(sigma2);
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double F = sd > 0.0 ? 0.5 * std::erfc(-(sample[i] - mean) / (sd * std::sqrt(2.0))) : (sample[i] < mean ? 0.0 : 1.0);
    d = std::max({d, std::fabs(F - static_cast<double>(i) / n), std::fabs(F - static_cast<double>(i + 1) / n)});
  }
  return d;
}

CltResult clt_test(const PiecewiseMap& map, const Observable& phi, double center, int n, std::size_t trials,
                   std::uint64_t seed, int threads, int burn_in) {
  if (n <= 0 || trials < 2) throw ConfigurationError("clt_test needs n > 0 and at least two trials");
  CltResult r;
  r.sums.assign(trials, 0.0);
  parallel_for(trials, threads, [&](std::size_t t) {
    OrbitSampler orbit(map, seed, t);
    for (int i = 0; i < burn_in; ++i) orbit.next();
    double s = 0.0;
    double x = orbit.x();
    for (int i = 0; i < n; ++i) {
      s += phi(x) - center;
      x = orbit.next();
    }
    r.sums[t] = s / std::sqrt(static_cast<double>(n));
  });
  const double k = static_cast<double>(trials);
  r.mean = std::accumulate(r.sums.begin(), r.sums.end(), 0.0) / k;
  double v = 0.0;
  for (double s : r.sums) v += (s - r.mean) * (s - r.mean);
  r.sigma2 = v / (k - 1.0);
  double scale = 0.0;
  for (double s : r.sums) scale = std::max(scale, std::fabs(s));
  r.coboundary_warning = !(r.sigma2 > 1e-20) || r.sigma2 <= 1e-24 * scale * scale;
  r.ks = r.coboundary_warning ? 0.0 : ks_normal(r.sums, 0.0, r.sigma2);
  return r;
}

double green_kubo(const CorrelationResult& corr) {
  if (corr.c_signed.empty()) return 0.0;
  double s = corr.c_signed[0];
  for (std::size_t n = 1; n < corr.c_signed.size(); ++n) {
    if (corr.c[n] < 3.0 * corr.floor) break;
    s += 2.0 * corr.c_signed[n];
  }
  return s;
}

InducedMap::InducedMap(const PiecewiseMap& map, const Tower& tower, const ReturnFollower* follower)
    : map_(&map), tower_(&tower), follower_(follower) {
  order_.resize(tower.elements.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::sort(order_.begin(), order_.end(),
            [&](std::size_t i, std::size_t j) { return tower.elements[i].a < tower.elements[j].a; });
}

std::optional<std::size_t> InducedMap::locate(const dd& x) const {
  auto it = std::upper_bound(order_.begin(), order_.end(), x,
                             [&](const dd& v, std::size_t i) { return v < tower_->elements[i].a; });
  if (it == order_.begin()) return std::nullopt;
  std::size_t i = *std::prev(it);
  if (x < tower_->elements[i].b) return i;
  return std::nullopt;
}

dd InducedMap::apply(std::size_t i, const dd& x) const { return forward_from(*map_, x, Side::right, element(i).T); }

double InducedMap::log_jacobian(std::size_t i, const dd& x) const {
  OrbitPoint p{x, Side::right};
  double s = 0.0;
  for (int k = 0; k < element(i).T; ++k) {
    s += map_->log_abs_deriv(p);
    p = map_->step(p);
  }
  return s;
}

Separation separation_time(const InducedMap& F, const dd& x0, const dd& y0, int cap) {
  Separation r;
  dd x = x0, y = y0;
  while (true) {
    auto i = F.locate(x);
    auto j = F.locate(y);
    if (i.has_value() != j.has_value()) return r;
    if (!i) {
      if (F.follower()) {
        PairSeparation p = F.follower()->separation(x, y, cap - r.s);
        r.s += p.s;
        r.capped = p.capped;
        r.unresolved = p.unresolved;
        return r;
      }
      r.unresolved = true;
      return r;
    }
    if (*i != *j) return r;
    if (++r.s >= cap) {
      r.capped = true;
      return r;
    }
    x = F.apply(*i, x);
    y = F.apply(*j, y);
  }
}

std::vector<PairSample> sample_pairs(const Tower& tower, std::size_t pairs_per_element, std::size_t max_elements,
                                     std::uint64_t seed) {
  static const double fixed[] = {0.001, 0.25, 0.5, 0.75, 0.999};
  std::vector<std::size_t> ids(tower.elements.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  if (ids.size() > max_elements && max_elements > 0) {
    std::vector<std::size_t> pick;
    const double step = static_cast<double>(ids.size()) / static_cast<double>(max_elements);
    for (std::size_t k = 0; k < max_elements; ++k) pick.push_back(static_cast<std::size_t>(k * step));
    ids.swap(pick);
  }
  std::vector<PairSample> out;
  for (std::size_t id : ids) {
    const auto& e = tower.elements[id];
    const dd len = e.b - e.a;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(id)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (std::size_t k = 0; k < pairs_per_element; ++k) {
      double s, t;
      if (k + 1 < std::size(fixed)) {
        s = fixed[k];
        t = fixed[k + 1];
      } else {
        // Random pairs at separations spread over six decades.
        s = U(rng);
        double gap = std::pow(10.0, -6.0 * U(rng));
        t = s + (U(rng) < 0.5 ? -gap : gap) * std::min(s, 1.0 - s);
      }
      out.push_back({id, e.a + len * dd(s), e.a + len * dd(t)});
    }
  }
  return out;
}

namespace {

struct PairEval {
  Separation sep;
  double value = 0.0;
};

SymbolicCheck reduce(const std::vector<PairEval>& ev, double sigma) {
  SymbolicCheck r;
  r.sigma = sigma;
  for (const auto& e : ev) {
    if (e.sep.unresolved) {
      ++r.unresolved;
      continue;
    }
    if (e.sep.capped) ++r.capped;
    ++r.pairs;
    r.max_s = std::max(r.max_s, e.sep.s);
    r.constant = std::max(r.constant, e.value / std::pow(sigma, e.sep.s));
  }
  return r;
}

}  // namespace

SymbolicCheck symbolic_distortion_check(const InducedMap& F, double sigma, double lambda_prime,
                                        const std::vector<PairSample>& pairs, int threads) {
  if (!(sigma < 1.0 && sigma * lambda_prime > 1.0)) {
    SymbolicCheck r;
    r.sigma = sigma;
    r.rejected = true;
    r.note = "sigma must lie in (1/lambda', 1) with lambda' = " + fmt(lambda_prime);
    return r;
  }
  std::vector<PairEval> ev(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto& p = pairs[k];
    ev[k].sep = separation_time(F, p.x, p.y);
    double d = F.log_jacobian(p.element, p.x) - F.log_jacobian(p.element, p.y);
    ev[k].value = std::fabs(std::expm1(d));
  });
  return reduce(ev, sigma);
}

SymbolicCheck holder_lift_check(const InducedMap& F, const Observable& phi, double sigma, double lambda_prime,
                                const std::vector<PairSample>& pairs, int threads) {
  if (!(sigma < 1.0 && sigma > std::pow(lambda_prime, -phi.holder_alpha))) {
    SymbolicCheck r;
    r.sigma = sigma;
    r.rejected = true;
    r.note = "sigma must exceed lambda'^-alpha = " + fmt(std::pow(lambda_prime, -phi.holder_alpha));
    return r;
  }
  std::vector<PairEval> ev(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto& p = pairs[k];
    ev[k].sep = separation_time(F, p.x, p.y);
    OrbitPoint a{p.x, Side::right}, b{p.y, Side::right};
    double v = 0.0;
    for (int j = 0; j < F.element(p.element).T; ++j) {
      v = std::max(v, std::fabs(phi(to_double(a.x)) - phi(to_double(b.x))));
      a = F.map().step(a);
      b = F.map().step(b);
    }
    ev[k].value = v;
  });
  return reduce(ev, sigma);
}

CylinderCheck cylinder_check(const InducedMap& F, double lambda_prime, const std::vector<PairSample>& pairs,
                             int threads) {
  const double L = F.tower().config.delta_star_interval.length();
  std::vector<PairEval> ev(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto& p = pairs[k];
    ev[k].sep = separation_time(F, p.x, p.y);
    ev[k].value = std::fabs(to_double(p.x - p.y)) / (L * std::pow(lambda_prime, -ev[k].sep.s));
  });
  CylinderCheck r;
  for (const auto& e : ev) {
    if (e.sep.unresolved) continue;
    ++r.pairs;
    r.worst_ratio = std::max(r.worst_ratio, e.value);
    if (e.value > 1.0) ++r.violations;
  }
  return r;
}

void write_acip_csv(const std::vector<EmpiricalMeasure>& measures, const std::string& path,
                    const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"estimator", "bin", "left", "right", "mass", "density"});
  for (const auto& m : measures)
    for (std::size_t i = 0; i < m.bins(); ++i)
      csv.row({m.estimator, std::to_string(i), fmt(m.edges[i]), fmt(m.edges[i + 1]), fmt(m.masses[i]),
               fmt(m.density(i))});
}

void write_correlation_csv(const CorrelationResult& corr, const std::string& path, const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"n", "c_n", "c_signed", "batch_stderr", "noise_floor", "in_fit"});
  for (std::size_t n = 0; n < corr.c.size(); ++n) {
    const int k = static_cast<int>(n);
    csv.row({std::to_string(n), fmt(corr.c[n]), fmt(corr.c_signed[n]), fmt(corr.batch_stderr[n]), fmt(corr.floor),
             (k >= corr.fit_lo && k <= corr.fit_hi) ? "1" : "0"});
  }
}

void write_clt_csv(const CltResult& clt, const std::string& path, const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"trial", "normalized_sum"});
  for (std::size_t t = 0; t < clt.sums.size(); ++t) csv.row({std::to_string(t), fmt(clt.sums[t])});
}

void write_symbolic_csv(const std::vector<SymbolicRow>& rows, const std::string& path,
                        const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"check", "sigma", "budget", "constant", "pairs"});
  for (const auto& r : rows)
    csv.row({r.check, fmt(r.sigma), std::to_string(r.budget), fmt(r.constant), std::to_string(r.pairs)});
}

}  // namespace inducer
