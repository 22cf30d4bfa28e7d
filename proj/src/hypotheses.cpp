#include "inducer/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inducer/util.hpp"

namespace inducer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// measured rates carry accumulated rounding of this relative size
constexpr double kVerdictTol = 1e-12;

double next_point(const PiecewiseMap& map, double x) {
  return map.eval(x, map.is_special(x) ? Side::right : Side::none);
}

double log_deriv(const PiecewiseMap& map, double x) {
  return std::log(std::fabs(map.deriv(x, map.is_special(x) ? Side::right : Side::none)));
}

std::vector<Interval> image_of_delta(const PiecewiseMap& map, double delta) {
  std::vector<Interval> out;
  for (const auto& c : map.criticals()) {
    double inner = map.eval(c.location, c.side);
    double far = c.location + (c.side == Side::right ? delta : -delta);
    far = std::clamp(far, map.domain().lo, map.domain().hi);
    double outer = map.eval(far, map.is_special(far) ? flip(c.side) : Side::none);
    out.push_back({std::min(inner, outer), std::max(inner, outer)});
  }
  return out;
}

struct BlockStats {
  double lambda = kInf;
  int lambda_n = 0;
  bool lambda_strong = false;
  double log_kappa = kInf;
  std::size_t blocks = 0;
};

}  // namespace

H1Result check_h1(const PiecewiseMap& map, const H1Options& opt) {
  if (opt.max_block_len < 1 || opt.samples < 1) throw ConfigurationError("h1 needs max_block_len >= 1 and samples >= 1");
  if (!(opt.delta > 0.0)) throw ConfigurationError("h1 needs delta > 0");
  if (!map.critical_locations().empty() && !(2.0 * opt.delta < map.min_critical_gap()))
    throw ConfigurationError("delta must be below half the minimal gap between critical points");

  const bool empty_crit = map.critical_locations().empty();
  const auto fdelta = image_of_delta(map, opt.delta);
  auto in_delta = [&](double x) { return !empty_crit && map.distance_to_crit(x) <= opt.delta; };
  auto in_fdelta = [&](double x) {
    for (const auto& w : fdelta)
      if (w.contains(x)) return true;
    return false;
  };

  // grid plus golden-ratio jitter, distributed over the core by length
  std::vector<double> starts;
  double total = 0.0;
  for (const auto& w : map.core()) total += w.length();
  constexpr double kGolden = 0.61803398874989484820;
  for (const auto& w : map.core()) {
    int n = std::max(1, static_cast<int>(std::llround(opt.samples * w.length() / total)));
    for (int k = 0; k < n; ++k) {
      double u = std::fmod(0.5 + k * kGolden, 1.0);
      starts.push_back(w.lo + w.length() * (k + u) / n);
    }
  }

  const double log_delta = std::log(opt.delta);
  const double log_kappa = std::log(opt.kappa);
  std::vector<BlockStats> stats(starts.size());
  parallel_for(starts.size(), opt.threads, [&](std::size_t i) {
    double x = starts[i];
    if (in_delta(x)) return;
    BlockStats& s = stats[i];
    const bool starts_in_image = in_fdelta(x);
    double sum = 0.0;
    for (int n = 1; n <= opt.max_block_len; ++n) {
      sum += log_deriv(map, x);
      x = next_point(map, x);
      const bool ends_in_delta = in_delta(x);
      const bool strong = empty_crit || starts_in_image || ends_in_delta;
      const double w = strong ? 0.0 : 1.0;
      double lam = (sum - w * log_delta - log_kappa) / n;
      if (lam < s.lambda) {
        s.lambda = lam;
        s.lambda_n = n;
        s.lambda_strong = strong;
      }
      s.log_kappa = std::min(s.log_kappa, sum - opt.lambda * n - w * log_delta);
      ++s.blocks;
      if (ends_in_delta) break;
    }
  });

  H1Result res;
  res.lambda = opt.lambda;
  res.kappa = opt.kappa;
  res.lambda_hat = kInf;
  double lk = kInf;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto& s = stats[i];
    res.blocks += s.blocks;
    if (s.lambda < res.lambda_hat) {
      res.lambda_hat = s.lambda;
      res.witness_x = starts[i];
      res.witness_n = s.lambda_n;
      res.witness_strong = s.lambda_strong;
    }
    lk = std::min(lk, s.log_kappa);
  }
  if (res.blocks == 0) throw ConfigurationError("h1: no sample point lies outside Delta");
  res.kappa_hat = std::exp(lk);
  res.pass = opt.lambda <= res.lambda_hat + kVerdictTol * std::max(1.0, std::fabs(res.lambda_hat));
  return res;
}

std::vector<H2Result> check_h2(const PiecewiseMap& map, double delta, double alpha, double Lambda, int horizon) {
  if (horizon < 1) throw ConfigurationError("h2 horizon must be >= 1");
  std::vector<H2Result> out;
  for (const auto& c : map.criticals()) {
    if (!c.is_critical()) continue;
    H2Result r;
    r.c = c;
    r.horizon = horizon;
    r.alpha = alpha;
    r.Lambda = Lambda;
    r.Lambda_hat = kInf;
    OrbitPoint p = map.step(OrbitPoint{dd(c.location), c.side});
    double log_growth = 0.0;
    for (int k = 1; k <= horizon; ++k) {
      double dist = kInf;
      for (double loc : map.critical_locations()) dist = std::min(dist, std::fabs(to_double(p.x - dd(loc))));
      if (dist == 0.0) {
        r.hit_k = k;
        break;
      }
      if (dist < delta) {
        double a = std::log(delta / dist) / k;
        if (a > r.alpha_required) {
          r.alpha_required = a;
          r.recurrence_k = k;
        }
      }
      log_growth += map.log_abs_deriv(p);
      double rate = log_growth / k;
      if (rate < r.Lambda_hat) {
        r.Lambda_hat = rate;
        r.growth_k = k;
      }
      p = map.step(p);
    }
    r.pass = r.hit_k == 0 && alpha >= r.alpha_required * (1.0 - kVerdictTol) &&
             Lambda <= r.Lambda_hat + kVerdictTol * std::max(1.0, std::fabs(r.Lambda_hat));
    out.push_back(r);
  }
  return out;
}

std::vector<double> preimages(const PiecewiseMap& map, double y) {
  std::vector<double> out;
  for (const auto& b : map.branches()) {
    double va = b.expr.eval(b.lo);
    double vb = b.expr.eval(b.hi);
    if (y < std::min(va, vb) || y > std::max(va, vb)) continue;
    double lo = b.lo;
    double hi = b.hi;
    double x;
    if (y == va) {
      x = b.lo;
    } else if (y == vb) {
      x = b.hi;
    } else {
      const bool inc = vb > va;
      while (true) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double v = b.expr.eval(mid);
        if ((v < y) == inc)
          lo = mid;
        else
          hi = mid;
      }
      x = std::fabs(b.expr.eval(lo) - y) <= std::fabs(b.expr.eval(hi) - y) ? lo : hi;
    }
    out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

H3Result check_h3(const PiecewiseMap& map, double c_star, int depth, double mesh, double target, std::size_t max_nodes) {
  if (depth < 0) throw ConfigurationError("h3 depth must be >= 0");
  if (!map.domain().contains(c_star)) throw ConfigurationError("c_star outside the domain");
  H3Result res;
  res.c_star = c_star;
  res.depth = depth;
  res.target = target;

  auto profile = [&](const std::vector<double>& pts) {
    double gap = 0.0;
    for (const auto& w : map.core()) {
      double prev = w.lo;
      for (double x : pts) {
        if (x < w.lo || x > w.hi) continue;
        gap = std::max(gap, x - prev);
        prev = x;
      }
      gap = std::max(gap, w.hi - prev);
    }
    return gap;
  };

  std::vector<double> level{c_star};
  res.max_gap.push_back(profile(level));
  res.count.push_back(1);
  for (int t = 1; t <= depth; ++t) {
    std::vector<double> next;
    for (double y : level) {
      for (double x : preimages(map, y)) {
        next.push_back(x);
        if (!map.is_special(x)) {
          double d = std::fabs(map.deriv(x));
          if (d < 1e-12) ++res.ill_conditioned;
        }
        if (map.distance_to_crit(x) <= mesh) res.flagged.push_back(x);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    level.swap(next);
    res.max_gap.push_back(profile(level));
    res.count.push_back(level.size());
    if (level.size() > max_nodes && t < depth) {
      res.truncated = true;
      break;
    }
  }
  std::sort(res.flagged.begin(), res.flagged.end());
  res.flagged.erase(std::unique(res.flagged.begin(), res.flagged.end()), res.flagged.end());
  res.pass = !res.truncated && res.flagged.empty() && res.max_gap.back() <= target;
  return res;
}

bool HypothesisReport::pass() const {
  if (!h1.pass || !h3.pass) return false;
  for (const auto& r : h2)
    if (!r.pass) return false;
  for (const auto& n : nondegeneracy)
    if (!n.second.pass) return false;
  return true;
}

void write_hypotheses_csv(const HypothesisReport& report, const std::string& path, const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"check", "subject", "candidate", "measured", "verdict", "witness"});
  auto verdict = [](bool ok) { return std::string(ok ? "pass" : "fail"); };
  for (const auto& [c, n] : report.nondegeneracy) {
    csv.row({"nondegeneracy", c.label(), "C=" + fmt(c.constant),
             "C_hat=" + fmt(n.constant) + ";value=" + fmt(n.value_constant) + ";deriv=" + fmt(n.deriv_constant) +
                 ";deriv2=" + fmt(n.deriv2_constant),
             verdict(n.pass), "x=" + fmt(n.worst_x)});
  }
  const auto& h1 = report.h1;
  csv.row({"h1", "", "lambda=" + fmt(h1.lambda) + ";kappa=" + fmt(h1.kappa),
           "lambda_hat=" + fmt(h1.lambda_hat) + ";kappa_hat=" + fmt(h1.kappa_hat) + ";blocks=" + std::to_string(h1.blocks),
           verdict(h1.pass),
           "x0=" + fmt(h1.witness_x) + ";n=" + std::to_string(h1.witness_n) + ";strong=" + (h1.witness_strong ? "1" : "0")});
  for (const auto& r : report.h2) {
    std::string witness = r.hit_k ? "hit_k=" + std::to_string(r.hit_k)
                                  : "recurrence_k=" + std::to_string(r.recurrence_k) + ";growth_k=" + std::to_string(r.growth_k);
    csv.row({"h2", r.c.label(), "alpha=" + fmt(r.alpha) + ";Lambda=" + fmt(r.Lambda),
             "alpha_required=" + fmt(r.alpha_required) + ";Lambda_hat=" + fmt(r.Lambda_hat) + ";horizon=" +
                 std::to_string(r.horizon),
             verdict(r.pass), witness});
  }
  const auto& h3 = report.h3;
  std::string profile;
  for (std::size_t t = 0; t < h3.max_gap.size(); ++t) profile += (t ? ";" : "") + fmt(h3.max_gap[t]);
  csv.row({"h3", fmt(h3.c_star), "depth=" + std::to_string(h3.depth) + ";target=" + fmt(h3.target),
           "max_gap=" + profile + ";ill_conditioned=" + std::to_string(h3.ill_conditioned) +
               (h3.truncated ? ";truncated=1" : ""),
           verdict(h3.pass), h3.flagged.empty() ? "" : "flagged=" + fmt(h3.flagged.front())});
}

}  // namespace inducer
