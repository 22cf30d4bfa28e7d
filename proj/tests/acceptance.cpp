// One line per acceptance criterion; exit status 0 iff every line passes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "inducer/run.hpp"

using namespace inducer;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// |f^{j+1}(d) - f^{j+1}(0)| for f(x) = 1 - 2x^2, from x = cos(theta):
// f^n(cos theta) = cos(2^n theta) and c = 0 gives 2 sin^2(2^j asin d).
int conjugacy_binding(double d, double delta, double alpha, int horizon) {
  const long double a = std::asin(static_cast<long double>(d));
  for (int j = 0; j <= horizon; ++j) {
    const long double s = std::sin(std::ldexp(a, j));
    if (!(2.0L * s * s <= static_cast<long double>(delta) * std::exp(-2.0L * alpha * j))) return std::max(0, j - 1);
  }
  return horizon;
}

struct MapRun {
  RunContext ctx;
  std::optional<Setup> setup;
  CheckOutcome check;
  TowerOutcome tower;
  StatsOutcome stats;
};

void run_all(MapRun& m, const std::string& cfg, const std::string& out, int threads) {
  m.ctx.config = RunConfig::load(cfg);
  m.ctx.out = out;
  m.ctx.threads = threads;
  fs::remove_all(out);
  echo_config(m.ctx);
  m.setup.emplace(m.ctx.config);
  m.check = run_check(m.ctx, *m.setup);
  m.tower = run_tower(m.ctx, *m.setup);
  m.stats = run_stats(m.ctx, *m.setup, "all", &m.tower);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Number of output files that differ between two run directories.
std::size_t differing(const std::string& a, const std::string& b, std::size_t& compared) {
  std::size_t bad = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto ext = e.path().extension().string();
    if (ext != ".csv" && ext != ".cfg" && ext != ".log") continue;
    ++compared;
    const fs::path other = fs::path(b) / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
      std::printf("  differs: %s\n", e.path().filename().string().c_str());
      ++bad;
    }
  }
  return bad;
}

double symbolic_change(const StatsOutcome& s, const std::string& check, double& first, double& second) {
  first = second = std::nan("");
  for (const auto& r : s.symbolic) {
    if (r.check != check) continue;
    (std::isnan(first) ? first : second) = r.constant;
  }
  return std::fabs(second / first - 1.0);
}

}  // namespace

int main() {
  const fs::path src = INDUCER_SOURCE_DIR;
  const fs::path work = fs::temp_directory_path() / "inducer_acceptance";
  fs::create_directories(work);
  const std::string cheb_cfg = (src / "configs" / "chebyshev.cfg").string();
  const std::string lor_cfg = (src / "configs" / "lorenz.cfg").string();

  // 1: binding periods against the conjugacy oracle on 10^3 grid points
  {
    const auto t = std::chrono::steady_clock::now();
    const double delta = std::exp(-5.0), alpha = 0.05;
    const PiecewiseMap f = builtin::chebyshev();
    CriticalPartition part(f, delta);
    BindingTable table(part, alpha, 1000);
    int mismatches = 0, checked = 0;
    for (int crit = 0; crit < 2; ++crit)
      for (int r = part.r_delta() + 1; r <= part.r_delta() + 20; ++r) {
        const double lo = std::exp(-(r + 1.0)), hi = std::exp(-(r - 2.0));
        int oracle = 1000;
        for (int i = 0; i < 1000; ++i)
          oracle = std::min(oracle, conjugacy_binding(lo + (hi - lo) * i / 999.0, delta, alpha, 1000));
        ++checked;
        if (table.period(crit, r) != oracle) ++mismatches;
      }
    const double secs = seconds_since(t);
    verdict(1, mismatches == 0 && secs < 10.0,
            std::to_string(checked - mismatches) + "/" + std::to_string(checked) + " rings match, " + num(secs) + " s");
  }

  std::printf("running configs/chebyshev.cfg and configs/lorenz.cfg at 1 thread\n");
  std::fflush(stdout);
  MapRun cheb, lor;
  run_all(cheb, cheb_cfg, (work / "chebyshev_1").string(), 1);
  run_all(lor, lor_cfg, (work / "lorenz_1").string(), 1);

  // 2: p(r) <= 2 l r / Lambda with l = 2, Lambda = log 4
  {
    int violations = 0, audited = 0;
    for (const auto& a : cheb.check.binding) {
      ++audited;
      if (a.p > 2.0 * 2.0 * a.r / std::log(4.0)) ++violations;
    }
    verdict(2, audited > 0 && violations == 0,
            std::to_string(violations) + " violations over " + std::to_string(audited) + " audited rings");
  }

  // 3: escape tails over [5, 40]
  {
    bool ok = true;
    std::string detail;
    double secs = 0.0;
    for (const MapRun* m : {&cheb, &lor}) {
      const auto& e = m->tower;
      const double aborted = to_double(e.escape.aborted_measure) / to_double(e.escape.tail.total);
      ok = ok && e.escape_fit.gamma > 0.0 && e.escape_fit.r2 >= 0.9 && aborted <= 1e-3 && e.escape_fit.n_lo == 5 &&
           e.escape_fit.n_hi == 40;
      secs += e.escape_seconds;
      detail += m->setup->map.name() + ": gamma_1 " + num(e.escape_fit.gamma) + ", R^2 " + num(e.escape_fit.r2) +
                ", aborted " + num(aborted) + "; ";
    }
    verdict(3, ok && secs < 300.0, detail + num(secs) + " s");
  }

  // 4: lorenz tower
  {
    const Tower& tw = lor.tower.tower;
    const double total = to_double(tw.total);
    const double unresolved = tw.unresolved_estimate.at(200);
    const auto& fit = lor.tower.return_fit;
    const bool mass = unresolved / total <= 1e-3;
    const bool ok = mass && fit.gamma > 0.0 && fit.r2 >= 0.9 && tw.max_image_error <= 1e-12 &&
                    tw.ledger_error() <= 1e-12 && tw.tiled;
    verdict(4, ok,
            "unresolved(200) " + num(unresolved / total) + " of |Delta*| (" + num(unresolved) + " absolute, needs <= 1e-3)" +
                ", gamma_2 " + num(fit.gamma) + ", R^2 " + num(fit.r2) + ", image error " + num(tw.max_image_error) +
                ", ledger error " + num(tw.ledger_error()));
  }

  // 5: distortion audits and the cylinder inequality
  {
    bool ok = true;
    std::string detail;
    for (const MapRun* m : {&cheb, &lor}) {
      const auto& d = m->tower.distortion;
      const auto& d2 = m->tower.distortion_doubled;
      const double change = std::fabs(d2.d_tilde / d.d_tilde - 1.0);
      const auto& cyl = *m->stats.cylinder;
      ok = ok && std::isfinite(d.d_tilde) && change <= 0.1 && d.lambda_prime > 1.0 && std::isfinite(d.k_hat) &&
           cyl.pairs > 0 && cyl.violations == 0;
      detail += m->setup->map.name() + ": D " + num(d.d_tilde) + " -> " + num(d2.d_tilde) + ", lambda' " +
                num(d.lambda_prime) + ", K " + num(d.k_hat) + ", cylinder " + std::to_string(cyl.violations) + "/" +
                std::to_string(cyl.pairs) + "; ";
    }
    verdict(5, ok, detail);
  }

  // 6: chebyshev lyapunov exponent and density
  {
    const auto& s = cheb.stats;
    const double lyap = s.lyapunov->value;
    const auto& m = s.acip.at(0);
    double l1 = 0.0;
    auto cdf = [](double x) { return std::asin(std::clamp(x, -1.0, 1.0)) / std::numbers::pi + 0.5; };
    for (std::size_t i = 0; i < m.bins(); ++i) l1 += std::fabs(m.masses[i] - (cdf(m.edges[i + 1]) - cdf(m.edges[i])));
    const double secs = s.seconds.at("lyapunov") + s.seconds.at("acip_orbit");
    verdict(6,
            std::fabs(lyap - std::log(2.0)) <= 0.01 && s.lyapunov->samples >= 10'000'000 && m.bins() == 200 &&
                l1 <= 0.05 && secs < 120.0,
            "lyapunov " + num(lyap) + " (log 2 = 0.6931), L1 to arcsine " + num(l1) + ", " + num(secs) + " s");
  }

  // 7: orbit and tower estimators agree
  {
    bool ok = true;
    std::string detail;
    for (const MapRun* m : {&cheb, &lor}) {
      const double d = l1_distance(m->stats.acip.at(0), m->stats.acip.at(1));
      ok = ok && d <= 0.08;
      detail += m->setup->map.name() + " " + num(d) + "; ";
    }
    verdict(7, ok, detail);
  }

  // 8: chebyshev correlation decay
  {
    const auto& r = *cheb.stats.correlation;
    const bool ok = r.first_below >= 0 && r.first_below <= 20 && r.slope < 0.0 && r.r2 >= 0.85;
    verdict(8, ok,
            "below 10 floor at n = " + std::to_string(r.first_below) + ", slope " + num(r.slope) + ", R^2 " + num(r.r2) +
                " over [" + std::to_string(r.fit_lo) + ", " + std::to_string(r.fit_hi) + "], floor " + num(r.floor));
  }

  // 9: CLT and Green-Kubo
  {
    bool ok = true;
    std::string detail;
    for (const MapRun* m : {&cheb, &lor}) {
      const auto& c = *m->stats.clt;
      const double ratio = c.sigma2 / m->stats.green_kubo;
      ok = ok && c.ks <= 0.05 && std::fabs(ratio - 1.0) <= 0.2 && c.sums.size() == 10000 &&
           m->ctx.config.integer("clt_n") == 10000;
      detail += m->setup->map.name() + ": KS " + num(c.ks) + ", sigma^2 " + num(c.sigma2) + ", Green-Kubo " +
                num(m->stats.green_kubo) + "; ";
    }
    verdict(9, ok, detail);
  }

  // 10: symbolic constants under budget doubling
  {
    bool ok = true;
    std::string detail;
    for (const MapRun* m : {&cheb, &lor}) {
      for (const char* check : {"distortion", "holder_lift"}) {
        double a = 0, b = 0;
        const double change = symbolic_change(m->stats, check, a, b);
        ok = ok && std::isfinite(a) && std::isfinite(b) && change <= 0.1;
        detail += m->setup->map.name() + " " + check + " " + num(a) + " -> " + num(b) + "; ";
      }
    }
    verdict(10, ok, detail);
  }

  // 11: identical outputs at 8 threads
  {
    std::printf("rerunning both configs at 8 threads\n");
    std::fflush(stdout);
    std::size_t compared = 0, bad = 0;
    {
      MapRun again;
      run_all(again, cheb_cfg, (work / "chebyshev_8").string(), 8);
    }
    bad += differing((work / "chebyshev_1").string(), (work / "chebyshev_8").string(), compared);
    {
      MapRun again;
      run_all(again, lor_cfg, (work / "lorenz_8").string(), 8);
    }
    bad += differing((work / "lorenz_1").string(), (work / "lorenz_8").string(), compared);
    verdict(11, bad == 0 && compared > 0,
            std::to_string(compared - bad) + "/" + std::to_string(compared) + " output files byte-identical");
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
