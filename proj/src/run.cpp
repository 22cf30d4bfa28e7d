#include "inducer/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "inducer/util.hpp"

namespace inducer {

namespace {

enum class Kind { text, real, positive, fraction, count, nonneg_count, flag, delta_or_positive };

struct KeySpec {
  const char* name;
  const char* value;
  Kind kind;
};

const KeySpec kKeys[] = {
    {"map", "builtin:chebyshev", Kind::text},
    {"delta", "e^-5", Kind::positive},
    {"alpha", "0.05", Kind::positive},
    {"lambda", "0.1", Kind::positive},
    {"kappa", "0.1", Kind::positive},
    {"Lambda", "0.5", Kind::positive},
    {"c_star", "0", Kind::real},
    {"three_piece_policy", "chop", Kind::text},
    {"seed", "1", Kind::nonneg_count},
    {"h1_block_len", "50", Kind::count},
    {"h1_samples", "10000", Kind::count},
    {"h2_horizon", "100", Kind::count},
    {"h3_depth", "12", Kind::count},
    {"h3_mesh", "1e-10", Kind::positive},
    {"h3_target", "delta", Kind::delta_or_positive},
    {"nondeg_radius", "delta", Kind::delta_or_positive},
    {"nondeg_samples", "1000", Kind::count},
    {"binding_horizon", "1000", Kind::count},
    {"binding_audit_depth", "20", Kind::count},
    {"escape_fraction", "0.05", Kind::fraction},
    {"escape_n_max", "60", Kind::count},
    {"escape_fit_lo", "5", Kind::count},
    {"escape_fit_hi", "40", Kind::count},
    {"max_intervals", "4000000", Kind::nonneg_count},
    {"min_width", "1e-14", Kind::positive},
    {"delta_star_fraction", "0.1", Kind::fraction},
    {"return_t_max", "60", Kind::count},
    {"return_min_component", "1e-5", Kind::positive},
    {"tower_n_max", "300", Kind::count},
    {"mass_floor", "1e-5", Kind::positive},
    {"tower_samples", "4000", Kind::nonneg_count},
    {"sample_n_max", "20000", Kind::count},
    {"return_fit_lo", "20", Kind::count},
    {"return_fit_hi", "200", Kind::count},
    {"distortion_points", "4", Kind::count},
    {"distortion_elements", "400", Kind::count},
    {"acip_iterates", "10000000", Kind::count},
    {"acip_burn_in", "1000", Kind::count},
    {"acip_bins", "200", Kind::count},
    {"ulam_bins", "1000", Kind::count},
    {"lyapunov_iterates", "10000000", Kind::count},
    {"phi", "x", Kind::text},
    {"psi", "x", Kind::text},
    {"holder_alpha", "1", Kind::positive},
    {"corr_n", "40", Kind::count},
    {"corr_samples", "10000000", Kind::count},
    {"clt_n", "10000", Kind::count},
    {"clt_trials", "10000", Kind::count},
    {"clt_burn_in", "1000", Kind::count},
    {"center_iterates", "100000000", Kind::count},
    {"symbolic_budget", "16", Kind::count},
    {"symbolic_elements", "400", Kind::count},
    {"events_log", "0", Kind::flag},
};

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : kKeys)
    if (key == k.name) return &k;
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void validate(const KeySpec& k, const std::string& value) {
  auto bad = [&](const std::string& why) {
    throw ConfigurationError("config key '" + std::string(k.name) + "' = '" + value + "': " + why);
  };
  if (value.empty()) bad("empty value");
  double v = 0.0;
  switch (k.kind) {
    case Kind::text:
      return;
    case Kind::delta_or_positive:
      if (value == "delta") return;
      [[fallthrough]];
    case Kind::real:
    case Kind::positive:
    case Kind::fraction:
      try {
        v = parse_number(value);
      } catch (const ConfigurationError& e) {
        bad(e.what());
      }
      if (!std::isfinite(v)) bad("not finite");
      if (k.kind != Kind::real && !(v > 0.0)) bad("must be positive");
      if (k.kind == Kind::fraction && v > 1.0) bad("must be at most 1");
      return;
    case Kind::count:
    case Kind::nonneg_count:
    case Kind::flag: {
      if (value.find_first_not_of("0123456789") != std::string::npos) bad("not a non-negative integer");
      if (value.size() > 18) bad("too large");
      const long long n = std::stoll(value);
      if (k.kind == Kind::count && n < 1) bad("must be at least 1");
      if (k.kind == Kind::flag && n > 1) bad("must be 0 or 1");
      return;
    }
  }
}

double since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

void say(const RunContext& ctx, const std::string& line) {
  if (ctx.report) *ctx.report << line << '\n';
}

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string path_in(const RunContext& ctx, const std::string& name) {
  return (std::filesystem::path(ctx.out) / name).string();
}

double delta_or(const RunConfig& c, const std::string& key, double delta) {
  return c.get(key) == "delta" ? delta : c.number(key);
}

EscapeOptions escape_options(const RunContext& ctx) {
  const auto& c = ctx.config;
  EscapeOptions eo;
  eo.n_max = static_cast<int>(c.integer("escape_n_max"));
  eo.max_active = static_cast<std::size_t>(c.integer("max_intervals"));
  eo.min_width = c.number("min_width");
  eo.policy = parse_three_piece_policy(c.get("three_piece_policy"));
  eo.threads = ctx.threads;
  return eo;
}

TowerOptions tower_options(const RunContext& ctx) {
  const auto& c = ctx.config;
  TowerOptions to;
  to.n_max = static_cast<int>(c.integer("tower_n_max"));
  to.mass_floor = c.number("mass_floor");
  to.samples = static_cast<std::size_t>(c.integer("tower_samples"));
  to.sample_n_max = static_cast<int>(c.integer("sample_n_max"));
  to.seed = static_cast<std::uint64_t>(c.integer("seed"));
  to.escape = escape_options(ctx);
  return to;
}

std::size_t limit_aborts(const std::vector<Resolved>& rs, AbortReason reason) {
  std::size_t n = 0;
  for (const auto& r : rs) n += r.disposition == Disposition::aborted && r.reason == reason;
  return n;
}

double birkhoff_mean(const PiecewiseMap& map, const Observable& phi, std::size_t n, std::uint64_t seed) {
  OrbitSampler orbit(map, seed, 0x6d65616eULL);
  for (int i = 0; i < 1000; ++i) orbit.next();
  double s = 0.0, c = 0.0;  // Kahan
  for (std::size_t i = 0; i < n; ++i) {
    const double y = phi(orbit.x()) - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
    orbit.next();
  }
  return s / static_cast<double>(n);
}

double oracle_cdf(const PiecewiseMap& map, double x) {
  if (map.name() == "chebyshev") return std::asin(std::clamp(x, -1.0, 1.0)) / std::numbers::pi + 0.5;
  return std::clamp(x, 0.0, 1.0);
}

bool has_oracle(const PiecewiseMap& map) {
  return map.name() == "chebyshev" || map.name() == "doubling" || map.name().rfind("baseline", 0) == 0;
}

}  // namespace

double parse_number(std::string_view text) {
  std::string s = trim(text);
  bool power = false;
  if (s.rfind("e^", 0) == 0) {
    power = true;
    s = s.substr(2);
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigurationError("not a number: '" + std::string(text) + "'");
  }
  if (used != s.size()) throw ConfigurationError("not a number: '" + std::string(text) + "'");
  return power ? std::exp(v) : v;
}

RunConfig::RunConfig() {
  for (const auto& k : kKeys) values_[k.name] = k.value;
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  c.text_ = std::string(text);
  std::istringstream in(c.text_);
  std::string line;
  int lineno = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigurationError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (seen.count(key))
      throw ConfigurationError("config line " + std::to_string(lineno) + ": '" + key + "' already set on line " +
                               std::to_string(seen[key]));
    seen[key] = lineno;
    c.set(key, value);
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file " + path);
  std::stringstream s;
  s << in.rdbuf();
  return parse(s.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* k = find_key(key);
  if (!k) throw ConfigurationError("unknown config key '" + key + "'");
  validate(*k, value);
  values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigurationError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const { return parse_number(get(key)); }
long long RunConfig::integer(const std::string& key) const { return std::stoll(get(key)); }
bool RunConfig::flag(const std::string& key) const { return integer(key) != 0; }

std::string RunConfig::canonical() const {
  std::string s;
  for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
  return s;
}

std::string RunConfig::hash() const { return hex64(fnv1a(canonical())); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& k : kKeys) v.emplace_back(k.name);
    return v;
  }();
  return names;
}

Setup::Setup(const RunConfig& config)
    : map(resolve_map(config.get("map"))),
      partition(map, config.number("delta")),
      binding(partition, config.number("alpha"), static_cast<int>(config.integer("binding_horizon"))) {}

void echo_config(const RunContext& ctx) {
  std::filesystem::create_directories(ctx.out);
  {
    std::ofstream out(path_in(ctx, "config.txt"), std::ios::binary);
    out << ctx.config.text();
  }
  std::ofstream out(path_in(ctx, "config.effective"), std::ios::binary);
  out << "# config_hash=" << ctx.config.hash() << "\n" << ctx.config.canonical();
}

CheckOutcome run_check(const RunContext& ctx, const Setup& setup) {
  const auto& c = ctx.config;
  const auto& map = setup.map;
  const double delta = setup.partition.delta();
  CheckOutcome o;

  say(ctx, "== check: " + map.name() + ", delta = e^-" + std::to_string(setup.partition.r_delta()));
  H1Options h1;
  h1.delta = delta;
  h1.max_block_len = static_cast<int>(c.integer("h1_block_len"));
  h1.samples = static_cast<int>(c.integer("h1_samples"));
  h1.lambda = c.number("lambda");
  h1.kappa = c.number("kappa");
  h1.threads = ctx.threads;
  o.report.h1 = check_h1(map, h1);
  o.report.h2 = check_h2(map, delta, c.number("alpha"), c.number("Lambda"), static_cast<int>(c.integer("h2_horizon")));
  o.report.h3 = check_h3(map, c.number("c_star"), static_cast<int>(c.integer("h3_depth")), c.number("h3_mesh"),
                         delta_or(c, "h3_target", delta));
  const double radius = delta_or(c, "nondeg_radius", delta);
  for (const auto& cp : map.criticals())
    o.report.nondegeneracy.emplace_back(cp, map.nondegeneracy_check(cp, radius, static_cast<int>(c.integer("nondeg_samples"))));

  const auto& h = o.report.h1;
  say(ctx, "H1: lambda_hat = " + num(h.lambda_hat) + ", kappa_hat = " + num(h.kappa_hat) + " over " +
               std::to_string(h.blocks) + " blocks: " + (h.pass ? "pass" : "fail"));
  for (const auto& r : o.report.h2)
    say(ctx, "H2 " + r.c.label() + ": alpha_required = " + num(r.alpha_required) + ", Lambda_hat = " + num(r.Lambda_hat) +
                 (r.hit_k ? ", orbit hits the critical set at k = " + std::to_string(r.hit_k) : "") + ": " +
                 (r.pass ? "pass" : "fail"));
  if (o.report.h2.empty()) say(ctx, "H2: no critical points, vacuous pass");
  const auto& h3 = o.report.h3;
  say(ctx, "H3: max gap at depth " + std::to_string(h3.depth) + " = " + num(h3.max_gap.empty() ? 0.0 : h3.max_gap.back()) +
               " (target " + num(h3.target) + "), flagged " + std::to_string(h3.flagged.size()) + ": " +
               (h3.pass ? "pass" : "fail"));
  for (const auto& [cp, n] : o.report.nondegeneracy)
    say(ctx, "nondegeneracy " + cp.label() + ": C_hat = " + num(n.constant) + " (declared " + num(cp.constant) +
                 ", worst x = " + num(n.worst_x) + "): " + (n.pass ? "pass" : "fail"));

  const int rd = setup.partition.r_delta();
  const int depth = static_cast<int>(c.integer("binding_audit_depth"));
  for (int crit = 0; crit < static_cast<int>(map.criticals().size()); ++crit)
    for (int r = rd + 1; r <= rd + depth; ++r) {
      o.binding.push_back(binding_expansion_audit(setup.binding, crit, r, c.number("kappa"), c.number("Lambda")));
      if (!o.binding.back().bindlen_ok) ++o.bindlen_violations;
    }
  if (!o.binding.empty())
    say(ctx, "binding: " + std::to_string(o.binding.size()) + " rings audited, " +
                 std::to_string(o.bindlen_violations) + " violations of p(r) <= 2 l r / Lambda");

  o.pass = o.report.pass();
  say(ctx, std::string("verdict: ") + (o.pass ? "pass" : "fail"));
  write_hypotheses_csv(o.report, path_in(ctx, "hypotheses.csv"), c.hash());
  write_binding_csv(o.binding, map, path_in(ctx, "binding.csv"), c.hash());
  return o;
}

TowerOutcome run_tower(const RunContext& ctx, const Setup& setup) {
  const auto& c = ctx.config;
  const std::string hash = c.hash();
  TowerOutcome o;
  if (c.integer("max_intervals") == 0) throw ResourceLimitError("max_intervals = 0 leaves no room for any interval");
  const double delta = setup.partition.delta();
  const double c_star = c.number("c_star");

  say(ctx, "== tower: " + setup.map.name() + ", c* = " + num(c_star));
  auto clock = std::chrono::steady_clock::now();
  EscapeEngine engine(setup.binding, escape_options(ctx));
  const Interval esc = delta_star_interval(setup.map, c_star, c.number("escape_fraction") * delta);
  o.escape = build_escape_partition(engine, dd(esc.lo), dd(esc.hi));
  o.escape_seconds = since(clock);
  clock = std::chrono::steady_clock::now();
  write_escape_tail_csv(o.escape.tail, path_in(ctx, "escape_tail.csv"), hash);
  if (c.flag("events_log")) write_events_log(o.escape.elements, setup.map, path_in(ctx, "events.log"), hash);
  const int elo = static_cast<int>(c.integer("escape_fit_lo")), ehi = static_cast<int>(c.integer("escape_fit_hi"));
  o.escape_fit = fit_tail(o.escape.tail.active, elo, ehi);
  const std::string fit_text =
      o.escape_fit.points < 2
          ? "tail empty in [" + std::to_string(elo) + ", " + std::to_string(ehi) + "], no fit"
          : "gamma_1 = " + num(o.escape_fit.gamma) + ", log C_1 = " + num(o.escape_fit.log_c) +
                ", R^2 = " + num(o.escape_fit.r2) + " over n in [" + std::to_string(elo) + ", " + std::to_string(ehi) + "]";
  say(ctx, "escape tail of [" + num(esc.lo) + ", " + num(esc.hi) + "]: " + fit_text + "; aborted " +
               num(to_double(o.escape.aborted_measure) / esc.length()) + " of the measure");
  if (const auto n = limit_aborts(o.escape.elements, AbortReason::active_limit)) {
    o.limit_hit = true;
    o.limit_note = std::to_string(n) + " escape intervals stopped at max_intervals";
  }

  ReturnSearchOptions so;
  so.t_max = static_cast<int>(c.integer("return_t_max"));
  so.min_component = c.number("return_min_component");
  so.start_fraction = c.number("delta_star_fraction");
  try {
    o.config = choose_delta_star(setup.map, delta, c_star, so);
  } catch (const ConfigurationError& e) {
    throw ResourceLimitError(std::string("return search: ") + e.what());
  }
  write_tower_cfg(o.config, path_in(ctx, "tower.cfg"), hash);
  say(ctx, "delta* = " + num(o.config.delta_star) + " (|Delta*| = " + num(o.config.delta_star_interval.length()) +
               "), t* = " + std::to_string(o.config.t_star) + ", xi = " + num(o.config.xi) + ", halvings " +
               std::to_string(o.config.halvings));

  const TowerOptions to = tower_options(ctx);
  o.tower = build_tower(setup.binding, o.config, to);
  o.tower_seconds = since(clock);
  const Tower& tw = o.tower;
  write_tower_csv(tw, path_in(ctx, "tower.csv"), hash);
  write_return_tail_csv(tw, path_in(ctx, "return_tail.csv"), hash);
  const double total = to_double(tw.total);
  const int rlo = static_cast<int>(c.integer("return_fit_lo")), rhi = static_cast<int>(c.integer("return_fit_hi"));
  o.return_fit = fit_return_tail(tw, rlo, rhi);
  const std::size_t at = std::min<std::size_t>(static_cast<std::size_t>(rhi), tw.unresolved_estimate.size() - 1);
  say(ctx, "tower: " + std::to_string(tw.elements.size()) + " elements, gcd(T) = " + std::to_string(tw.gcd_T) +
               ", " + std::to_string(tw.samples) + " sampled points over the deferred " +
               num(to_double(tw.deferred) / total) + " of the measure");
  say(ctx, "return tail: gamma_2 = " + num(o.return_fit.gamma) + ", log C_2 = " + num(o.return_fit.log_c) +
               ", R^2 = " + num(o.return_fit.r2) + " over n in [" + std::to_string(rlo) + ", " + std::to_string(rhi) +
               "]");
  say(ctx, "unresolved at n = " + std::to_string(at) + ": " + num(tw.unresolved_estimate[at] / total) +
               " of |Delta*| (stderr " + num(tw.unresolved_stderr.empty() ? 0.0 : tw.unresolved_stderr[at] / total) +
               "); numerical aborts " + num(tw.aborted_estimate / total));
  say(ctx, "ledger error " + num(tw.ledger_error()) + ", max image error " + num(tw.max_image_error) +
               (tw.tiled ? ", tiled" : ", NOT tiled"));

  const auto points = static_cast<int>(c.integer("distortion_points"));
  const auto elems = static_cast<std::size_t>(c.integer("distortion_elements"));
  const auto seed = static_cast<std::uint64_t>(c.integer("seed"));
  o.distortion = distortion_audit(setup.map, tw, points, elems, seed, ctx.threads);
  o.distortion_doubled = distortion_audit(setup.map, tw, 2 * points, elems, seed, ctx.threads);
  write_distortion_csv(o.distortion, path_in(ctx, "distortion.csv"), hash);
  say(ctx, "distortion: D_hat = " + num(o.distortion.d_tilde) + " (" + num(o.distortion_doubled.d_tilde) +
               " with doubled pairs), lambda' = " + num(o.distortion.lambda_prime) + ", K_hat = " +
               num(o.distortion.k_hat) + " over " + std::to_string(o.distortion.elements) + " elements");

  if (const auto n = limit_aborts(tw.aborted, AbortReason::active_limit)) {
    o.limit_hit = true;
    o.limit_note += (o.limit_note.empty() ? "" : "; ") + std::to_string(n) + " tower intervals stopped at max_intervals";
  }
  if (o.limit_hit) say(ctx, "resource limit: " + o.limit_note);
  return o;
}

StatsOutcome run_stats(const RunContext& ctx, const Setup& setup, const std::string& which, const TowerOutcome* tower) {
  static const std::vector<std::string> kinds = {"acip", "lyapunov", "corr", "clt", "symbolic", "all"};
  if (std::find(kinds.begin(), kinds.end(), which) == kinds.end())
    throw ConfigurationError("unknown statistic '" + which + "' (acip, lyapunov, corr, clt, symbolic, all)");
  const auto& c = ctx.config;
  const std::string hash = c.hash();
  const auto& map = setup.map;
  const auto seed = static_cast<std::uint64_t>(c.integer("seed"));
  const bool all = which == "all";
  StatsOutcome o;
  auto notice = [&](const std::string& s) {
    o.notices.push_back(s);
    say(ctx, "notice: " + s);
  };

  say(ctx, "== stats (" + which + "): " + map.name());
  const Observable phi = make_observable(c.get("phi"), c.number("holder_alpha"));
  const Observable psi = make_observable(c.get("psi"), c.number("holder_alpha"));

  auto clock = std::chrono::steady_clock::now();
  auto lap = [&](const std::string& name) {
    o.seconds[name] = since(clock);
    clock = std::chrono::steady_clock::now();
  };

  if (all || which == "acip") {
    const auto bins = static_cast<std::size_t>(c.integer("acip_bins"));
    o.acip.push_back(acip_orbit(map, static_cast<std::size_t>(c.integer("acip_iterates")),
                                static_cast<std::size_t>(c.integer("acip_burn_in")), bins, seed));
    lap("acip_orbit");
    if (has_oracle(map))
      say(ctx, "acip (orbit): L1 to the exact density = " +
                   num(l1_to_cdf(o.acip[0], [&](double x) { return oracle_cdf(map, x); })));
    if (tower) {
      TowerMeasureOptions tm;
      tm.ulam_bins = static_cast<std::size_t>(c.integer("ulam_bins"));
      tm.seed = seed;
      tm.threads = ctx.threads;
      o.acip.push_back(acip_tower(map, tower->tower, bins, tm));
      lap("acip_tower");
      const auto& m = o.acip.back();
      say(ctx, "acip (tower): normalization sum T mu_hat = " + num(m.normalization) + ", " +
                   (m.converged ? "converged" : "NOT converged") + " after " + std::to_string(m.iterations) +
                   " steps; L1 to orbit estimate = " + num(l1_distance(o.acip[0], m)));
    } else {
      notice("no tower outputs for this config; acip uses the orbit estimator only");
    }
    write_acip_csv(o.acip, path_in(ctx, "acip.csv"), hash);
  }

  if (all || which == "lyapunov") {
    o.lyapunov = lyapunov(map, static_cast<std::size_t>(c.integer("lyapunov_iterates")),
                          static_cast<std::size_t>(c.integer("acip_burn_in")), seed);
    lap("lyapunov");
    CsvWriter csv(path_in(ctx, "lyapunov.csv"), hash, {"estimate", "stderr", "samples", "skipped"});
    csv.row({fmt(o.lyapunov->value), fmt(o.lyapunov->stderr_), std::to_string(o.lyapunov->samples),
             std::to_string(o.lyapunov->skipped)});
    say(ctx, "lyapunov = " + num(o.lyapunov->value, 8) + " +- " + num(o.lyapunov->stderr_) + " (" +
                 std::to_string(o.lyapunov->samples) + " iterates, " + std::to_string(o.lyapunov->skipped) + " skipped)");
  }

  const int corr_n = static_cast<int>(c.integer("corr_n"));
  const auto corr_N = static_cast<std::size_t>(c.integer("corr_samples"));
  if (all || which == "corr") {
    o.correlation = correlation(map, phi, psi, corr_n, corr_N, seed);
    lap("corr");
    const auto& r = *o.correlation;
    write_correlation_csv(r, path_in(ctx, "correlation.csv"), hash);
    say(ctx, "correlation of " + phi.text + " and " + psi.text + ": noise floor " + num(r.floor) +
                 ", first n below 10 floor = " + std::to_string(r.first_below) + "; log C_n slope " + num(r.slope) +
                 ", R^2 = " + num(r.r2) + " over n in [" + std::to_string(r.fit_lo) + ", " + std::to_string(r.fit_hi) +
                 "]");
    if (tower && tower->tower.gcd_T > 1) {
      const auto g = static_cast<std::size_t>(tower->tower.gcd_T);
      std::vector<double> xs, ys;
      for (std::size_t n = 0; n <= static_cast<std::size_t>(r.fit_hi) && n < r.c.size(); n += g)
        if (r.c[n] > 0.0) {
          xs.push_back(static_cast<double>(n));
          ys.push_back(std::log(r.c[n]));
        }
      const LinearFit f = fit_line(xs, ys);
      notice("gcd(T) = " + std::to_string(g) + " > 1: decay fitted for f^" + std::to_string(g) + " (lags multiple of " +
             std::to_string(g) + "), slope " + num(f.slope) + ", R^2 = " + num(f.r2));
    }
  }

  if (all || which == "clt") {
    o.clt_center = birkhoff_mean(map, phi, static_cast<std::size_t>(c.integer("center_iterates")), seed);
    o.clt = clt_test(map, phi, o.clt_center, static_cast<int>(c.integer("clt_n")),
                     static_cast<std::size_t>(c.integer("clt_trials")), seed, ctx.threads,
                     static_cast<int>(c.integer("clt_burn_in")));
    write_clt_csv(*o.clt, path_in(ctx, "clt.csv"), hash);
    lap("clt");
    CorrelationResult self = (o.correlation && c.get("phi") == c.get("psi"))
                                 ? *o.correlation
                                 : correlation(map, phi, phi, corr_n, corr_N, seed);
    o.green_kubo = green_kubo(self);
    say(ctx, "clt of " + phi.text + " - " + num(o.clt_center) + ": sigma^2 = " + num(o.clt->sigma2) + ", KS = " +
                 num(o.clt->ks) + ", Green-Kubo sigma^2 = " + num(o.green_kubo) + " (ratio " +
                 num(o.green_kubo > 0.0 ? o.clt->sigma2 / o.green_kubo : 0.0) + ")");
    if (o.clt->coboundary_warning)
      notice("sigma^2 is zero: " + phi.text + " looks like a coboundary, the CLT is degenerate");
  }

  if (all || which == "symbolic") {
    if (!tower) throw ConfigurationError("symbolic checks need the tower; run `tower` first or use `all`");
    const Tower& tw = tower->tower;
    const TowerOptions to = tower_options(ctx);
    ReturnFollower follower(setup.binding, tower->config, to);
    InducedMap F(map, tw, &follower);
    const double lp = tower->distortion.lambda_prime;
    const double sigma = 0.5 * (1.0 + 1.0 / lp);
    const double sigma_lift = 0.5 * (1.0 + std::pow(lp, -phi.holder_alpha));
    const auto budget = static_cast<std::size_t>(c.integer("symbolic_budget"));
    const auto elems = static_cast<std::size_t>(c.integer("symbolic_elements"));
    std::vector<PairSample> last;
    for (std::size_t b : {budget, 2 * budget}) {
      auto pairs = sample_pairs(tw, b, elems, seed);
      SymbolicCheck d = symbolic_distortion_check(F, sigma, lp, pairs, ctx.threads);
      SymbolicCheck h = holder_lift_check(F, phi, sigma_lift, lp, pairs, ctx.threads);
      o.symbolic.push_back({"distortion", sigma, b, d.constant, d.pairs});
      o.symbolic.push_back({"holder_lift", sigma_lift, b, h.constant, h.pairs});
      say(ctx, "symbolic (budget " + std::to_string(b) + "): distortion C = " + num(d.constant) + " at sigma " +
                   num(sigma) + ", lift C = " + num(h.constant) + " at sigma " + num(sigma_lift) + "; " +
                   std::to_string(d.pairs) + " pairs, " + std::to_string(d.capped) + " capped, " +
                   std::to_string(d.unresolved) + " unresolved, max s = " + std::to_string(d.max_s));
      last = std::move(pairs);
    }
    o.cylinder = cylinder_check(F, lp, last, ctx.threads);
    o.symbolic.push_back({"cylinder", lp, 2 * budget, o.cylinder->worst_ratio, o.cylinder->pairs});
    say(ctx, "cylinder: " + std::to_string(o.cylinder->violations) + " violations over " +
                 std::to_string(o.cylinder->pairs) + " pairs, worst |x - y| / (|Delta*| lambda'^-s) = " +
                 num(o.cylinder->worst_ratio));
    write_symbolic_csv(o.symbolic, path_in(ctx, "symbolic_checks.csv"), hash);
    lap("symbolic");
  }
  return o;
}

bool tower_outputs_present(const std::string& out, const std::string& config_hash) {
  const auto dir = std::filesystem::path(out);
  for (const char* name : {"tower.csv", "return_tail.csv", "distortion.csv"})
    if (!std::filesystem::exists(dir / name)) return false;
  std::ifstream in(dir / "tower.cfg");
  std::string line;
  return std::getline(in, line) && line == "# config_hash=" + config_hash;
}

}  // namespace inducer
