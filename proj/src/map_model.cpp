#include "inducer/map_model.hpp"

#include "inducer/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace inducer {

std::string_view to_string(Side side) {
  switch (side) {
    case Side::left:
      return "left";
    case Side::right:
      return "right";
    default:
      return "none";
  }
}

Side parse_side(std::string_view text) {
  if (text == "left" || text == "-") return Side::left;
  if (text == "right" || text == "+") return Side::right;
  if (text == "none") return Side::none;
  throw ConfigurationError("unknown side: " + std::string(text));
}

std::string CriticalPoint::label() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g%c", location, side == Side::left ? '-' : '+');
  return buf;
}

namespace {

constexpr double kValueTol = 1e-9;
constexpr double kDerivTol = 1e-7;
constexpr double kDeriv2Tol = 1e-6;

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(a)); }

}  // namespace

PiecewiseMap::PiecewiseMap(std::string name, Interval domain, std::vector<Branch> branches,
                           std::vector<CriticalPoint> criticals, std::vector<Interval> core, bool periodic)
    : name_(std::move(name)),
      domain_(domain),
      branches_(std::move(branches)),
      criticals_(std::move(criticals)),
      core_(std::move(core)),
      periodic_(periodic) {
  validate();
}

void PiecewiseMap::validate() {
  if (!(domain_.lo < domain_.hi)) throw ConfigurationError("domain must satisfy lo < hi");
  if (branches_.empty()) throw ConfigurationError("map has no branches");
  std::sort(branches_.begin(), branches_.end(), [](const Branch& a, const Branch& b) { return a.lo < b.lo; });
  if (branches_.front().lo != domain_.lo || branches_.back().hi != domain_.hi)
    throw ConfigurationError("branches must cover the domain");
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    const Branch& b = branches_[i];
    if (!(b.lo < b.hi)) throw ConfigurationError("empty branch at " + fmt(b.lo));
    if (i + 1 < branches_.size() && b.hi != branches_[i + 1].lo)
      throw ConfigurationError("branches are not contiguous at " + fmt(b.hi));
  }

  const double span = domain_.length();
  for (auto& b : branches_) {
    constexpr int kSamples = 257;
    int sign = 0;
    for (int k = 0; k < kSamples; ++k) {
      double x = b.lo + (b.hi - b.lo) * (k + 0.5) / kSamples;
      double d = b.expr.deriv(x);
      int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
      if (s == 0 || (sign != 0 && s != sign))
        throw ConfigurationError("branch [" + fmt(b.lo) + ", " + fmt(b.hi) + "] is not strictly monotone");
      sign = s;
      double y = b.expr.eval(x);
      if (y < domain_.lo - kValueTol * span || y > domain_.hi + kValueTol * span)
        throw ConfigurationError("branch [" + fmt(b.lo) + ", " + fmt(b.hi) + "] leaves the domain near " + fmt(x));
    }
    b.increasing = sign > 0;
    for (double x : {b.lo, b.hi}) {
      double y = b.expr.eval(x);
      if (!std::isfinite(y) || y < domain_.lo - kValueTol * span || y > domain_.hi + kValueTol * span)
        throw ConfigurationError("branch [" + fmt(b.lo) + ", " + fmt(b.hi) + "] leaves the domain at " + fmt(x));
    }
  }

  for (const auto& c : criticals_) {
    if (!(c.order > 0.0) || c.order == 1.0)
      throw ConfigurationError("critical point " + c.label() + ": order must be positive and different from 1");
    if (!(c.constant >= 1.0)) throw ConfigurationError("critical point " + c.label() + ": constant must be >= 1");
    if (c.side == Side::none) throw ConfigurationError("critical point " + c.label() + ": side is required");
    bool boundary = false;
    for (std::size_t i = 1; i < branches_.size(); ++i) boundary = boundary || branches_[i].lo == c.location;
    if (!boundary) throw ConfigurationError("critical point " + c.label() + " is not at an interior branch boundary");
  }
  std::sort(criticals_.begin(), criticals_.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    return a.location < b.location || (a.location == b.location && a.side == Side::left && b.side == Side::right);
  });
  for (std::size_t i = 1; i < criticals_.size(); ++i)
    if (criticals_[i].location == criticals_[i - 1].location && criticals_[i].side == criticals_[i - 1].side)
      throw ConfigurationError("duplicate critical point " + criticals_[i].label());

  locations_.clear();
  for (const auto& c : criticals_)
    if (locations_.empty() || locations_.back() != c.location) locations_.push_back(c.location);

  cuts_.clear();
  for (std::size_t i = 1; i < branches_.size(); ++i) {
    double x = branches_[i].lo;
    if (std::binary_search(locations_.begin(), locations_.end(), x)) continue;
    const Branch& l = branches_[i - 1];
    const Branch& r = branches_[i];
    double vl = l.expr.eval(x);
    double vr = r.expr.eval(x);
    bool derivs = close(l.expr.deriv(x), r.expr.deriv(x), kDerivTol) &&
                  close(l.expr.deriv2(x), r.expr.deriv2(x), kDeriv2Tol);
    if (std::fabs(vl - vr) <= kValueTol * span && derivs) continue;
    if (periodic_ && std::fabs(std::fabs(vl - vr) - span) <= kValueTol * span && close(l.expr.deriv(x), r.expr.deriv(x), kDerivTol)) {
      cuts_.push_back(x);
      continue;
    }
    throw ConfigurationError("boundary " + fmt(x) +
                             " is neither a declared critical point, a C^2 join nor a periodic cut; "
                             "bounded-derivative discontinuities are not supported");
  }

  if (core_.empty()) core_.push_back(domain_);
  for (const auto& w : core_) {
    if (!(w.lo < w.hi) || w.lo < domain_.lo || w.hi > domain_.hi)
      throw ConfigurationError("core interval [" + fmt(w.lo) + ", " + fmt(w.hi) + "] is not inside the domain");
  }
}

std::size_t PiecewiseMap::branch_index(double x, Side side) const {
  if (!(x >= domain_.lo && x <= domain_.hi)) throw DomainError("point " + fmt(x) + " outside the domain");
  auto it = std::upper_bound(branches_.begin(), branches_.end(), x,
                             [](double v, const Branch& b) { return v < b.lo; });
  std::size_t i = static_cast<std::size_t>(it - branches_.begin()) - 1;
  if (i > 0 && branches_[i].lo == x) {
    if (side == Side::left) return i - 1;
    if (side == Side::right) return i;
    if (is_special(x)) throw AmbiguityError("point " + fmt(x) + " is a branch boundary; a side is required");
  }
  return i;
}

const Branch& PiecewiseMap::branch_at(double x, Side side) const { return branches_[branch_index(x, side)]; }

double PiecewiseMap::eval(double x, Side side) const { return branch_at(x, side).expr.eval(x); }

dd PiecewiseMap::eval(const dd& x, Side side) const {
  Side s = side;
  // a dd value whose high part sits on a boundary lies strictly to one side of it
  if (x.lo > 0.0) s = Side::right;
  if (x.lo < 0.0) s = Side::left;
  if (x.lo == 0.0) s = side;
  std::size_t i;
  if (x.hi < domain_.lo || x.hi > domain_.hi) throw DomainError("point " + fmt(x.hi) + " outside the domain");
  if ((x.hi == domain_.lo && x.lo < 0.0) || (x.hi == domain_.hi && x.lo > 0.0))
    throw DomainError("point " + fmt(x.hi) + " outside the domain");
  i = branch_index(x.hi, x.lo == 0.0 ? side : s);
  return branches_[i].expr.eval(x);
}

double PiecewiseMap::deriv(double x, Side side) const {
  if (side == Side::none && std::binary_search(locations_.begin(), locations_.end(), x))
    throw SingularPointError("derivative requested at critical location " + fmt(x));
  return branch_at(x, side).expr.deriv(x);
}

double PiecewiseMap::deriv2(double x, Side side) const {
  if (side == Side::none && std::binary_search(locations_.begin(), locations_.end(), x))
    throw SingularPointError("second derivative requested at critical location " + fmt(x));
  return branch_at(x, side).expr.deriv2(x);
}

OrbitPoint PiecewiseMap::step(const OrbitPoint& p) const {
  Side side = p.side;
  if (side == Side::none && p.x.lo == 0.0 && is_special(p.x.hi)) side = Side::right;
  Side s = p.x.lo > 0.0 ? Side::right : (p.x.lo < 0.0 ? Side::left : side);
  std::size_t i = branch_index(p.x.hi, s);
  const Branch& b = branches_[i];
  OrbitPoint q;
  q.x = b.expr.eval(p.x);
  q.side = b.increasing ? side : flip(side);
  const double slack = 1e-15 * domain_.length();
  if (q.x < dd(domain_.lo)) {
    if (q.x < dd(domain_.lo - slack)) throw DomainError("orbit left the domain");
    q.x = dd(domain_.lo);
    q.side = Side::right;
  } else if (q.x > dd(domain_.hi)) {
    if (q.x > dd(domain_.hi + slack)) throw DomainError("orbit left the domain");
    q.x = dd(domain_.hi);
    q.side = Side::left;
  }
  return q;
}

namespace {

double sgn(const dd& v) { return v.hi > 0.0 ? 1.0 : (v.hi < 0.0 ? -1.0 : 0.0); }

dd term_difference(const Term& t, const dd& s, const dd& e) {
  if (t.kind == Term::Kind::Poly) {
    int k = static_cast<int>(t.exponent);
    dd sum(0.0);
    dd binom(1.0);
    for (int i = 1; i <= k; ++i) {
      binom = binom * dd(static_cast<double>(k - i + 1)) / dd(static_cast<double>(i));
      sum += binom * expr_detail::ipow(s, k - i) * expr_detail::ipow(e, i);
    }
    return dd(t.coef) * sum;
  }
  if (s.hi == 0.0) return dd(t.coef) * pow(abs(e), t.exponent);
  if (std::fabs(e.hi) < 0.5 * std::fabs(s.hi)) {
    dd u = e / s;
    return dd(t.coef) * pow(abs(s), t.exponent) * expm1(dd(t.exponent) * log1p(u));
  }
  return dd(t.coef) * (pow(abs(s + e), t.exponent) - pow(abs(s), t.exponent));
}

}  // namespace

dd PiecewiseMap::step_deviation(const OrbitPoint& base, const dd& e) const {
  if (e.hi == 0.0) return dd(0.0);
  Side base_side = base.side;
  if (base.x.lo > 0.0) base_side = Side::right;
  if (base.x.lo < 0.0) base_side = Side::left;
  if (base_side == Side::none && is_special(base.x.hi)) base_side = sgn(e) > 0 ? Side::right : Side::left;
  std::size_t ib = branch_index(base.x.hi, base_side);
  dd x = base.x + e;
  Side xs = x.lo > 0.0 ? Side::right : (x.lo < 0.0 ? Side::left : (sgn(e) > 0 ? Side::left : Side::right));
  std::size_t ix = branch_index(std::clamp(x.hi, domain_.lo, domain_.hi), xs);
  if (ix != ib) return eval(x, xs) - eval(base.x, base_side);
  dd sum(0.0);
  for (const auto& t : branches_[ib].expr.terms()) {
    dd s = base.x - dd(t.center);
    sum += term_difference(t, s, e);
  }
  return sum;
}

double PiecewiseMap::log_abs_deriv(const OrbitPoint& base, const dd& e) const {
  if (e.hi == 0.0) return log_abs_deriv(base);
  Side base_side = base.side;
  if (base.x.lo > 0.0) base_side = Side::right;
  if (base.x.lo < 0.0) base_side = Side::left;
  if (base_side == Side::none && is_special(base.x.hi)) base_side = sgn(e) > 0 ? Side::right : Side::left;
  std::size_t ib = branch_index(base.x.hi, base_side);
  dd x = base.x + e;
  Side xs = x.lo > 0.0 ? Side::right : (x.lo < 0.0 ? Side::left : (sgn(e) > 0 ? Side::left : Side::right));
  std::size_t ix = branch_index(std::clamp(x.hi, domain_.lo, domain_.hi), xs);
  if (ix != ib) return log_abs_deriv(OrbitPoint{x, xs});
  double sum = 0.0;
  for (const auto& t : branches_[ib].expr.terms()) {
    double s = to_double((base.x - dd(t.center)) + e);
    if (t.kind == Term::Kind::Poly) {
      int k = static_cast<int>(t.exponent);
      if (k >= 1) sum += t.coef * k * expr_detail::ipow(s, k - 1);
    } else {
      sum += t.coef * t.exponent * std::pow(std::fabs(s), t.exponent - 1.0) * (s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0));
    }
  }
  return std::log(std::fabs(sum));
}

double PiecewiseMap::log_abs_deriv(const OrbitPoint& p) const {
  double x = p.x.hi;
  Side s = p.x.lo > 0.0 ? Side::right : (p.x.lo < 0.0 ? Side::left : p.side);
  if (s == Side::none && is_special(x)) s = Side::right;
  const Branch& b = branches_[branch_index(x, s)];
  if (p.x.lo != 0.0) {
    // distance to a power-term center matters when it is below one ulp
    double sum = 0.0;
    for (const auto& t : b.expr.terms()) {
      dd shifted = p.x - dd(t.center);
      double sv = to_double(shifted);
      if (t.kind == Term::Kind::Poly) {
        int k = static_cast<int>(t.exponent);
        if (k >= 1) sum += t.coef * k * expr_detail::ipow(sv, k - 1);
      } else {
        sum += t.coef * t.exponent * std::pow(std::fabs(sv), t.exponent - 1.0) * (sv > 0 ? 1.0 : (sv < 0 ? -1.0 : 0.0));
      }
    }
    return std::log(std::fabs(sum));
  }
  return std::log(std::fabs(b.expr.deriv(x)));
}

double PiecewiseMap::distance_to_crit(double x) const {
  double best = std::numeric_limits<double>::infinity();
  for (double c : locations_) best = std::min(best, std::fabs(x - c));
  return best;
}

double PiecewiseMap::distance_to_crit(const Interval& w) const {
  if (locations_.empty()) return std::numeric_limits<double>::infinity();
  double best = std::max(distance_to_crit(w.lo), distance_to_crit(w.hi));
  for (std::size_t i = 0; i + 1 < locations_.size(); ++i) {
    double m = 0.5 * (locations_[i] + locations_[i + 1]);
    if (w.contains(m)) best = std::max(best, distance_to_crit(m));
  }
  return best;
}

NondegeneracyResult PiecewiseMap::nondegeneracy_check(const CriticalPoint& c, double radius, int samples) const {
  if (!(radius > 0.0) || samples < 2) throw ConfigurationError("nondegeneracy check needs radius > 0 and samples >= 2");
  const double dir = c.side == Side::right ? 1.0 : -1.0;
  double far = c.location + dir * radius;
  if (far < domain_.lo || far > domain_.hi) throw ConfigurationError("neighbourhood of " + c.label() + " leaves the domain");
  for (double s : locations_)
    if (s != c.location && (s - c.location) * dir > 0.0 && std::fabs(s - c.location) <= radius)
      throw ConfigurationError("neighbourhood of " + c.label() + " contains another critical point");
  for (double s : cuts_)
    if ((s - c.location) * dir > 0.0 && std::fabs(s - c.location) <= radius)
      throw ConfigurationError("neighbourhood of " + c.label() + " contains a cut");

  const double ell = c.order;
  dd fc = eval(dd(c.location), c.side);
  NondegeneracyResult res;
  double worst = 0.0;
  auto ratio = [](double log_r) { return std::exp(std::fabs(log_r)); };
  for (int k = 0; k < samples; ++k) {
    double t = radius * std::pow(10.0, -4.0 * k / (samples - 1));
    dd x = dd(c.location) + dd(dir * t);
    Side side = c.side;
    double v = std::fabs(to_double(eval(x, side) - fc));
    double xd = to_double(x);
    const Branch& b = branch_at(c.location, c.side);
    double d1 = 0.0;
    double d2 = 0.0;
    for (const auto& term : b.expr.terms()) {
      double s = to_double(x - dd(term.center));
      if (term.kind == Term::Kind::Poly) {
        int n = static_cast<int>(term.exponent);
        if (n >= 1) d1 += term.coef * n * expr_detail::ipow(s, n - 1);
        if (n >= 2) d2 += term.coef * n * (n - 1) * expr_detail::ipow(s, n - 2);
      } else {
        double sg = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
        d1 += term.coef * term.exponent * std::pow(std::fabs(s), term.exponent - 1.0) * sg;
        d2 += term.coef * term.exponent * (term.exponent - 1.0) * std::pow(std::fabs(s), term.exponent - 2.0);
      }
    }
    (void)xd;
    const double lt = std::log(t);
    double r1 = v > 0.0 ? ratio(std::log(v) - ell * lt) : std::numeric_limits<double>::infinity();
    double r2 = d1 != 0.0 ? ratio(std::log(std::fabs(d1)) - (ell - 1.0) * lt) : std::numeric_limits<double>::infinity();
    double r3 = d2 != 0.0 ? ratio(std::log(std::fabs(d2)) - (ell - 2.0) * lt) : std::numeric_limits<double>::infinity();
    res.value_constant = std::max(res.value_constant, r1);
    res.deriv_constant = std::max(res.deriv_constant, r2);
    res.deriv2_constant = std::max(res.deriv2_constant, r3);
    double m = std::max({r1, r2, r3});
    if (m > worst) {
      worst = m;
      res.worst_x = to_double(x);
    }
  }
  res.constant = std::max({res.value_constant, res.deriv_constant, res.deriv2_constant});
  res.pass = res.constant <= c.constant * (1.0 + 1e-12);
  return res;
}

double PiecewiseMap::ell() const {
  double e = 0.0;
  for (const auto& c : criticals_)
    if (c.is_critical()) e = std::max(e, c.order);
  return e;
}

double PiecewiseMap::ell_star() const {
  double e = 0.0;
  for (const auto& c : criticals_)
    if (!c.is_critical()) e = std::max(e, c.order);
  return e;
}

double PiecewiseMap::min_critical_gap() const {
  std::vector<double> pts = locations_;
  pts.insert(pts.end(), cuts_.begin(), cuts_.end());
  std::sort(pts.begin(), pts.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < pts.size(); ++i) gap = std::min(gap, pts[i] - pts[i - 1]);
  return gap;
}

bool PiecewiseMap::is_special(double x) const {
  return std::binary_search(locations_.begin(), locations_.end(), x) ||
         std::binary_search(cuts_.begin(), cuts_.end(), x);
}

double PiecewiseMap::critical_value(const CriticalPoint& c) const { return to_double(eval(dd(c.location), c.side)); }

std::string PiecewiseMap::to_document() const {
  std::ostringstream out;
  out << "name = " << name_ << "\n";
  out << "domain = " << fmt(domain_.lo) << " " << fmt(domain_.hi) << "\n";
  out << "periodic = " << (periodic_ ? "true" : "false") << "\n";
  for (const auto& w : core_) out << "core = " << fmt(w.lo) << " " << fmt(w.hi) << "\n";
  for (const auto& b : branches_) out << "branch = " << fmt(b.lo) << " " << fmt(b.hi) << " : " << b.expr.to_string() << "\n";
  for (const auto& c : criticals_)
    out << "critical = " << fmt(c.location) << " " << to_string(c.side) << " " << fmt(c.order) << " " << fmt(c.constant)
        << "\n";
  return out.str();
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double number(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigurationError("line " + std::to_string(line) + ": malformed number '" + s + "'");
  }
}

}  // namespace

PiecewiseMap parse_map_document(std::string_view text) {
  std::string name = "map";
  std::optional<Interval> domain;
  bool periodic = false;
  std::vector<Interval> core;
  std::vector<Branch> branches;
  std::vector<CriticalPoint> criticals;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigurationError("line " + std::to_string(line) + ": expected key = value");
    std::string key = trim(content.substr(0, eq));
    std::string value = trim(content.substr(eq + 1));
    auto bad = [&](const std::string& what) {
      return ConfigurationError("line " + std::to_string(line) + ": " + what);
    };
    if (key == "name") {
      name = value;
    } else if (key == "domain" || key == "core") {
      auto w = words(value);
      if (w.size() != 2) throw bad(key + " needs two numbers");
      Interval iv{number(w[0], line), number(w[1], line)};
      if (key == "domain")
        domain = iv;
      else
        core.push_back(iv);
    } else if (key == "periodic") {
      if (value != "true" && value != "false") throw bad("periodic must be true or false");
      periodic = value == "true";
    } else if (key == "branch") {
      auto colon = value.find(':');
      if (colon == std::string::npos) throw bad("branch needs 'lo hi : expression'");
      auto w = words(value.substr(0, colon));
      if (w.size() != 2) throw bad("branch needs two endpoints");
      Branch b;
      b.lo = number(w[0], line);
      b.hi = number(w[1], line);
      try {
        b.expr = Expression::parse(trim(value.substr(colon + 1)));
      } catch (const ParseError& e) {
        throw bad(e.what());
      }
      branches.push_back(std::move(b));
    } else if (key == "critical") {
      auto w = words(value);
      if (w.size() != 4) throw bad("critical needs 'location side order constant'");
      CriticalPoint c;
      c.location = number(w[0], line);
      c.order = number(w[2], line);
      c.constant = number(w[3], line);
      if (w[1] == "both") {
        c.side = Side::left;
        criticals.push_back(c);
        c.side = Side::right;
        criticals.push_back(c);
      } else {
        c.side = parse_side(w[1]);
        criticals.push_back(c);
      }
    } else {
      throw bad("unknown key '" + key + "'");
    }
  }
  if (!domain) throw ConfigurationError("map document has no domain");
  return PiecewiseMap(name, *domain, std::move(branches), std::move(criticals), std::move(core), periodic);
}

PiecewiseMap load_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open map file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_map_document(buf.str());
}

PiecewiseMap resolve_map(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) != 0) return load_map_file(spec);
  std::vector<std::string> parts;
  std::string rest = spec.substr(prefix.size());
  std::size_t start = 0;
  while (true) {
    auto colon = rest.find(':', start);
    parts.push_back(rest.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  const std::string& name = parts[0];
  auto param = [&](std::size_t i, double fallback) {
    return i < parts.size() && !parts[i].empty() ? number(parts[i], 0) : fallback;
  };
  if (name == "chebyshev" && parts.size() == 1) return builtin::chebyshev();
  if (name == "lorenz" && parts.size() == 1) return builtin::lorenz();
  if (name == "doubling" && parts.size() == 1) return builtin::baseline(2);
  if (name == "baseline" && parts.size() <= 2) {
    double m = param(1, 2.0);
    if (m != std::floor(m) || m < 2.0) throw ConfigurationError("baseline slope must be an integer >= 2");
    return builtin::baseline(static_cast<int>(m));
  }
  if (name == "combined" && parts.size() <= 4) return builtin::combined(param(1, 0.6), param(2, 2.0), param(3, 0.25));
  throw ConfigurationError("unknown builtin map: " + spec);
}

namespace builtin {

namespace {

Term poly(double coef, double center, int k) { return Term{Term::Kind::Poly, coef, center, static_cast<double>(k)}; }
Term power(double coef, double center, double p) { return Term{Term::Kind::Power, coef, center, p}; }

}  // namespace

PiecewiseMap baseline(int slope) {
  if (slope < 2) throw ConfigurationError("baseline slope must be >= 2");
  std::vector<Branch> branches;
  for (int k = 0; k < slope; ++k) {
    Branch b;
    b.lo = static_cast<double>(k) / slope;
    b.hi = static_cast<double>(k + 1) / slope;
    if (k + 1 == slope) b.hi = 1.0;
    b.expr = Expression({poly(static_cast<double>(slope), 0.0, 1), poly(-static_cast<double>(k), 0.0, 0)});
    branches.push_back(std::move(b));
  }
  std::string name = slope == 2 ? "doubling" : "baseline" + std::to_string(slope);
  return PiecewiseMap(name, {0.0, 1.0}, std::move(branches), {}, {{0.0, 1.0}}, true);
}

PiecewiseMap chebyshev() {
  Expression e = Expression::parse("1 - 2*x^2");
  std::vector<Branch> branches{{-1.0, 0.0, e, true}, {0.0, 1.0, e, false}};
  std::vector<CriticalPoint> crit{{0.0, Side::left, 2.0, 4.0}, {0.0, Side::right, 2.0, 4.0}};
  return PiecewiseMap("chebyshev", {-1.0, 1.0}, std::move(branches), std::move(crit), {{-1.0, 1.0}});
}

PiecewiseMap lorenz() {
  std::vector<Branch> branches{{-1.0, 0.0, Expression::parse("1 - 2*|x|^0.6"), false},
                               {0.0, 1.0, Expression::parse("2*|x|^0.6 - 1"), true}};
  std::vector<CriticalPoint> crit{{0.0, Side::left, 0.6, 2.5}, {0.0, Side::right, 0.6, 2.5}};
  return PiecewiseMap("lorenz", {-1.0, 1.0}, std::move(branches), std::move(crit), {{-1.0, 1.0}});
}

PiecewiseMap combined(double ell_s, double ell_c, double glue) {
  if (!(ell_s > 0.0 && ell_s < 1.0)) throw ConfigurationError("combined: singular order must lie in (0,1)");
  if (!(ell_c > 1.0)) throw ConfigurationError("combined: critical order must exceed 1");
  if (!(glue > 0.0 && glue < 0.5)) throw ConfigurationError("combined: glue point must lie in (0, 1/2)");
  const double s = glue;
  const double d = 0.5 - s;
  // unknowns a, b, m: C^2 join of -1 + a x^ls and 1 - b |x-1/2|^lc + m |x-1/2|^(lc+1) at x = s
  double A[3][3] = {{std::pow(s, ell_s), std::pow(d, ell_c), -std::pow(d, ell_c + 1)},
                    {ell_s * std::pow(s, ell_s - 1), -ell_c * std::pow(d, ell_c - 1), (ell_c + 1) * std::pow(d, ell_c)},
                    {ell_s * (ell_s - 1) * std::pow(s, ell_s - 2), ell_c * (ell_c - 1) * std::pow(d, ell_c - 2),
                     -(ell_c + 1) * ell_c * std::pow(d, ell_c - 1)}};
  double rhs[3] = {2.0, 0.0, 0.0};
  auto det3 = [](double M[3][3]) {
    return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
           M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
  };
  double det = det3(A);
  if (std::fabs(det) < 1e-300) throw ConfigurationError("combined: glue system is singular");
  double sol[3];
  for (int j = 0; j < 3; ++j) {
    double M[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) M[r][c] = c == j ? rhs[r] : A[r][c];
    sol[j] = det3(M) / det;
  }
  const double a = sol[0], b = sol[1], m = sol[2];
  const double k3 = std::pow(2.0, ell_c + 1);

  auto build = [&](double cs, double cc) {
    std::vector<Branch> br;
    br.push_back({-1.0, -0.5, Expression({poly(-1.0, 0.0, 0), power(k3, -0.5, ell_c)}), true});
    br.push_back({-0.5, -s, Expression({poly(-1.0, 0.0, 0), power(b, -0.5, ell_c), power(-m, -0.5, ell_c + 1)}), false});
    br.push_back({-s, 0.0, Expression({poly(1.0, 0.0, 0), power(-a, 0.0, ell_s)}), true});
    br.push_back({0.0, s, Expression({poly(-1.0, 0.0, 0), power(a, 0.0, ell_s)}), true});
    br.push_back({s, 0.5, Expression({poly(1.0, 0.0, 0), power(-b, 0.5, ell_c), power(m, 0.5, ell_c + 1)}), true});
    br.push_back({0.5, 1.0, Expression({poly(1.0, 0.0, 0), power(-k3, 0.5, ell_c)}), false});
    std::vector<CriticalPoint> crit{{-0.5, Side::left, ell_c, cc}, {-0.5, Side::right, ell_c, cc},
                                    {0.0, Side::left, ell_s, cs},  {0.0, Side::right, ell_s, cs},
                                    {0.5, Side::left, ell_c, cc},  {0.5, Side::right, ell_c, cc}};
    return PiecewiseMap("combined", {-1.0, 1.0}, std::move(br), std::move(crit), {{-1.0, 1.0}});
  };

  PiecewiseMap probe = build(1e300, 1e300);
  const double radius = 0.5 * std::min(s, d);
  double cs = 1.0;
  double cc = 1.0;
  for (const auto& c : probe.criticals()) {
    double k = probe.nondegeneracy_check(c, radius, 200).constant;
    (c.is_critical() ? cc : cs) = std::max(c.is_critical() ? cc : cs, k);
  }
  return build(1.25 * cs, 1.25 * cc);
}

}  // namespace builtin

}  // namespace inducer
