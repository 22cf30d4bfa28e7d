#include "inducer/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inducer/util.hpp"

namespace inducer {

DeltaScale r_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigurationError("delta must lie in (0, 1)");
  double v = std::log(1.0 / delta);
  double nearest = std::round(v);
  int r = std::fabs(v - nearest) <= 1e-9 ? static_cast<int>(nearest) : static_cast<int>(std::ceil(v));
  r = std::max(r, 1);
  return {r, std::exp(-static_cast<double>(r))};
}

CriticalPartition::CriticalPartition(const PiecewiseMap& map, double delta, int r_max)
    : map_(&map), scale_(inducer::r_delta(delta)), r_max_(r_max) {
  if (r_max_ <= scale_.r_delta + 1) throw ConfigurationError("r_max must exceed r_delta + 1");
  if (!map.critical_locations().empty() && !(2.0 * scale_.delta < map.min_critical_gap()))
    throw ConfigurationError("delta must be below half the minimal gap between critical points");
}

double CriticalPartition::ring_lo(int r) { return std::exp(-static_cast<double>(r)); }

double CriticalPartition::piece_edge(int r, int k) {
  const int n = r * r;
  double lo = ring_lo(r);
  double hi = ring_lo(r - 1);
  if (k <= 0) return lo;
  if (k >= n) return hi;
  return lo + (hi - lo) * k / n;
}

DistanceRange CriticalPartition::piece(int r, int j) { return {piece_edge(r, j - 1), piece_edge(r, j)}; }

DistanceRange CriticalPartition::distance_range(const PartitionIndex& idx) const {
  if (idx.j == 0) return {ring_lo(idx.r), ring_lo(idx.r - 1)};
  return piece(idx.r, idx.j);
}

double CriticalPartition::direction(int crit) const {
  return map_->criticals()[static_cast<std::size_t>(crit)].side == Side::right ? 1.0 : -1.0;
}

double CriticalPartition::position(int crit, double d) const {
  return map_->criticals()[static_cast<std::size_t>(crit)].location + direction(crit) * d;
}

Interval CriticalPartition::interval_of(const PartitionIndex& idx) const {
  auto d = distance_range(idx);
  double a = position(idx.crit, d.lo);
  double b = position(idx.crit, d.hi);
  return {std::min(a, b), std::max(a, b)};
}

std::optional<PartitionIndex> CriticalPartition::locate_distance(int crit, double d) const {
  if (!(d < scale_.delta)) return std::nullopt;
  PartitionIndex idx;
  idx.crit = crit;
  if (!(d > 0.0) || d < ring_lo(r_max_)) {
    idx.r = r_max_;
    idx.j = 1;
    idx.clipped = true;
    return idx;
  }
  int r = static_cast<int>(std::ceil(-std::log(d)));
  r = std::clamp(r, scale_.r_delta + 1, r_max_);
  while (r < r_max_ && d < ring_lo(r)) ++r;
  while (r > scale_.r_delta + 1 && d >= ring_lo(r - 1)) --r;
  const int n = r * r;
  double lo = ring_lo(r);
  double hi = ring_lo(r - 1);
  int j = static_cast<int>(std::floor((d - lo) / (hi - lo) * n)) + 1;
  j = std::clamp(j, 1, n);
  while (j > 1 && d < piece_edge(r, j - 1)) --j;
  while (j < n && d >= piece_edge(r, j)) ++j;
  idx.r = r;
  idx.j = j;
  return idx;
}

std::optional<PartitionIndex> CriticalPartition::locate(double x, Side side) const {
  const auto& crits = map_->criticals();
  std::optional<PartitionIndex> at_point;
  for (std::size_t i = 0; i < crits.size(); ++i) {
    int ci = static_cast<int>(i);
    double d = (x - crits[i].location) * direction(ci);
    if (d > 0.0) {
      auto idx = locate_distance(ci, d);
      if (idx) return idx;
    } else if (d == 0.0) {
      if (side == crits[i].side || (side == Side::none && !at_point)) at_point = locate_distance(ci, 0.0);
    }
  }
  return at_point;
}

PartitionIndex CriticalPartition::inner_neighbour(const PartitionIndex& idx) const {
  PartitionIndex out = idx;
  if (idx.j == 0) {
    out.r = idx.r + 1;
    out.j = out.r * out.r;
  } else if (idx.j > 1) {
    out.j = idx.j - 1;
  } else if (idx.r < r_max_) {
    out.r = idx.r + 1;
    out.j = out.r * out.r;
  } else {
    out.clipped = true;
  }
  return out;
}

PartitionIndex CriticalPartition::outer_neighbour(const PartitionIndex& idx) const {
  PartitionIndex out = idx;
  out.clipped = false;
  if (idx.j > 0 && idx.j < idx.r * idx.r) {
    out.j = idx.j + 1;
  } else if (idx.r - 1 > scale_.r_delta) {
    out.r = idx.r - 1;
    out.j = 1;
  } else {
    out.r = scale_.r_delta;
    out.j = 0;
  }
  return out;
}

DistanceRange CriticalPartition::hat_distance(const PartitionIndex& idx) const {
  PartitionIndex in = inner_neighbour(idx);
  PartitionIndex out = outer_neighbour(idx);
  double lo = in.clipped ? 0.0 : distance_range(in).lo;
  return {lo, distance_range(out).hi};
}

Interval CriticalPartition::hat_interval(const PartitionIndex& idx) const {
  auto d = hat_distance(idx);
  double a = position(idx.crit, d.lo);
  double b = position(idx.crit, d.hi);
  return {std::min(a, b), std::max(a, b)};
}

BindingTable::BindingTable(const CriticalPartition& partition, double alpha, int horizon)
    : partition_(&partition), alpha_(alpha), horizon_(horizon) {
  if (horizon_ < 1) throw ConfigurationError("binding horizon must be >= 1");
  const auto& map = partition.map();
  for (const auto& c : map.criticals()) {
    std::vector<OrbitPoint> orbit;
    orbit.reserve(static_cast<std::size_t>(horizon_) + 2);
    OrbitPoint p{dd(c.location), c.side};
    orbit.push_back(p);
    for (int k = 0; k <= horizon_; ++k) {
      p = map.step(p);
      orbit.push_back(p);
    }
    orbits_.push_back(std::move(orbit));
  }
}

const std::vector<OrbitPoint>& BindingTable::critical_orbit(int crit) const {
  return orbits_[static_cast<std::size_t>(crit)];
}

std::vector<dd> BindingTable::deviation_orbit(int crit, double d, int n) const {
  const auto& map = partition_->map();
  const auto& orbit = critical_orbit(crit);
  n = std::min(n, static_cast<int>(orbit.size()) - 1);
  std::vector<dd> e;
  e.reserve(static_cast<std::size_t>(n) + 1);
  e.push_back(dd(partition_->direction(crit) * d));
  for (int k = 0; k < n; ++k) e.push_back(map.step_deviation(orbit[static_cast<std::size_t>(k)], e.back()));
  return e;
}

BindingEntry BindingTable::binding(int crit, int r) const {
  const auto& c = partition_->map().criticals()[static_cast<std::size_t>(crit)];
  if (!c.is_critical()) return {};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find({crit, r});
    if (it != cache_.end()) return it->second;
  }
  const auto& map = partition_->map();
  const auto& orbit = critical_orbit(crit);
  const double delta = partition_->delta();
  const double lo = CriticalPartition::ring_lo(r + 1);
  const double hi = CriticalPartition::ring_lo(r - 2);
  BindingEntry entry;
  entry.p = horizon_;
  entry.capped = true;
  for (double d : {lo, 0.5 * (lo + hi), hi}) {
    dd e(partition_->direction(crit) * d);
    int fail = -1;
    for (int j = 0; j <= horizon_; ++j) {
      e = map.step_deviation(orbit[static_cast<std::size_t>(j)], e);
      double dev = std::fabs(to_double(e));
      if (dev > 0.0 && dev < 1e-280) entry.exhausted = true;
      if (!(dev <= delta * std::exp(-2.0 * alpha_ * j))) {
        fail = j;
        break;
      }
    }
    if (fail >= 0) {
      entry.capped = false;
      entry.p = std::min(entry.p, std::max(0, fail - 1));
    }
  }
  if (entry.capped) entry.p = horizon_;
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(std::make_pair(crit, r), entry);
  return entry;
}

BindingAudit binding_expansion_audit(const BindingTable& table, int crit, int r, double kappa, double Lambda,
                                     int samples) {
  const auto& part = table.partition();
  const auto& map = part.map();
  const auto& c = map.criticals()[static_cast<std::size_t>(crit)];
  const auto& orbit = table.critical_orbit(crit);
  BindingAudit audit;
  audit.crit = crit;
  audit.r = r;
  BindingEntry entry = table.binding(crit, r);
  audit.p = entry.p;
  audit.capped = entry.capped;
  samples = std::max(samples, 2);

  double lo = CriticalPartition::ring_lo(r + 1);
  double hi = CriticalPartition::ring_lo(r - 2);
  if (!c.is_critical()) {
    lo = CriticalPartition::ring_lo(r);
    hi = CriticalPartition::ring_lo(r - 1);
  }
  audit.theta_hat = std::numeric_limits<double>::infinity();
  const double log_kappa = std::log(kappa);
  for (int i = 0; i < samples; ++i) {
    double d = lo + (hi - lo) * i / (samples - 1);
    if (i == samples - 1) d = hi;
    auto e = table.deviation_orbit(crit, d, audit.p);
    double sum = 0.0;
    for (int k = 0; k <= audit.p; ++k) sum += map.log_abs_deriv(orbit[static_cast<std::size_t>(k)], e[static_cast<std::size_t>(k)]);
    audit.theta_hat = std::min(audit.theta_hat, (log_kappa + sum) / r);
    if (!c.is_critical() && sum < (1.0 - c.order) * (r - 1)) audit.singular_bound_ok = false;
  }
  if (c.is_critical()) {
    audit.bindlen_bound = 2.0 * c.order * r / Lambda;
    audit.bindlen_ok = audit.p <= audit.bindlen_bound;
  }
  return audit;
}

void write_binding_csv(const std::vector<BindingAudit>& rows, const PiecewiseMap& map, const std::string& path,
                       const std::string& config_hash) {
  CsvWriter csv(path, config_hash, {"c", "r", "p", "theta_hat", "capped"});
  for (const auto& a : rows) {
    csv.row({map.criticals()[static_cast<std::size_t>(a.crit)].label(), std::to_string(a.r), std::to_string(a.p),
             fmt(a.theta_hat), a.capped ? "1" : "0"});
  }
}

}  // namespace inducer
