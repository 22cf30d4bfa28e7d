#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "inducer/map_model.hpp"

namespace inducer {

struct DeltaScale {
  int r_delta = 0;
  double delta = 0.0;  // e^{-r_delta}
};

/// r_delta = ceil(log 1/delta) and the snapped delta = e^{-r_delta}.
DeltaScale r_delta(double delta);

/// Index of a piece I_{r,j} of the critical partition. `crit` indexes
/// PiecewiseMap::criticals(); j = 1 is the piece nearest the critical point.
struct PartitionIndex {
  int crit = 0;
  int r = 0;
  int j = 0;
  bool clipped = false;  // at the critical point itself or below e^{-r_max}

  bool operator==(const PartitionIndex& o) const { return crit == o.crit && r == o.r && j == o.j; }
  bool operator<(const PartitionIndex& o) const {
    return crit != o.crit ? crit < o.crit : (r != o.r ? r > o.r : j < o.j);
  }
};

/// A range [lo, hi) of distances from a critical point.
struct DistanceRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// The partition of Delta into I_{r,j}: I_r(c) holds the points at distance
/// [e^{-r}, e^{-r+1}) from c on the side of c, for r > r_delta, and is cut
/// into r^2 pieces of equal length. All geometry is kept in the distance
/// coordinate d = |x - c| so that depth does not depend on |c|.
class CriticalPartition {
 public:
  CriticalPartition(const PiecewiseMap& map, double delta, int r_max = 700);

  int r_delta() const { return scale_.r_delta; }
  double delta() const { return scale_.delta; }
  int r_max() const { return r_max_; }
  const PiecewiseMap& map() const { return *map_; }

  static double ring_lo(int r);  // e^{-r}
  /// k-th subdivision point of I_r in distance, k = 0..r^2; exact ends.
  static double piece_edge(int r, int k);
  static DistanceRange piece(int r, int j);

  DistanceRange distance_range(const PartitionIndex& idx) const;
  Interval interval_of(const PartitionIndex& idx) const;

  /// Index of the piece at distance d > 0 from criticals()[crit], or nothing
  /// if d >= delta. d below e^{-r_max} gives (r_max, 1) with `clipped`.
  std::optional<PartitionIndex> locate_distance(int crit, double d) const;
  std::optional<PartitionIndex> locate(double x, Side side = Side::none) const;

  /// Neighbours in the linear order of pieces moving toward (inner) or away
  /// from (outer) the critical point. The outer neighbour of the outermost
  /// piece is the undivided I_{r_delta}, reported as r = r_delta, j = 0.
  PartitionIndex inner_neighbour(const PartitionIndex& idx) const;
  PartitionIndex outer_neighbour(const PartitionIndex& idx) const;

  /// Hat of I_{r,j}: the piece together with its two neighbours. The
  /// innermost piece is clipped at c.
  DistanceRange hat_distance(const PartitionIndex& idx) const;
  Interval hat_interval(const PartitionIndex& idx) const;

  /// Converts a distance from criticals()[crit] into a position.
  double position(int crit, double d) const;
  /// Signed direction of the neighbourhood: +1 for right-sided, -1 for left.
  double direction(int crit) const;

 private:
  const PiecewiseMap* map_;
  DeltaScale scale_;
  int r_max_;
};

struct BindingEntry {
  int p = 0;
  bool capped = false;      // the condition held up to the horizon
  bool exhausted = false;   // the deviation fell below the representable range
};

/// Binding periods p(r) of the critical points, computed on demand and
/// cached. Thread-safe.
///
/// p(r) is the largest k with |f^{j+1}(x) - f^{j+1}(c)| <= delta e^{-2 alpha j}
/// for all j <= k, tested at the end points and midpoint of the whole-ring
/// hat I_{r-1} u I_r u I_{r+1}; 0 if the condition fails already at j = 0
/// and 0 for singular points.
class BindingTable {
 public:
  BindingTable(const CriticalPartition& partition, double alpha, int horizon);

  BindingEntry binding(int crit, int r) const;
  int period(int crit, int r) const { return binding(crit, r).p; }

  /// Critical orbit c_1, c_2, ... with approach sides (cached, horizon + 2 points).
  const std::vector<OrbitPoint>& critical_orbit(int crit) const;
  /// Deviation orbit e_k = f^k(x) - c_k for the point at distance d, k = 0..n.
  std::vector<dd> deviation_orbit(int crit, double d, int n) const;

  double alpha() const { return alpha_; }
  int horizon() const { return horizon_; }
  const CriticalPartition& partition() const { return *partition_; }

 private:
  const CriticalPartition* partition_;
  double alpha_;
  int horizon_;
  std::vector<std::vector<OrbitPoint>> orbits_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, int>, BindingEntry> cache_;
};

/// Expansion over a binding period:
///   theta_hat = min over sampled x in the ring hat of (1/r) log(kappa |(f^{p+1})'(x)|).
/// For singular points (p = 0) the pointwise bound
/// |f'(x)| >= e^{(1 - l)(r - 1)} is audited on I_r.
struct BindingAudit {
  int crit = 0;
  int r = 0;
  int p = 0;
  double theta_hat = 0.0;
  double bindlen_bound = 0.0;  // 2 l r / Lambda for critical points
  bool bindlen_ok = true;
  bool singular_bound_ok = true;
  bool capped = false;
};

BindingAudit binding_expansion_audit(const BindingTable& table, int crit, int r, double kappa, double Lambda,
                                     int samples = 33);

void write_binding_csv(const std::vector<BindingAudit>& rows, const PiecewiseMap& map, const std::string& path,
                       const std::string& config_hash);

}  // namespace inducer
