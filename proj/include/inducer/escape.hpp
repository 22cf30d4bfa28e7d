#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inducer/map_model.hpp"
#include "inducer/partition.hpp"

namespace inducer {

/// How a return meeting exactly three adjacent pieces is treated.
enum class ThreePiecePolicy { chop, inessential };
ThreePiecePolicy parse_three_piece_policy(std::string_view text);

enum class Disposition { active, escaped, returned, aborted };

enum class AbortReason {
  none,
  iterate_limit,
  active_limit,
  mass_floor,
  precision,
  inversion,
  binding_horizon,
  monotonicity,
  domain,
  no_return
};
std::string_view to_string(AbortReason reason);
/// Limit aborts leave mass whose fate is unknown; the rest are numerical.
bool is_limit(AbortReason reason);

struct ReturnEvent {
  int nu = 0;
  int crit = 0;
  int r = 0;
  int j = 0;
  bool essential = false;
  int p = 0;
};

struct EventNode {
  ReturnEvent event;
  std::shared_ptr<const EventNode> prev;
};

std::vector<ReturnEvent> itinerary(const std::shared_ptr<const EventNode>& head);

/// A subinterval [a, b] of the starting interval followed under f^n.
/// The image is kept sorted: `lo` is approached from the right and `hi`
/// from the left. `orient` is +1 when f^n is increasing on [a, b].
struct OrbitInterval {
  dd a;
  dd b;
  int n = 0;
  OrbitPoint lo;
  OrbitPoint hi;
  dd mid;  // image of an interior point, for the monotonicity audit
  int orient = 1;
  int free_from = 0;  // iterates n >= free_from are free
  int generation = 0;
  std::shared_ptr<const EventNode> events;
  // Image mode: a and b are left as they were, the images of the tracked
  // points are carried along and only the piece holding the first is kept.
  bool image_only = false;
  std::vector<OrbitPoint> tracked;
  std::shared_ptr<std::vector<double>> trail;  // image of tracked[0] per iterate

  dd width() const { return b - a; }
  dd image_width() const { return hi.x - lo.x; }
  bool free() const { return n >= free_from; }
};

/// Final state of a piece of the starting interval.
struct Resolved {
  dd a;
  dd b;
  Disposition disposition = Disposition::active;
  int time = 0;  // escape or return time, or the iterate of the abort
  int t0 = 0;    // return: iterates spent after the escape
  AbortReason reason = AbortReason::none;
  int generation = 0;
  std::shared_ptr<const EventNode> events;
  std::vector<OrbitPoint> tracked;  // image mode: tracked points at `time`
};

struct EscapeOptions {
  int n_max = 2000;
  std::size_t max_active = 4'000'000;
  double min_width = 1e-14;
  double mass_floor = 0.0;  // narrower intervals stop as a limit abort
  ThreePiecePolicy policy = ThreePiecePolicy::chop;
  int threads = 1;
};

enum class Action { escape, none, inessential, chop };

struct Classification {
  Action action = Action::none;
  int crit = -1;
  int r = 0;
  int j = 0;
  int pieces = 0;
};

/// Output of one unit of work: finished pieces and intervals to continue.
struct StepResult {
  std::vector<Resolved> done;
  std::vector<OrbitInterval> children;
  std::size_t chops = 0;
  std::size_t splits = 0;
  bool separated = false;  // image mode: the tracked points parted
};

struct EngineStats {
  std::size_t chops = 0;
  std::size_t splits = 0;
  std::size_t rounds = 0;
  std::size_t peak_active = 0;
};

class EscapeEngine {
 public:
  /// Called with an interval that escaped at its current iterate. The
  /// default records it as Resolved{escaped}.
  using EscapeHandler = std::function<void(const OrbitInterval& escaped, StepResult& out)>;

  EscapeEngine(const BindingTable& binding, EscapeOptions options);

  const PiecewiseMap& map() const { return partition_->map(); }
  const CriticalPartition& partition() const { return *partition_; }
  const BindingTable& binding() const { return *binding_; }
  const EscapeOptions& options() const { return options_; }

  /// [a, b] at time 0, free.
  OrbitInterval start(const dd& a, const dd& b) const;

  Classification classify(const OrbitInterval& w) const;
  /// One application of f to the image. Requires no special point inside.
  void advance(OrbitInterval& w) const;

  /// x in [w.a, w.b] with f^{w.n}(x) = y for y inside the image.
  std::optional<dd> pullback(const OrbitInterval& w, const dd& y) const;
  /// Preimages of ascending image points ys, returned in the same order.
  /// Entries that fail to converge are empty. A positive `tol` overrides the
  /// default bracket tolerance.
  std::vector<std::optional<dd>> pullback_sorted(const OrbitInterval& w, const std::vector<dd>& ys,
                                                 double tol = 0.0) const;
  /// f^n(x) for a point of the starting interval.
  dd forward(const dd& x, int n) const;

  /// Drives one interval until it escapes, is aborted, or is subdivided.
  /// With a target point of [w.a, w.b], a chop only produces the child whose
  /// image holds f^n(target).
  StepResult drive(OrbitInterval w, const EscapeHandler& on_escape, const dd* target = nullptr) const;
  Resolved finish(const OrbitInterval& w, Disposition d, AbortReason reason) const;
  /// Subdivides at the critical partition (case three). A target image
  /// point restricts the output to the child holding it.
  StepResult chop(const OrbitInterval& w, const dd* target = nullptr) const;

  struct RunResult {
    std::vector<Resolved> resolved;  // sorted by left endpoint
    EngineStats stats;
  };
  RunResult run(std::vector<OrbitInterval> initial, const EscapeHandler& on_escape = {}) const;

  /// Children of w created at image breakpoints ys (sorted, strictly inside
  /// the image), sharing pulled-back endpoints.
  std::vector<OrbitInterval> split_at(const OrbitInterval& w, const std::vector<dd>& ys) const;
  /// Image mode: starts w at time 0 tracking the given points of [a, b].
  OrbitInterval start_tracking(const dd& a, const dd& b, const std::vector<dd>& points, bool trail) const;

 private:
  bool special_inside(const OrbitInterval& w, dd& where) const;
  /// Root of F(x) = orient (f^n(x) - y) on [xl, xr] given F(xl) < 0 < F(xr),
  /// optionally started from `guess`; |(f^n)'| at the root goes to `deriv`.
  std::optional<dd> solve(int n, int orient, const dd& y, dd xl, dd xr, dd fl, dd fr, const dd& tol,
                          const std::optional<dd>& guess, double* deriv) const;
  dd tolerance(const OrbitInterval& w) const;

  const CriticalPartition* partition_;
  const BindingTable* binding_;
  EscapeOptions options_;
};

/// Lebesgue measure per iterate of intervals not yet escaped (or returned).
struct TailHistogram {
  std::vector<dd> active;   // active[n]: escape time > n
  std::vector<dd> escaped;  // escaped[n]: escape time <= n
  dd aborted;
  dd total;
};

TailHistogram tail_histogram(const std::vector<Resolved>& resolved, const dd& total, int n_last);

struct TailFit {
  double log_c = 0.0;
  double gamma = 0.0;  // positive for a decaying tail
  double r2 = 0.0;
  int n_lo = 0;
  int n_hi = 0;
  std::size_t points = 0;
};

/// Least-squares fit of log active(n) = log C - gamma n over [n_lo, n_hi],
/// skipping empty bins.
TailFit fit_tail(const std::vector<dd>& active, int n_lo, int n_hi);

struct EscapePartition {
  std::vector<Resolved> elements;
  TailHistogram tail;
  EngineStats stats;
  dd escaped_measure;
  dd aborted_measure;
};

EscapePartition build_escape_partition(const EscapeEngine& engine, const dd& a, const dd& b);

void write_escape_tail_csv(const TailHistogram& tail, const std::string& path, const std::string& config_hash);
void write_events_log(const std::vector<Resolved>& resolved, const PiecewiseMap& map, const std::string& path,
                      const std::string& config_hash);

}  // namespace inducer
