#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "inducer/escape.hpp"

namespace inducer {

/// Delta* = (c* - delta*, c* + delta*), cut to one side when c* carries a
/// one-sided critical point only, together with the return constants.
struct ReturnConfig {
  double c_star = 0.0;
  double delta_star = 0.0;
  int t_star = 0;
  double xi = 0.0;  // worst window: largest carved proportion |w~| / delta
  double delta = 0.0;
  double delta_star_found = 0.0;  // before the final halving
  double min_component = 0.0;     // components narrower than this are not used
  Interval delta_star_interval;
  double worst_window = 0.0;  // left end of the window attaining xi
  std::size_t windows = 0;
  int halvings = 0;
};

struct ReturnSearchOptions {
  int t_max = 60;
  std::size_t max_nodes = 1u << 20;
  double min_component = 1e-5;  // relative to |Delta*|
  double start_fraction = 0.1;  // first trial delta* = start_fraction * delta
  int max_halvings = 20;
  bool extra_halving = false;
};

/// Backward orbit tree of c* with the component of f^{-t}(Delta*) around
/// every node, used to find full returns.
class ReturnFinder {
 public:
  struct Node {
    double x = 0.0;
    int depth = 0;
    int parent = -1;
    int branch = -1;
    double u = 0.0;  // component of f^{-depth}(Delta*) containing x
    double v = 0.0;
    bool valid = false;
  };

  struct Candidate {
    int node = -1;
    int t0 = 0;
    double u = 0.0;
    double v = 0.0;
  };

  /// Nodes whose component is narrower than min_component are dropped
  /// together with their preimages.
  ReturnFinder(const PiecewiseMap& map, double c_star, Interval delta_star, int t_max, std::size_t max_nodes,
               double min_component = 0.0);

  /// Widest valid component inside [lo + margin, hi - margin] with depth <= t_max.
  std::optional<Candidate> find(double lo, double hi, double margin, int t_max) const;
  /// A component of least depth inside [lo + margin, hi - margin].
  std::optional<Candidate> find_shallowest(double lo, double hi, double margin, int t_max) const;

  /// The component of a candidate refined in double-double: exact preimages
  /// of the Delta* end points along the inverse branch chain.
  std::pair<dd, dd> refine(const Candidate& c) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const Interval& delta_star() const { return delta_star_; }
  int depth() const { return depth_; }
  bool truncated() const { return truncated_; }

 private:
  const PiecewiseMap* map_;
  Interval delta_star_;
  int depth_ = 0;
  bool truncated_ = false;
  std::vector<Node> nodes_;
  std::vector<std::vector<std::pair<double, int>>> by_depth_;  // sorted (x, node)
  std::vector<double> max_width_;                              // per depth
};

/// Delta* around c*, on the sides where c* is declared.
Interval delta_star_interval(const PiecewiseMap& map, double c_star, double delta_star);

/// Searches decreasing delta* until every delta-window sliding over the core
/// at mesh delta/10 holds a component of f^{-t0}(Delta*), t0 <= t_max, inside
/// its middle third; t* is the largest t0 needed.
ReturnConfig choose_delta_star(const PiecewiseMap& map, double delta, double c_star, const ReturnSearchOptions& opt = {});

struct TowerOptions {
  int n_max = 400;
  double mass_floor = 1e-8;  // relative to |Delta*|
  std::size_t max_nodes = 1u << 20;
  std::size_t samples = 0;  // points followed through the mass below the floor
  int sample_n_max = 20000;  // iterate cap for the followed points
  bool sample_trails = true;
  std::uint64_t seed = 1;
  EscapeOptions escape;
};

/// Fate of single points of Delta* under the tower construction, following
/// only the pieces that contain them.
struct ReturnSample {
  dd x;
  int T = 0;  // return time, or the iterate of the abort
  Disposition disposition = Disposition::active;
  AbortReason reason = AbortReason::none;
  int generation = 0;
  dd image;                   // f^T(x) after a return
  std::vector<double> trail;  // f^k(x), k < T, when requested
};

struct PairSeparation {
  int s = 0;
  bool capped = false;
  bool unresolved = false;  // a point was aborted before the pair parted
};

/// Follows points in image coordinates: a piece is represented by its image
/// and by the images of the tracked points, so no end point is ever pulled
/// back and the depth is limited by the iterate cap only.
class ReturnFollower {
 public:
  ReturnFollower(const BindingTable& binding, const ReturnConfig& config, const TowerOptions& opt);

  ReturnSample follow(const dd& x, bool trail = false) const;
  /// Induced steps spent by x and y in common elements, up to `cap`.
  PairSeparation separation(const dd& x, const dd& y, int cap) const;

  const EscapeEngine& engine() const { return engine_; }

 private:
  const ReturnConfig* config_;
  EscapeEngine engine_;
  ReturnFinder finder_;
};

struct TowerElement {
  dd a;
  dd b;
  int T = 0;
  int t0 = 0;
  int generation = 0;
};

struct Tower {
  ReturnConfig config;
  std::vector<TowerElement> elements;  // sorted by (generation, left end)
  std::vector<Resolved> aborted;       // everything that did not return
  std::vector<dd> unresolved;          // unresolved[n] = |{T > n}| plus limit aborts
  // The mass stopped at the floor is resolved by following sampled points;
  // the estimates below replace it by the sampled proportions.
  dd deferred;
  std::size_t samples = 0;
  std::vector<double> unresolved_estimate;
  std::vector<double> unresolved_stderr;
  double aborted_estimate = 0.0;  // numerical aborts, sampled part included
  std::vector<ReturnSample> sampled;
  double sample_weight = 0.0;  // measure carried by each sampled point
  dd total;
  dd returned;
  dd aborted_numerical;  // precision, inversion, no return, ...
  dd aborted_limit;      // iterate, active and mass limits
  EngineStats stats;
  std::int64_t gcd_T = 0;
  double max_image_error = 0.0;  // max |f^T(end) - Delta* end| / |Delta*|
  bool tiled = false;            // elements and aborts tile Delta* end to end
  double ledger_error() const;   // |total - returned - aborted| / total
};

/// Escape partitions of Delta* with a full return carved out of every
/// escaped interval; the flanks go back into the escape machinery.
Tower build_tower(const BindingTable& binding, const ReturnConfig& config, const TowerOptions& opt);

/// Carves the widest full return out of an escaped interval and emits the
/// two flanks as children at the same iterate.
void carve_return(const EscapeEngine& engine, const ReturnFinder& finder, int t_star, const OrbitInterval& w,
                  StepResult& out);

std::vector<ReturnSample> sample_returns(const BindingTable& binding, const ReturnConfig& config,
                                         const TowerOptions& opt, const std::vector<dd>& points, bool trail = false);

/// f^n of a point approached from `side`.
dd forward_from(const PiecewiseMap& map, const dd& x, Side side, int n);

/// |(f^T)'(x)/(f^T)'(y) - 1| / |f^T x - f^T y| over sampled pairs.
struct DistortionRow {
  std::size_t element = 0;
  int T = 0;
  double d_hat = 0.0;
  std::size_t pairs = 0;
};

struct DistortionReport {
  std::vector<DistortionRow> rows;
  double d_tilde = 0.0;
  double lambda_prime = 0.0;  // min |f^T x - f^T y| / |x - y|
  double k_hat = 0.0;         // max over k <= T of |f^k x - f^k y| / |f^T x - f^T y|
  std::size_t elements = 0;
};

/// Audits up to max_elements elements (the widest first, then evenly spread),
/// each with the end points, quartiles and `random_points` seeded points.
DistortionReport distortion_audit(const PiecewiseMap& map, const Tower& tower, int random_points,
                                  std::size_t max_elements, std::uint64_t seed, int threads = 1);

/// Fit of the estimated unresolved measure over [n_lo, n_hi].
TailFit fit_return_tail(const Tower& tower, int n_lo, int n_hi);

void write_tower_csv(const Tower& tower, const std::string& path, const std::string& config_hash);
void write_return_tail_csv(const Tower& tower, const std::string& path, const std::string& config_hash);
void write_distortion_csv(const DistortionReport& report, const std::string& path, const std::string& config_hash);
void write_tower_cfg(const ReturnConfig& config, const std::string& path, const std::string& config_hash);

}  // namespace inducer
