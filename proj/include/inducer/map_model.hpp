#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "inducer/dd.hpp"
#include "inducer/expression.hpp"

namespace inducer {

/// Which one-sided limit to take at a branch boundary. `none` is only valid
/// where the map is unambiguous.
enum class Side { none, left, right };

std::string_view to_string(Side side);
Side parse_side(std::string_view text);
inline Side flip(Side s) { return s == Side::left ? Side::right : (s == Side::right ? Side::left : Side::none); }

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class AmbiguityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class SingularPointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

enum class PointClass { critical, singular };

/// One-sided critical or singular point. c+ and c- at the same location are
/// distinct entries.
struct CriticalPoint {
  double location = 0.0;
  Side side = Side::right;
  double order = 1.0;     // l_c
  double constant = 1.0;  // non-degeneracy constant C

  PointClass cls() const { return order >= 1.0 ? PointClass::critical : PointClass::singular; }
  bool is_critical() const { return cls() == PointClass::critical; }
  std::string label() const;
};

struct Branch {
  double lo = 0.0;
  double hi = 0.0;
  Expression expr;
  bool increasing = true;
};

/// Orbit state: a position together with the side from which it is approached.
struct OrbitPoint {
  dd x;
  Side side = Side::none;
};

struct NondegeneracyResult {
  double constant = 0.0;  // max of the three below
  double value_constant = 0.0;
  double deriv_constant = 0.0;
  double deriv2_constant = 0.0;
  double worst_x = 0.0;
  bool pass = false;  // constant <= declared C
};

/// A map of a compact interval J given by monotone branch formulas, with a
/// tagged list of one-sided critical and singular points.
///
/// Interior branch boundaries must either carry a declared critical point, be
/// a C^2 join of neighbouring formulas, or (for `periodic` maps) be a circle
/// identification where the one-sided values differ by exactly |J|. The last
/// kind is called a cut; intervals are split at cuts without any other
/// bookkeeping. Bounded-derivative jumps are rejected.
class PiecewiseMap {
 public:
  PiecewiseMap(std::string name, Interval domain, std::vector<Branch> branches, std::vector<CriticalPoint> criticals,
               std::vector<Interval> core, bool periodic = false);

  double eval(double x, Side side = Side::none) const;
  dd eval(const dd& x, Side side = Side::none) const;
  double deriv(double x, Side side = Side::none) const;
  double deriv2(double x, Side side = Side::none) const;

  /// One application of f that also carries the approach side along.
  OrbitPoint step(const OrbitPoint& p) const;
  /// f(base + e) - f(base) without forming base + e first, so that the
  /// difference keeps its relative precision when |e| is far below the
  /// resolution of base.
  dd step_deviation(const OrbitPoint& base, const dd& e) const;
  /// log |f'(base + e)| with the same precision handling as step_deviation.
  double log_abs_deriv(const OrbitPoint& base, const dd& e) const;
  /// log |f'| at an orbit point; -inf at a critical point, +inf at a singular one.
  double log_abs_deriv(const OrbitPoint& p) const;

  const Branch& branch_at(double x, Side side) const;
  std::size_t branch_index(double x, Side side) const;

  double distance_to_crit(double x) const;
  double distance_to_crit(const Interval& w) const;

  NondegeneracyResult nondegeneracy_check(const CriticalPoint& c, double radius, int samples) const;

  const std::string& name() const { return name_; }
  const Interval& domain() const { return domain_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const std::vector<CriticalPoint>& criticals() const { return criticals_; }
  const std::vector<Interval>& core() const { return core_; }
  const std::vector<double>& cuts() const { return cuts_; }
  bool periodic() const { return periodic_; }
  /// Distinct critical locations, sorted.
  const std::vector<double>& critical_locations() const { return locations_; }

  /// max l_c over critical points (0 if none).
  double ell() const;
  /// max l_c over singular points (0 if none).
  double ell_star() const;
  /// Smallest gap between distinct special locations (critical or cut).
  double min_critical_gap() const;

  bool is_special(double x) const;
  /// Critical values f(c^{+/-}).
  double critical_value(const CriticalPoint& c) const;

  /// Textual map document (see docs/map_format.md).
  std::string to_document() const;

 private:
  void validate();

  std::string name_;
  Interval domain_;
  std::vector<Branch> branches_;
  std::vector<CriticalPoint> criticals_;
  std::vector<Interval> core_;
  bool periodic_ = false;
  std::vector<double> cuts_;
  std::vector<double> locations_;
};

/// Parses the key-value map document.
PiecewiseMap parse_map_document(std::string_view text);
PiecewiseMap load_map_file(const std::string& path);

/// Resolves "builtin:<name>[:params]" or a file path.
PiecewiseMap resolve_map(const std::string& spec);

namespace builtin {

/// x -> m x mod 1 on [0,1] (periodic, no critical points).
PiecewiseMap baseline(int slope = 2);
/// 1 - 2x^2 on [-1,1].
PiecewiseMap chebyshev();
/// sign(x)(2|x|^0.6 - 1) on [-1,1].
PiecewiseMap lorenz();
/// Odd map on [-1,1] with a singular point at 0 of order ell_s and critical
/// points at +-1/2 of order ell_c; the formulas are glued C^2 at +-glue.
PiecewiseMap combined(double ell_s = 0.6, double ell_c = 2.0, double glue = 0.25);

}  // namespace builtin

}  // namespace inducer
