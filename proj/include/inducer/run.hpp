#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "inducer/hypotheses.hpp"
#include "inducer/statistics.hpp"
#include "inducer/tower.hpp"

namespace inducer {

class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode { exit_ok = 0, exit_hypothesis = 2, exit_resource = 3, exit_config = 4 };

/// Run configuration: one `key = value` per line, `#` starts a comment.
/// Every key has a default; unknown keys and malformed values are rejected.
/// Numbers may be written as `e^<x>` for exp(x).
class RunConfig {
 public:
  RunConfig();
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;

  /// The document as given, or empty for a default configuration.
  const std::string& text() const { return text_; }
  /// Every key in sorted order with its effective value.
  std::string canonical() const;
  /// FNV-1a of the canonical form.
  std::string hash() const;

  static const std::vector<std::string>& keys();

 private:
  std::string text_;
  std::map<std::string, std::string> values_;
};

double parse_number(std::string_view text);

struct RunContext {
  RunConfig config;
  std::string out;
  int threads = 1;
  bool force = false;
  std::ostream* report = nullptr;  // human-readable lines, may be null
};

/// Objects shared by the commands of one run.
struct Setup {
  PiecewiseMap map;
  CriticalPartition partition;
  BindingTable binding;
  explicit Setup(const RunConfig& config);
};

struct CheckOutcome {
  HypothesisReport report;
  std::vector<BindingAudit> binding;
  std::size_t bindlen_violations = 0;
  bool pass = false;
};

struct TowerOutcome {
  ReturnConfig config;
  EscapePartition escape;
  TailFit escape_fit;
  Tower tower;
  TailFit return_fit;
  DistortionReport distortion;
  DistortionReport distortion_doubled;
  bool limit_hit = false;
  std::string limit_note;
  double escape_seconds = 0.0;
  double tower_seconds = 0.0;
};

struct StatsOutcome {
  std::vector<EmpiricalMeasure> acip;
  std::optional<LyapunovResult> lyapunov;
  std::optional<CorrelationResult> correlation;
  std::optional<CltResult> clt;
  double clt_center = 0.0;
  double green_kubo = 0.0;
  std::vector<SymbolicRow> symbolic;
  std::optional<CylinderCheck> cylinder;
  std::vector<std::string> notices;
  std::map<std::string, double> seconds;  // wall time per statistic
};

/// Writes the configuration echo (verbatim document and canonical form).
void echo_config(const RunContext& ctx);

CheckOutcome run_check(const RunContext& ctx, const Setup& setup);
TowerOutcome run_tower(const RunContext& ctx, const Setup& setup);
/// `which` is one of acip, lyapunov, corr, clt, symbolic, all. Tower based
/// parts use `tower` when given.
StatsOutcome run_stats(const RunContext& ctx, const Setup& setup, const std::string& which,
                       const TowerOutcome* tower);

/// True if `out` holds tower outputs written under the same config hash.
bool tower_outputs_present(const std::string& out, const std::string& config_hash);

}  // namespace inducer
