#pragma once

#include <string>
#include <vector>

#include "inducer/map_model.hpp"

namespace inducer {

/// Expansion outside the critical neighbourhood Delta = {D(x) <= delta}.
///
/// A block is an orbit segment x, f(x), ..., f^{n-1}(x) outside Delta with
/// n <= max_block_len. Blocks starting in f(Delta) or ending in Delta must
/// satisfy |(f^n)'| >= kappa e^{lambda n}, all others the weaker
/// |(f^n)'| >= kappa delta e^{lambda n}. With an empty critical set every
/// block is held to the strong form.
struct H1Result {
  double lambda_hat = 0.0;  // largest lambda valid for the candidate kappa
  double kappa_hat = 0.0;   // largest kappa valid for the candidate lambda
  double lambda = 0.0;
  double kappa = 0.0;
  bool pass = false;
  std::size_t blocks = 0;
  double witness_x = 0.0;  // block start attaining lambda_hat
  int witness_n = 0;
  bool witness_strong = false;
};

struct H1Options {
  double delta = 0.0;
  int max_block_len = 50;
  int samples = 10000;
  double lambda = 0.0;
  double kappa = 1.0;
  int threads = 1;
};

H1Result check_h1(const PiecewiseMap& map, const H1Options& opt);

/// Recurrence and derivative growth along the orbit of one critical point.
struct H2Result {
  CriticalPoint c;
  int horizon = 0;
  double alpha_required = 0.0;  // smallest alpha with D(c_k) >= delta e^{-alpha k}, k <= horizon
  double Lambda_hat = 0.0;      // min_k (1/k) log |(f^k)'(c_1)|
  double alpha = 0.0;
  double Lambda = 0.0;
  int hit_k = 0;            // first k with c_k on the critical set, 0 if none
  int recurrence_k = 0;     // k attaining alpha_required
  int growth_k = 0;         // k attaining Lambda_hat
  bool pass = false;
};

std::vector<H2Result> check_h2(const PiecewiseMap& map, double delta, double alpha, double Lambda, int horizon);

/// Density of backward preimages of c_star inside the core.
struct H3Result {
  double c_star = 0.0;
  int depth = 0;
  /// max_gap[t]: largest gap among f^{-t}(c_star) inside the core, counting
  /// the gaps to the ends of each core interval.
  std::vector<double> max_gap;
  std::vector<std::size_t> count;
  /// Preimages (depth >= 1) within `mesh` of a critical location.
  std::vector<double> flagged;
  std::size_t ill_conditioned = 0;
  double target = 0.0;
  bool pass = false;  // no flags and max_gap[depth] <= target
  bool truncated = false;
};

H3Result check_h3(const PiecewiseMap& map, double c_star, int depth, double mesh, double target,
                  std::size_t max_nodes = 1u << 22);

/// All preimages x with f(x) = y, sorted. Points at a branch boundary are
/// reported once.
std::vector<double> preimages(const PiecewiseMap& map, double y);

struct HypothesisReport {
  H1Result h1;
  std::vector<H2Result> h2;
  H3Result h3;
  std::vector<std::pair<CriticalPoint, NondegeneracyResult>> nondegeneracy;
  bool pass() const;
};

void write_hypotheses_csv(const HypothesisReport& report, const std::string& path, const std::string& config_hash);

}  // namespace inducer
