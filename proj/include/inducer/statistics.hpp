#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "inducer/tower.hpp"

namespace inducer {

/// Observable given in the branch-formula grammar.
struct Observable {
  Expression expr;
  std::string text;
  double holder_alpha = 1.0;
  double holder_c = 0.0;  // declared, or estimated on a pair grid

  double operator()(double x) const { return expr.eval(x); }
};

Observable make_observable(std::string_view text, double holder_alpha = 1.0);
/// max |phi(x) - phi(y)| / |x - y|^alpha over a grid of pairs in I.
double estimate_holder_constant(const Observable& phi, Interval I, int grid = 400);

struct EmpiricalMeasure {
  std::vector<double> edges;
  std::vector<double> masses;  // sum to 1
  std::size_t samples = 0;
  std::string estimator;       // "orbit-histogram" or "tower-pushforward"
  double normalization = 0.0;  // tower: sum over elements of T mu_hat(w)
  bool converged = true;
  int iterations = 0;

  std::size_t bins() const { return masses.size(); }
  double density(std::size_t i) const { return masses[i] / (edges[i + 1] - edges[i]); }
};

/// Support Jhat of the statistics: the hull of the core, or the domain.
Interval statistics_support(const PiecewiseMap& map);

/// L1 distance between two histograms on the same edges.
double l1_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);
/// L1 distance to the measure with the given distribution function.
template <typename Cdf>
double l1_to_cdf(const EmpiricalMeasure& m, Cdf cdf) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.bins(); ++i) s += std::fabs(m.masses[i] - (cdf(m.edges[i + 1]) - cdf(m.edges[i])));
  return s;
}

/// Orbit of f in double precision with a uniform jitter of one unit of
/// 2^-52 |J| per step, so that finite-precision orbits do not collapse onto
/// periodic cycles. Points landing exactly on a branch boundary are moved by
/// one ulp into the next branch and counted.
class OrbitSampler {
 public:
  OrbitSampler(const PiecewiseMap& map, std::uint64_t seed, std::uint64_t stream);
  double next();
  double x() const { return x_; }
  /// log |f'(x)| at the current point, before stepping.
  double log_deriv() const;
  std::size_t boundary_hits() const { return hits_; }

 private:
  double settle(double x);

  const PiecewiseMap* map_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unif_;
  double jitter_;
  double x_;
  std::size_t hits_ = 0;
};

EmpiricalMeasure acip_orbit(const PiecewiseMap& map, std::size_t n_iter, std::size_t burn_in, std::size_t bins,
                            std::uint64_t seed);

struct TowerMeasureOptions {
  std::size_t ulam_bins = 1000;      // grid over Delta*
  std::size_t points_per_element = 4;
  int max_iterations = 10000;
  double tolerance = 1e-12;          // L1 change per transfer step
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Ulam estimate of the invariant density of f^T on Delta*, spread along the
/// orbit segments f^k(w), k < T, and normalized by sum T mu_hat(w).
EmpiricalMeasure acip_tower(const PiecewiseMap& map, const Tower& tower, std::size_t bins,
                            const TowerMeasureOptions& opt);

struct LyapunovResult {
  double value = 0.0;
  double stderr_ = 0.0;  // batch means over 20 batches
  std::size_t samples = 0;
  std::size_t skipped = 0;  // points where log |f'| is infinite
};

LyapunovResult lyapunov(const PiecewiseMap& map, std::size_t n_iter, std::size_t burn_in, std::uint64_t seed);

struct CorrelationResult {
  std::vector<double> c;         // |C_n|
  std::vector<double> c_signed;  // <psi phi o f^n> - <psi><phi o f^n>
  std::vector<double> batch_stderr;
  double floor = 0.0;       // mean batch standard error over n >= 1
  int first_below = -1;     // first n with |C_n| < 10 floor
  int fit_lo = 0;
  int fit_hi = 0;           // fit window [0, fit_hi]: |C_n| > 3 floor, crossing point included
  double slope = 0.0;       // of log |C_n|
  double r2 = 0.0;
  std::size_t fit_points = 0;
};

CorrelationResult correlation(const PiecewiseMap& map, const Observable& phi, const Observable& psi, int n_max,
                              std::size_t N, std::uint64_t seed);

struct CltResult {
  std::vector<double> sums;  // S_n / sqrt(n), one per trial
  double mean = 0.0;
  double sigma2 = 0.0;
  double ks = 0.0;
  bool coboundary_warning = false;
};

/// Normalized Birkhoff sums of phi - center from seeded starts uniform on
/// Jhat, each after `burn_in` iterates.
CltResult clt_test(const PiecewiseMap& map, const Observable& phi, double center, int n, std::size_t trials,
                   std::uint64_t seed, int threads = 1, int burn_in = 1000);

/// C_0 + 2 sum C_n (signed), truncated where |C_n| first falls below 3 floor.
double green_kubo(const CorrelationResult& corr);

/// Kolmogorov-Smirnov distance of a sample to N(mean, sigma2).
double ks_normal(std::vector<double> sample, double mean, double sigma2);

/// Lookup of tower elements by position, for the induced map F = f^T.
class InducedMap {
 public:
  /// Without a follower, points outside the enumerated elements are unresolved.
  InducedMap(const PiecewiseMap& map, const Tower& tower, const ReturnFollower* follower = nullptr);
  /// Element holding x, if any.
  std::optional<std::size_t> locate(const dd& x) const;
  const TowerElement& element(std::size_t i) const { return tower_->elements[i]; }
  /// F(x) for x in element i.
  dd apply(std::size_t i, const dd& x) const;
  /// log |(f^T)'(x)| for x in element i.
  double log_jacobian(std::size_t i, const dd& x) const;
  const PiecewiseMap& map() const { return *map_; }
  const Tower& tower() const { return *tower_; }
  const ReturnFollower* follower() const { return follower_; }

 private:
  const PiecewiseMap* map_;
  const Tower* tower_;
  const ReturnFollower* follower_;
  std::vector<std::size_t> order_;  // element ids by left end
};

struct Separation {
  int s = 0;
  bool capped = false;      // never separated within the cap
  bool unresolved = false;  // a point fell outside the elements
};

Separation separation_time(const InducedMap& F, const dd& x, const dd& y, int cap = 8);

/// Pairs sampled inside tower elements: end points and quartiles, then
/// seeded random pairs, `pairs_per_element` in total per element.
struct PairSample {
  std::size_t element = 0;
  dd x;
  dd y;
};

std::vector<PairSample> sample_pairs(const Tower& tower, std::size_t pairs_per_element, std::size_t max_elements,
                                     std::uint64_t seed);

struct SymbolicCheck {
  double constant = 0.0;
  double sigma = 0.0;
  std::size_t pairs = 0;
  std::size_t capped = 0;
  std::size_t unresolved = 0;
  int max_s = 0;
  bool rejected = false;
  std::string note;
};

/// max |JF(x)/JF(y) - 1| / sigma^s(x,y) over the pairs; requires 1/lambda' < sigma < 1.
SymbolicCheck symbolic_distortion_check(const InducedMap& F, double sigma, double lambda_prime,
                                        const std::vector<PairSample>& pairs, int threads = 1);

/// max |phi(f^k x) - phi(f^k y)| / sigma^s(x,y) over k < T; requires
/// sigma > lambda'^-alpha.
SymbolicCheck holder_lift_check(const InducedMap& F, const Observable& phi, double sigma, double lambda_prime,
                                const std::vector<PairSample>& pairs, int threads = 1);

struct CylinderCheck {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max |x - y| / (|Delta*| lambda'^-s)
};

CylinderCheck cylinder_check(const InducedMap& F, double lambda_prime, const std::vector<PairSample>& pairs,
                             int threads = 1);

void write_acip_csv(const std::vector<EmpiricalMeasure>& measures, const std::string& path,
                    const std::string& config_hash);
void write_correlation_csv(const CorrelationResult& corr, const std::string& path, const std::string& config_hash);
void write_clt_csv(const CltResult& clt, const std::string& path, const std::string& config_hash);

struct SymbolicRow {
  std::string check;
  double sigma = 0.0;
  std::size_t budget = 0;
  double constant = 0.0;
  std::size_t pairs = 0;
};
void write_symbolic_csv(const std::vector<SymbolicRow>& rows, const std::string& path,
                        const std::string& config_hash);

}  // namespace inducer
