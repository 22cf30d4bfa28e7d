#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "inducer/dd.hpp"

namespace inducer {

/// Shortest round-trip decimal for a double ("%.17g").
std::string fmt(double v);
std::string fmt(const dd& v);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t v);

/// CSV file with a "# config_hash=<hash>" comment line and a header row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& config_hash, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
};

/// Runs body(i) for i in [0, n) on `threads` workers using fixed contiguous
/// chunks. Results must be written to per-index slots; the schedule never
/// affects which index runs where in a way visible to the caller.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Least-squares line y = a + b x with coefficient of determination.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace inducer
