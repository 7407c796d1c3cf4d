#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "probfp/density.hpp"
#include "probfp/lang.hpp"
#include "probfp/minifloat.hpp"

namespace probfp {

struct ConfidenceRange {
  double level;
  Interval range;
};

struct McReport {
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  Interval empirical_range{0.0, 0.0};  // over finite, binned samples
  double overflow_rate = 0.0;
  std::uint64_t overflow_count = 0;
  // error_mc only: samples rounding to zero or with |t| > 1.
  std::uint64_t excluded_count = 0;
  std::vector<double> edges;          // bins + 1 edges
  std::vector<std::uint64_t> counts;  // per bin
  double sup_discrepancy = 0.0;       // vs analytic density, if one was given
};

struct AnalysisReport {
  Interval support{0.0, 0.0};
  std::vector<ConfidenceRange> confidence_ranges;  // ascending level
  Interval overflow_window{0.0, 0.0};
  double overflow_probability = 0.0;
  double excluded_mass = 0.0;
  std::optional<McReport> mc;
};

inline const std::vector<double>& default_levels() {
  static const std::vector<double> v{0.9, 0.99, 0.999, 0.9999};
  return v;
}

// Values with magnitude above the top float round to infinity.
Interval overflow_window(const FloatFormat& fmt);

AnalysisReport range_report(const Density& d, const FloatFormat& fmt, std::vector<double> levels);
// Degenerate report for a constant output.
AnalysisReport range_report(double constant, const FloatFormat& fmt, std::vector<double> levels);

struct McOptions {
  int bins = 256;
  std::size_t block_size = 1 << 16;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Reduced-precision re-execution of a tree-shaped term on sampled inputs.
// `analytic` (optional) fixes the histogram range and the discrepancy reference.
McReport monte_carlo(const Term& t, const ProbContext& ctx, const FloatFormat& fmt, std::uint64_t n,
                     std::uint64_t seed, const Density* analytic = nullptr, const McOptions& opts = {});

// Sampled relative rounding errors t = (x - round(x)) / (x u), binned over [-1, 1].
McReport error_mc(const Density& input, const FloatFormat& fmt, std::uint64_t n, std::uint64_t seed,
                  const Density* analytic = nullptr, const McOptions& opts = {});

// Max |a(x) - b(x)| over a uniform grid on `on` plus both sides of a's breakpoints.
double sup_distance(const Density& a, const std::function<double(double)>& b, Interval on, int grid = 20001);

}  // namespace probfp
