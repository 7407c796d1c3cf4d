#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "probfp/density.hpp"
#include "probfp/minifloat.hpp"

namespace probfp {

enum class ErrorMode { exact, typical, typical_finite_p, none };
std::string to_string(ErrorMode m);
ErrorMode error_mode_from_string(const std::string& s);

// Probability mass that does not appear in the error density on [-1, 1].
struct ExcludedMass {
  double zero = 0.0;         // rounds to ZERO
  double overflow = 0.0;     // rounds to +-inf
  double large_error = 0.0;  // lower half of the smallest binade: |t| > 1
  double total() const { return zero + overflow + large_error; }
};

struct ErrorDistribution {
  Density density;  // in t = relative error / u, supported in [-1, 1]
  ErrorMode mode = ErrorMode::typical;
  std::optional<FloatFormat> source_format;
  double raw_mass = 1.0;  // integral before renormalization
  ExcludedMass excluded;
  double assumption1_mass = 0.0;  // mass rounding into the e_min / e_max binades
};

struct TRange {
  MiniFloat owner;
  double t_min;
  double t_max;
};

// Closed-form t-range, clipped to [-1, 1] as in the case analysis.
TRange t_range(const MiniFloat& z, const FloatFormat& fmt);
// |z| u / (ceil(z) - floor(z)).
double coefficient_C(int e, std::uint32_t k, const FloatFormat& fmt);
int mantissa_cutoff(double t, const FloatFormat& fmt);

double typical_pdf(double t);
double typical_finite_p_pdf(double t, const FloatFormat& fmt);

ErrorDistribution typical_density();
ErrorDistribution typical_density_finite_p(const FloatFormat& fmt, const BuildOptions& opts = {});
ErrorDistribution exact_error_density(const Density& f, const FloatFormat& fmt, const BuildOptions& opts = {});
ErrorDistribution error_distribution(ErrorMode mode, const Density& f, const FloatFormat& fmt,
                                     const BuildOptions& opts = {});

ExcludedMass excluded_mass(const Density& f, const FloatFormat& fmt);
double assumption1_mass(const Density& f, const FloatFormat& fmt);

}  // namespace probfp
