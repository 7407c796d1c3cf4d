#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace probfp {

struct Interval {
  double lo;
  double hi;
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool operator==(const Interval&) const = default;
};

// Piecewise Chebyshev representation on a finite union of intervals.
// Each piece stores the Chebyshev coefficients of its polynomial in the
// variable mapped from [a, b] to [-1, 1].
class Density {
 public:
  struct Piece {
    double a;
    double b;
    std::vector<double> c;
  };

  Density() = default;
  explicit Density(std::vector<Piece> pieces, bool cap_hit = false);

  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  bool empty() const { return pieces_.empty(); }
  Interval support() const;
  double total_mass() const { return cum_.empty() ? 0.0 : cum_.back(); }
  double piece_mass(std::size_t i) const { return cum_[i + 1] - cum_[i]; }
  bool cap_hit() const { return cap_hit_; }

  // Clipped at zero; zero outside the pieces.
  double operator()(double x) const;
  double eval_raw(double x) const;
  double eval_piece(std::size_t i, double x) const {
    const Piece& pc = pieces_[i];
    const double s = (2.0 * x - pc.a - pc.b) / (pc.b - pc.a);
    return clenshaw_(pc.c, s);
  }
  // Index of the piece containing x, preferring the right piece at a shared
  // endpoint; -1 in gaps and outside.
  std::ptrdiff_t find_piece(double x) const;

  double cdf(double x) const;
  double quantile(double q) const;
  // Mass of [lo, hi] relative to the total mass.
  double mass_between(double lo, double hi) const { return cdf(hi) - cdf(lo); }

  std::vector<double> breakpoints() const;

 private:
  static double clenshaw_(const std::vector<double>& c, double s);
  double piece_cdf_(std::size_t i, double x) const;

  std::vector<Piece> pieces_;
  std::vector<double> starts_;
  std::vector<std::vector<double>> anti_;
  std::vector<double> cum_;
  bool cap_hit_ = false;
};

struct DistributionSpec {
  enum class Kind { uniform, normal, constant, custom };
  Kind kind = Kind::uniform;
  double a = 0.0, b = 1.0;         // uniform
  double mu = 0.0, sigma = 1.0;    // normal
  double value = 0.0;              // constant
  std::vector<double> xs, pdf;     // custom: piecewise linear table

  static DistributionSpec uniform(double a, double b);
  static DistributionSpec normal(double mu, double sigma);
  static DistributionSpec constant(double c);
  static DistributionSpec custom(std::vector<double> xs, std::vector<double> pdf);

  void validate() const;
  bool operator==(const DistributionSpec&) const = default;
};

struct BuildOptions {
  std::size_t max_pieces = 4096;
  double rel_tol = 1e-10;
};

// Normals are truncated to mu +- 8 sigma. Constants have no density and are rejected.
Density build(const DistributionSpec& spec, const BuildOptions& opts = {});

// Adaptive interpolant of a pointwise function with the given initial breakpoints.
Density from_function(const std::function<double(double)>& f, std::vector<double> breakpoints,
                      const BuildOptions& opts = {});

Density add(const Density& x, const Density& y, const BuildOptions& opts = {});
Density sub(const Density& x, const Density& y, const BuildOptions& opts = {});
Density mul(const Density& x, const Density& y, const BuildOptions& opts = {});
Density div(const Density& x, const Density& y, const BuildOptions& opts = {});

Density scalar_add(double alpha, const Density& d);
Density scalar_mul(double alpha, const Density& d);
// Density of 1/X; X's support must exclude 0.
Density reciprocal(const Density& d, const BuildOptions& opts = {});

Density normalize(const Density& d);
double mass_outside(const Density& d, Interval window);

// `x,pdf,cdf` rows on a uniform grid over the support.
void write_csv(std::ostream& os, const Density& d, int points = 2048);

}  // namespace probfp
