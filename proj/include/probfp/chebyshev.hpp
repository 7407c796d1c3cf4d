#pragma once

#include <span>
#include <vector>

// Chebyshev series helpers on the reference interval [-1, 1].
namespace probfp::cheb {

// n+1 second-kind points in ascending order, x_j = -cos(j*pi/n).
const std::vector<double>& points(int n);

// Clenshaw-Curtis weights matching points(n); n must be even.
const std::vector<double>& cc_weights(int n);

// Interpolation coefficients from values at points(n), n = values.size()-1.
std::vector<double> coeffs_from_values(std::span<const double> values);
void coeffs_from_values(std::span<const double> values, std::span<double> out);

inline double clenshaw(const double* c, int len, double x) {
  double b1 = 0.0, b2 = 0.0;
  const double x2 = 2.0 * x;
  for (int k = len - 1; k >= 1; --k) {
    const double b0 = c[k] + x2 * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return c[0] + x * b1 - b2;
}

// Coefficients of the antiderivative vanishing at -1 (reference variable).
std::vector<double> antiderivative(std::span<const double> c);

// Integral over [-1, 1].
double integral(std::span<const double> c);

// Drops trailing coefficients whose absolute sum stays below tol; keeps >= 1.
std::size_t chopped_length(std::span<const double> c, double tol);

}  // namespace probfp::cheb
