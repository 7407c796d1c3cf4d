#include "probfp/chebyshev.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace probfp::cheb {
namespace {

struct Tables {
  std::vector<double> x;
  std::vector<double> cc;   // empty when n is odd
  std::vector<double> cos;  // (n+1)^2 table cos(k*(n-j)*pi/n)
};

const Tables& build_tables(int n);

// Lock-free lookup for the small sizes used in inner loops.
const Tables& tables(int n) {
  static std::array<std::atomic<const Tables*>, 257> fast{};
  if (n >= 0 && n < int(fast.size())) {
    if (const Tables* t = fast[n].load(std::memory_order_acquire)) return *t;
    const Tables& t = build_tables(n);
    fast[n].store(&t, std::memory_order_release);
    return t;
  }
  return build_tables(n);
}

const Tables& build_tables(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Tables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (slot) return *slot;
  auto t = std::make_unique<Tables>();
  const double pi = std::numbers::pi;
  if (n == 0) {
    t->x = {0.0};
    t->cc = {2.0};
    t->cos = {1.0};
    slot = std::move(t);
    return *slot;
  }
  t->x.resize(n + 1);
  for (int j = 0; j <= n; ++j) t->x[j] = -std::cos(j * pi / n);
  // Exact symmetric values and an exact center.
  for (int j = 0; j <= n / 2; ++j) t->x[n - j] = -t->x[j];
  if (n % 2 == 0) t->x[n / 2] = 0.0;

  t->cos.resize((n + 1) * (n + 1));
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      t->cos[k * (n + 1) + j] = std::cos(std::fmod(double(k) * (n - j), 2.0 * n) * pi / n);

  if (n % 2 == 0) {
    // Clenshaw-Curtis weights (Waldvogel form).
    std::vector<double> w(n + 1, 0.0);
    w[0] = w[n] = 1.0 / (double(n) * n - 1.0);
    for (int j = 1; j < n; ++j) {
      const double theta = j * pi / n;
      double v = 1.0;
      for (int k = 1; k < n / 2; ++k) v -= 2.0 * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
      v -= std::cos(n * theta) / (double(n) * n - 1.0);
      w[j] = 2.0 * v / n;
    }
    // Points are symmetric, so the ascending order reuses the same weights.
    t->cc = std::move(w);
  }
  slot = std::move(t);
  return *slot;
}

}  // namespace

const std::vector<double>& points(int n) { return tables(n).x; }

const std::vector<double>& cc_weights(int n) { return tables(n).cc; }

void coeffs_from_values(std::span<const double> values, std::span<double> out) {
  const int n = static_cast<int>(values.size()) - 1;
  if (n == 0) {
    out[0] = values[0];
    return;
  }
  const auto& t = tables(n);
  for (int k = 0; k <= n; ++k) {
    const double* row = &t.cos[k * (n + 1)];
    double s = 0.5 * (values[0] * row[0] + values[n] * row[n]);
    for (int j = 1; j < n; ++j) s += values[j] * row[j];
    s *= 2.0 / n;
    if (k == 0 || k == n) s *= 0.5;
    out[k] = s;
  }
}

std::vector<double> coeffs_from_values(std::span<const double> values) {
  std::vector<double> out(values.size());
  coeffs_from_values(values, out);
  return out;
}

std::vector<double> antiderivative(std::span<const double> c) {
  const std::size_t m = c.size();
  std::vector<double> C(m + 1, 0.0);
  auto at = [&](std::size_t k) { return k < m ? c[k] : 0.0; };
  C[1] = at(0) - at(2) / 2.0;
  for (std::size_t k = 2; k <= m; ++k) C[k] = (at(k - 1) - at(k + 1)) / (2.0 * k);
  double s = 0.0;
  for (std::size_t k = 1; k <= m; ++k) s += (k % 2 ? -C[k] : C[k]);
  C[0] = -s;
  return C;
}

double integral(std::span<const double> c) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); k += 2) s += c[k] * 2.0 / (1.0 - double(k) * k);
  return s;
}

std::size_t chopped_length(std::span<const double> c, double tol) {
  std::size_t len = c.size();
  double tail = 0.0;
  while (len > 1) {
    tail += std::abs(c[len - 1]);
    if (tail > tol) break;
    --len;
  }
  return len;
}

}  // namespace probfp::cheb
