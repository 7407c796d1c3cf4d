#include "probfp/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "probfp/chebyshev.hpp"
#include "probfp/diagnostics.hpp"

namespace probfp {

namespace {

constexpr int kDegree = 16;

struct Item {
  double a, b;
  bool done = false;
  std::vector<double> c;
};

void map_nodes(double a, double b, const std::vector<double>& ref, std::vector<double>& out) {
  out.resize(ref.size());
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t j = 0; j < ref.size(); ++j) out[j] = mid + half * ref[j];
  out.front() = a;
  out.back() = b;
}

// Mass-preserving constant pieces for a breakpoint list that is too long.
std::vector<Density::Piece> merged_pieces(const std::vector<double>& bp, const PieceEvaluator& eval,
                                          std::size_t max_pieces) {
  const std::size_t n = bp.size() - 1;
  const std::size_t group = (n + max_pieces - 1) / max_pieces;
  const auto& ref = cheb::points(8);
  const auto& w = cheb::cc_weights(8);
  std::vector<double> nodes, vals(ref.size());
  std::vector<Density::Piece> out;
  for (std::size_t g = 0; g < n; g += group) {
    const std::size_t end = std::min(n, g + group);
    double mass = 0.0;
    for (std::size_t i = g; i < end; ++i) {
      map_nodes(bp[i], bp[i + 1], ref, nodes);
      eval(bp[i], bp[i + 1], nodes, vals);
      double s = 0.0;
      for (std::size_t j = 0; j < ref.size(); ++j) s += w[j] * (std::isfinite(vals[j]) ? vals[j] : 0.0);
      mass += s * 0.5 * (bp[i + 1] - bp[i]);
    }
    out.push_back({bp[g], bp[end], {mass / (bp[end] - bp[g])}});
  }
  return out;
}

}  // namespace

void sort_unique(std::vector<double>& v, double eps) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    if (out.empty() || x - out.back() > eps) out.push_back(x);
  }
  v.swap(out);
}

std::vector<Density::Piece> build_pieces(std::vector<double> bp, const PieceEvaluator& eval,
                                         const RefineOptions& opts, bool* cap_hit) {
  sort_unique(bp);
  if (cap_hit) *cap_hit = false;
  if (bp.size() < 2) return {};
  const double span = bp.back() - bp.front();
  const double min_width = opts.min_width > 0 ? opts.min_width : 1e-12 * span;

  if (bp.size() - 1 > opts.max_pieces) {
    if (cap_hit) *cap_hit = true;
    diagnostics::warn("piece cap " + std::to_string(opts.max_pieces) + " reached with " +
                      std::to_string(bp.size() - 1) +
                      " mandatory breakpoints; merged into mass-preserving constant pieces");
    return merged_pieces(bp, eval, opts.max_pieces);
  }

  std::vector<Item> items;
  items.reserve(bp.size() - 1);
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) items.push_back({bp[i], bp[i + 1], false, {}});

  const auto& ref = cheb::points(kDegree);
  std::vector<double> nodes, vals(ref.size()), half_vals((ref.size() + 1) / 2), half_c(half_vals.size());
  bool capped = false;

  for (;;) {
    std::vector<Item> next;
    next.reserve(items.size() * 2);
    std::size_t total = items.size();
    bool any_split = false;
    for (auto& it : items) {
      if (it.done) {
        next.push_back(std::move(it));
        continue;
      }
      map_nodes(it.a, it.b, ref, nodes);
      eval(it.a, it.b, nodes, vals);
      bool bad = false;
      double scale = opts.abs_floor;
      for (double& v : vals) {
        if (!std::isfinite(v)) {
          v = 0.0;
          bad = true;
        }
        scale = std::max(scale, std::abs(v));
      }
      std::vector<double> c = cheb::coeffs_from_values(vals);
      const double tol = opts.rel_tol * scale;
      bool ok = !opts.adaptive;
      if (!ok) {
        for (std::size_t j = 0; j < half_vals.size(); ++j) half_vals[j] = vals[2 * j];
        cheb::coeffs_from_values(half_vals, half_c);
        double dev = 0.0;
        for (std::size_t j = 1; j < ref.size(); j += 2)
          dev = std::max(dev, std::abs(vals[j] - cheb::clenshaw(half_c.data(), int(half_c.size()), ref[j])));
        const double width = it.b - it.a;
        ok = !bad && (dev <= tol || dev * width <= opts.mass_tol);
        if (width <= 2.0 * min_width) ok = true;
      }
      if (!ok && total + 1 > opts.max_pieces) {
        capped = true;
        ok = true;
      }
      if (ok) {
        c.resize(cheb::chopped_length(c, 0.1 * tol));
        it.c = std::move(c);
        it.done = true;
        next.push_back(std::move(it));
      } else {
        const double m = 0.5 * (it.a + it.b);
        next.push_back({it.a, m, false, {}});
        next.push_back({m, it.b, false, {}});
        ++total;
        any_split = true;
      }
    }
    items.swap(next);
    if (!any_split) break;
  }
  if (capped) {
    if (cap_hit) *cap_hit = true;
    diagnostics::warn("piece cap " + std::to_string(opts.max_pieces) +
                      " reached during adaptive refinement; accuracy may be reduced");
  }
  std::vector<Density::Piece> out;
  out.reserve(items.size());
  for (auto& it : items) out.push_back({it.a, it.b, std::move(it.c)});
  return out;
}

}  // namespace probfp
