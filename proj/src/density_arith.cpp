#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "probfp/chebyshev.hpp"
#include "probfp/density.hpp"
#include "probfp/errors.hpp"
#include "probfp/piecewise.hpp"

namespace probfp {
namespace {

enum class Kind { add, sub, mul, div };

constexpr double kSkipMass = 1e-15;
constexpr std::size_t kPairBudget = 1024;

int effective_degree(int d, double fraction) {
  if (d <= 0) return 0;
  if (!(fraction < 0.5)) return d;
  if (fraction <= 0.0) return 0;
  // -log2(fraction) from the exponent alone undershoots by < 1, so this is
  // slightly conservative against the exact 37 / -ln(fraction).
  const int e = -std::ilogb(fraction);  // >= 1
  const int k = int(std::ceil(37.0 / (0.6931471805599453 * e)));
  return std::min(d, k);
}

// Degree needed to resolve 1/x on [lo, hi], 0 < lo < hi, to ~1e-14.
int reciprocal_degree(double r) {
  if (r - 1.0 < 1e-14) return 0;
  const double s = (r + 1.0) / (r - 1.0);
  const double rho = s + std::sqrt(s * s - 1.0);
  return int(std::ceil(32.0 / std::log(rho)));
}

// Integrates f_A(x) f_B(g(t, x)) J(x) over x, where A is the integration
// operand. add: A=X, B=Y, g=t-x. sub: g=x-t. mul: g=t/x, J=1/|x|.
// div (X/Y): A=Y, B=X, g=t*y, J=|y|.
class Convolver {
 public:
  Convolver(Kind kind, const Density& A, const Density& B)
      : kind_(kind), A_(A), B_(B), bpA_(A.breakpoints()), bpB_(B.breakpoints()) {
    hullA_ = A.support();
    hullB_ = B.support();
    scaleA_ = std::max(std::abs(hullA_.lo), std::abs(hullA_.hi));
    weights_.resize(B.size());
    dmap_.assign(B.size(), -1);
    piece_at_bp_.assign(bpB_.size(), -1);
    for (std::size_t i = 0, j = 0; i < B.size(); ++i) {
      const auto& pc = B.pieces()[i];
      while (j < bpB_.size() && bpB_[j] < pc.a) ++j;
      if (j + 1 < bpB_.size() && bpB_[j] == pc.a && bpB_[j + 1] == pc.b) piece_at_bp_[j] = long(i);
    }
  }

  double operator()(double t) const {
    // x * y = 0 with y bounded away from 0 forces x = 0; take the limit.
    if (kind_ == Kind::mul && t == 0.0 && (hullB_.lo > 0.0 || hullB_.hi < 0.0)) return at_zero_over_b();
    double lo = hullA_.lo, hi = hullA_.hi;
    if (!x_range(t, lo, hi)) return 0.0;
    // Split points, tagged with the B breakpoint they map to (-1: none).
    auto& pts = scratch_;
    auto& pre = scratch_b_;
    pts.clear();
    pre.clear();
    pts.emplace_back(lo, -1);
    auto first = std::upper_bound(bpA_.begin(), bpA_.end(), lo);
    auto last = std::lower_bound(bpA_.begin(), bpA_.end(), hi);
    for (auto it = first; it != last; ++it) pts.emplace_back(*it, -1);
    if (kind_ == Kind::mul && lo < 0.0 && hi > 0.0) pts.emplace_back(0.0, -1);
    pts.emplace_back(hi, -1);
    std::sort(pts.begin(), pts.end());
    for (std::size_t j = 0; j < bpB_.size(); ++j) {
      double x;
      if (!preimage(t, bpB_[j], x)) continue;
      if (x > lo && x < hi) pre.emplace_back(x, long(j));
    }
    // Preimages are monotone in j except across a sign change of b (mul).
    if (!std::is_sorted(pre.begin(), pre.end())) {
      std::reverse(pre.begin(), pre.end());
      if (!std::is_sorted(pre.begin(), pre.end())) std::sort(pre.begin(), pre.end());
    }
    const std::size_t na = pts.size();
    pts.insert(pts.end(), pre.begin(), pre.end());
    std::inplace_merge(pts.begin(), pts.begin() + long(na), pts.end());

    const bool cut_zero = (kind_ == Kind::mul && t == 0.0);
    const double eps = 1e-13 * scaleA_;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      double a = pts[i].first, b = pts[i + 1].first;
      if (!(b > a)) continue;
      if (cut_zero) {
        if (a >= -eps && b <= eps) continue;
        if (a < eps && b > eps && a >= 0.0) a = eps;
        if (b > -eps && a < -eps && b <= 0.0) b = -eps;
        if (a < 0.0 && b > 0.0) continue;  // 0 is always a split point
      }
      const double mid = 0.5 * (a + b);
      const auto ia = A_.find_piece(mid);
      if (ia < 0 || std::abs(A_.piece_mass(std::size_t(ia))) < kSkipMass) continue;
      const long ja = pts[i].second, jb = pts[i + 1].second;
      if (!cut_zero && ja >= 0 && jb >= 0 && std::abs(ja - jb) == 1) {
        const long ip = piece_at_bp_[std::size_t(std::min(ja, jb))];
        if (ip >= 0) {
          if (std::abs(B_.piece_mass(std::size_t(ip))) < kSkipMass) continue;
          double v;
          if (integrate_whole_b(t, a, b, std::size_t(ia), std::size_t(ip), v)) {
            sum += v;
            continue;
          }
        }
      }
      const auto ib = B_.find_piece(g(t, mid));
      if (ib < 0 || std::abs(B_.piece_mass(std::size_t(ib))) < kSkipMass) continue;
      sum += integrate(t, a, b, std::size_t(ia), std::size_t(ib), 0);
    }
    return sum;
  }

 private:
  // f_A(0) E_B[1/|y|], f_A(0) averaged over both sides of a jump.
  double at_zero_over_b() const {
    const double below = A_(-std::numeric_limits<double>::denorm_min());
    const double fa0 = 0.5 * (below + A_(0.0));
    if (fa0 == 0.0) return 0.0;
    const auto& xs = cheb::points(32);
    const auto& ws = cheb::cc_weights(32);
    double acc = 0.0;
    for (const auto& pc : B_.pieces()) {
      // Geometric sub-intervals keep 1/y well resolved.
      double a = pc.a;
      while (a < pc.b) {
        const double b = std::min(pc.b, a > 0.0 ? 2.0 * a : 0.5 * a);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (int j = 0; j <= 32; ++j) {
          const double y = mid + half * xs[j];
          s += ws[j] * clenshaw_piece(pc, y) / std::abs(y);
        }
        acc += s * half;
        a = b;
      }
    }
    return fa0 * acc;
  }

  static double clenshaw_piece(const Density::Piece& pc, double y) {
    return cheb::clenshaw(pc.c.data(), int(pc.c.size()), (2.0 * y - pc.a - pc.b) / (pc.b - pc.a));
  }

  static constexpr std::array<int, 7> kSizes{2, 3, 4, 6, 8, 12, 16};

  // Quadrature weights nu with int_piece f_B(w) H(w) dw = sum_k nu_k H(w_k)
  // for H of degree <= n = kSizes[slot], w_k the piece's points(n).
  const std::vector<double>& weights(std::size_t i, int slot) const {
    const int n = kSizes[slot];
    auto& nu = weights_[i][slot];
    if (!nu.empty()) return nu;
    const auto& pc = B_.pieces()[i];
    auto I = [](int m) { return (m % 2) ? 0.0 : 2.0 / (1.0 - double(m) * m); };
    std::vector<double> mu(n + 1);
    for (int m = 0; m <= n; ++m) {
      double acc = 0.0;
      for (int k = 0; k < int(pc.c.size()); ++k) acc += pc.c[k] * 0.5 * (I(k + m) + I(std::abs(k - m)));
      mu[m] = 0.5 * (pc.b - pc.a) * acc;
    }
    nu.assign(n + 1, 0.0);
    std::vector<double> e(n + 1, 0.0), h(n + 1);
    for (int k = 0; k <= n; ++k) {
      e.assign(n + 1, 0.0);
      e[k] = 1.0;
      cheb::coeffs_from_values(e, h);
      for (int m = 0; m <= n; ++m) nu[k] += h[m] * mu[m];
    }
    return nu;
  }

  // The subinterval [a, b] maps onto all of B's piece ib. In B's variable w the
  // integrand is f_B(w) H(w), integrated exactly for polynomial H of modest degree
  // with per-piece weights. Returns false when H needs too high a degree.
  bool integrate_whole_b(double t, double a, double b, std::size_t ia, std::size_t ib, double& out) const {
    const auto& pa = A_.pieces()[ia];
    const auto& pb = B_.pieces()[ib];
    const int eff = effective_degree(int(pa.c.size()) - 1, (b - a) / (pa.b - pa.a));
    int need = eff + 1;
    if (kind_ == Kind::mul) {
      if (pb.a <= 0.0 && pb.b >= 0.0) return false;
      int& dmap = dmap_[ib];
      if (dmap < 0)
        dmap = reciprocal_degree(std::max(std::abs(pb.a), std::abs(pb.b)) / std::min(std::abs(pb.a), std::abs(pb.b)));
      // Over one piece of B the map w -> t/w is close to linear, so the
      // composition does not multiply degrees.
      need += dmap;
    } else if (kind_ == Kind::div) {
      need += 1;
    }
    int slot = 0;
    while (slot < int(kSizes.size()) && kSizes[slot] < need) ++slot;
    if (slot == int(kSizes.size())) return false;
    const int n = kSizes[slot];
    const auto& ss = cheb::points(n);
    const double mid = 0.5 * (pb.a + pb.b), half = 0.5 * (pb.b - pb.a);
    const auto& nu = weights(ib, slot);
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double w = mid + half * ss[k];
      double x = 0.0, J = 1.0;
      switch (kind_) {
        case Kind::add: x = t - w; break;
        case Kind::sub: x = w + t; break;
        case Kind::mul:
          x = t / w;
          J = 1.0 / std::abs(w);
          break;
        case Kind::div:
          x = w / t;
          J = std::abs(w) / (t * t);
          break;
      }
      s += nu[k] * A_.eval_piece(ia, x) * J;
    }
    out = s;
    return true;
  }

  double g(double t, double x) const {
    switch (kind_) {
      case Kind::add: return t - x;
      case Kind::sub: return x - t;
      case Kind::mul: return t / x;
      case Kind::div: return t * x;
    }
    return 0.0;
  }

  double jac(double x) const {
    switch (kind_) {
      case Kind::mul: return 1.0 / std::abs(x);
      case Kind::div: return std::abs(x);
      default: return 1.0;
    }
  }

  bool preimage(double t, double b, double& x) const {
    switch (kind_) {
      case Kind::add: x = t - b; return true;
      case Kind::sub: x = b + t; return true;
      case Kind::mul:
        if (b == 0.0) return false;
        x = t / b;
        return true;
      case Kind::div:
        if (t == 0.0) return false;
        x = b / t;
        return true;
    }
    return false;
  }

  // Narrows [lo, hi] (initially A's hull) to where g(t, x) can hit B's hull.
  bool x_range(double t, double& lo, double& hi) const {
    double rl = lo, rh = hi;
    const double BL = hullB_.lo, BR = hullB_.hi;
    switch (kind_) {
      case Kind::add: rl = t - BR; rh = t - BL; break;
      case Kind::sub: rl = BL + t; rh = BR + t; break;
      case Kind::mul:
        if (t == 0.0) {
          if (BL > 0.0 || BR < 0.0) return false;
        } else if (BL > 0.0 || BR < 0.0) {
          const double q1 = t / BL, q2 = t / BR;
          rl = std::min(q1, q2);
          rh = std::max(q1, q2);
        }
        break;
      case Kind::div:
        if (t == 0.0) {
          if (BL > 0.0 || BR < 0.0) return false;
        } else {
          const double q1 = BL / t, q2 = BR / t;
          rl = std::min(q1, q2);
          rh = std::max(q1, q2);
        }
        break;
    }
    lo = std::max(lo, rl);
    hi = std::min(hi, rh);
    return hi > lo;
  }

  double integrate(double t, double a, double b, std::size_t ia, std::size_t ib, int depth) const {
    int dmap = 0;
    if (kind_ == Kind::mul) {
      const double m1 = std::abs(a), m2 = std::abs(b);
      const double r = std::max(m1, m2) / std::min(m1, m2);
      if (r > 2.0 && depth < 200) {
        const double m = std::copysign(std::sqrt(m1 * m2), a + b);
        return integrate(t, a, m, ia, ib, depth + 1) + integrate(t, m, b, ia, ib, depth + 1);
      }
      dmap = reciprocal_degree(r);
    }
    const auto& pa = A_.pieces()[ia];
    const auto& pb = B_.pieces()[ib];
    const double fa = (b - a) / (pa.b - pa.a);
    const double fb = std::abs(g(t, b) - g(t, a)) / (pb.b - pb.a);
    int need = effective_degree(int(pa.c.size()) - 1, fa) + effective_degree(int(pb.c.size()) - 1, fb) + dmap +
               (kind_ == Kind::div ? 1 : 0) + 1;
    if (kind_ == Kind::mul && dmap > 0) need += effective_degree(int(pb.c.size()) - 1, fb);
    static constexpr std::array<int, 6> sizes{2, 4, 8, 16, 32, 64};
    int n = 0;
    for (int s : sizes)
      if (s >= need) {
        n = s;
        break;
      }
    if (n == 0) {
      if (depth < 200) {
        const double m = 0.5 * (a + b);
        return integrate(t, a, m, ia, ib, depth + 1) + integrate(t, m, b, ia, ib, depth + 1);
      }
      n = 64;
    }
    const auto& xs = cheb::points(n);
    const auto& ws = cheb::cc_weights(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int j = 0; j <= n; ++j) {
      const double x = mid + half * xs[j];
      if (kind_ == Kind::mul && x == 0.0) continue;
      const double fA = A_.eval_piece(ia, x);
      if (fA == 0.0) continue;
      s += ws[j] * fA * B_.eval_piece(ib, g(t, x)) * jac(x);
    }
    return s * half;
  }

  Kind kind_;
  const Density& A_;
  const Density& B_;
  std::vector<double> bpA_, bpB_;
  Interval hullA_{}, hullB_{};
  double scaleA_ = 0.0;
  std::vector<long> piece_at_bp_;  // B piece spanning [bp_j, bp_j+1], or -1
  mutable std::vector<std::pair<double, long>> scratch_, scratch_b_;
  mutable std::vector<std::array<std::vector<double>, kSizes.size()>> weights_;
  mutable std::vector<int> dmap_;
};

double combine(Kind kind, double x, double y) {
  switch (kind) {
    case Kind::add: return x + y;
    case Kind::sub: return x - y;
    case Kind::mul: return x * y;
    case Kind::div: return x / y;
  }
  return 0.0;
}

Interval hull_image(Kind kind, Interval X, Interval Y) {
  switch (kind) {
    case Kind::add: return {X.lo + Y.lo, X.hi + Y.hi};
    case Kind::sub: return {X.lo - Y.hi, X.hi - Y.lo};
    case Kind::mul:
    case Kind::div: {
      const double c[4] = {combine(kind, X.lo, Y.lo), combine(kind, X.lo, Y.hi), combine(kind, X.hi, Y.lo),
                           combine(kind, X.hi, Y.hi)};
      return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
    }
  }
  return X;
}

std::vector<double> result_breakpoints(Kind kind, const Density& X, const Density& Y, Interval hull) {
  std::vector<double> bx = X.breakpoints(), by = Y.breakpoints();
  const Interval sx = X.support(), sy = Y.support();
  std::vector<double> hx{sx.lo, sx.hi}, hy{sy.lo, sy.hi};
  const std::vector<double>* px = &bx;
  const std::vector<double>* py = &by;
  if (bx.size() * by.size() > kPairBudget) {
    if (bx.size() <= by.size() && bx.size() * 2 <= kPairBudget)
      py = &hy;
    else if (by.size() * 2 <= kPairBudget)
      px = &hx;
    else {
      px = &hx;
      py = &hy;
    }
  }
  std::vector<double> out{hull.lo, hull.hi};
  for (double a : *px)
    for (double b : *py) {
      const double v = combine(kind, a, b);
      if (v > hull.lo && v < hull.hi) out.push_back(v);
    }
  if ((kind == Kind::mul || kind == Kind::div) && hull.lo < 0.0 && hull.hi > 0.0) out.push_back(0.0);
  sort_unique(out, 1e-14 * hull.width());
  out.back() = hull.hi;
  out.front() = hull.lo;
  return out;
}

Density binary(Kind kind, const Density& X, const Density& Y, const BuildOptions& opts) {
  if (X.empty() || Y.empty()) throw invalid_argument("density arithmetic on an empty density");
  const Interval sx = X.support(), sy = Y.support();
  if (kind == Kind::div && sy.lo <= 0.0 && sy.hi >= 0.0)
    throw singular_division("divisor support [" + std::to_string(sy.lo) + ", " + std::to_string(sy.hi) +
                            "] contains 0");
  const Interval hull = hull_image(kind, sx, sy);
  const auto bp = result_breakpoints(kind, X, Y, hull);
  const Density& A = (kind == Kind::div) ? Y : X;
  const Density& B = (kind == Kind::div) ? X : Y;
  Convolver conv(kind, A, B);

  RefineOptions ro;
  ro.rel_tol = opts.rel_tol;
  ro.max_pieces = opts.max_pieces;
  ro.abs_floor = 1e-6 / hull.width();
  bool cap = false;
  auto pieces = build_pieces(
      bp,
      [&](double, double, std::span<const double> ts, std::span<double> out) {
        for (std::size_t j = 0; j < ts.size(); ++j) out[j] = conv(ts[j]);
      },
      ro, &cap);
  return normalize(Density(std::move(pieces), cap || X.cap_hit() || Y.cap_hit()));
}

}  // namespace

Density add(const Density& x, const Density& y, const BuildOptions& o) { return binary(Kind::add, x, y, o); }
Density sub(const Density& x, const Density& y, const BuildOptions& o) { return binary(Kind::sub, x, y, o); }
Density mul(const Density& x, const Density& y, const BuildOptions& o) { return binary(Kind::mul, x, y, o); }
Density div(const Density& x, const Density& y, const BuildOptions& o) { return binary(Kind::div, x, y, o); }

}  // namespace probfp
