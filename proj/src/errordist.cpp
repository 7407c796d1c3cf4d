#include "probfp/errordist.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "probfp/chebyshev.hpp"
#include "probfp/diagnostics.hpp"
#include "probfp/errors.hpp"
#include "probfp/piecewise.hpp"

namespace probfp {

std::string to_string(ErrorMode m) {
  switch (m) {
    case ErrorMode::exact: return "exact";
    case ErrorMode::typical: return "typical";
    case ErrorMode::typical_finite_p: return "typical_finite_p";
    case ErrorMode::none: return "none";
  }
  return "?";
}

ErrorMode error_mode_from_string(const std::string& s) {
  if (s == "exact") return ErrorMode::exact;
  if (s == "typical") return ErrorMode::typical;
  if (s == "typical_finite_p") return ErrorMode::typical_finite_p;
  if (s == "none") return ErrorMode::none;
  throw invalid_argument("unknown error mode '" + s + "'");
}

namespace {

// Representables fall into four t-range families.
enum class Family { kmin, k0, top, general };

Family family_of(int e, std::uint32_t k, const FloatFormat& fmt) {
  if (k == 0) return e == fmt.e_min() ? Family::kmin : Family::k0;
  if (e == fmt.e_max() && k == fmt.mantissa_count() - 1) return Family::top;
  return Family::general;
}

std::pair<double, double> family_range(Family f, std::uint32_t k, const FloatFormat& fmt) {
  const double P1 = std::ldexp(1.0, fmt.p() + 1);
  const double P2 = 2.0 * P1;
  switch (f) {
    case Family::kmin: return {-1.0, P1 / (P1 + 1.0)};
    case Family::k0: return {-P1 / (P2 - 1.0), P1 / (P1 + 1.0)};
    case Family::top: return {-P1 / (P2 - 3.0), 0.0};
    case Family::general: return {-P1 / (P1 + 2.0 * k - 1.0), P1 / (P1 + 2.0 * k + 1.0)};
  }
  return {0.0, 0.0};
}

}  // namespace

TRange t_range(const MiniFloat& z, const FloatFormat& fmt) {
  if (!z.is_finite()) throw invalid_argument("t_range needs a finite non-zero value");
  const auto [lo, hi] = family_range(family_of(z.exponent(), z.mantissa(), fmt), z.mantissa(), fmt);
  return {z, lo, hi};
}

double coefficient_C(int e, std::uint32_t k, const FloatFormat& fmt) {
  if (e < fmt.e_min() || e > fmt.e_max() || k >= fmt.mantissa_count())
    throw invalid_argument("coefficient_C: (e, k) out of range");
  const double P = std::ldexp(1.0, fmt.p());
  switch (family_of(e, k, fmt)) {
    case Family::kmin: return 1.0 / (P + 1.0);
    case Family::k0: return 2.0 / 3.0;
    case Family::top: return (2.0 * P - 1.0) / P;
    case Family::general: return (P + k) / (2.0 * P);
  }
  return 0.0;
}

int mantissa_cutoff(double t, const FloatFormat& fmt) {
  const double a = std::abs(t);
  const int top = int(fmt.mantissa_count()) - 1;
  if (a <= 0.5) return top;
  const double v = std::floor(std::ldexp(1.0 / a - 1.0, fmt.p()) - 0.5);
  return int(std::clamp(v, -1.0, double(top)));
}

double typical_pdf(double t) {
  const double a = std::abs(t);
  if (a > 1.0) return 0.0;
  if (a <= 0.5) return 0.75;
  const double w = 1.0 / a - 1.0;
  return 0.5 * w + 0.25 * w * w;
}

double typical_finite_p_pdf(double t, const FloatFormat& fmt) {
  if (std::abs(t) > 1.0) return 0.0;
  const double P = std::ldexp(1.0, fmt.p());
  const double q = 1.0 - t * fmt.u();
  const double pre = 1.0 / (P * q * q);
  if (std::abs(t) <= 0.5) return pre * (2.0 / 3.0 + 0.75 * (P - 1.0));
  const double alpha = mantissa_cutoff(t, fmt);
  return pre * (2.0 / 3.0 + alpha / 2.0 + alpha * alpha / (4.0 * P));
}

ErrorDistribution typical_density() {
  static std::once_flag once;
  static ErrorDistribution cached;
  std::call_once(once, [] {
    Density raw = from_function(typical_pdf, {-1.0, -0.5, 0.5, 1.0});
    cached.raw_mass = raw.total_mass();
    cached.density = normalize(raw);
    cached.mode = ErrorMode::typical;
  });
  return cached;
}

ErrorDistribution typical_density_finite_p(const FloatFormat& fmt, const BuildOptions& opts) {
  const double P = std::ldexp(1.0, fmt.p());
  std::vector<double> bp{-1.0, -0.5, 0.5, 1.0};
  // alpha(t) jumps where 2^p (1/|t| - 1) - 1/2 crosses an integer m.
  for (double m = 0; m < P; m += 1.0) {
    const double t = P / (P + m + 0.5);
    if (t > 0.5 && t < 1.0) {
      bp.push_back(t);
      bp.push_back(-t);
    }
  }
  RefineOptions ro;
  ro.rel_tol = opts.rel_tol;
  ro.max_pieces = opts.max_pieces;
  bool cap = false;
  auto pieces = build_pieces(
      bp,
      [&](double a, double b, std::span<const double> x, std::span<double> out) {
        // Evaluate the branch selected at the midpoint for one-sided limits.
        const double mid = 0.5 * (a + b);
        const double sel = std::abs(mid) <= 0.5 ? 0.0 : mid;
        for (std::size_t j = 0; j < x.size(); ++j) {
          const double q = 1.0 - x[j] * fmt.u();
          if (sel == 0.0) {
            out[j] = (2.0 / 3.0 + 0.75 * (P - 1.0)) / (P * q * q);
          } else {
            const double alpha = mantissa_cutoff(sel, fmt);
            out[j] = (2.0 / 3.0 + alpha / 2.0 + alpha * alpha / (4.0 * P)) / (P * q * q);
          }
        }
      },
      ro, &cap);
  ErrorDistribution ed;
  Density raw(std::move(pieces), cap);
  ed.raw_mass = raw.total_mass();
  ed.density = normalize(raw);
  ed.mode = ErrorMode::typical_finite_p;
  ed.source_format = fmt;
  return ed;
}

ExcludedMass excluded_mass(const Density& f, const FloatFormat& fmt) {
  ExcludedMass m;
  const double th = fmt.underflow_threshold();
  const double top = fmt.largest();
  const double low_err = fmt.smallest() / (1.0 + fmt.u());
  m.zero = std::max(0.0, f.cdf(th) - f.cdf(-th));
  m.overflow = std::max(0.0, 1.0 - f.cdf(top)) + f.cdf(-top);
  m.large_error = std::max(0.0, f.cdf(low_err) - f.cdf(th)) + std::max(0.0, f.cdf(-th) - f.cdf(-low_err));
  return m;
}

double assumption1_mass(const Density& f, const FloatFormat& fmt) {
  const double th = fmt.underflow_threshold();
  // Upper end of the e_min binade and lower end of the e_max binade.
  const double low_hi = rounding_interval(MiniFloat::make(0, fmt.e_min(), fmt.mantissa_count() - 1, fmt), fmt).hi;
  const double high_lo = rounding_interval(MiniFloat::make(0, fmt.e_max(), 0, fmt), fmt).lo;
  const double top = fmt.largest();
  double m = f.mass_between(th, low_hi) + f.mass_between(-low_hi, -th);
  m += f.mass_between(high_lo, top) + f.mass_between(-top, -high_lo);
  return m;
}

namespace {

constexpr int kNodes = 16;
constexpr std::uint64_t kMaxEnumeration = 10'000'000;

struct Irregular {
  double v;  // value of z
  double t_min, t_max;
};

class ExactBuilder {
 public:
  ExactBuilder(const Density& f, const FloatFormat& fmt) : f_(f), fmt_(fmt) {
    u_ = fmt.u();
    c_lo_ = 1.0 / (1.0 + u_);
    c_hi_ = 1.0 / (1.0 - u_);
    K_ = fmt.mantissa_count();
    bp_f_ = f.breakpoints();
    const auto& ref = cheb::points(kNodes);
    c_nodes_.resize(ref.size());
    for (std::size_t j = 0; j < ref.size(); ++j) c_nodes_[j] = 0.5 * (c_lo_ + c_hi_) + 0.5 * (c_hi_ - c_lo_) * ref[j];
    general_.assign(std::size_t(K_) * (kNodes + 1), 0.0);
    for (auto& s : special_) s.assign(kNodes + 1, 0.0);
    present_general_.assign(K_, 0);
  }

  void enumerate() {
    const Interval s = f_.support();
    std::uint64_t count = 0;
    for (int sign = 0; sign <= 1; ++sign) {
      // Magnitude range of the support on this side.
      double lo, hi;
      if (sign == 0) {
        if (s.hi <= 0.0) continue;
        lo = std::max(s.lo, 0.0);
        hi = s.hi;
      } else {
        if (s.lo >= 0.0) continue;
        lo = std::max(-s.hi, 0.0);
        hi = -s.lo;
      }
      const double zlo = lo * (1.0 - u_), zhi = hi * (1.0 + u_);
      for (int e = fmt_.e_min(); e <= fmt_.e_max(); ++e) {
        const double base = std::ldexp(1.0, e);
        if (2.0 * base <= zlo || base > zhi) continue;
        const double klo = std::max(0.0, std::floor((zlo / base - 1.0) * K_) - 1.0);
        const double khi = std::min(double(K_ - 1), std::ceil((zhi / base - 1.0) * K_) + 1.0);
        count += std::uint64_t(khi - klo + 1);
        if (count > kMaxEnumeration)
          throw feasibility_error("exact error density would enumerate more than 1e7 representables");
        for (std::uint32_t k = std::uint32_t(klo); k <= std::uint32_t(khi); ++k) add_z(sign, e, k);
      }
    }
  }

  void finalize() {
    // Prefix sums over general mantissas, then coefficients per prefix.
    const std::size_t n = kNodes + 1;
    prefix_.assign(std::size_t(K_) * n, 0.0);
    std::vector<double> acc(n, 0.0), tmp(n);
    for (std::uint32_t k = 1; k < K_; ++k) {
      for (std::size_t j = 0; j < n; ++j) acc[j] += general_[k * n + j];
      cheb::coeffs_from_values(acc, tmp);
      std::copy(tmp.begin(), tmp.end(), prefix_.begin() + k * n);
    }
    for (auto& sp : special_) {
      std::vector<double> c(n);
      cheb::coeffs_from_values(sp, c);
      sp = std::move(c);
    }
    // t-breakpoints for general mantissas present in the sum.
    breakpoints_ = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (std::uint32_t k = 1; k < K_; ++k) {
      if (!present_general_[k]) continue;
      auto [lo, hi] = family_range(Family::general, k, fmt_);
      breakpoints_.push_back(lo);
      breakpoints_.push_back(hi);
    }
    for (int fam = 0; fam < 3; ++fam) {
      if (!present_special_[fam]) continue;
      auto [lo, hi] = family_range(Family(fam), 0, fmt_);
      breakpoints_.push_back(lo);
      breakpoints_.push_back(hi);
    }
    breakpoints_.insert(breakpoints_.end(), kinks_.begin(), kinks_.end());
    for (double& b : breakpoints_) b = std::clamp(b, -1.0, 1.0);
  }

  void eval(double a, double b, std::span<const double> ts, std::span<double> out) const {
    const double mid = 0.5 * (a + b);
    const std::size_t n = kNodes + 1;
    // General mantissas admissible at mid form a prefix 1..kmax.
    std::uint32_t lo = 0, hi = K_ - 1;
    while (lo < hi) {
      const std::uint32_t m = (lo + hi + 1) / 2;
      auto [tl, th] = family_range(Family::general, m, fmt_);
      if (tl <= mid && mid <= th)
        lo = m;
      else
        hi = m - 1;
    }
    const std::uint32_t kmax = lo;
    const double* H = kmax > 0 ? &prefix_[kmax * n] : nullptr;
    bool fam_on[3];
    for (int fam = 0; fam < 3; ++fam) {
      auto [tl, th] = family_range(Family(fam), 0, fmt_);
      fam_on[fam] = present_special_[fam] && tl <= mid && mid <= th;
    }
    // Irregular contributions fix their f-piece at the midpoint.
    const double c_mid = 1.0 / (1.0 - mid * u_);
    active_.clear();
    for (const auto& z : irregular_) {
      if (!(z.t_min <= mid && mid <= z.t_max)) continue;
      const auto ip = f_.find_piece(c_mid * z.v);
      if (ip >= 0) active_.push_back({z.v, std::size_t(ip)});
    }
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const double t = ts[j];
      const double c = 1.0 / (1.0 - t * u_);
      const double s = (2.0 * c - c_lo_ - c_hi_) / (c_hi_ - c_lo_);
      double acc = 0.0;
      if (H) acc += cheb::clenshaw(H, int(n), s);
      for (int fam = 0; fam < 3; ++fam)
        if (fam_on[fam]) acc += cheb::clenshaw(special_[fam].data(), int(n), s);
      for (const auto& [v, ip] : active_) acc += std::abs(v) * f_.eval_piece(ip, c * v);
      out[j] = u_ * c * c * acc;
    }
  }

  std::vector<double> breakpoints() const { return breakpoints_; }

 private:
  void add_z(int sign, int e, std::uint32_t k) {
    const double v = value(sign, e, k, fmt_);
    const double w1 = v * c_lo_, w2 = v * c_hi_;
    const double wlo = std::min(w1, w2), whi = std::max(w1, w2);
    const Interval s = f_.support();
    if (whi < s.lo || wlo > s.hi) return;
    const Family fam = family_of(e, k, fmt_);
    auto first = std::upper_bound(bp_f_.begin(), bp_f_.end(), wlo);
    const bool irregular = first != bp_f_.end() && *first < whi;
    if (irregular) {
      auto [tl, th] = family_range(fam, k, fmt_);
      irregular_.push_back({v, tl, th});
      for (auto it = first; it != bp_f_.end() && *it < whi; ++it) kinks_.push_back((1.0 - v / *it) / u_);
    } else {
      const auto ip = f_.find_piece(0.5 * (wlo + whi));
      if (ip < 0) return;
      double* dst = fam == Family::general ? &general_[std::size_t(k) * (kNodes + 1)] : special_[int(fam)].data();
      for (int j = 0; j <= kNodes; ++j) dst[j] += std::abs(v) * f_.eval_piece(std::size_t(ip), c_nodes_[j] * v);
    }
    if (fam == Family::general)
      present_general_[k] = 1;
    else
      present_special_[int(fam)] = true;
  }

  const Density& f_;
  const FloatFormat& fmt_;
  double u_, c_lo_, c_hi_;
  std::uint32_t K_;
  std::vector<double> bp_f_, c_nodes_;
  std::vector<double> general_, prefix_;
  std::vector<double> special_[3];
  bool present_special_[3] = {false, false, false};
  std::vector<char> present_general_;
  std::vector<Irregular> irregular_;
  std::vector<double> kinks_, breakpoints_;
  mutable std::vector<std::pair<double, std::size_t>> active_;
};

}  // namespace

ErrorDistribution exact_error_density(const Density& f, const FloatFormat& fmt, const BuildOptions& opts) {
  fmt.require_enumerable("exact error density");
  if (f.empty()) throw invalid_argument("exact error density of an empty density");
  ExactBuilder builder(f, fmt);
  builder.enumerate();
  builder.finalize();
  RefineOptions ro;
  ro.rel_tol = opts.rel_tol;
  ro.max_pieces = opts.max_pieces;
  ro.abs_floor = 1e-6;
  bool cap = false;
  auto pieces = build_pieces(
      builder.breakpoints(),
      [&](double a, double b, std::span<const double> x, std::span<double> out) { builder.eval(a, b, x, out); },
      ro, &cap);
  ErrorDistribution ed;
  Density raw(std::move(pieces), cap);
  ed.raw_mass = raw.total_mass();
  ed.excluded = excluded_mass(f, fmt);
  ed.assumption1_mass = assumption1_mass(f, fmt);
  if (ed.assumption1_mass > 1e-3) {
    std::ostringstream os;
    os << "exponent-range assumption: mass " << ed.assumption1_mass
       << " rounds into the e_min/e_max binades (" << fmt.describe() << ")";
    diagnostics::warn(os.str());
  }
  if (!(ed.raw_mass > 0.0))
    throw invalid_argument("input mass rounds entirely to zero or infinity; error density undefined");
  ed.density = normalize(raw);
  ed.mode = ErrorMode::exact;
  ed.source_format = fmt;
  return ed;
}

ErrorDistribution error_distribution(ErrorMode mode, const Density& f, const FloatFormat& fmt,
                                     const BuildOptions& opts) {
  switch (mode) {
    case ErrorMode::exact: return exact_error_density(f, fmt, opts);
    case ErrorMode::typical: return typical_density();
    case ErrorMode::typical_finite_p: return typical_density_finite_p(fmt, opts);
    case ErrorMode::none: break;
  }
  throw invalid_argument("no error distribution in mode 'none'");
}

}  // namespace probfp
