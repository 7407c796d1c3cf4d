#include "probfp/density.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "probfp/chebyshev.hpp"
#include "probfp/errors.hpp"
#include "probfp/piecewise.hpp"

namespace probfp {

Density::Density(std::vector<Piece> pieces, bool cap_hit) : pieces_(std::move(pieces)), cap_hit_(cap_hit) {
  starts_.reserve(pieces_.size());
  anti_.reserve(pieces_.size());
  cum_.assign(1, 0.0);
  double prev_b = -std::numeric_limits<double>::infinity();
  for (auto& pc : pieces_) {
    if (!(std::isfinite(pc.a) && std::isfinite(pc.b) && pc.a < pc.b))
      throw invalid_argument("density piece has an invalid interval");
    if (pc.a < prev_b) throw invalid_argument("density pieces overlap or are unordered");
    if (pc.c.empty()) pc.c.push_back(0.0);
    prev_b = pc.b;
    starts_.push_back(pc.a);
    auto F = cheb::antiderivative(pc.c);
    const double half = 0.5 * (pc.b - pc.a);
    for (double& v : F) v *= half;
    const double mass = cheb::clenshaw(F.data(), int(F.size()), 1.0);
    anti_.push_back(std::move(F));
    cum_.push_back(cum_.back() + mass);
  }
}

double Density::clenshaw_(const std::vector<double>& c, double s) {
  return cheb::clenshaw(c.data(), int(c.size()), s);
}

Interval Density::support() const {
  if (pieces_.empty()) return {0.0, 0.0};
  return {pieces_.front().a, pieces_.back().b};
}

std::ptrdiff_t Density::find_piece(double x) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
  if (it == starts_.begin()) return -1;
  const std::size_t i = std::size_t(it - starts_.begin()) - 1;
  if (x > pieces_[i].b) return -1;
  return std::ptrdiff_t(i);
}

double Density::eval_raw(double x) const {
  const auto i = find_piece(x);
  return i < 0 ? 0.0 : eval_piece(std::size_t(i), x);
}

double Density::operator()(double x) const { return std::max(0.0, eval_raw(x)); }

double Density::piece_cdf_(std::size_t i, double x) const {
  const Piece& pc = pieces_[i];
  const double s = std::clamp((2.0 * x - pc.a - pc.b) / (pc.b - pc.a), -1.0, 1.0);
  return clenshaw_(anti_[i], s);
}

double Density::cdf(double x) const {
  if (pieces_.empty()) return 0.0;
  const double total = total_mass();
  auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
  if (it == starts_.begin()) return 0.0;
  const std::size_t i = std::size_t(it - starts_.begin()) - 1;
  double m;
  if (x >= pieces_[i].b)
    m = cum_[i + 1];
  else
    m = std::clamp(cum_[i] + piece_cdf_(i, x), std::min(cum_[i], cum_[i + 1]), std::max(cum_[i], cum_[i + 1]));
  return std::clamp(m / total, 0.0, 1.0);
}

double Density::quantile(double q) const {
  if (pieces_.empty()) throw invalid_argument("quantile of an empty density");
  if (!(q >= 0.0 && q <= 1.0)) throw invalid_argument("quantile level must be in [0, 1]");
  const double total = total_mass();
  const double target = q * total;
  if (q <= 0.0) {
    for (std::size_t i = 0; i < pieces_.size(); ++i)
      if (piece_mass(i) > 0.0) return pieces_[i].a;
    return pieces_.front().a;
  }
  if (q >= 1.0) {
    for (std::size_t i = pieces_.size(); i-- > 0;)
      if (piece_mass(i) > 0.0) return pieces_[i].b;
    return pieces_.back().b;
  }
  auto it = std::lower_bound(cum_.begin() + 1, cum_.end(), target);
  std::size_t i = std::size_t(it - cum_.begin()) - 1;
  if (i >= pieces_.size()) i = pieces_.size() - 1;
  // Skip zero-mass pieces sitting exactly at the target.
  while (i + 1 < pieces_.size() && piece_mass(i) <= 0.0) ++i;
  const Piece& pc = pieces_[i];
  const double mass = piece_mass(i);
  const double r = std::clamp(target - cum_[i], 0.0, std::max(mass, 0.0));
  double lo = pc.a, hi = pc.b;
  double x = mass > 0 ? pc.a + (pc.b - pc.a) * (r / mass) : 0.5 * (pc.a + pc.b);
  for (int iter = 0; iter < 200; ++iter) {
    const double F = piece_cdf_(i, x) - r;
    if (F == 0.0) break;
    if (F < 0)
      lo = x;
    else
      hi = x;
    const double f = eval_piece(i, x);
    double xn = (f > 0.0) ? x - F / f : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= 4e-16 * std::max(std::abs(x), pc.b - pc.a) || hi - lo <= 4e-16 * std::max(std::abs(lo), std::abs(hi))) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

std::vector<double> Density::breakpoints() const {
  std::vector<double> out;
  out.reserve(pieces_.size() + 1);
  for (const auto& pc : pieces_) {
    if (out.empty() || out.back() != pc.a) out.push_back(pc.a);
    out.push_back(pc.b);
  }
  return out;
}

// ---- specs -----------------------------------------------------------------

DistributionSpec DistributionSpec::uniform(double a, double b) {
  DistributionSpec s;
  s.kind = Kind::uniform;
  s.a = a;
  s.b = b;
  return s;
}
DistributionSpec DistributionSpec::normal(double mu, double sigma) {
  DistributionSpec s;
  s.kind = Kind::normal;
  s.mu = mu;
  s.sigma = sigma;
  s.a = s.b = 0.0;
  return s;
}
DistributionSpec DistributionSpec::constant(double c) {
  DistributionSpec s;
  s.kind = Kind::constant;
  s.value = c;
  s.a = s.b = 0.0;
  return s;
}
DistributionSpec DistributionSpec::custom(std::vector<double> xs, std::vector<double> pdf) {
  DistributionSpec s;
  s.kind = Kind::custom;
  s.xs = std::move(xs);
  s.pdf = std::move(pdf);
  s.a = s.b = 0.0;
  return s;
}

void DistributionSpec::validate() const {
  switch (kind) {
    case Kind::uniform:
      if (!(std::isfinite(a) && std::isfinite(b) && a < b))
        throw invalid_argument("uniform distribution requires finite a < b");
      break;
    case Kind::normal:
      if (!(std::isfinite(mu) && std::isfinite(sigma) && sigma > 0))
        throw invalid_argument("normal distribution requires finite mu and sigma > 0");
      break;
    case Kind::constant:
      if (!std::isfinite(value)) throw invalid_argument("constant must be finite");
      break;
    case Kind::custom: {
      if (xs.size() < 2 || xs.size() != pdf.size())
        throw invalid_argument("custom distribution needs matching x/pdf tables of length >= 2");
      double mass = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(pdf[i]) || pdf[i] < 0)
          throw invalid_argument("custom distribution table has invalid entries");
        if (i > 0) {
          if (!(xs[i] > xs[i - 1])) throw invalid_argument("custom distribution x must increase strictly");
          mass += 0.5 * (pdf[i] + pdf[i - 1]) * (xs[i] - xs[i - 1]);
        }
      }
      if (!(mass > 0)) throw invalid_argument("custom distribution has zero mass");
      break;
    }
  }
}

// ---- construction ------------------------------------------------------------

Density from_function(const std::function<double(double)>& f, std::vector<double> breakpoints,
                      const BuildOptions& opts) {
  RefineOptions ro;
  ro.rel_tol = opts.rel_tol;
  ro.max_pieces = opts.max_pieces;
  bool cap = false;
  auto pieces = build_pieces(
      std::move(breakpoints),
      [&](double, double, std::span<const double> x, std::span<double> out) {
        for (std::size_t j = 0; j < x.size(); ++j) out[j] = f(x[j]);
      },
      ro, &cap);
  return Density(std::move(pieces), cap);
}

Density build(const DistributionSpec& spec, const BuildOptions& opts) {
  spec.validate();
  switch (spec.kind) {
    case DistributionSpec::Kind::uniform:
      return Density({{spec.a, spec.b, {1.0 / (spec.b - spec.a)}}});
    case DistributionSpec::Kind::normal: {
      const double mu = spec.mu, sigma = spec.sigma;
      const double k = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
      std::vector<double> bp;
      for (int i = -8; i <= 8; ++i) bp.push_back(mu + i * sigma);
      Density d = from_function(
          [=](double x) {
            const double z = (x - mu) / sigma;
            return k * std::exp(-0.5 * z * z);
          },
          bp, opts);
      return normalize(d);
    }
    case DistributionSpec::Kind::constant:
      throw invalid_argument("a constant has no density; bind it as a symbolic constant");
    case DistributionSpec::Kind::custom: {
      std::vector<Density::Piece> pieces;
      for (std::size_t i = 0; i + 1 < spec.xs.size(); ++i) {
        const double l = spec.pdf[i], r = spec.pdf[i + 1];
        pieces.push_back({spec.xs[i], spec.xs[i + 1], {0.5 * (l + r), 0.5 * (r - l)}});
      }
      return normalize(Density(std::move(pieces)));
    }
  }
  throw invalid_argument("unknown distribution kind");
}

// ---- exact transforms --------------------------------------------------------

Density scalar_add(double alpha, const Density& d) {
  if (!std::isfinite(alpha)) throw invalid_argument("scalar_add needs a finite scalar");
  // Shifting can round neighbouring endpoints together; pieces narrower than
  // an ulp of the new location are dropped (their mass is below ~1e-12).
  std::vector<Density::Piece> out;
  out.reserve(d.size());
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& pc : d.pieces()) {
    Density::Piece q{std::max(pc.a + alpha, prev), pc.b + alpha, pc.c};
    if (!(q.a < q.b)) continue;
    prev = q.b;
    out.push_back(std::move(q));
  }
  if (out.empty()) throw invalid_argument("scalar_add collapsed the density to a point");
  return Density(std::move(out), d.cap_hit());
}

Density scalar_mul(double alpha, const Density& d) {
  if (!std::isfinite(alpha) || alpha == 0.0) throw invalid_argument("scalar_mul needs a finite non-zero scalar");
  const double inv = 1.0 / std::abs(alpha);
  std::vector<Density::Piece> out;
  out.reserve(d.size());
  for (const auto& pc : d.pieces()) {
    Density::Piece q{pc.a * alpha, pc.b * alpha, pc.c};
    for (double& c : q.c) c *= inv;
    if (alpha < 0) {
      std::swap(q.a, q.b);
      for (std::size_t k = 1; k < q.c.size(); k += 2) q.c[k] = -q.c[k];
    }
    out.push_back(std::move(q));
  }
  if (alpha < 0) std::reverse(out.begin(), out.end());
  return Density(std::move(out), d.cap_hit());
}

Density reciprocal(const Density& d, const BuildOptions& opts) {
  const Interval s = d.support();
  if (s.lo <= 0.0 && s.hi >= 0.0)
    throw singular_division("reciprocal of a density whose support contains 0");
  std::vector<double> bp;
  for (double b : d.breakpoints()) bp.push_back(1.0 / b);
  RefineOptions ro;
  ro.rel_tol = opts.rel_tol;
  ro.max_pieces = opts.max_pieces;
  bool cap = false;
  auto pieces = build_pieces(
      bp,
      [&](double a, double b, std::span<const double> x, std::span<double> out) {
        const auto i = d.find_piece(1.0 / (0.5 * (a + b)));
        for (std::size_t j = 0; j < x.size(); ++j)
          out[j] = i < 0 ? 0.0 : d.eval_piece(std::size_t(i), 1.0 / x[j]) / (x[j] * x[j]);
      },
      ro, &cap);
  return normalize(Density(std::move(pieces), cap || d.cap_hit()));
}

Density normalize(const Density& d) {
  const double m = d.total_mass();
  if (!(m > 0.0) || !std::isfinite(m)) throw invalid_argument("cannot normalize a density with non-positive mass");
  // Identically zero end pieces carry no support.
  auto zero = [](const Density::Piece& pc) {
    return std::all_of(pc.c.begin(), pc.c.end(), [](double c) { return c == 0.0; });
  };
  const auto& in = d.pieces();
  auto first = std::find_if_not(in.begin(), in.end(), zero);
  auto last = std::find_if_not(in.rbegin(), std::make_reverse_iterator(first), zero).base();
  std::vector<Density::Piece> out(first, last);
  for (auto& pc : out)
    for (double& c : pc.c) c /= m;
  return Density(std::move(out), d.cap_hit());
}

double mass_outside(const Density& d, Interval w) {
  return std::clamp(1.0 - (d.cdf(w.hi) - d.cdf(w.lo)), 0.0, 1.0);
}

void write_csv(std::ostream& os, const Density& d, int points) {
  if (points < 2) throw invalid_argument("csv resolution must be >= 2");
  const Interval s = d.support();
  os << "x,pdf,cdf\n";
  os << std::setprecision(17);
  for (int i = 0; i < points; ++i) {
    const double x = (i == points - 1) ? s.hi : s.lo + s.width() * (double(i) / (points - 1));
    os << x << ',' << d(x) << ',' << d.cdf(x) << '\n';
  }
}

}  // namespace probfp
