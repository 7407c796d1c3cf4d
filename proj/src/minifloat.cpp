#include "probfp/minifloat.hpp"

#include <cmath>
#include <limits>

#include "probfp/errors.hpp"

namespace probfp {

FloatFormat::FloatFormat(int precision, int e_min, int e_max)
    : p_(precision), e_min_(e_min), e_max_(e_max) {
  if (precision < 1 || precision > max_precision)
    throw invalid_argument("precision must be in [1, " + std::to_string(max_precision) + "]");
  if (e_min >= e_max) throw invalid_argument("format requires e_min < e_max");
  if (e_min < -1000 || e_max > 1000) throw invalid_argument("exponent range exceeds host double range");
  u_ = std::ldexp(1.0, -(precision + 1));
}

FloatFormat FloatFormat::from_bits(int exponent_bits, int mantissa_bits) {
  if (exponent_bits < 2 || exponent_bits > 11)
    throw invalid_argument("exponent_bits must be in [2, 11]");
  const int n = (1 << (exponent_bits - 1)) - 1;
  return FloatFormat(mantissa_bits, 1 - n, n);
}

double FloatFormat::largest() const {
  return std::ldexp(2.0 - std::ldexp(1.0, -p_), e_max_);
}

double FloatFormat::smallest() const { return std::ldexp(1.0, e_min_); }

double FloatFormat::underflow_threshold() const { return std::ldexp(1.0, e_min_ - 1); }

void FloatFormat::require_enumerable(const char* what) const {
  if (!enumerable())
    throw feasibility_error(std::string(what) + ": precision p=" + std::to_string(p_) +
                            " exceeds the enumeration limit p<=" +
                            std::to_string(max_enumerable_precision));
}

std::uint64_t FloatFormat::finite_count() const {
  return 2ull * std::uint64_t(e_max_ - e_min_ + 1) * (std::uint64_t{1} << p_);
}

std::string FloatFormat::describe() const {
  return "p=" + std::to_string(p_) + " e=[" + std::to_string(e_min_) + "," +
         std::to_string(e_max_) + "]";
}

MiniFloat MiniFloat::pos_inf() {
  return MiniFloat(Kind::pos_inf, 0, 0, 0, std::numeric_limits<double>::infinity());
}
MiniFloat MiniFloat::neg_inf() {
  return MiniFloat(Kind::neg_inf, 1, 0, 0, -std::numeric_limits<double>::infinity());
}

MiniFloat MiniFloat::make(int s, int e, std::uint32_t k, const FloatFormat& fmt) {
  return MiniFloat(Kind::finite, s, e, k, probfp::value(s, e, k, fmt));
}

char op_symbol(Op op) {
  switch (op) {
    case Op::add: return '+';
    case Op::sub: return '-';
    case Op::mul: return '*';
    case Op::div: return '/';
  }
  return '?';
}

double value(int s, int e, std::uint32_t k, const FloatFormat& fmt) {
  if (s != 0 && s != 1) throw invalid_argument("sign must be 0 or 1");
  if (e < fmt.e_min() || e > fmt.e_max()) throw invalid_argument("exponent out of range");
  if (k >= fmt.mantissa_count()) throw invalid_argument("mantissa out of range");
  const double m = 1.0 + std::ldexp(double(k), -fmt.p());
  const double v = std::ldexp(m, e);
  return s ? -v : v;
}

RoundingInterval rounding_interval(const MiniFloat& z, const FloatFormat& fmt) {
  if (!z.is_finite()) throw invalid_argument("rounding_interval needs a finite non-zero value");
  const int p = fmt.p();
  const int e = z.exponent();
  const double k = z.mantissa();
  const double two_p1 = std::ldexp(1.0, p + 1);
  double lo, hi;
  if (e == fmt.e_min() && z.mantissa() == 0)
    lo = std::ldexp(1.0, e - 1);
  else if (z.mantissa() == 0)
    lo = std::ldexp(1.0 + (two_p1 - 1.0) / two_p1, e - 1);
  else
    lo = std::ldexp(1.0 + (2.0 * k - 1.0) / two_p1, e);
  if (e == fmt.e_max() && z.mantissa() == fmt.mantissa_count() - 1)
    hi = std::abs(z.value());
  else
    hi = std::ldexp(1.0 + (2.0 * k + 1.0) / two_p1, e);
  if (z.sign()) return {-hi, -lo, z};
  return {lo, hi, z};
}

MiniFloat round_nearest(double x, const FloatFormat& fmt) {
  if (std::isnan(x)) throw invalid_argument("round_nearest: NaN input");
  const int s = std::signbit(x) ? 1 : 0;
  const double a = std::abs(x);
  if (a == 0.0) return MiniFloat::zero();
  if (a > fmt.largest()) return s ? MiniFloat::neg_inf() : MiniFloat::pos_inf();
  if (a <= fmt.underflow_threshold()) return MiniFloat::zero();
  if (a < fmt.smallest()) return MiniFloat::make(s, fmt.e_min(), 0, fmt);
  int e2;
  const double m = std::frexp(a, &e2);  // a = m 2^e2, m in [0.5, 1)
  int e = e2 - 1;
  // Mantissa offset scaled to integers; exact for p <= 52.
  const double scaled = std::ldexp(m * 2.0 - 1.0, fmt.p());
  double k = std::nearbyint(scaled);  // default mode: ties to even
  if (k >= double(fmt.mantissa_count())) {
    k = 0.0;
    ++e;
  }
  return MiniFloat::make(s, e, static_cast<std::uint32_t>(k), fmt);
}

double round_value(double x, const FloatFormat& fmt) {
  if (std::isnan(x)) return x;
  if (std::isinf(x)) return x;
  return round_nearest(x, fmt).value();
}

namespace {
double apply(double x, double y, Op op) {
  switch (op) {
    case Op::add: return x + y;
    case Op::sub: return x - y;
    case Op::mul: return x * y;
    case Op::div: return x / y;
  }
  return std::numeric_limits<double>::quiet_NaN();
}
}  // namespace

MiniFloat emulate_op(const MiniFloat& x, const MiniFloat& y, Op op, const FloatFormat& fmt) {
  const double r = apply(x.value(), y.value(), op);
  if (std::isnan(r)) throw invalid_argument(std::string("indeterminate operation with operator ") + op_symbol(op));
  if (std::isinf(r)) return r > 0 ? MiniFloat::pos_inf() : MiniFloat::neg_inf();
  return round_nearest(r, fmt);
}

double emulate_value(double x, double y, Op op, const FloatFormat& fmt) {
  return round_value(apply(x, y, op), fmt);
}

std::vector<MiniFloat> enumerate_finite(const FloatFormat& fmt) {
  fmt.require_enumerable("enumerate_finite");
  std::vector<MiniFloat> out;
  out.reserve(fmt.finite_count());
  const std::uint32_t K = fmt.mantissa_count();
  for (int e = fmt.e_max(); e >= fmt.e_min(); --e)
    for (std::uint32_t k = K; k-- > 0;) out.push_back(MiniFloat::make(1, e, k, fmt));
  for (int e = fmt.e_min(); e <= fmt.e_max(); ++e)
    for (std::uint32_t k = 0; k < K; ++k) out.push_back(MiniFloat::make(0, e, k, fmt));
  return out;
}

}  // namespace probfp
