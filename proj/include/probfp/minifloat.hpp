#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace probfp {

// Binary format without subnormals: values (-1)^s 2^e (1 + k/2^p).
class FloatFormat {
 public:
  // Largest precision accepted at all; enumeration-based work is further
  // limited to max_enumerable_precision.
  static constexpr int max_precision = 52;
  static constexpr int max_enumerable_precision = 16;

  FloatFormat(int precision, int e_min, int e_max);

  // Maps an exponent field width to the IEEE normal range [2 - 2^(b-1), 2^(b-1) - 1].
  static FloatFormat from_bits(int exponent_bits, int mantissa_bits);
  static FloatFormat half() { return from_bits(5, 10); }

  int p() const { return p_; }
  int e_min() const { return e_min_; }
  int e_max() const { return e_max_; }
  double u() const { return u_; }
  std::uint32_t mantissa_count() const { return std::uint32_t{1} << p_; }

  double largest() const;    // z(0, e_max, 2^p - 1)
  double smallest() const;   // z(0, e_min, 0)
  // Magnitudes strictly above this round to infinity.
  double overflow_threshold() const { return largest(); }
  // Magnitudes at or below this round to zero (the tie goes to zero).
  double underflow_threshold() const;

  bool enumerable() const { return p_ <= max_enumerable_precision; }
  void require_enumerable(const char* what) const;
  std::uint64_t finite_count() const;

  std::string describe() const;
  bool operator==(const FloatFormat&) const = default;

 private:
  int p_;
  int e_min_;
  int e_max_;
  double u_;
};

class MiniFloat {
 public:
  enum class Kind { finite, zero, pos_inf, neg_inf };

  static MiniFloat make(int s, int e, std::uint32_t k, const FloatFormat& fmt);
  static MiniFloat zero() { return MiniFloat(Kind::zero, 0, 0, 0, 0.0); }
  static MiniFloat pos_inf();
  static MiniFloat neg_inf();

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::finite; }
  bool is_zero() const { return kind_ == Kind::zero; }
  bool is_inf() const { return kind_ == Kind::pos_inf || kind_ == Kind::neg_inf; }
  int sign() const { return s_; }
  int exponent() const { return e_; }
  std::uint32_t mantissa() const { return k_; }
  double value() const { return v_; }

  bool operator==(const MiniFloat& o) const {
    return kind_ == o.kind_ && s_ == o.s_ && e_ == o.e_ && k_ == o.k_;
  }

 private:
  MiniFloat(Kind kind, int s, int e, std::uint32_t k, double v)
      : kind_(kind), s_(s), e_(e), k_(k), v_(v) {}
  Kind kind_;
  int s_;
  int e_;
  std::uint32_t k_;
  double v_;
};

struct RoundingInterval {
  double lo;
  double hi;
  MiniFloat owner;
};

enum class Op { add, sub, mul, div };
char op_symbol(Op op);

double value(int s, int e, std::uint32_t k, const FloatFormat& fmt);
RoundingInterval rounding_interval(const MiniFloat& z, const FloatFormat& fmt);
MiniFloat round_nearest(double x, const FloatFormat& fmt);
// Value of round_nearest(x) as a double (0, +-inf or the finite value); NaN passes through.
double round_value(double x, const FloatFormat& fmt);
MiniFloat emulate_op(const MiniFloat& x, const MiniFloat& y, Op op, const FloatFormat& fmt);
// Host-double variant used by Monte-Carlo: rounds the exact result, NaN passes through.
double emulate_value(double x, double y, Op op, const FloatFormat& fmt);
std::vector<MiniFloat> enumerate_finite(const FloatFormat& fmt);

}  // namespace probfp
