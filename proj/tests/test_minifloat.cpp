#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "probfp/errors.hpp"
#include "probfp/minifloat.hpp"

using namespace probfp;

TEST_CASE("format parameters") {
  const FloatFormat h = FloatFormat::half();
  CHECK(h.p() == 10);
  CHECK(h.e_min() == -14);
  CHECK(h.e_max() == 15);
  CHECK(h.u() == std::ldexp(1.0, -11));
  CHECK(h.largest() == 65504.0);
  CHECK(h.smallest() == std::ldexp(1.0, -14));

  const FloatFormat f33 = FloatFormat::from_bits(3, 3);
  CHECK(f33.e_min() == -2);
  CHECK(f33.e_max() == 3);
  CHECK(f33.largest() == 15.0);
  CHECK(f33.u() == 1.0 / 16.0);
  CHECK(f33.finite_count() == 2u * 6u * 8u);

  CHECK_THROWS_AS(FloatFormat(0, -2, 3), invalid_argument);
  CHECK_THROWS_AS(FloatFormat(3, 3, 3), invalid_argument);
  CHECK_THROWS_AS(FloatFormat::from_bits(1, 3), invalid_argument);
  CHECK_NOTHROW(FloatFormat(24, -126, 127));
}

TEST_CASE("values of representables") {
  const FloatFormat f(3, -2, 3);
  CHECK(value(0, 0, 0, f) == 1.0);
  CHECK(value(0, 0, 1, f) == 1.125);
  CHECK(value(1, 3, 7, f) == -15.0);
  CHECK(value(0, -2, 0, f) == 0.25);
  CHECK_THROWS_AS(value(0, 4, 0, f), invalid_argument);
  CHECK_THROWS_AS(value(0, 0, 8, f), invalid_argument);
  CHECK_THROWS_AS(value(2, 0, 0, f), invalid_argument);
}

TEST_CASE("round_nearest agrees with a nearest-value scan") {
  for (int p : {1, 2, 3, 4}) {
    const FloatFormat f(p, -3, 3);
    std::mt19937_64 rng(p);
    std::uniform_real_distribution<double> mag(-4.0, 4.5);
    for (int i = 0; i < 4000; ++i) {
      const double x = (i % 2 ? -1 : 1) * std::exp2(mag(rng));
      CHECK(round_value(x, f) == oracle::round_scan(x, p, -3, 3));
    }
    // Exact midpoints between neighbours exercise ties-to-even.
    const auto pos = oracle::positives(p, -3, 3);
    for (std::size_t i = 0; i + 1 < pos.size(); ++i) {
      const double mid = 0.5 * (pos[i] + pos[i + 1]);
      CHECK(round_value(mid, f) == oracle::round_scan(mid, p, -3, 3));
      CHECK(round_value(-mid, f) == oracle::round_scan(-mid, p, -3, 3));
    }
  }
}

TEST_CASE("ties, underflow and overflow") {
  const FloatFormat f(3, -2, 3);
  CHECK(round_value(1.0625, f) == 1.0);     // tie between k=0 and k=1 -> even
  CHECK(round_value(1.1875, f) == 1.25);    // tie between k=1 and k=2 -> even
  CHECK(round_value(0.125, f) == 0.0);      // exactly half the smallest: to zero
  CHECK(round_value(0.1251, f) == 0.25);    // no subnormals
  CHECK(round_value(15.0, f) == 15.0);
  CHECK(std::isinf(round_value(15.0001, f)));
  CHECK(round_value(-15.5, f) == -INFINITY);
  CHECK(round_nearest(0.0, f).kind() == MiniFloat::Kind::zero);
  CHECK(round_nearest(1e9, f).kind() == MiniFloat::Kind::pos_inf);
  CHECK_THROWS_AS(round_nearest(NAN, f), invalid_argument);
  // Carry into the next binade.
  const MiniFloat r = round_nearest(1.99, f);
  CHECK(r.exponent() == 1);
  CHECK(r.mantissa() == 0);
}

TEST_CASE("rounding intervals partition the positive range") {
  for (int p : {1, 3, 5}) {
    const FloatFormat f(p, -3, 3);
    const auto all = enumerate_finite(f);
    CHECK(all.size() == f.finite_count());
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].value() < all[i].value());
    double prev_hi = f.underflow_threshold();
    for (const auto& z : all) {
      if (z.sign()) continue;
      const auto ri = rounding_interval(z, f);
      CHECK(ri.lo == prev_hi);
      CHECK(ri.lo < z.value());
      CHECK(ri.hi >= z.value());
      // Points just inside each end round to z.
      CHECK(round_value(std::nextafter(ri.lo, INFINITY), f) == z.value());
      CHECK(round_value(std::nextafter(ri.hi, 0.0), f) == z.value());
      prev_hi = ri.hi;
      const auto rn = rounding_interval(MiniFloat::make(1, z.exponent(), z.mantissa(), f), f);
      CHECK(rn.lo == -ri.hi);
      CHECK(rn.hi == -ri.lo);
    }
    CHECK(prev_hi == f.largest());
  }
}

TEST_CASE("enumeration guard") {
  CHECK_THROWS_AS(enumerate_finite(FloatFormat(17, -2, 3)), feasibility_error);
  CHECK(FloatFormat(16, -2, 3).enumerable());
}

TEST_CASE("emulated arithmetic") {
  const FloatFormat f(3, -2, 3);
  const auto a = MiniFloat::make(0, 3, 7, f);  // 15
  const auto b = MiniFloat::make(0, 0, 0, f);  // 1
  CHECK(emulate_op(a, b, Op::add, f).kind() == MiniFloat::Kind::pos_inf);
  CHECK(emulate_op(a, b, Op::sub, f).value() == 14.0);
  CHECK(emulate_op(b, MiniFloat::make(0, 1, 1, f), Op::div, f).value() == round_value(1.0 / 2.25, f));
  CHECK(emulate_op(b, MiniFloat::zero(), Op::div, f).kind() == MiniFloat::Kind::pos_inf);
  CHECK_THROWS_AS(emulate_op(MiniFloat::zero(), MiniFloat::zero(), Op::div, f), invalid_argument);
  CHECK(emulate_value(15.5, 0.97, Op::div, f) == INFINITY);
  CHECK(emulate_value(10.0, 1.0, Op::div, f) == 10.0);
  CHECK(std::isnan(emulate_value(0.0, 0.0, Op::div, f)));
  CHECK(op_symbol(Op::mul) == '*');
}
