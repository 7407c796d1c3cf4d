#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "probfp/errordist.hpp"
#include "probfp/errors.hpp"

using namespace probfp;

TEST_CASE("typical density closed form") {
  CHECK(typical_pdf(0.0) == 0.75);
  CHECK(typical_pdf(0.5) == 0.75);
  CHECK(typical_pdf(-0.3) == 0.75);
  CHECK(typical_pdf(1.0) == 0.0);
  CHECK(typical_pdf(1.5) == 0.0);
  // Wing at |t| = 2/3: w = 1/2, d = 1/4 + 1/16.
  CHECK(typical_pdf(2.0 / 3.0) == doctest::Approx(0.3125));
  const ErrorDistribution td = typical_density();
  CHECK(td.raw_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(td.density(0.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(td.density.cdf(0.5) - td.density.cdf(-0.5) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("t-ranges match rounding intervals") {
  for (int p : {1, 3, 5}) {
    const FloatFormat f(p, -3, 4);
    const double u = f.u();
    for (const auto& z : enumerate_finite(f)) {
      const auto ri = rounding_interval(z, f);
      const auto tr = t_range(z, f);
      const double zv = z.value();
      // t(x) = (x - z) / (x u) at the interval ends, clipped to [-1, 1].
      const double t_at_lo = (1.0 - zv / (z.sign() ? ri.hi : ri.lo)) / u;
      const double t_at_hi = (1.0 - zv / (z.sign() ? ri.lo : ri.hi)) / u;
      CHECK(tr.t_min == doctest::Approx(std::max(-1.0, t_at_lo)).epsilon(1e-13));
      CHECK(tr.t_max == doctest::Approx(std::min(1.0, t_at_hi)).epsilon(1e-13));
    }
  }
}

TEST_CASE("|z| u identity and C coefficients") {
  for (int p : {1, 3, 5}) {
    const FloatFormat f(p, -3, 4);
    const double u = f.u();
    for (const auto& z : enumerate_finite(f)) {
      const auto ri = rounding_interval(z, f);
      const double width = ri.hi - ri.lo;
      const double zu = std::abs(z.value()) * u;
      CHECK(coefficient_C(z.exponent(), z.mantissa(), f) * width == doctest::Approx(zu).epsilon(1e-14));
      auto tr = t_range(z, f);
      // The smallest normal's range is clipped at -1; its unclipped end is -2^(p+1).
      if (z.exponent() == f.e_min() && z.mantissa() == 0) tr.t_min = -std::ldexp(1.0, p + 1);
      const double rhs = width * (1.0 - tr.t_max * u) * (1.0 - tr.t_min * u) / (tr.t_max - tr.t_min);
      CHECK(rhs == doctest::Approx(zu).epsilon(1e-14));
    }
  }
}

TEST_CASE("mantissa cutoff") {
  const FloatFormat f(3, -2, 3);
  CHECK(mantissa_cutoff(0.4, f) == 7);
  // For |t| > 1/2 a general z(k) reaches t iff k <= cutoff.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> T(0.5, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double t = T(rng);
    const int kc = mantissa_cutoff(t, f);
    for (std::uint32_t k = 1; k < 7; ++k) {
      const auto tr = t_range(MiniFloat::make(0, 0, k, f), f);
      CHECK((int(k) <= kc) == (t <= tr.t_max));
      // The negative side is shifted by one half.
      CHECK((k <= std::floor(std::ldexp(1.0 / t - 1.0, 3) + 0.5)) == (-t >= tr.t_min));
    }
  }
}

TEST_CASE("exact density matches a brute-force sum") {
  struct Case {
    DistributionSpec spec;
    int p, emin, emax;
  };
  const Case cases[] = {{DistributionSpec::uniform(0.3, 9.0), 3, -2, 3},
                        {DistributionSpec::uniform(-10.0, 10.0), 5, -4, 5},
                        {DistributionSpec::normal(1.0, 2.0), 4, -6, 5}};
  for (const auto& c : cases) {
    const FloatFormat f(c.p, c.emin, c.emax);
    const Density d = build(c.spec);
    const ErrorDistribution ed = exact_error_density(d, f);
    CHECK(ed.mode == ErrorMode::exact);
    auto fx = [&](double x) { return d(x); };
    auto rnd = [&](double x) { return oracle::round_scan(x, c.p, c.emin, c.emax); };
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> T(-0.999, 0.999);
    for (int i = 0; i < 60; ++i) {
      const double t = T(rng);
      const double ref = oracle::error_density_raw(fx, t, c.p, c.emin, c.emax, rnd);
      CHECK(ed.density(t) * ed.raw_mass == doctest::Approx(ref).epsilon(1e-8));
    }
    CHECK(ed.raw_mass + ed.excluded.total() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("excluded mass classes") {
  const FloatFormat f(3, -2, 3);
  // Mass rounding to zero: |x| <= 1/8; overflow: |x| > 15.
  const Density d = build(DistributionSpec::uniform(-1.0, 19.0));
  const ExcludedMass ex = excluded_mass(d, f);
  CHECK(ex.zero == doctest::Approx(0.25 / 20.0).epsilon(1e-12));
  CHECK(ex.overflow == doctest::Approx(4.0 / 20.0).epsilon(1e-12));
  // x in (1/8, 1/4 / (1 + u)) rounds to 1/4 with |t| > 1; both signs.
  const double band = 0.25 / (1.0 + f.u()) - 0.125;
  CHECK(ex.large_error == doctest::Approx(2.0 * band / 20.0).epsilon(1e-12));
  const ErrorDistribution ed = exact_error_density(d, f);
  CHECK(ed.excluded.total() == doctest::Approx(ex.total()).epsilon(1e-12));
  CHECK(ed.density.support().lo >= -1.0);
  CHECK(ed.density.support().hi <= 1.0);
}

TEST_CASE("single rounding interval gives its t-range image") {
  // x ~ U within the rounding interval of z = 2 (p = 3): t spans the whole range.
  const FloatFormat f(3, -2, 3);
  const auto ri = rounding_interval(MiniFloat::make(0, 1, 0, f), f);
  const Density d = build(DistributionSpec::uniform(ri.lo, ri.hi));
  const ErrorDistribution ed = exact_error_density(d, f);
  const auto tr = t_range(MiniFloat::make(0, 1, 0, f), f);
  CHECK(ed.density.support().lo == doctest::Approx(tr.t_min).epsilon(1e-12));
  CHECK(ed.density.support().hi == doctest::Approx(tr.t_max).epsilon(1e-12));
  // Density of t for uniform x: proportional to z u / (1 - t u)^2.
  const double u = f.u();
  const double norm = (ri.hi - ri.lo);
  for (double t : {tr.t_min * 0.9, 0.0, tr.t_max * 0.9}) {
    const double c = 1.0 / (1.0 - t * u);
    CHECK(ed.density(t) == doctest::Approx(2.0 * u * c * c / norm).epsilon(1e-9));
  }
}

TEST_CASE("finite-p typical density tends to the limit") {
  double prev = INFINITY;
  for (int p : {3, 6, 10}) {
    const FloatFormat f(p, -14, 15);
    const ErrorDistribution fd = typical_density_finite_p(f);
    CHECK(fd.density.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
    double dist = 0.0;
    for (int i = 1; i < 2000; ++i) {
      const double t = -1.0 + i / 1000.0;
      dist = std::max(dist, std::abs(fd.density(t) - typical_pdf(t)));
    }
    CHECK(dist < prev);
    prev = dist;
  }
  CHECK(prev < 0.01);
}

TEST_CASE("mode dispatch and guards") {
  const Density d = build(DistributionSpec::uniform(0.0, 1.0));
  CHECK(error_distribution(ErrorMode::typical, d, FloatFormat::half()).mode == ErrorMode::typical);
  CHECK_THROWS_AS(exact_error_density(d, FloatFormat(24, -126, 127)), feasibility_error);
  CHECK(error_mode_from_string("typical_finite_p") == ErrorMode::typical_finite_p);
  CHECK(to_string(ErrorMode::exact) == "exact");
  CHECK_THROWS_AS(error_mode_from_string("bogus"), invalid_argument);
}

TEST_CASE("exact density at half precision stays close to typical") {
  const Density d = build(DistributionSpec::uniform(0.0, 1.0));
  const ErrorDistribution ed = exact_error_density(d, FloatFormat::half());
  double dist = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double t = -1.0 + i / 2000.0;
    dist = std::max(dist, std::abs(ed.density(t) - typical_pdf(t)));
  }
  CHECK(dist < 0.05);
  CHECK(ed.assumption1_mass < 1e-3);
}
