// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "oracles.hpp"
#include "probfp/analysis.hpp"
#include "probfp/errordist.hpp"
#include "probfp/pipeline.hpp"

using namespace probfp;
namespace fs = std::filesystem;

namespace {

using clk = std::chrono::steady_clock;
double seconds_since(clk::time_point t0) { return std::chrono::duration<double>(clk::now() - t0).count(); }

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
  std::printf("    ");
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::printf("\n");
}

AnalysisResult run_fixture(const std::string& name, unsigned threads = 0) {
  AnalysisSpec spec = load_spec(std::string(PROBFP_BENCH_DIR) + "/" + name + ".json");
  RunOptions opts;
  opts.mc.threads = threads;
  AnalysisResult r = run_analysis(spec, opts);
  fs::create_directories(PROBFP_TEST_TMP);
  std::ofstream(fs::path(PROBFP_TEST_TMP) / (name + "_report.json")) << dump_json(report_json(r));
  return r;
}

const ConfidenceRange& range_at(const AnalysisReport& r, double level) {
  for (const auto& c : r.confidence_ranges)
    if (c.level == level) return c;
  throw std::runtime_error("missing confidence level");
}

bool within(Interval inner, Interval outer, double rel_slack = 0.0) {
  const double s = rel_slack * std::max(std::abs(outer.lo), std::abs(outer.hi));
  return inner.lo >= outer.lo - s && inner.hi <= outer.hi + s;
}

void criterion1() {
  const auto t0 = clk::now();
  const ErrorDistribution td = typical_density();
  const double dt = seconds_since(t0);
  // Closed-form pieces: 3/4 on the core, 1/8 per wing.
  const Density& d = td.density;
  const double core = (d.cdf(0.5) - d.cdf(-0.5)) * td.raw_mass;
  const double wing = (d.cdf(1.0) - d.cdf(0.5)) * td.raw_mass;
  const bool ok = std::abs(td.raw_mass - 1.0) <= 1e-9 && dt < 1.0;
  verdict(1, ok, "typical density integrates to 1 within 1e-9 in under 1 s");
  detail("integral %.17g, core %.15g (3/4), wing %.15g (1/8), %.3f s", td.raw_mass, core, wing, dt);
}

void criterion2() {
  const FloatFormat h = FloatFormat::half();
  const std::pair<const char*, DistributionSpec> inputs[] = {
      {"uniform(-10,10)", DistributionSpec::uniform(-10, 10)},
      {"uniform(0,1)", DistributionSpec::uniform(0, 1)},
      {"normal(0,2)", DistributionSpec::normal(0, 2)},
      {"normal(2,10)", DistributionSpec::normal(2, 10)}};
  bool ok = true;
  std::vector<std::string> lines;
  for (const auto& [name, spec] : inputs) {
    const auto t0 = clk::now();
    const ErrorDistribution ed = exact_error_density(build(spec), h);
    const double dist = sup_distance(ed.density, typical_pdf, {-1.0, 1.0});
    const double dt = seconds_since(t0);
    const bool this_ok = dist <= 0.05 && dt <= 600.0;
    ok = ok && this_ok;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-16s sup|exact - typical| = %.4f (<= 0.05: %s), %.2f s", name, dist,
                  this_ok ? "yes" : "no", dt);
    lines.push_back(buf);
  }
  verdict(2, ok, "exact vs typical error density at half precision, sup-norm <= 0.05 per input");
  for (const auto& l : lines) detail("%s", l.c_str());
}

void criterion3() {
  const FloatFormat h = FloatFormat::half();
  const Density u = build(DistributionSpec::uniform(0, 1));
  const ErrorDistribution ed = exact_error_density(u, h);
  const std::uint64_t n = 1000000;
  McOptions opt;
  opt.bins = 256;
  const McReport m = error_mc(u, h, n, 20190611, &ed.density, opt);
  std::uint64_t binned = 0;
  for (auto c : m.counts) binned += c;
  int outside = 0;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    const double p = ed.density.mass_between(m.edges[i], m.edges[i + 1]);
    const double emp = double(m.counts[i]) / double(binned);
    const double sd = std::sqrt(p * (1.0 - p) / double(binned));
    const double z = std::abs(emp - p) / sd;
    worst_z = std::max(worst_z, z);
    if (z > 4.0) ++outside;
  }
  verdict(3, outside == 0, "exact error density vs 10^6-sample Monte-Carlo, every bin within 4 sigma");
  detail("256 bins, %llu binned, %llu excluded, worst |z| = %.2f, bins outside band = %d, sup density gap %.4f",
         (unsigned long long)binned, (unsigned long long)m.excluded_count, worst_z, outside, m.sup_discrepancy);
}

void criterion4() {
  const AnalysisResult r = run_fixture("div_overflow");
  const double p = r.report.overflow_probability;
  const bool analytic_ok = std::abs(p - 7.75e-4) <= 5e-5;
  // Reduced-precision execution overflows iff x0 / x1 > 15.
  const double expect = std::pow(15.5 - 0.97 * 15.0, 2) / (2.0 * 15.0 * 5.5 * 1.03);
  const McReport& mc = *r.report.mc;
  const double n = double(mc.n_samples);
  const double band = 4.0 * std::sqrt(expect * (1.0 - expect) / n);
  const bool mc_ok = std::abs(mc.overflow_rate - expect) <= band;
  verdict(4, analytic_ok && mc_ok,
          "overflow benchmark: analytic 7.75e-4 +- 5e-5, and MC rate within 4 sigma of its expectation");
  detail("analytic overflow probability %.6g (target 7.75e-4 +- 5e-5: %s)", p, analytic_ok ? "yes" : "no");
  detail("MC overflow rate %.6g over %.0f samples; expectation %.6g +- %.3g (4 sigma): %s", mc.overflow_rate, n,
         expect, band, mc_ok ? "yes" : "no");
}

void criterion5() {
  const auto t0 = clk::now();
  const AnalysisResult r = run_fixture("sum8less");
  const double u = r.spec.format.u();
  const Interval bound{8.0 * std::pow(1.0 - u, 7), 16.0 * std::pow(1.0 + u, 7)};
  const Interval sup = r.report.support;
  const Interval c = range_at(r.report, 0.9999).range;
  const bool sup_ok = within(sup, bound, 1e-13);
  const bool range_ok = std::abs(c.lo - 9.0) <= 0.25 && std::abs(c.hi - 15.0) <= 0.25;
  const bool mc_ok = within(r.report.mc->empirical_range, sup);
  verdict(5, sup_ok && range_ok && mc_ok, "sum8less: support bound, 99.99% range near [9, 15], MC range inside support");
  detail("support [%.6f, %.6f] within [%.6f, %.6f]: %s", sup.lo, sup.hi, bound.lo, bound.hi, sup_ok ? "yes" : "no");
  detail("99.99%% range [%.4f, %.4f] (within 0.25 of [9, 15]: %s)", c.lo, c.hi, range_ok ? "yes" : "no");
  detail("MC range [%.6f, %.6f] inside support: %s; %.1f s", r.report.mc->empirical_range.lo,
         r.report.mc->empirical_range.hi, mc_ok ? "yes" : "no", seconds_since(t0));
}

void criterion6() {
  const auto t0 = clk::now();
  const AnalysisResult r = run_fixture("mul8less");
  const double u = r.spec.format.u();
  const double b = 6561.0 * std::pow(1.0 + u, 7);
  const Interval sup = r.report.support;
  const Interval c = range_at(r.report, 0.9999).range;
  const bool sup_ok = within(sup, {-b, b}, 1e-13);
  const double mag = std::max(std::abs(c.lo), std::abs(c.hi));
  const bool mag_ok = mag >= 150.0 && mag <= 260.0;
  const bool mc_ok = within(r.report.mc->empirical_range, sup);
  verdict(6, sup_ok && mag_ok && mc_ok,
          "mul8less: support bound, 99.99% range magnitude in [150, 260], MC range inside support");
  detail("support [%.4f, %.4f] within +-%.4f: %s", sup.lo, sup.hi, b, sup_ok ? "yes" : "no");
  detail("99.99%% range [%.3f, %.3f], magnitude %.3f (in [150, 260]: %s)", c.lo, c.hi, mag, mag_ok ? "yes" : "no");
  detail("MC range [%.3f, %.3f] inside support: %s; %.1f s", r.report.mc->empirical_range.lo,
         r.report.mc->empirical_range.hi, mc_ok ? "yes" : "no", seconds_since(t0));
}

double sup_error(const Density& d, const std::function<double(double)>& ref, double lo, double hi) {
  double worst = 0.0;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    worst = std::max(worst, std::abs(d(x) - ref(x)));
  }
  return worst;
}

void criterion7() {
  const auto t0 = clk::now();
  const Density u = build(DistributionSpec::uniform(0, 1));
  std::vector<std::pair<std::string, double>> errs;
  Density s = u;
  for (int n = 2; n <= 4; ++n) {
    s = add(s, u);
    errs.emplace_back("Irwin-Hall n=" + std::to_string(n),
                      sup_error(s, [n](double x) { return oracle::irwin_hall(n, x); }, 0.0, n));
  }
  errs.emplace_back("U(0,1)*U(0,1) = -ln t on [1e-6, 1]", sup_error(mul(u, u), oracle::product_uniform01, 1e-6, 1.0));
  const Density v = build(DistributionSpec::uniform(1, 2));
  errs.emplace_back("U(1,2)/U(1,2)", sup_error(div(v, v), oracle::ratio_uniform12, 0.5, 2.0));
  const double dt = seconds_since(t0);
  bool ok = dt < 10.0;
  for (const auto& [name, e] : errs) ok = ok && e <= 1e-6;
  verdict(7, ok, "density arithmetic vs closed forms, sup-norm <= 1e-6 each, under 10 s total");
  for (const auto& [name, e] : errs) detail("%-36s %.3g", name.c_str(), e);
  detail("%.3f s", dt);
}

void criterion8() {
  std::uint64_t checked = 0, bad_identity = 0, bad_range = 0;
  for (int p : {1, 3, 5}) {
    const FloatFormat f(p, -6, 7);
    const double uu = f.u();
    for (const auto& z : enumerate_finite(f)) {
      ++checked;
      const auto ri = rounding_interval(z, f);
      auto tr = t_range(z, f);
      const double zv = z.value(), zu = std::abs(zv) * uu;
      const double lo_end = z.sign() ? ri.hi : ri.lo, hi_end = z.sign() ? ri.lo : ri.hi;
      const double t_lo = (1.0 - zv / lo_end) / uu, t_hi = (1.0 - zv / hi_end) / uu;
      if (std::abs(tr.t_min - std::max(-1.0, t_lo)) > 1e-13 || std::abs(tr.t_max - std::min(1.0, t_hi)) > 1e-13)
        ++bad_range;
      if (z.exponent() == f.e_min() && z.mantissa() == 0) tr.t_min = t_lo;  // unclipped end
      const double rhs = (ri.hi - ri.lo) * (1.0 - tr.t_max * uu) * (1.0 - tr.t_min * uu) / (tr.t_max - tr.t_min);
      const double viaC = coefficient_C(z.exponent(), z.mantissa(), f) * (ri.hi - ri.lo);
      if (std::abs(rhs - zu) > 1e-14 * zu || std::abs(viaC - zu) > 1e-14 * zu) ++bad_identity;
    }
  }
  verdict(8, bad_identity == 0 && bad_range == 0,
          "|z| u identity and t-range / rounding-interval consistency, exhaustive for p in {1, 3, 5}");
  detail("%llu representables, identity violations %llu, t-range mismatches %llu", (unsigned long long)checked,
         (unsigned long long)bad_identity, (unsigned long long)bad_range);
}

void criterion9() {
  const AnalysisResult a = run_fixture("div_overflow", 1);
  const AnalysisResult b = run_fixture("div_overflow", 4);
  const std::string ra = dump_json(report_json(a)), rb = dump_json(report_json(b));
  verdict(9, ra == rb, "bench report bytes identical across two runs with the same seed");
  detail("div_overflow, 1 vs 4 worker threads, %zu bytes each", ra.size());
}

}  // namespace

int main() {
  const std::function<void()> all[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                        criterion6, criterion7, criterion8, criterion9};
  for (std::size_t i = 0; i < std::size(all); ++i) {
    try {
      all[i]();
    } catch (const std::exception& e) {
      verdict(int(i + 1), false, std::string("raised: ") + e.what());
    }
  }
  std::printf("%d of 9 criteria failed\n", failures);
  return failures ? 1 : 0;
}
