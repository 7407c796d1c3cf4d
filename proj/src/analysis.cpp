#include "probfp/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include "probfp/errors.hpp"
#include "probfp/random.hpp"

namespace probfp {

Interval overflow_window(const FloatFormat& fmt) { return {-fmt.overflow_threshold(), fmt.overflow_threshold()}; }

namespace {

std::vector<double> checked_levels(std::vector<double> levels) {
  for (double c : levels)
    if (!(c > 0.0 && c <= 1.0)) throw invalid_argument("confidence levels must lie in (0, 1]");
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

// Runs fn(begin, end) over fixed blocks; the partition does not depend on
// the thread count, so results written per index are schedule independent.
template <class Fn>
void run_blocks(std::uint64_t n, std::size_t block, unsigned threads, Fn fn) {
  const std::uint64_t nblocks = (n + block - 1) / block;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<std::uint64_t>(threads, nblocks));
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t b; (b = next.fetch_add(1)) < nblocks;) fn(b * block, std::min(n, (b + 1) * block));
  };
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

void fill_histogram(McReport& r, const std::vector<double>& vals, Interval range, int bins,
                    const Density* analytic) {
  if (bins < 1) throw invalid_argument("histogram needs at least one bin");
  double lo = range.lo, hi = range.hi;
  if (!(hi > lo)) {
    const double pad = std::max(1e-300, std::abs(lo) * 1e-12);
    lo -= pad;
    hi += pad;
  }
  r.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) r.edges[i] = lo + (hi - lo) * (double(i) / bins);
  r.edges.back() = hi;
  r.counts.assign(bins, 0);
  double emin = std::numeric_limits<double>::infinity(), emax = -emin;
  std::uint64_t binned = 0;
  for (double v : vals) {
    if (std::isnan(v)) continue;
    emin = std::min(emin, v);
    emax = std::max(emax, v);
    int b = int(std::floor((v - lo) / (hi - lo) * bins));
    b = std::clamp(b, 0, bins - 1);
    ++r.counts[b];
    ++binned;
  }
  r.empirical_range = binned ? Interval{emin, emax} : Interval{0.0, 0.0};
  r.sup_discrepancy = 0.0;
  if (analytic && binned) {
    for (int i = 0; i < bins; ++i) {
      const double w = r.edges[i + 1] - r.edges[i];
      const double emp = double(r.counts[i]) / (double(binned) * w);
      const double ana = analytic->mass_between(r.edges[i], r.edges[i + 1]) / w;
      r.sup_discrepancy = std::max(r.sup_discrepancy, std::abs(emp - ana));
    }
  }
}

struct Evaluator {
  const FloatFormat& fmt;
  const std::map<std::string, double>& sample;
  const std::set<std::string>& constants;  // names bound to exact constants
  // Returns {value, constant-only}; constant-only subtrees are not rounded,
  // matching the analytic interpreter.
  std::pair<double, bool> operator()(const Term& t) const {
    switch (t.kind) {
      case Term::Kind::literal: return {t.literal, true};
      case Term::Kind::var: return {sample.at(t.name), constants.count(t.name) > 0};
      case Term::Kind::binop: break;
    }
    const auto [a, ac] = (*this)(*t.left);
    const auto [b, bc] = (*this)(*t.right);
    if (ac && bc) {
      switch (t.op) {
        case Op::add: return {a + b, true};
        case Op::sub: return {a - b, true};
        case Op::mul: return {a * b, true};
        case Op::div: return {a / b, true};
      }
    }
    return {emulate_value(a, b, t.op, fmt), false};
  }
};

}  // namespace

AnalysisReport range_report(const Density& d, const FloatFormat& fmt, std::vector<double> levels) {
  levels = checked_levels(std::move(levels));
  AnalysisReport r;
  r.support = d.support();
  Interval prev{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double c : levels) {
    Interval iv = c >= 1.0 ? r.support : Interval{d.quantile(0.5 * (1.0 - c)), d.quantile(1.0 - 0.5 * (1.0 - c))};
    // Enforce exact nesting against quantile round-off.
    iv.lo = std::clamp(std::min(iv.lo, prev.lo), r.support.lo, r.support.hi);
    iv.hi = std::clamp(std::max(iv.hi, prev.hi), r.support.lo, r.support.hi);
    r.confidence_ranges.push_back({c, iv});
    prev = iv;
  }
  r.overflow_window = overflow_window(fmt);
  r.overflow_probability = mass_outside(d, r.overflow_window);
  return r;
}

AnalysisReport range_report(double c, const FloatFormat& fmt, std::vector<double> levels) {
  levels = checked_levels(std::move(levels));
  AnalysisReport r;
  r.support = {c, c};
  for (double l : levels) r.confidence_ranges.push_back({l, r.support});
  r.overflow_window = overflow_window(fmt);
  r.overflow_probability = r.overflow_window.contains(c) ? 0.0 : 1.0;
  return r;
}

McReport monte_carlo(const Term& t, const ProbContext& ctx, const FloatFormat& fmt, std::uint64_t n,
                     std::uint64_t seed, const Density* analytic, const McOptions& opts) {
  if (n < 1) throw invalid_argument("Monte-Carlo needs n >= 1");
  const TreeCheck tc = check_tree(t);
  if (!tc.ok) throw tree_violation("term is not tree-shaped: variable '" + tc.variable + "' repeats");
  for (const auto& v : t.vars)
    if (!ctx.bindings.count(v)) throw unbound_variable(v);

  // One stream per bound name, in name order.
  std::vector<std::pair<std::string, const Value*>> inputs;
  for (const auto& [name, v] : ctx.bindings)
    if (t.vars.count(name)) inputs.emplace_back(name, &v);

  std::set<std::string> constants;
  for (const auto& [name, v] : inputs)
    if (std::holds_alternative<double>(*v)) constants.insert(name);

  std::vector<double> results(n);
  run_blocks(n, opts.block_size, opts.threads, [&](std::uint64_t begin, std::uint64_t end) {
    std::map<std::string, double> sample;
    std::vector<CounterRng> rngs;
    for (std::size_t i = 0; i < inputs.size(); ++i) rngs.emplace_back(seed, i);
    Evaluator ev{fmt, sample, constants};
    for (std::uint64_t s = begin; s < end; ++s) {
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Value& v = *inputs[i].second;
        double x = std::holds_alternative<double>(v) ? std::get<double>(v)
                                                     : std::get<Density>(v).quantile(rngs[i].uniform(s));
        if (ctx.quantize_inputs) x = round_value(x, fmt);
        sample[inputs[i].first] = x;
      }
      results[s] = ev(t).first;
    }
  });

  McReport r;
  r.n_samples = n;
  r.seed = seed;
  std::vector<double> finite;
  finite.reserve(n);
  for (double v : results) {
    if (std::isfinite(v))
      finite.push_back(v);
    else
      ++r.overflow_count;
  }
  r.overflow_rate = double(r.overflow_count) / double(n);
  Interval range{0.0, 0.0};
  if (analytic) {
    range = analytic->support();
  } else if (!finite.empty()) {
    auto [mn, mx] = std::minmax_element(finite.begin(), finite.end());
    range = {*mn, *mx};
  }
  fill_histogram(r, finite, range, opts.bins, analytic);
  return r;
}

McReport error_mc(const Density& input, const FloatFormat& fmt, std::uint64_t n, std::uint64_t seed,
                  const Density* analytic, const McOptions& opts) {
  if (n < 1) throw invalid_argument("Monte-Carlo needs n >= 1");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> ts(n);
  run_blocks(n, opts.block_size, opts.threads, [&](std::uint64_t begin, std::uint64_t end) {
    const CounterRng rng(seed, 0);
    for (std::uint64_t s = begin; s < end; ++s) {
      const double x = input.quantile(rng.uniform(s));
      const double r = round_value(x, fmt);
      if (std::isinf(r)) {
        ts[s] = inf;
        continue;
      }
      if (r == 0.0) {
        ts[s] = nan;
        continue;
      }
      const double t = (x - r) / (x * fmt.u());
      ts[s] = std::abs(t) <= 1.0 ? t : nan;
    }
  });
  McReport r;
  r.n_samples = n;
  r.seed = seed;
  std::vector<double> kept;
  kept.reserve(n);
  for (double t : ts) {
    if (std::isinf(t))
      ++r.overflow_count;
    else if (std::isnan(t))
      ++r.excluded_count;
    else
      kept.push_back(t);
  }
  r.overflow_rate = double(r.overflow_count) / double(n);
  fill_histogram(r, kept, {-1.0, 1.0}, opts.bins, analytic);
  return r;
}

double sup_distance(const Density& a, const std::function<double(double)>& b, Interval on, int grid) {
  double worst = 0.0;
  auto probe = [&](double x) {
    if (x >= on.lo && x <= on.hi) worst = std::max(worst, std::abs(a(x) - b(x)));
  };
  for (int i = 0; i < grid; ++i) probe(on.lo + on.width() * (double(i) / (grid - 1)));
  for (double x : a.breakpoints()) {
    const double h = 1e-9 * std::max(1.0, std::abs(x));
    probe(x - h);
    probe(x + h);
  }
  return worst;
}

}  // namespace probfp
