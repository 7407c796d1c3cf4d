#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "probfp/analysis.hpp"
#include "probfp/diagnostics.hpp"
#include "probfp/errordist.hpp"
#include "probfp/errors.hpp"
#include "probfp/pipeline.hpp"

namespace fs = std::filesystem;
using namespace probfp;
using nlohmann::json;

namespace {

// Flag values that the library rejects are spec errors.
template <class F>
auto wrap(F f) -> decltype(f()) {
  try {
    return f();
  } catch (const invalid_argument& e) {
    throw spec_error(e.what());
  }
}

struct Overrides {
  std::string format;
  int emin = 0, emax = 0, p = 0;
  std::string mode;
  std::vector<double> confidence;
  std::uint64_t mc_n = 0, seed = 0;
  std::string out = ".";
  CLI::Option *o_format = nullptr, *o_emin = nullptr, *o_emax = nullptr, *o_p = nullptr, *o_mode = nullptr,
              *o_conf = nullptr, *o_mc_n = nullptr, *o_seed = nullptr;

  void attach(CLI::App* app) {
    o_format = app->add_option("--format", format, "exponent_bits,mantissa_bits");
    o_emin = app->add_option("--emin", emin, "smallest exponent");
    o_emax = app->add_option("--emax", emax, "largest exponent");
    o_p = app->add_option("--p", p, "mantissa bits");
    o_mode = app->add_option("--mode", mode, "exact | typical | typical_finite_p | none");
    o_conf = app->add_option("--confidence", confidence, "confidence levels")->delimiter(',');
    o_mc_n = app->add_option("--mc-n", mc_n, "Monte-Carlo sample count");
    o_seed = app->add_option("--seed", seed, "Monte-Carlo seed");
    app->add_option("--out", out, "output directory");
  }

  void apply(AnalysisSpec& s) const {
    const bool by_range = o_emin->count() || o_emax->count() || o_p->count();
    if (o_format->count() && by_range) throw spec_error("--format cannot be combined with --emin/--emax/--p");
    if (o_format->count()) {
      int e = 0, m = 0;
      char tail = 0;
      if (std::sscanf(format.c_str(), "%d,%d%c", &e, &m, &tail) != 2)
        throw spec_error("--format expects exponent_bits,mantissa_bits");
      s.format = wrap([&] { return FloatFormat::from_bits(e, m); });
    } else if (by_range) {
      if (!(o_emin->count() && o_emax->count() && o_p->count()))
        throw spec_error("--emin, --emax and --p must be given together");
      s.format = wrap([&] { return FloatFormat(p, emin, emax); });
    }
    if (o_mode->count()) s.error_mode = wrap([&] { return error_mode_from_string(mode); });
    if (o_conf->count()) {
      for (double c : confidence)
        if (!(c > 0.0 && c <= 1.0)) throw spec_error("--confidence levels must lie in (0, 1]");
      s.levels = confidence;
    }
    if (o_mc_n->count()) {
      if (mc_n < 1) throw spec_error("--mc-n must be at least 1");
      s.mc.n = mc_n;
      s.mc.enabled = true;
    }
    if (o_seed->count()) {
      s.mc.seed = seed;
      s.mc.enabled = true;
    }
  }

};

fs::path out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw spec_error("cannot create output directory '" + out + "': " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw spec_error("cannot write '" + path.string() + "'");
  os << text;
}

void print_warnings(const std::vector<std::string>& ws) {
  for (const auto& w : ws) std::cerr << "warning: " << w << "\n";
}

std::string fmt_g(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fmt_iv(Interval iv) { return "[" + fmt_g(iv.lo) + ", " + fmt_g(iv.hi) + "]"; }

// report.json, output_density.csv and, when MC ran, histogram.csv.
AnalysisResult analyze_to(const AnalysisSpec& spec, const fs::path& dir) {
  AnalysisResult r = run_analysis(spec);
  print_warnings(r.warnings);
  write_file(dir / "report.json", dump_json(report_json(r)));
  if (const Density* d = std::get_if<Density>(&r.output)) {
    std::ostringstream os;
    write_csv(os, *d);
    write_file(dir / "output_density.csv", os.str());
  }
  if (r.report.mc) {
    std::ostringstream os;
    write_histogram_csv(os, *r.report.mc);
    write_file(dir / "histogram.csv", os.str());
  }
  return r;
}

void print_summary(const AnalysisResult& r) {
  const AnalysisReport& a = r.report;
  std::cout << "term:                 " << r.canonical_term << "\n"
            << "format:               " << r.spec.format.describe() << "\n"
            << "support:              " << fmt_iv(a.support) << "\n";
  for (const auto& c : a.confidence_ranges)
    std::cout << "range @ " << fmt_g(c.level * 100, 8) << "%:" << std::string(12 - std::min<std::size_t>(12, fmt_g(c.level * 100, 8).size()), ' ')
              << fmt_iv(c.range) << "\n";
  std::cout << "overflow probability: " << fmt_g(a.overflow_probability) << "\n"
            << "excluded mass:        " << fmt_g(a.excluded_mass) << "\n";
  if (a.mc)
    std::cout << "mc samples:           " << a.mc->n_samples << " (seed " << a.mc->seed << ")\n"
              << "mc overflow rate:     " << fmt_g(a.mc->overflow_rate) << "\n"
              << "mc empirical range:   " << fmt_iv(a.mc->empirical_range) << "\n"
              << "mc sup discrepancy:   " << fmt_g(a.mc->sup_discrepancy) << "\n";
}

int cmd_analyze(const std::string& path, const Overrides& ov, bool force_mc) {
  AnalysisSpec spec = load_spec(path);
  ov.apply(spec);
  if (force_mc) spec.mc.enabled = true;
  print_summary(analyze_to(spec, out_dir(ov.out)));
  return 0;
}

int cmd_error_dist(const std::string& path, const Overrides& ov, bool compare_typical) {
  AnalysisSpec spec = load_spec(path);
  ov.apply(spec);
  if (spec.inputs.size() != 1) throw spec_error("error-dist needs exactly one input distribution");
  if (spec.error_mode == ErrorMode::none) throw spec_error("error-dist needs a mode other than 'none'");
  const auto& [name, dist] = *spec.inputs.begin();
  if (dist.kind == DistributionSpec::Kind::constant) throw spec_error("input '" + name + "' is a constant");
  const fs::path dir = out_dir(ov.out);

  diagnostics::drain();
  const Density f = build(dist);
  const ErrorDistribution ed = error_distribution(spec.error_mode, f, spec.format);
  json head = {{"input", {{"name", name}, {"distribution", to_json(dist)}}},
               {"format", to_json(spec.format)},
               {"mode", to_string(ed.mode)},
               {"p", spec.format.p()},
               {"e_min", spec.format.e_min()},
               {"e_max", spec.format.e_max()},
               {"excluded_mass", ed.excluded.total()},
               {"raw_mass", ed.raw_mass},
               {"excluded",
                {{"zero", ed.excluded.zero},
                 {"overflow", ed.excluded.overflow},
                 {"large_error", ed.excluded.large_error},
                 {"total", ed.excluded.total()}}},
               {"assumption1_mass", ed.assumption1_mass},
               {"pieces", ed.density.size()},
               {"density_at_zero", ed.density(0.0)}};
  std::cout << "mode:             " << to_string(ed.mode) << "\n"
            << "format:           " << spec.format.describe() << "\n"
            << "d(0):             " << fmt_g(ed.density(0.0), 10) << "\n"
            << "excluded mass:    " << fmt_g(ed.excluded.total()) << "\n";
  if (compare_typical) {
    const double dist_typ = sup_distance(ed.density, typical_pdf, {-1.0, 1.0});
    head["sup_distance_to_typical"] = dist_typ;
    std::cout << "sup |d - d_typ|:  " << fmt_g(dist_typ) << "\n";
  }
  if (spec.mc.enabled) {
    const std::uint64_t seed = spec.mc.seed.value_or(std::random_device{}());
    const McReport mc = error_mc(f, spec.format, spec.mc.n, seed, &ed.density);
    head["mc"] = to_json(mc);
    std::ostringstream os;
    write_histogram_csv(os, mc);
    write_file(dir / "error_histogram.csv", os.str());
    std::cout << "mc sup discrepancy: " << fmt_g(mc.sup_discrepancy) << " (n " << mc.n_samples << ", seed " << seed
              << ")\n";
  }
  head["warnings"] = diagnostics::drain();
  print_warnings(head["warnings"].get<std::vector<std::string>>());
  std::ostringstream csv;
  write_csv(csv, ed.density);
  write_file(dir / "error_density.csv", csv.str());
  write_file(dir / "error_density.json", dump_json(head));
  return 0;
}

std::string cell(const json& v) {
  if (v.is_number()) return fmt_g(v.get<double>());
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return fmt_iv({v[0].get<double>(), v[1].get<double>()});
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

int cmd_bench(const std::string& name, const std::string& bench_dir, const Overrides& ov) {
  static const std::vector<std::string> known{"div_overflow", "sum8less", "mul8less"};
  if (std::find(known.begin(), known.end(), name) == known.end())
    throw spec_error("unknown benchmark '" + name + "' (expected div_overflow, sum8less or mul8less)");
  AnalysisSpec spec = load_spec((fs::path(bench_dir) / (name + ".json")).string());
  ov.apply(spec);
  spec.mc.enabled = true;
  const fs::path dir = out_dir(ov.out);
  const AnalysisResult r = analyze_to(spec, dir);
  const AnalysisReport& a = r.report;

  std::ostringstream t;
  t << "# " << name << "\n\n"
    << "term: `" << r.canonical_term << "`, format: " << spec.format.describe() << "\n\n"
    << "| quantity | value |\n|---|---|\n"
    << "| support | " << fmt_iv(a.support) << " |\n";
  for (const auto& c : a.confidence_ranges)
    t << "| " << fmt_g(c.level * 100, 8) << "% range | " << fmt_iv(c.range) << " |\n";
  t << "| overflow probability | " << fmt_g(a.overflow_probability) << " |\n";
  if (a.mc) {
    const double n = double(a.mc->n_samples);
    const double band = 4.0 * std::sqrt(a.overflow_probability * (1.0 - a.overflow_probability) / n);
    t << "| MC overflow rate | " << fmt_g(a.mc->overflow_rate) << " (4-sigma band around analytic: +-" << fmt_g(band)
      << ") |\n"
      << "| MC empirical range | " << fmt_iv(a.mc->empirical_range) << " |\n"
      << "| MC sup discrepancy | " << fmt_g(a.mc->sup_discrepancy) << " |\n"
      << "| MC samples / seed | " << a.mc->n_samples << " / " << a.mc->seed << " |\n";
  }
  if (!spec.reference.empty()) {
    t << "\n| reference | recorded |\n|---|---|\n";
    for (const auto& [k, v] : spec.reference.items()) t << "| " << k << " | " << cell(v) << " |\n";
  }
  write_file(dir / "comparison.md", t.str());
  std::cout << t.str();
  return 0;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const spec_error*>(&e) || dynamic_cast<const syntax_error*>(&e) ||
      dynamic_cast<const unbound_variable*>(&e) || dynamic_cast<const invalid_argument*>(&e))
    return 2;
  if (dynamic_cast<const error*>(&e)) return 3;  // singular division, feasibility, tree shape, ...
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic rounding-error and range analysis for reduced-precision arithmetic"};
  app.require_subcommand(1);

  Overrides ov_an, ov_ed, ov_mc, ov_b;
  std::string spec_an, spec_ed, spec_mc, bench_name;
  std::string bench_dir = PROBFP_BENCH_DIR;
  bool compare = false;

  auto* an = app.add_subcommand("analyze", "analytic range analysis of a spec");
  an->add_option("spec", spec_an, "spec file (JSON)")->required();
  ov_an.attach(an);

  auto* ed = app.add_subcommand("error-dist", "relative rounding-error density of one input");
  ed->add_option("spec", spec_ed, "spec file (JSON)")->required();
  ed->add_flag("--compare-typical", compare, "report the sup-norm distance to the typical density");
  ov_ed.attach(ed);

  auto* mc = app.add_subcommand("mc", "analysis plus reduced-precision Monte-Carlo");
  mc->add_option("spec", spec_mc, "spec file (JSON)")->required();
  ov_mc.attach(mc);

  auto* bench = app.add_subcommand("bench", "run a bundled benchmark fixture");
  bench->add_option("name", bench_name, "div_overflow | sum8less | mul8less")->required();
  bench->add_option("--bench-dir", bench_dir, "fixture directory");
  ov_b.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*an) return cmd_analyze(spec_an, ov_an, false);
    if (*ed) return cmd_error_dist(spec_ed, ov_ed, compare);
    if (*mc) return cmd_analyze(spec_mc, ov_mc, true);
    return cmd_bench(bench_name, bench_dir, ov_b);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
