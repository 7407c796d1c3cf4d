#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "probfp/diagnostics.hpp"
#include "probfp/errors.hpp"
#include "probfp/lang.hpp"
#include "probfp/pipeline.hpp"

namespace probfp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw spec_error(where + ": " + what);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) fail(where, "unknown field '" + k + "'");
}

const json& need(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

std::vector<double> num_array(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

template <class F>
auto guarded(const std::string& where, F f) {
  try {
    return f();
  } catch (const spec_error&) {
    throw;
  } catch (const error& e) {
    fail(where, e.what());
  }
}

void dump(std::ostringstream& os, const json& j, int indent) {
  const std::string pad(indent, ' '), inner(indent + 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << inner << json(k).dump() << ": ";
        dump(os, v, indent + 2);
      }
      os << "\n" << pad << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Short numeric arrays stay on one line.
      const bool flat = j.size() <= 4 && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      os << "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",";
        os << (flat ? (i ? " " : "") : "\n" + inner);
        dump(os, j[i], indent + 2);
      }
      if (!flat) os << "\n" << pad;
      os << "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf;
      return;
    }
    default: os << j.dump();
  }
}

json interval_json(Interval iv) { return json::array({iv.lo, iv.hi}); }

}  // namespace

namespace {

DistributionSpec distribution_impl(const json& j) {
  const std::string where = "distribution";
  if (!j.is_object()) fail(where, "expected an object");
  const json& kind = need(j, where, "kind");
  if (!kind.is_string()) fail(where + ".kind", "expected a string");
  const std::string k = kind.get<std::string>();
  DistributionSpec d;
  if (k == "uniform") {
    allow_keys(j, where, {"kind", "a", "b"});
    d = DistributionSpec::uniform(num(need(j, where, "a"), where + ".a"), num(need(j, where, "b"), where + ".b"));
  } else if (k == "normal") {
    allow_keys(j, where, {"kind", "mu", "sigma"});
    d = DistributionSpec::normal(num(need(j, where, "mu"), where + ".mu"),
                                 num(need(j, where, "sigma"), where + ".sigma"));
  } else if (k == "constant") {
    allow_keys(j, where, {"kind", "value"});
    d = DistributionSpec::constant(num(need(j, where, "value"), where + ".value"));
  } else if (k == "custom") {
    allow_keys(j, where, {"kind", "xs", "pdf"});
    d = DistributionSpec::custom(num_array(need(j, where, "xs"), where + ".xs"),
                                 num_array(need(j, where, "pdf"), where + ".pdf"));
  } else {
    fail(where + ".kind", "unknown kind '" + k + "'");
  }
  d.validate();
  return d;
}

}  // namespace

DistributionSpec distribution_from_json(const json& j) {
  return guarded("distribution", [&] { return distribution_impl(j); });
}

json to_json(const DistributionSpec& d) {
  switch (d.kind) {
    case DistributionSpec::Kind::uniform: return {{"kind", "uniform"}, {"a", d.a}, {"b", d.b}};
    case DistributionSpec::Kind::normal: return {{"kind", "normal"}, {"mu", d.mu}, {"sigma", d.sigma}};
    case DistributionSpec::Kind::constant: return {{"kind", "constant"}, {"value", d.value}};
    case DistributionSpec::Kind::custom: return {{"kind", "custom"}, {"xs", d.xs}, {"pdf", d.pdf}};
  }
  return {};
}

FloatFormat format_from_json(const json& j) {
  const std::string where = "format";
  if (!j.is_object()) fail(where, "expected an object");
  const int p = int(integer(need(j, where, "mantissa_bits"), where + ".mantissa_bits"));
  return guarded(where, [&] {
    if (j.contains("exponent_bits")) {
      allow_keys(j, where, {"exponent_bits", "mantissa_bits"});
      return FloatFormat::from_bits(int(integer(j["exponent_bits"], where + ".exponent_bits")), p);
    }
    allow_keys(j, where, {"mantissa_bits", "e_min", "e_max"});
    return FloatFormat(p, int(integer(need(j, where, "e_min"), where + ".e_min")),
                       int(integer(need(j, where, "e_max"), where + ".e_max")));
  });
}

json to_json(const FloatFormat& f) { return {{"mantissa_bits", f.p()}, {"e_min", f.e_min()}, {"e_max", f.e_max()}}; }

AnalysisSpec spec_from_json(const json& j) {
  const std::string where = "spec";
  allow_keys(j, where,
             {"term", "inputs", "format", "error_mode", "quantize_inputs", "confidence", "mc", "reference"});
  AnalysisSpec s;
  const json& term = need(j, where, "term");
  if (!term.is_string()) fail("spec.term", "expected a string");
  s.term = term.get<std::string>();

  const json& inputs = need(j, where, "inputs");
  if (!inputs.is_object()) fail("spec.inputs", "expected an object");
  for (const auto& [name, d] : inputs.items()) {
    try {
      s.inputs.emplace(name, distribution_from_json(d));
    } catch (const spec_error& e) {
      throw spec_error("spec.inputs." + name + ": " + e.what());
    }
  }
  if (j.contains("format")) s.format = format_from_json(j["format"]);
  if (j.contains("error_mode")) {
    if (!j["error_mode"].is_string()) fail("spec.error_mode", "expected a string");
    s.error_mode = guarded("spec.error_mode", [&] { return error_mode_from_string(j["error_mode"].get<std::string>()); });
  }
  if (j.contains("quantize_inputs")) {
    if (!j["quantize_inputs"].is_boolean()) fail("spec.quantize_inputs", "expected a boolean");
    s.quantize_inputs = j["quantize_inputs"].get<bool>();
  }
  if (j.contains("confidence")) {
    s.levels = num_array(j["confidence"], "spec.confidence");
    for (double c : s.levels)
      if (!(c > 0.0 && c <= 1.0)) fail("spec.confidence", "levels must lie in (0, 1]");
  }
  if (j.contains("mc")) {
    const json& m = j["mc"];
    allow_keys(m, "spec.mc", {"enabled", "n", "seed"});
    if (m.contains("enabled")) {
      if (!m["enabled"].is_boolean()) fail("spec.mc.enabled", "expected a boolean");
      s.mc.enabled = m["enabled"].get<bool>();
    }
    if (m.contains("n")) {
      const auto n = integer(m["n"], "spec.mc.n");
      if (n < 1) fail("spec.mc.n", "must be at least 1");
      s.mc.n = std::uint64_t(n);
    }
    if (m.contains("seed") && !m["seed"].is_null()) {
      const json& sd = m["seed"];
      if (!sd.is_number_integer() || (!sd.is_number_unsigned() && sd.get<std::int64_t>() < 0))
        fail("spec.mc.seed", "expected a non-negative integer");
      s.mc.seed = m["seed"].get<std::uint64_t>();
    }
  }
  if (j.contains("reference")) {
    if (!j["reference"].is_object()) fail("spec.reference", "expected an object");
    s.reference = j["reference"];
  }
  return s;
}

json to_json(const AnalysisSpec& s) {
  json inputs = json::object();
  for (const auto& [name, d] : s.inputs) inputs[name] = to_json(d);
  json mc = {{"enabled", s.mc.enabled}, {"n", s.mc.n}};
  mc["seed"] = s.mc.seed ? json(*s.mc.seed) : json(nullptr);
  return {{"term", s.term},
          {"inputs", inputs},
          {"format", to_json(s.format)},
          {"error_mode", to_string(s.error_mode)},
          {"quantize_inputs", s.quantize_inputs},
          {"confidence", s.levels},
          {"mc", mc},
          {"reference", s.reference}};
}

AnalysisSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw spec_error("cannot read spec file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw spec_error(path + ": invalid JSON: " + e.what());
  }
  return spec_from_json(j);
}

AnalysisResult run_analysis(const AnalysisSpec& spec, const RunOptions& opts) {
  diagnostics::drain();
  AnalysisResult r;
  r.spec = spec;
  const TermPtr term = parse_term(spec.term);
  r.canonical_term = to_string(*term);

  ProbContext ctx;
  ctx.quantize_inputs = spec.quantize_inputs;
  ctx.error_mode = spec.error_mode;
  for (const auto& [name, d] : spec.inputs) {
    if (!term->vars.count(name)) continue;
    if (d.kind == DistributionSpec::Kind::constant)
      ctx.bindings.emplace(name, d.value);
    else
      ctx.bindings.emplace(name, build(d, ctx.build));
  }

  const FloatFormat& fmt = spec.format;
  Interpretation it = interpret(*term, ctx, fmt);
  r.output = it.value;
  r.rounded_ops = it.rounded_ops;
  const Density* analytic = std::get_if<Density>(&r.output);
  r.report = analytic ? range_report(*analytic, fmt, spec.levels) : range_report(std::get<double>(r.output), fmt, spec.levels);
  r.report.excluded_mass = it.excluded_mass;

  if (spec.mc.enabled) {
    if (!r.spec.mc.seed) r.spec.mc.seed = (std::uint64_t(std::random_device{}()) << 32) ^ std::random_device{}();
    r.report.mc = monte_carlo(*term, ctx, fmt, spec.mc.n, *r.spec.mc.seed, analytic, opts.mc);
  }
  r.warnings = diagnostics::drain();
  return r;
}

json to_json(const McReport& m) {
  return {{"n_samples", m.n_samples},
          {"seed", m.seed},
          {"empirical_range", interval_json(m.empirical_range)},
          {"overflow_rate", m.overflow_rate},
          {"overflow_count", m.overflow_count},
          {"excluded_count", m.excluded_count},
          {"sup_discrepancy", m.sup_discrepancy},
          {"histogram", {{"edges", m.edges}, {"counts", m.counts}}}};
}

json report_json(const AnalysisResult& r) {
  const AnalysisReport& a = r.report;
  json ranges = json::array();
  for (const auto& c : a.confidence_ranges) ranges.push_back({{"level", c.level}, {"range", interval_json(c.range)}});
  json fmt = to_json(r.spec.format);
  fmt["u"] = r.spec.format.u();
  fmt["largest"] = r.spec.format.largest();
  fmt["smallest"] = r.spec.format.smallest();
  json out = {{"term", r.canonical_term},
              {"format", fmt},
              {"error_mode", to_string(r.spec.error_mode)},
              {"quantize_inputs", r.spec.quantize_inputs},
              {"rounded_ops", r.rounded_ops},
              {"support", interval_json(a.support)},
              {"confidence_ranges", ranges},
              {"overflow_window", interval_json(a.overflow_window)},
              {"overflow_probability", a.overflow_probability},
              {"excluded_mass", a.excluded_mass},
              {"warnings", r.warnings},
              {"spec", to_json(r.spec)}};
  if (const Density* d = std::get_if<Density>(&r.output)) {
    out["output"] = {{"kind", "density"}, {"pieces", d->size()}, {"cap_hit", d->cap_hit()}};
  } else {
    out["output"] = {{"kind", "constant"}, {"value", std::get<double>(r.output)}};
  }
  out["mc"] = a.mc ? to_json(*a.mc) : json(nullptr);
  return out;
}

std::string dump_json(const json& j) {
  std::ostringstream os;
  dump(os, j, 0);
  os << "\n";
  return os.str();
}

void write_histogram_csv(std::ostream& os, const McReport& m) {
  os << "bin_lo,bin_hi,count\n";
  char buf[96];
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", m.edges[i], m.edges[i + 1]);
    os << buf << m.counts[i] << "\n";
  }
}

}  // namespace probfp
