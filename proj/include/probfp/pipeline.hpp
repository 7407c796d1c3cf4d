#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "probfp/analysis.hpp"
#include "probfp/density.hpp"
#include "probfp/errordist.hpp"
#include "probfp/minifloat.hpp"

namespace probfp {

struct McSettings {
  bool enabled = false;
  std::uint64_t n = 1000000;
  std::optional<std::uint64_t> seed;  // generated at run time when absent
  bool operator==(const McSettings&) const = default;
};

struct AnalysisSpec {
  std::string term;
  std::map<std::string, DistributionSpec> inputs;
  FloatFormat format = FloatFormat::half();
  ErrorMode error_mode = ErrorMode::exact;
  bool quantize_inputs = false;
  std::vector<double> levels = default_levels();
  McSettings mc;
  // Recorded reference figures; carried through untouched.
  nlohmann::json reference = nlohmann::json::object();
  bool operator==(const AnalysisSpec&) const = default;
};

// Both throw spec_error with a path to the offending field.
DistributionSpec distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistributionSpec& d);
FloatFormat format_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FloatFormat& f);

AnalysisSpec spec_from_json(const nlohmann::json& j);
// Canonical form: format as {mantissa_bits, e_min, e_max}, every field present.
nlohmann::json to_json(const AnalysisSpec& s);
AnalysisSpec load_spec(const std::string& path);

struct AnalysisResult {
  AnalysisSpec spec;  // with the seed filled in when MC ran
  std::string canonical_term;
  Value output;
  AnalysisReport report;
  int rounded_ops = 0;
  std::vector<std::string> warnings;
};

struct RunOptions {
  McOptions mc;
};

AnalysisResult run_analysis(const AnalysisSpec& spec, const RunOptions& opts = {});

nlohmann::json report_json(const AnalysisResult& r);
nlohmann::json to_json(const McReport& m);

// Pretty JSON with doubles at 17 significant digits; non-finite doubles become null.
std::string dump_json(const nlohmann::json& j);

// `bin_lo,bin_hi,count`
void write_histogram_csv(std::ostream& os, const McReport& m);

}  // namespace probfp
