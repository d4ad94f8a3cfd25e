// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Rendered analysis results. All numeric bounds are outward-rounded decimal
// strings with 17 significant digits, identical in the text and JSON
// renderings; JSON bounds are strings so that parsing the report back loses
// nothing.

#pragma once

#include <optional>

#include "fpdrift/analyzer.hpp"

namespace fpdrift {

struct BoundText {
  std::string lo, hi;
  bool operator==(const BoundText&) const = default;
};

struct RegionText {
  std::string input;  // variable name; constraint on its ideal (real) value
  BoundText iv;
  bool lo_strict = false, hi_strict = false;
  bool operator==(const RegionText&) const = default;
};

struct DecompRow {
  int origin_cp = 0;
  std::string kind;  // "initial" | "rounding" | "discontinuity"
  BoundText iv;
  int test_cp = -1;
  std::vector<RegionText> region;  // discontinuity rows carry their region
  bool operator==(const DecompRow&) const = default;
};

struct VarRow {
  std::string name;
  bool unbounded = false;
  bool real_reachable = true;
  bool float_reachable = true;
  BoundText real, flt, err, disc, total_err;
  std::vector<DecompRow> decomposition;
  bool operator==(const VarRow&) const = default;
};

struct DirectionText {
  bool possible = false;
  std::vector<RegionText> region;
  bool operator==(const DirectionText&) const = default;
};

struct WarningRow {
  int test_cp = 0;
  int line = 0;
  bool is_loop = false;
  DirectionText float_then;  // float takes then while the ideal flow takes else
  DirectionText float_else;
  bool operator==(const WarningRow&) const = default;
};

struct PointReport {
  int cp = -1;  // -1 means program end
  int line = 0;
  std::vector<VarRow> vars;
  bool operator==(const PointReport&) const = default;
};

struct WitnessText {
  std::string var;
  std::string error_value;
  std::vector<std::string> input_floats;
  std::vector<std::string> input_errors;
  bool operator==(const WitnessText&) const = default;
};

struct ValidationSummary {
  long samples = 0;
  long skipped = 0;  // ideal run did not finish (timeout/domain)
  long containment_violations = 0;
  long divergent = 0;
  long divergent_outside_region = 0;
  long float_nonterminating = 0;
  unsigned long long seed = 0;
  std::map<std::string, long> loop_real_max;   // loop cp (text) -> max iterations
  std::map<std::string, long> loop_float_max;
  std::vector<WitnessText> worst_discontinuity;  // per variable
  bool witness_replayed = true;
  bool operator==(const ValidationSummary&) const = default;
};

struct AnalysisReport {
  int schema_version = 1;
  std::string program;
  std::string precision;  // "single" | "double"
  std::vector<PointReport> points;
  std::vector<WarningRow> warnings;
  std::vector<std::string> diagnostics;
  std::optional<ValidationSummary> validation;
  bool operator==(const AnalysisReport&) const = default;
};

// Assembles the rendered report (join points in control-point order, then
// the program end).
AnalysisReport build_report(const Analysis& analysis, const std::string& program_name);

std::string render_text(const AnalysisReport& r);
std::string render_json(const AnalysisReport& r);
AnalysisReport parse_json_report(const std::string& text);

BoundText bound_text(const Interval& iv);

}  // namespace fpdrift
