// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// The analyzer engine: transfer functions with rounding-error generation,
// independent test interpretation for the ideal and finite-precision flows,
// joins that bound the discontinuity introduced by unstable tests, and
// unroll-then-widen loop handling.

#pragma once

#include "fpdrift/abstract_value.hpp"

namespace fpdrift {

struct AnalyzeOptions {
  VarType precision = VarType::Double;
  bool precision_set = false;  // when false, inferred from declarations
  int unroll = 8;
  int widen = 50;
  bool refine_nonlinear = false;  // mean-value re-bounding of residues
};

struct InputBinding {
  std::string var;
  int cp = 0;
  Interval real_range;
  Interval err_range;
  NoiseSym real_sym, err_sym;
  bool has_real_sym = false, has_err_sym = false;
};

class Analysis {
 public:
  Program program;
  AnalyzeOptions options;
  ErrorModel model;
  AbstractValue end_state;
  std::map<int, AbstractValue> at_joins;
  std::vector<InputBinding> inputs;
  std::vector<DiscontinuityTerm> disc_terms;
  std::vector<UnstableTestInfo> unstable;
  std::vector<std::string> diagnostics;

  // Concretizations at a given state. `unbounded` variables yield nullopt.
  std::optional<Interval> real_bound(const AbstractValue& st, const std::string& var) const;
  std::optional<Interval> float_bound(const AbstractValue& st, const std::string& var) const;
  std::optional<Interval> err_bound(const AbstractValue& st, const std::string& var) const;
  std::optional<Interval> disc_bound(const AbstractValue& st, const std::string& var) const;

  struct DecompEntry {
    int origin_cp = 0;
    enum Kind : uint8_t { Initial, Rounding, Discontinuity } kind = Initial;
    Interval contribution;
    int test_cp = -1;  // discontinuity entries name the responsible test
  };
  std::vector<DecompEntry> error_decomposition(const AbstractValue& st,
                                               const std::string& var) const;

  // Interval of a discontinuity form under the registered symbol ranges.
  Interval bound_disc_form(const AffineForm& d) const;
};

// Runs the analysis of a desugared program. Throws AnalysisError on
// analysis-aborting conditions (possible division by zero, domain errors,
// coefficient overflow).
Analysis analyze(Program program, const AnalyzeOptions& opts);

}  // namespace fpdrift
