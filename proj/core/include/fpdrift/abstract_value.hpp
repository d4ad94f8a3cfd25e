// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Analyzer state: per-variable affine forms for the ideal value, the
// rounding error and the discontinuity error, plus one constraint set per
// control flow (ideal and finite-precision). A variable's float abstraction
// is always real + err and is never stored separately.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "fpdrift/ast.hpp"
#include "fpdrift/linearize.hpp"

namespace fpdrift {

struct ErrorModel {
  VarType precision = VarType::Double;
  Scalar relative_unit;   // round-to-nearest relative bound: 2^-24 / 2^-53
  Scalar subnormal_unit;  // smallest subnormal: 2^-149 / 2^-1074

  static ErrorModel make(VarType precision);
  bool representable(const Scalar& v) const;
};

struct VarState {
  AffineForm real;    // over value symbols
  AffineForm err;     // over value + error symbols
  AffineForm disc;    // over discontinuity symbols
  Interval ia_real;   // plain interval companion for the ideal value
  Interval ia_float;  // interval companion for the finite-precision value
  bool unbounded = false;
};

struct AbstractValue {
  std::map<std::string, VarState> vars;
  ConstraintSet phi_r;  // reachability of the ideal flow
  ConstraintSet phi_f;  // reachability of the finite-precision flow
  std::vector<LinearizationRecord> records;  // in scope for refinement

  bool fully_dead() const { return phi_r.is_empty() && phi_f.is_empty(); }
};

// One discontinuity contribution: a fresh symbol whose constrained range
// spans the (zero-hulled) bound of the cross-branch value difference.
struct DiscontinuityTerm {
  NoiseSym symbol;
  Interval range;  // symbol range; the term contributes coeff * range
  int test_cp = 0;
  std::string var;
  Interval magnitude;    // the encoded difference bound, contains 0
  ConstraintSet region;  // unstable region (for reporting/validation)
  bool float_took_then = true;
};

struct UnstableDirection {
  bool possible = false;
  ConstraintSet region;
  std::map<std::string, Interval> value_gap;  // per-variable difference bound
};

struct UnstableTestInfo {
  int test_cp = 0;
  int line = 0;
  bool is_loop = false;
  UnstableDirection float_then;  // float takes then, ideal takes else
  UnstableDirection float_else;
};

}  // namespace fpdrift
