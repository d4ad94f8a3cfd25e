// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth interpreter. The "float" semantics executes the program with
// native IEEE arithmetic at the target precision; the "real" semantics runs
// the same program with correctly-rounded extended-precision arithmetic
// (decimal literals read at 200 bits in both).

#pragma once

#include <map>
#include <string>
#include <vector>

#include "fpdrift/ast.hpp"
#include "fpdrift/scalar.hpp"

namespace fpdrift {

inline constexpr mpfr_prec_t kOracleBits = 200;
inline constexpr long kStepLimit = 1000000;

enum class RunVerdict : uint8_t { Ok, StepLimit, Cycle, DomainFault };

struct Trace {
  RunVerdict verdict = RunVerdict::Ok;
  std::map<std::string, Scalar> final_env;
  std::map<int, Scalar> at_cp;               // last value written at each assignment cp
  std::map<int, std::map<std::string, Scalar>> at_join;  // env after each conditional
  std::vector<std::pair<int, bool>> path;    // (test cp, took-then) in execution order
  std::map<int, long> loop_iterations;       // loop cp -> iterations executed
  long steps = 0;
};

struct RunMode {
  bool real_semantics = false;       // false: target floats; true: extended
  VarType target = VarType::Double;  // float width for the target run
  mpfr_prec_t extended_bits = kOracleBits;
};

// One concrete input point: the float input value and its error; the real
// input is float - error, exactly. The error is kept at full precision so
// that degenerate error ranges written as decimals are met exactly.
struct InputPoint {
  double float_value = 0;
  Scalar error;

  InputPoint() = default;
  InputPoint(double f, double e) : float_value(f), error(e) {}
  InputPoint(double f, Scalar e) : float_value(f), error(std::move(e)) {}
};

Trace run(const Program& program, const std::vector<InputPoint>& inputs, const RunMode& mode);

// First test control point where the two paths differ, or -1 when the paths
// agree (the shorter path being a prefix counts as diverging at the first
// extra entry).
int first_divergence(const Trace& real_trace, const Trace& float_trace);

}  // namespace fpdrift
