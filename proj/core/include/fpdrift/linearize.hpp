// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Linearized nonlinear operations on affine forms. Each operation records
// enough metadata (a LinearizationRecord) to re-express the fresh residue
// symbol as a function of the primary symbols later, which tightens bounds
// when the symbols are restricted to a small sub-box (mean value theorem
// with interval derivatives).

#pragma once

#include <map>
#include <vector>

#include "fpdrift/constraint_set.hpp"
#include "fpdrift/errors.hpp"

namespace fpdrift {

enum class LinKind : uint8_t {
  ProductResidue,
  ReciprocalResidue,
  SqrtResidue,
  JoinSelection,
};

// One branch of a join: the pre-join form and the constraints under which
// that branch is selected.
struct JoinBranch {
  AffineForm value;
  ConstraintSet region;
};

struct LinearizationRecord {
  NoiseSym symbol;
  LinKind kind = LinKind::ProductResidue;

  AffineForm op_x, op_y;  // operands (op_y unused for unary kinds)
  std::map<uint32_t, std::pair<NoiseSym, Interval>> valid_box;  // symbol ranges at creation
  Scalar residue_mid;   // shift folded into the produced center
  Scalar residue_half;  // coefficient of `symbol` in the produced form
  Scalar slope;         // linear coefficient of unary enclosures

  AffineForm common;                // join: part shared by both branches
  std::vector<JoinBranch> branches; // join: the pre-join states
};

struct LinearizedOp {
  AffineForm form;
  LinearizationRecord record;
  bool has_residue = false;  // false when the operation was exact
};

// z = x * y. Recenters each operand at the midpoint of its constrained
// symbol range and folds the quadratic residue into a fresh symbol.
LinearizedOp mul(const AffineForm& x, const AffineForm& y, const ConstraintSet& phi,
                 SymbolAllocator& alloc, uint32_t origin);

// Min-range linear enclosure of 1/x; the constrained range must not contain 0.
LinearizedOp reciprocal(const AffineForm& x, const ConstraintSet& phi, SymbolAllocator& alloc,
                        uint32_t origin);

// Min-range linear enclosure of sqrt(x); the constrained range must be >= 0.
LinearizedOp sqrt_enclosure(const AffineForm& x, const ConstraintSet& phi,
                            SymbolAllocator& alloc, uint32_t origin);

// Affine expression with interval coefficients; used for substituting residue
// symbols by their defining functions.
class IntervalAffine {
 public:
  static IntervalAffine from(const AffineForm& f);
  static IntervalAffine point(Interval c);

  void add(const NoiseSym& sym, const Interval& coeff);
  IntervalAffine scaled(const Interval& s) const;
  IntervalAffine plus(const IntervalAffine& o) const;
  IntervalAffine hulled(const IntervalAffine& o) const;

  const Interval& center() const { return center_; }
  const std::map<uint32_t, std::pair<NoiseSym, Interval>>& coeffs() const { return coeffs_; }
  Interval eval(const ConstraintSet& phi) const;

 private:
  Interval center_;
  std::map<uint32_t, std::pair<NoiseSym, Interval>> coeffs_;
};

// Enclosure of f under phi, substituting residue symbols by their recorded
// defining functions restricted to phi's box. Result is always a subset of
// the plain phi.bound(f).
Interval refine_with_linearization(const AffineForm& f,
                                   const std::vector<LinearizationRecord>& records,
                                   const ConstraintSet& phi);

}  // namespace fpdrift
