// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Constraints on noise symbols: per-symbol interval bounds plus slack
// symbols definitionally bound to shared linear sub-expressions of test
// conditions. Test conditions expressed on slacks keep their relational
// precision when everything else is solved in intervals.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fpdrift/affine_form.hpp"

namespace fpdrift {

enum class CmpOp : uint8_t { LE, LT, GE, GT, EQ, NE };

const char* cmp_op_text(CmpOp op);
CmpOp cmp_op_negate(CmpOp op);

struct SymBound {
  Interval iv = Interval::unit();
  bool lo_strict = false;  // rendering only; the domain itself is closed
  bool hi_strict = false;
};

// slack == linear / scale, where linear mentions only non-slack symbols,
// carries no constant term, has its first coefficient positive and
// scale == max |coefficient|.
struct SlackDef {
  NoiseSym sym;
  AffineForm linear;
  Scalar scale;
};

// Per-analysis interning of slack symbols: structurally equal (proportional)
// test conditions map to the same slack symbol everywhere.
class SlackRegistry {
 public:
  explicit SlackRegistry(SymbolAllocator& alloc) : alloc_(&alloc) {}

  // `linear` must be centered (no constant part). Returns the canonical def
  // and the exact proportionality factor lambda with linear == lambda * def.
  const SlackDef& intern(const AffineForm& linear, uint32_t origin);

 private:
  SymbolAllocator* alloc_;
  std::unordered_map<std::string, std::vector<SlackDef>> defs_;
};

class ConstraintSet {
 public:
  ConstraintSet() = default;

  static ConstraintSet top(const std::vector<NoiseSym>& syms);
  static ConstraintSet bottom();

  bool is_empty() const { return empty_; }

  // Current bound of a symbol; defaults to [-1,1] for unconstrained
  // primaries and to the definitional range for slacks.
  Interval bound_of(const NoiseSym& sym) const;
  const SymBound* stored_bound(uint32_t id) const;
  const std::map<uint32_t, SymBound>& bounds() const { return bounds_; }
  const std::vector<SlackDef>& slacks() const { return slacks_; }
  bool is_slack(uint32_t id) const;

  // Intersection with the half-space `cond op 0`. Strict inequalities are
  // soundly widened to non-strict; != refines nothing.
  ConstraintSet meet_halfspace(SlackRegistry& reg, const AffineForm& cond, CmpOp op,
                               uint32_t origin) const;

  // Slack-aware interval enclosure of an affine form; never wider than the
  // naive term-by-term evaluation.
  Interval bound(const AffineForm& f) const;

  ConstraintSet propagated() const;

  // Returns a copy with `sym` clamped to iv (propagation re-run).
  ConstraintSet with_bound(const NoiseSym& sym, const Interval& iv) const;

  // Keeps only bounds on the listed symbols and slacks in `slack_keep`;
  // dropping constraints can only widen the set.
  ConstraintSet restricted_to(const std::set<uint32_t>& symbols,
                              const std::set<uint32_t>& slack_keep) const;

  friend ConstraintSet meet(const ConstraintSet& a, const ConstraintSet& b);
  friend ConstraintSet hull(const ConstraintSet& a, const ConstraintSet& b);

  // Rename stored constraints on the given symbols to fresh shadow ids
  // (used when the float-flow and real-flow valuations of a symbol must be
  // decoupled). Returns the renamed set and fills old->new mapping.
  ConstraintSet renamed(const std::vector<NoiseSym>& syms, SymbolAllocator& alloc,
                        std::map<uint32_t, NoiseSym>* mapping) const;

  std::string str() const;

 private:
  std::map<uint32_t, SymBound> bounds_;
  std::vector<SlackDef> slacks_;
  bool empty_ = false;

  void tighten(const NoiseSym& sym, const Interval& iv, bool lo_strict, bool hi_strict);
  void run_propagation();
};

}  // namespace fpdrift
