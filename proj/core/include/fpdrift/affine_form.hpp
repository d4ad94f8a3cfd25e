// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Sparse affine forms: center + sum of coefficient * noise-symbol terms.
// Linear operations are exact; zero coefficients are never stored.

#pragma once

#include <functional>
#include <vector>

#include "fpdrift/interval.hpp"
#include "fpdrift/noise.hpp"

namespace fpdrift {

struct Term {
  NoiseSym sym;
  Scalar coeff;
};

class AffineForm {
 public:
  AffineForm() = default;
  static AffineForm constant(Scalar c);
  static AffineForm constant(double c) { return constant(Scalar(c)); }

  // Centered form for a range: (lo+hi)/2 + (hi-lo)/2 * fresh. Degenerate
  // ranges yield a plain constant. Throws on lo > hi.
  static AffineForm from_interval(const Interval& range, NoiseSym fresh);

  const Scalar& center() const { return center_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }
  size_t size() const { return terms_.size(); }
  const Scalar* coeff_of(uint32_t id) const;
  bool mentions(uint32_t id) const { return coeff_of(id) != nullptr; }

  // a*x + b*y + c, coefficient-wise and exact.
  static AffineForm combine(const Scalar& a, const AffineForm& x, const Scalar& b,
                            const AffineForm& y, const Scalar& c);
  static AffineForm add(const AffineForm& x, const AffineForm& y);
  static AffineForm sub(const AffineForm& x, const AffineForm& y);

  AffineForm scaled(const Scalar& a) const;  // exact
  AffineForm ldexp(long k) const;
  AffineForm negated() const;
  AffineForm plus(const Scalar& c) const;
  AffineForm with_term(NoiseSym sym, const Scalar& coeff) const;
  AffineForm without(uint32_t id) const;

  // Plain box evaluation: center + sum coeff * bound(sym), outward.
  Interval eval(const std::function<Interval(const NoiseSym&)>& bound_of) const;

  // Rounds every coefficient (and the center) to `prec` bits and returns the
  // worst-case absolute deviation over the unit box, to be folded into a
  // fresh noise term by the caller.
  AffineForm rounded(mpfr_prec_t prec, Scalar* slop_up) const;
  mpfr_prec_t max_precision() const;

  bool same_as(const AffineForm& o) const;  // exact structural equality

  std::string str() const;  // debug rendering

 private:
  Scalar center_;
  std::vector<Term> terms_;  // sorted by symbol id, no zero coefficients

  friend class AffineBuilder;
};

// Incremental construction keeping terms sorted/non-zero.
class AffineBuilder {
 public:
  void set_center(Scalar c) { center_ = std::move(c); }
  void add_center(const Scalar& c) { center_ = exact_add(center_, c); }
  void add(const NoiseSym& sym, const Scalar& coeff);
  AffineForm build();

 private:
  Scalar center_;
  std::vector<Term> terms_;
};

}  // namespace fpdrift
