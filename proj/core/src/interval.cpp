// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include "fpdrift/interval.hpp"

#include <stdexcept>

namespace fpdrift {

namespace {
const mpfr_prec_t P = kEvalPrec;
}

Interval::Interval(Scalar lo, Scalar hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (!(lo_ <= hi_)) throw ScalarError("interval endpoints out of order");
}

Interval Interval::point(Scalar v) { return Interval(v, v); }

Scalar Interval::mid() const {
  if (is_point()) return lo_;
  return Scalar::round_to(mid_exact(), P, MPFR_RNDN);
}

Scalar Interval::mid_exact() const { return exact_add(lo_, hi_).ldexp(-1); }

Scalar Interval::rad_up() const {
  if (is_point()) return Scalar();
  Scalar m = mid();
  Scalar r1 = Scalar::sub(hi_, m, P, MPFR_RNDU);
  Scalar r2 = Scalar::sub(m, lo_, P, MPFR_RNDU);
  return Scalar::max(r1, r2);
}

Scalar Interval::width_up() const { return Scalar::sub(hi_, lo_, P, MPFR_RNDU); }

Scalar Interval::mag() const { return Scalar::max(lo_.abs(), hi_.abs()); }

Interval Interval::operator+(const Interval& o) const {
  return Interval(Scalar::add(lo_, o.lo_, P, MPFR_RNDD), Scalar::add(hi_, o.hi_, P, MPFR_RNDU));
}

Interval Interval::operator-(const Interval& o) const {
  return Interval(Scalar::sub(lo_, o.hi_, P, MPFR_RNDD), Scalar::sub(hi_, o.lo_, P, MPFR_RNDU));
}

Interval Interval::operator-() const { return Interval(hi_.exact_neg(), lo_.exact_neg()); }

Interval Interval::operator*(const Interval& o) const {
  const Scalar* as[2] = {&lo_, &hi_};
  const Scalar* bs[2] = {&o.lo_, &o.hi_};
  Scalar lo, hi;
  bool first = true;
  for (auto* a : as)
    for (auto* b : bs) {
      Scalar d = Scalar::mul(*a, *b, P, MPFR_RNDD);
      Scalar u = Scalar::mul(*a, *b, P, MPFR_RNDU);
      if (first) {
        lo = d;
        hi = u;
        first = false;
      } else {
        if (d < lo) lo = d;
        if (u > hi) hi = u;
      }
    }
  return Interval(lo, hi);
}

Interval Interval::operator/(const Interval& o) const {
  if (o.contains_zero()) throw ScalarError("interval division by zero-straddling divisor");
  const Scalar* as[2] = {&lo_, &hi_};
  const Scalar* bs[2] = {&o.lo_, &o.hi_};
  Scalar lo, hi;
  bool first = true;
  for (auto* a : as)
    for (auto* b : bs) {
      Scalar d = Scalar::div(*a, *b, P, MPFR_RNDD);
      Scalar u = Scalar::div(*a, *b, P, MPFR_RNDU);
      if (first) {
        lo = d;
        hi = u;
        first = false;
      } else {
        if (d < lo) lo = d;
        if (u > hi) hi = u;
      }
    }
  return Interval(lo, hi);
}

Interval Interval::sqrt() const {
  if (lo_.sgn() < 0) throw ScalarError("sqrt of interval with negative lower bound");
  return Interval(Scalar::sqrt(lo_, P, MPFR_RNDD), Scalar::sqrt(hi_, P, MPFR_RNDU));
}

Interval Interval::ldexp(long k) const { return Interval(lo_.ldexp(k), hi_.ldexp(k)); }

Interval Interval::scale(const Scalar& s) const {
  Scalar a = Scalar::mul(lo_, s, P, MPFR_RNDD);
  Scalar b = Scalar::mul(hi_, s, P, MPFR_RNDD);
  Scalar c = Scalar::mul(lo_, s, P, MPFR_RNDU);
  Scalar d = Scalar::mul(hi_, s, P, MPFR_RNDU);
  return Interval(Scalar::min(a, b), Scalar::max(c, d));
}

Interval Interval::abs_val() const {
  if (lo_.sgn() >= 0) return *this;
  if (hi_.sgn() <= 0) return -*this;
  return Interval(Scalar(), Scalar::max(lo_.abs(), hi_.abs()));
}

Interval Interval::hull(const Interval& o) const {
  return Interval(Scalar::min(lo_, o.lo_), Scalar::max(hi_, o.hi_));
}

Interval Interval::hull_zero() const { return hull(Interval()); }

std::optional<Interval> Interval::intersect(const Interval& o) const {
  Scalar lo = Scalar::max(lo_, o.lo_);
  Scalar hi = Scalar::min(hi_, o.hi_);
  if (lo > hi) return std::nullopt;
  return Interval(lo, hi);
}

std::optional<Interval> Interval::div_refine(const Interval& num, const Interval& den) {
  if (den.contains_zero()) return std::nullopt;
  return num / den;
}

std::string Interval::str(int sig_digits) const {
  return "[" + lo_.str(sig_digits, MPFR_RNDD) + ", " + hi_.str(sig_digits, MPFR_RNDU) + "]";
}

}  // namespace fpdrift
