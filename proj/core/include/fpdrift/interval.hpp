// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Closed intervals with outward rounding at kEvalPrecision. Endpoints keep
// whatever precision they were built with; operations round lo down and hi up.

#pragma once

#include <optional>
#include <string>

#include "fpdrift/scalar.hpp"

namespace fpdrift {

class Interval {
 public:
  Interval() : lo_(), hi_() {}  // [0,0]
  Interval(Scalar lo, Scalar hi);
  Interval(double lo, double hi) : Interval(Scalar(lo), Scalar(hi)) {}

  static Interval point(Scalar v);
  static Interval unit() { return Interval(-1.0, 1.0); }

  const Scalar& lo() const { return lo_; }
  const Scalar& hi() const { return hi_; }

  bool is_point() const { return lo_ == hi_; }
  bool contains(const Scalar& v) const { return lo_ <= v && v <= hi_; }
  bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  bool contains_zero() const { return lo_.sgn() <= 0 && hi_.sgn() >= 0; }
  bool operator==(const Interval& o) const { return lo_ == o.lo_ && hi_ == o.hi_; }

  Scalar mid() const;        // round-to-nearest midpoint
  Scalar mid_exact() const;  // exact (lo+hi)/2
  Scalar rad_up() const;     // half-width, rounded up from mid()
  Scalar width_up() const;
  Scalar mag() const;  // max(|lo|, |hi|)

  Interval operator+(const Interval& o) const;
  Interval operator-(const Interval& o) const;
  Interval operator-() const;
  Interval operator*(const Interval& o) const;
  Interval operator/(const Interval& o) const;  // throws if o contains 0
  Interval sqrt() const;                        // requires lo >= 0
  Interval ldexp(long k) const;
  Interval scale(const Scalar& s) const;
  Interval abs_val() const;

  Interval hull(const Interval& o) const;
  Interval hull_zero() const;
  std::optional<Interval> intersect(const Interval& o) const;

  // Refinement helper for HC4: candidates for `a` in a = num / den, nullopt
  // when den straddles zero (no information).
  static std::optional<Interval> div_refine(const Interval& num, const Interval& den);

  std::string str(int sig_digits = 17) const;  // outward decimal rendering

 private:
  Scalar lo_, hi_;
};

}  // namespace fpdrift
