// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fpdrift/affine_form.hpp"
#include "fpdrift/constraint_set.hpp"

using namespace fpdrift;

namespace {
NoiseSym sym(uint32_t id) { return NoiseSym{id, NoiseKind::Real, 0}; }

Interval unit_box(const NoiseSym&) { return Interval::unit(); }
}  // namespace

TEST_CASE("from_interval produces the centered form") {
  AffineForm f = AffineForm::from_interval(Interval(1.0, 3.0), sym(1));
  CHECK(f.center() == Scalar(2.0));
  REQUIRE(f.size() == 1);
  CHECK(f.terms()[0].coeff == Scalar(1.0));

  AffineForm degen = AffineForm::from_interval(Interval(5.0, 5.0), sym(2));
  CHECK(degen.is_constant());
  CHECK(degen.center() == Scalar(5.0));

  AffineForm symm = AffineForm::from_interval(Interval(-1.0, 1.0), sym(3));
  CHECK(symm.center().is_zero());
  CHECK(symm.terms()[0].coeff == Scalar(1.0));

  CHECK_THROWS(Interval(3.0, 1.0));
}

TEST_CASE("combine is coefficient-wise and exact") {
  AffineForm x = AffineForm::from_interval(Interval(1.0, 3.0), sym(1));  // 2 + e1
  AffineForm y = AffineForm::combine(Scalar(1.0), x, Scalar(), AffineForm(), Scalar(2.0));
  CHECK(y.center() == Scalar(4.0));
  CHECK(*y.coeff_of(1) == Scalar(1.0));

  // x - x cancels exactly
  AffineForm z = AffineForm::sub(x, x);
  CHECK(z.is_constant());
  CHECK(z.center().is_zero());

  // (2+e1) + (3+2e1-e2) = 5+3e1-e2
  AffineBuilder b;
  b.set_center(Scalar(3.0));
  b.add(sym(1), Scalar(2.0));
  b.add(sym(2), Scalar(-1.0));
  AffineForm w = AffineForm::add(x, b.build());
  CHECK(w.center() == Scalar(5.0));
  CHECK(*w.coeff_of(1) == Scalar(3.0));
  CHECK(*w.coeff_of(2) == Scalar(-1.0));
}

TEST_CASE("eval over the unit box matches the magnitude sum") {
  AffineBuilder b;
  b.set_center(Scalar(1.0));
  b.add(sym(1), Scalar(2.0));
  b.add(sym(2), Scalar(-0.5));
  Interval r = b.build().eval(unit_box);
  CHECK(r.contains(Scalar(-1.5)));
  CHECK(r.contains(Scalar(3.5)));
  CHECK(!r.contains(Scalar(3.6)));
}

TEST_CASE("constant concretizes to a point under any constraints") {
  AffineForm c = AffineForm::constant(7.0);
  ConstraintSet phi = ConstraintSet::top({sym(1)});
  Interval r = phi.bound(c);
  CHECK(r.lo() == Scalar(7.0));
  CHECK(r.hi() == Scalar(7.0));
}

TEST_CASE("concretize uses constrained symbol ranges") {
  // 2+e1 with e1 in [-1,0] -> [1,2]
  AffineForm x = AffineForm::from_interval(Interval(1.0, 3.0), sym(1));
  ConstraintSet phi = ConstraintSet::top({sym(1)}).with_bound(sym(1), Interval(-1.0, 0.0));
  Interval r = phi.bound(x);
  CHECK(r.lo() == Scalar(1.0));
  CHECK(r.hi() == Scalar(2.0));
}

TEST_CASE("rounded() reports the deviation it introduced") {
  AffineBuilder b;
  Scalar third = Scalar::div(Scalar(1.0), Scalar(3.0), 400, MPFR_RNDN);
  b.set_center(third);
  b.add(sym(1), third);
  AffineForm f = b.build();
  Scalar slop;
  AffineForm g = f.rounded(64, &slop);
  CHECK(g.max_precision() <= 64);
  CHECK(slop.sgn() >= 0);
  // deviation of center and coefficient both bounded by slop
  Scalar dev = exact_sub(f.center(), g.center()).abs();
  CHECK(dev <= slop);
}

TEST_CASE("linearity exactness under constraints") {
  ConstraintSet phi = ConstraintSet::top({sym(1), sym(2)})
                          .with_bound(sym(1), Interval(-0.5, 1.0))
                          .with_bound(sym(2), Interval(0.0, 0.25));
  AffineBuilder bx, by;
  bx.set_center(Scalar(1.5));
  bx.add(sym(1), Scalar(0.75));
  bx.add(sym(2), Scalar(-2.0));
  by.set_center(Scalar(-0.25));
  by.add(sym(1), Scalar(1.0));
  AffineForm x = bx.build(), y = by.build();

  AffineForm comb = AffineForm::combine(Scalar(2.0), x, Scalar(-3.0), y, Scalar(0.125));
  Interval lhs = phi.bound(comb);
  Interval rhs = phi.bound(x).scale(Scalar(2.0)) + phi.bound(y).scale(Scalar(-3.0)) +
                 Interval::point(Scalar(0.125));
  CHECK(rhs.contains(lhs));
}
