// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fpdrift/constraint_set.hpp"

using namespace fpdrift;

namespace {
struct Ctx {
  SymbolAllocator alloc;
  SlackRegistry reg{alloc};
  NoiseSym r(uint32_t origin = 0) { return alloc.fresh(NoiseKind::Real, origin); }
  NoiseSym e(uint32_t origin = 0) { return alloc.fresh(NoiseKind::Error, origin); }
};

AffineForm form(std::initializer_list<std::pair<NoiseSym, double>> terms, double center = 0) {
  AffineBuilder b;
  b.set_center(Scalar(center));
  for (const auto& [s, c] : terms) b.add(s, Scalar(c));
  return b.build();
}
}  // namespace

TEST_CASE("top binds listed symbols to the unit interval") {
  Ctx cx;
  NoiseSym e1 = cx.r(), e2 = cx.r();
  ConstraintSet t = ConstraintSet::top({e1, e2});
  CHECK(!t.is_empty());
  CHECK(t.bound_of(e1) == Interval::unit());
  CHECK(t.bound_of(e2) == Interval::unit());
  ConstraintSet none = ConstraintSet::top({});
  CHECK(!none.is_empty());
  CHECK(none.bounds().empty());
}

TEST_CASE("meet_halfspace on a single symbol") {
  Ctx cx;
  NoiseSym e1 = cx.r();
  ConstraintSet t = ConstraintSet::top({e1});

  // e1 <= 0 (the condition 2+e1-2 <= 0)
  ConstraintSet a = t.meet_halfspace(cx.reg, form({{e1, 1.0}}), CmpOp::LE, 1);
  CHECK(a.bound_of(e1) == Interval(-1.0, 0.0));

  // e1 + u <= 0 -> e1 in [-1,-u]
  double u = 0.001;
  ConstraintSet b = t.meet_halfspace(cx.reg, form({{e1, 1.0}}, u), CmpOp::LE, 1);
  CHECK(b.bound_of(e1).hi() == Scalar(-u));
  CHECK(b.bound_of(e1).lo() == Scalar(-1.0));

  // e1 - 2 >= 0 is infeasible
  ConstraintSet c = t.meet_halfspace(cx.reg, form({{e1, 1.0}}, -2.0), CmpOp::GE, 1);
  CHECK(c.is_empty());
}

TEST_CASE("strict inequalities are widened but remembered for rendering") {
  Ctx cx;
  NoiseSym e1 = cx.r();
  ConstraintSet t = ConstraintSet::top({e1});
  ConstraintSet a = t.meet_halfspace(cx.reg, form({{e1, 1.0}}), CmpOp::GT, 1);
  CHECK(a.bound_of(e1) == Interval(0.0, 1.0));
  const SymBound* sb = a.stored_bound(e1.id);
  REQUIRE(sb != nullptr);
  CHECK(sb->lo_strict);
  CHECK(!sb->hi_strict);
}

TEST_CASE("meet intersects and detects emptiness") {
  Ctx cx;
  NoiseSym e1 = cx.r();
  double u = 0.001;
  ConstraintSet t = ConstraintSet::top({e1});
  ConstraintSet a = t.with_bound(e1, Interval(-u, 1.0));
  ConstraintSet b = t.with_bound(e1, Interval(-1.0, 0.0));
  ConstraintSet m = meet(a, b);
  CHECK(m.bound_of(e1) == Interval(-u, 0.0));

  ConstraintSet c = t.with_bound(e1, Interval(-1.0, -u));
  ConstraintSet d = t.with_bound(e1, Interval(0.0, 1.0));
  CHECK(meet(c, d).is_empty());

  ConstraintSet mt = meet(a, t);
  CHECK(mt.bound_of(e1) == a.bound_of(e1));
}

TEST_CASE("hull takes per-symbol unions") {
  Ctx cx;
  NoiseSym e1 = cx.r();
  double u = 0.001;
  ConstraintSet t = ConstraintSet::top({e1});
  CHECK(hull(t.with_bound(e1, Interval(-1.0, 0.0)), t.with_bound(e1, Interval(-1.0, -u)))
            .bound_of(e1) == Interval(-1.0, 0.0));
  CHECK(hull(t.with_bound(e1, Interval(0.0, 1.0)), t.with_bound(e1, Interval(-u, 1.0)))
            .bound_of(e1) == Interval(-u, 1.0));
  ConstraintSet self = t.with_bound(e1, Interval(-0.25, 0.5));
  CHECK(hull(self, self).bound_of(e1) == Interval(-0.25, 0.5));
}

TEST_CASE("slack symbols keep relational precision") {
  // the shared-subexpression pattern: conditions on e1-e2 from both flows
  for (double u : {1e-3, 1e-6}) {
    CAPTURE(u);
    Ctx cx;
    NoiseSym e1 = cx.r(), e2 = cx.r(), f1 = cx.e(), f2 = cx.e();
    ConstraintSet t = ConstraintSet::top({e1, e2, f1, f2});

    // real flow takes the branch with e1 - e2 < 0
    AffineForm real_cond = form({{e1, 1.0}, {e2, -1.0}});
    ConstraintSet phir = t.meet_halfspace(cx.reg, real_cond, CmpOp::LT, 3);

    // float flow takes the opposite branch: (e1-e2) + u*f1 - u*f2 >= 0
    AffineForm float_cond = form({{e1, 1.0}, {e2, -1.0}, {f1, u}, {f2, -u}});
    ConstraintSet phif = t.meet_halfspace(cx.reg, float_cond, CmpOp::GE, 4);

    ConstraintSet unstable = meet(phif, phir);
    REQUIRE(!unstable.is_empty());

    // the difference of the two branch results is 2(e1-e2)
    AffineForm diff = form({{e1, 2.0}, {e2, -2.0}});
    Interval b = unstable.bound(diff);
    double width = b.width_up().to_double();
    CHECK(width <= 4 * u + 10 * u * u);
    CHECK(b.contains(Scalar()));
    // naive evaluation would give width 8; the slack must beat it
    CHECK(width < 1.0);
  }
}

TEST_CASE("bound rewrites multiples of a slack definition") {
  Ctx cx;
  NoiseSym e1 = cx.r(), e2 = cx.r();
  ConstraintSet t = ConstraintSet::top({e1, e2});
  double u = 0.001;
  // s = e1 - e2 constrained to [-2u, 0]
  ConstraintSet a = t.meet_halfspace(cx.reg, form({{e1, 1.0}, {e2, -1.0}}), CmpOp::LE, 1);
  a = a.meet_halfspace(cx.reg, form({{e1, 1.0}, {e2, -1.0}}, 2 * u), CmpOp::GE, 2);
  REQUIRE(!a.is_empty());

  Interval b = a.bound(form({{e1, 2.0}, {e2, -2.0}}));
  CHECK(b.lo() >= Scalar(-4 * u - 1e-12));
  CHECK(b.hi() <= Scalar(1e-12));
  CHECK(b.hi() >= Scalar(0.0));

  // plain symbols still evaluate naively
  Interval c = a.bound(form({{e1, 1.0}, {e2, 1.0}}));
  CHECK(c.contains(Interval(-1.99, 1.99)));
}

TEST_CASE("propagation is contracting and idempotent") {
  Ctx cx;
  NoiseSym e1 = cx.r(), e2 = cx.r();
  ConstraintSet t = ConstraintSet::top({e1, e2});
  ConstraintSet a = t.meet_halfspace(cx.reg, form({{e1, 1.0}, {e2, -1.0}}, 1.5), CmpOp::LE, 1);
  ConstraintSet b = a.propagated();
  CHECK(b.bound_of(e1) == a.bound_of(e1));
  CHECK(b.bound_of(e2) == a.bound_of(e2));
  // contracting: after e1-e2 <= -1.5, e1 can be at most -0.5
  CHECK(a.bound_of(e1).hi() <= Scalar(-0.5 + 1e-12));
  CHECK(a.bound_of(e2).lo() >= Scalar(0.5 - 1e-12));
}

TEST_CASE("meet_halfspace soundness by sampling") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_real_distribution<double> point(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Ctx cx;
    NoiseSym s1 = cx.r(), s2 = cx.r(), s3 = cx.r();
    ConstraintSet t = ConstraintSet::top({s1, s2, s3});
    double c1 = coeff(rng), c2 = coeff(rng), c3 = coeff(rng), c0 = coeff(rng);
    AffineForm cond = form({{s1, c1}, {s2, c2}, {s3, c3}}, c0);
    CmpOp op = (trial % 2) ? CmpOp::LE : CmpOp::GE;
    ConstraintSet r = t.meet_halfspace(cx.reg, cond, op, 1);
    for (int k = 0; k < 100; ++k) {
      double v1 = point(rng), v2 = point(rng), v3 = point(rng);
      double cv = c0 + c1 * v1 + c2 * v2 + c3 * v3;
      bool sat = (op == CmpOp::LE) ? cv <= 0 : cv >= 0;
      if (!sat) continue;
      REQUIRE(!r.is_empty());
      CHECK(r.bound_of(s1).contains(Scalar(v1)));
      CHECK(r.bound_of(s2).contains(Scalar(v2)));
      CHECK(r.bound_of(s3).contains(Scalar(v3)));
    }
  }
}

TEST_CASE("subsumed constraints leave the set unchanged") {
  Ctx cx;
  NoiseSym e1 = cx.r();
  ConstraintSet t = ConstraintSet::top({e1});
  // x <= 10 with x = 2 + e1 in [1,3]: condition e1 - 8 <= 0 is subsumed
  ConstraintSet a = t.meet_halfspace(cx.reg, form({{e1, 1.0}}, -8.0), CmpOp::LE, 1);
  CHECK(!a.is_empty());
  CHECK(a.bound_of(e1) == Interval::unit());
}

TEST_CASE("meet under-approximates intersection, hull over-approximates union") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_real_distribution<double> point(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    Ctx cx;
    NoiseSym s1 = cx.r(), s2 = cx.r();
    ConstraintSet t = ConstraintSet::top({s1, s2});
    double a1 = coeff(rng), a2 = coeff(rng), a0 = coeff(rng);
    double b1 = coeff(rng), b2 = coeff(rng), b0 = coeff(rng);
    ConstraintSet A = t.meet_halfspace(cx.reg, form({{s1, a1}, {s2, a2}}, a0), CmpOp::LE, 1);
    ConstraintSet B = t.meet_halfspace(cx.reg, form({{s1, b1}, {s2, b2}}, b0), CmpOp::GE, 2);
    ConstraintSet m = meet(A, B);
    ConstraintSet h = hull(A, B);
    for (int k = 0; k < 200; ++k) {
      double v1 = point(rng), v2 = point(rng);
      bool inA = a0 + a1 * v1 + a2 * v2 <= 0;
      bool inB = b0 + b1 * v1 + b2 * v2 >= 0;
      if (inA && inB) {
        REQUIRE(!m.is_empty());
        CHECK(m.bound_of(s1).contains(Scalar(v1)));
        CHECK(m.bound_of(s2).contains(Scalar(v2)));
      }
      if (inA || inB) {
        REQUIRE(!h.is_empty());
        CHECK(h.bound_of(s1).contains(Scalar(v1)));
        CHECK(h.bound_of(s2).contains(Scalar(v2)));
      }
    }
  }
}

TEST_CASE("constraint monotonicity of bound") {
  Ctx cx;
  NoiseSym e1 = cx.r(), e2 = cx.r();
  ConstraintSet loose = ConstraintSet::top({e1, e2});
  ConstraintSet tight = loose.with_bound(e1, Interval(-0.5, 0.25)).with_bound(e2, Interval(0.0, 1.0));
  AffineForm f = form({{e1, 1.5}, {e2, -0.5}}, 0.25);
  CHECK(loose.bound(f).contains(tight.bound(f)));
}
