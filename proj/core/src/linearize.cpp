// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include "fpdrift/linearize.hpp"

#include <algorithm>

namespace fpdrift {

namespace {
const mpfr_prec_t P = kEvalPrec;
const Scalar kUnboundedAt(1e300);

void check_bounded(const Interval& iv, uint32_t origin) {
  if (iv.mag() > kUnboundedAt)
    throw AnalysisError("noise symbol unbounded under the current constraints",
                        static_cast<int>(origin));
}

std::map<uint32_t, std::pair<NoiseSym, Interval>> collect_box(const AffineForm& x,
                                                              const AffineForm& y,
                                                              const ConstraintSet& phi,
                                                              uint32_t origin) {
  std::map<uint32_t, std::pair<NoiseSym, Interval>> box;
  for (const AffineForm* f : {&x, &y}) {
    for (const auto& t : f->terms()) {
      if (box.count(t.sym.id)) continue;
      Interval b = phi.bound_of(t.sym);
      check_bounded(b, origin);
      box.emplace(t.sym.id, std::make_pair(t.sym, b));
    }
  }
  return box;
}

// Fold an interval enclosure into center shift + fresh coefficient, rounding
// outward so [mid - half, mid + half] contains `residue`.
void fold_residue(const Interval& residue, Scalar* mid, Scalar* half) {
  *mid = residue.mid();
  Scalar h1 = Scalar::sub(residue.hi(), *mid, P, MPFR_RNDU);
  Scalar h2 = Scalar::sub(*mid, residue.lo(), P, MPFR_RNDU);
  *half = Scalar::max(h1, h2);
  if (half->sgn() < 0) *half = Scalar();
}
}  // namespace

LinearizedOp mul(const AffineForm& x, const AffineForm& y, const ConstraintSet& phi,
                 SymbolAllocator& alloc, uint32_t origin) {
  if (phi.is_empty())
    throw AnalysisError("multiplication under empty constraints", static_cast<int>(origin));
  auto box = collect_box(x, y, phi, origin);

  // recenter both operands at the midpoints of the constrained ranges
  Scalar cx = x.center(), cy = y.center();
  for (const auto& [id, entry] : box) {
    Scalar m = entry.second.mid_exact();
    if (const Scalar* a = x.coeff_of(id)) cx = exact_add(cx, exact_mul(*a, m));
    if (const Scalar* b = y.coeff_of(id)) cy = exact_add(cy, exact_mul(*b, m));
  }

  // linear part: cx*cy + sum_i (cx*b_i + cy*a_i) (eps_i - m_i)
  AffineBuilder out;
  Scalar center = exact_mul(cx, cy);
  for (const auto& [id, entry] : box) {
    const Scalar* a = x.coeff_of(id);
    const Scalar* b = y.coeff_of(id);
    Scalar coeff;
    if (a) coeff = exact_add(coeff, exact_mul(cy, *a));
    if (b) coeff = exact_add(coeff, exact_mul(cx, *b));
    if (coeff.is_zero()) continue;
    center = exact_sub(center, exact_mul(coeff, entry.second.mid_exact()));
    out.add(entry.first, coeff);
  }

  // quadratic residue over the recentered box
  Interval residue;  // [0,0]
  for (auto i = box.begin(); i != box.end(); ++i) {
    const Scalar* ai = x.coeff_of(i->first);
    const Scalar* bi = y.coeff_of(i->first);
    Scalar ri = i->second.second.rad_up();
    if (ai && bi && !ri.is_zero()) {
      Interval sq(Scalar(), Scalar::mul(ri, ri, P, MPFR_RNDU));  // mu_i^2 in [0, r^2]
      residue = residue + sq.scale(exact_mul(*ai, *bi));
    }
    auto j = i;
    for (++j; j != box.end(); ++j) {
      const Scalar* aj = x.coeff_of(j->first);
      const Scalar* bj = y.coeff_of(j->first);
      Scalar c;
      if (ai && bj) c = exact_add(c, exact_mul(*ai, *bj));
      if (aj && bi) c = exact_add(c, exact_mul(*aj, *bi));
      if (c.is_zero()) continue;
      Scalar rr = Scalar::mul(ri, j->second.second.rad_up(), P, MPFR_RNDU);
      residue = residue + Interval(rr.exact_neg(), rr).scale(c);
    }
  }

  LinearizedOp res;
  Scalar mid, half;
  fold_residue(residue, &mid, &half);
  out.set_center(exact_add(center, mid));
  NoiseSym fresh = alloc.fresh(NoiseKind::Real, origin);
  if (!half.is_zero()) out.add(fresh, half);
  res.form = out.build();
  res.has_residue = !half.is_zero();
  res.record = LinearizationRecord{fresh, LinKind::ProductResidue, x, y,
                                   std::move(box), mid, half, Scalar(), {}, {}};
  return res;
}

namespace {
// Shared min-range enclosure: result = slope*x + [g_lo, g_hi] where g is the
// residual function (monotone over the range by choice of slope rounding).
LinearizedOp unary_enclosure(const AffineForm& x, const ConstraintSet& phi,
                             SymbolAllocator& alloc, uint32_t origin, LinKind kind,
                             const Scalar& slope, const Interval& g_range) {
  LinearizedOp res;
  Scalar mid, half;
  fold_residue(g_range, &mid, &half);
  AffineForm lin = x.scaled(slope).plus(mid);
  NoiseSym fresh = alloc.fresh(NoiseKind::Real, origin);
  if (!half.is_zero()) lin = lin.with_term(fresh, half);
  res.form = std::move(lin);
  res.has_residue = !half.is_zero();
  auto box = collect_box(x, x, phi, origin);
  res.record = LinearizationRecord{fresh, kind,     x,   AffineForm(), std::move(box),
                                   mid,   half,     slope, {},         {}};
  return res;
}

Interval g_recip_at(const Interval& v, const Scalar& slope) {
  return Interval(Scalar(1L), Scalar(1L)) / v - v.scale(slope);
}

Interval g_sqrt_at(const Interval& v, const Scalar& slope) {
  return v.sqrt() - v.scale(slope);
}
}  // namespace

LinearizedOp reciprocal(const AffineForm& x, const ConstraintSet& phi, SymbolAllocator& alloc,
                        uint32_t origin) {
  Interval range = phi.bound(x);
  check_bounded(range, origin);
  if (range.contains_zero())
    throw AnalysisError("division by a possibly-zero quantity", static_cast<int>(origin));
  if (range.hi().sgn() < 0) {
    LinearizedOp neg = reciprocal(x.negated(), phi, alloc, origin);
    neg.form = neg.form.negated();
    return neg;
  }
  // slope -1/hi^2 rounded up (towards zero) keeps g(x) = 1/x - k*x monotone
  // decreasing on [lo, hi]
  Scalar hi2 = Scalar::mul(range.hi(), range.hi(), P, MPFR_RNDD);
  Scalar slope = Scalar::div(Scalar(-1L), hi2, P, MPFR_RNDU);
  Interval g_at_hi = g_recip_at(Interval::point(range.hi()), slope);
  Interval g_at_lo = g_recip_at(Interval::point(range.lo()), slope);
  return unary_enclosure(x, phi, alloc, origin, LinKind::ReciprocalResidue, slope,
                         g_at_hi.hull(g_at_lo));
}

LinearizedOp sqrt_enclosure(const AffineForm& x, const ConstraintSet& phi,
                            SymbolAllocator& alloc, uint32_t origin) {
  Interval range = phi.bound(x);
  check_bounded(range, origin);
  if (range.lo().sgn() < 0)
    throw AnalysisError("square root of a possibly-negative quantity",
                        static_cast<int>(origin));
  if (range.hi().is_zero()) {
    LinearizedOp res;
    res.form = AffineForm::constant(Scalar());
    res.record.symbol = alloc.fresh(NoiseKind::Real, origin);
    res.record.kind = LinKind::SqrtResidue;
    return res;
  }
  // slope 1/(2*sqrt(hi)) rounded down keeps g(x) = sqrt(x) - k*x increasing
  Scalar shi = Scalar::sqrt(range.hi(), P, MPFR_RNDU);
  Scalar slope = Scalar::div(Scalar(1L), shi.ldexp(1), P, MPFR_RNDD);
  Interval g_at_lo = g_sqrt_at(Interval::point(range.lo()), slope);
  Interval g_at_hi = g_sqrt_at(Interval::point(range.hi()), slope);
  return unary_enclosure(x, phi, alloc, origin, LinKind::SqrtResidue, slope,
                         g_at_lo.hull(g_at_hi));
}

IntervalAffine IntervalAffine::from(const AffineForm& f) {
  IntervalAffine a;
  a.center_ = Interval::point(f.center());
  for (const auto& t : f.terms()) a.coeffs_[t.sym.id] = {t.sym, Interval::point(t.coeff)};
  return a;
}

IntervalAffine IntervalAffine::point(Interval c) {
  IntervalAffine a;
  a.center_ = std::move(c);
  return a;
}

void IntervalAffine::add(const NoiseSym& sym, const Interval& coeff) {
  auto it = coeffs_.find(sym.id);
  if (it == coeffs_.end()) {
    coeffs_[sym.id] = {sym, coeff};
  } else {
    it->second.second = it->second.second + coeff;
  }
}

IntervalAffine IntervalAffine::scaled(const Interval& s) const {
  IntervalAffine a;
  a.center_ = center_ * s;
  for (const auto& [id, entry] : coeffs_) a.coeffs_[id] = {entry.first, entry.second * s};
  return a;
}

IntervalAffine IntervalAffine::plus(const IntervalAffine& o) const {
  IntervalAffine a = *this;
  a.center_ = a.center_ + o.center_;
  for (const auto& [id, entry] : o.coeffs_) a.add(entry.first, entry.second);
  return a;
}

IntervalAffine IntervalAffine::hulled(const IntervalAffine& o) const {
  IntervalAffine a;
  a.center_ = center_.hull(o.center_);
  for (const auto& [id, entry] : coeffs_) {
    auto it = o.coeffs_.find(id);
    Interval other = it == o.coeffs_.end() ? Interval() : it->second.second;
    a.coeffs_[id] = {entry.first, entry.second.hull(other)};
  }
  for (const auto& [id, entry] : o.coeffs_) {
    if (!coeffs_.count(id)) a.coeffs_[id] = {entry.first, entry.second.hull(Interval())};
  }
  return a;
}

Interval IntervalAffine::eval(const ConstraintSet& phi) const {
  Interval acc = center_;
  for (const auto& [id, entry] : coeffs_) acc = acc + entry.second * phi.bound_of(entry.first);
  return acc;
}

namespace {
// Point inside `restricted` at which the mean-value expansion is anchored:
// an endpoint shared with the valid range if exactly one is, else the middle.
Scalar anchor_point(const Interval& restricted, const Interval& valid) {
  bool lo_match = restricted.lo() == valid.lo();
  bool hi_match = restricted.hi() == valid.hi();
  if (hi_match && !lo_match) return restricted.hi();
  if (lo_match && !hi_match) return restricted.lo();
  return restricted.mid();
}

struct BoxEntry {
  NoiseSym sym;
  Interval restricted;
  Scalar anchor;
};

std::vector<BoxEntry> restricted_box(const LinearizationRecord& rec, const ConstraintSet& phi) {
  std::vector<BoxEntry> box;
  for (const auto& [id, entry] : rec.valid_box) {
    Interval r = phi.bound_of(entry.first);
    if (auto isect = r.intersect(entry.second)) r = *isect;
    box.push_back({entry.first, r, anchor_point(r, entry.second)});
  }
  return box;
}

// Substitution expression for a residue symbol: f(anchor) + sum D_k*(e_k - a_k)
// with D_k an interval bound of the partial derivative over the restricted box.
IntervalAffine substitution_expr(const LinearizationRecord& rec, const ConstraintSet& phi) {
  if (rec.kind == LinKind::JoinSelection) {
    bool first = true;
    IntervalAffine acc;
    for (const auto& br : rec.branches) {
      ConstraintSet live = meet(phi, br.region);
      if (live.is_empty()) continue;
      AffineForm diff = AffineForm::sub(br.value, rec.common).plus(rec.residue_mid.exact_neg());
      IntervalAffine expr = IntervalAffine::from(diff).scaled(
          Interval(Scalar(1L), Scalar(1L)) / Interval::point(rec.residue_half));
      acc = first ? expr : acc.hulled(expr);
      first = false;
    }
    if (first) return IntervalAffine::point(Interval::unit());
    return acc;
  }

  std::vector<BoxEntry> box = restricted_box(rec, phi);
  Interval w = Interval::point(rec.residue_half);
  IntervalAffine out;

  if (rec.kind == LinKind::ProductResidue) {
    // f(e) = (Q(e - m) - mid)/w with Q the cross-term quadratic
    auto mu_at = [&](const BoxEntry& e, bool at_anchor) {
      Scalar m = rec.valid_box.at(e.sym.id).second.mid_exact();
      if (at_anchor) return Interval::point(exact_sub(e.anchor, m));
      return e.restricted - Interval::point(m);
    };
    Interval f_anchor = Interval::point(rec.residue_mid.exact_neg());
    for (size_t i = 0; i < box.size(); ++i) {
      const Scalar* ai = rec.op_x.coeff_of(box[i].sym.id);
      if (!ai) continue;
      for (size_t j = 0; j < box.size(); ++j) {
        const Scalar* bj = rec.op_y.coeff_of(box[j].sym.id);
        if (!bj) continue;
        Scalar c = exact_mul(*ai, *bj);
        if (c.is_zero()) continue;
        f_anchor = f_anchor + (mu_at(box[i], true) * mu_at(box[j], true)).scale(c);
      }
    }
    out = IntervalAffine::point(f_anchor / w);
    for (const auto& e : box) {
      const Scalar* ak = rec.op_x.coeff_of(e.sym.id);
      const Scalar* bk = rec.op_y.coeff_of(e.sym.id);
      Interval deriv;  // d f / d e_k over restricted box (before /w)
      for (const auto& o : box) {
        const Scalar* ao = rec.op_x.coeff_of(o.sym.id);
        const Scalar* bo = rec.op_y.coeff_of(o.sym.id);
        Scalar c;
        if (ak && bo) c = exact_add(c, exact_mul(*ak, *bo));
        if (ao && bk) c = exact_add(c, exact_mul(*ao, *bk));
        if (c.is_zero()) continue;
        deriv = deriv + mu_at(o, false).scale(c);
      }
      Interval dk = deriv / w;
      out.add(e.sym, dk);
      out = out.plus(IntervalAffine::point(dk.scale(e.anchor.exact_neg())));
    }
    return out;
  }

  // unary kinds: f(e) = (g(x(e)) - mid)/w, g' taken over the operand's range
  Interval x_range = Interval::point(rec.op_x.center());
  Interval x_anchor = Interval::point(rec.op_x.center());
  for (const auto& e : box) {
    if (const Scalar* c = rec.op_x.coeff_of(e.sym.id)) {
      x_range = x_range + e.restricted.scale(*c);
      x_anchor = x_anchor + Interval::point(e.anchor).scale(*c);
    }
  }
  Interval g_anchor, gprime;
  if (rec.kind == LinKind::ReciprocalResidue) {
    if (x_range.contains_zero()) return IntervalAffine::point(Interval::unit());
    g_anchor = g_recip_at(x_anchor, rec.slope);
    gprime = -(Interval(Scalar(1L), Scalar(1L)) / (x_range * x_range)) -
             Interval::point(rec.slope);
  } else {
    if (x_range.lo().sgn() < 0) return IntervalAffine::point(Interval::unit());
    g_anchor = g_sqrt_at(x_anchor, rec.slope);
    Interval s = x_range.sqrt();
    if (s.lo().is_zero()) return IntervalAffine::point(Interval::unit());
    gprime = Interval(Scalar(1L), Scalar(1L)) / s.ldexp(1) - Interval::point(rec.slope);
  }
  out = IntervalAffine::point((g_anchor - Interval::point(rec.residue_mid)) / w);
  for (const auto& e : box) {
    const Scalar* c = rec.op_x.coeff_of(e.sym.id);
    if (!c) continue;
    Interval dk = (gprime.scale(*c)) / w;
    out.add(e.sym, dk);
    out = out.plus(IntervalAffine::point(dk.scale(e.anchor.exact_neg())));
  }
  return out;
}
}  // namespace

Interval refine_with_linearization(const AffineForm& f,
                                   const std::vector<LinearizationRecord>& records,
                                   const ConstraintSet& phi) {
  Interval plain = phi.bound(f);
  if (records.empty()) return plain;

  std::map<uint32_t, const LinearizationRecord*> by_sym;
  for (const auto& r : records)
    if (!r.residue_half.is_zero()) by_sym[r.symbol.id] = &r;

  IntervalAffine acc = IntervalAffine::from(f);
  for (int guard = 0; guard < 100; ++guard) {
    uint32_t target = 0;
    const LinearizationRecord* rec = nullptr;
    for (const auto& [id, entry] : acc.coeffs()) {
      auto it = by_sym.find(id);
      if (it != by_sym.end()) {
        target = id;
        rec = it->second;
        break;
      }
    }
    if (!rec) break;
    Interval coeff = acc.coeffs().at(target).second;
    IntervalAffine without;
    without = IntervalAffine::point(acc.center());
    for (const auto& [id, entry] : acc.coeffs())
      if (id != target) without.add(entry.first, entry.second);
    by_sym.erase(target);  // substitute each record at most once
    acc = without.plus(substitution_expr(*rec, phi).scaled(coeff));
  }

  Interval refined = acc.eval(phi);
  auto tight = refined.intersect(plain);
  return tight ? *tight : plain;
}

}  // namespace fpdrift
