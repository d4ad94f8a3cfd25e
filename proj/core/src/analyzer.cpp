// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include "fpdrift/analyzer.hpp"

#include <algorithm>
#include <set>

#include "fpdrift/errors.hpp"

namespace fpdrift {

namespace {
const mpfr_prec_t P = kEvalPrec;
const Scalar kHuge(1e300);

Interval huge_interval() { return Interval(kHuge.exact_neg(), kHuge); }

bool is_zero_form(const AffineForm& f) { return f.is_constant() && f.center().is_zero(); }

// |v| == 2^k for some integer k
bool is_pow2(const Scalar& v, long* k_out) {
  if (v.is_zero() || !v.is_finite()) return false;
  Scalar a = v.abs();
  long e = (long)mpfr_get_exp(a.raw());
  Scalar unit = Scalar(1L).ldexp(e - 1);
  if (a == unit) {
    *k_out = e - 1;
    return true;
  }
  return false;
}

AffineForm rename_form(const AffineForm& f, const std::map<uint32_t, NoiseSym>& map) {
  if (map.empty()) return f;
  AffineBuilder b;
  b.set_center(f.center());
  for (const auto& t : f.terms()) {
    auto it = map.find(t.sym.id);
    b.add(it == map.end() ? t.sym : it->second, t.coeff);
  }
  return b.build();
}

LinearizationRecord rename_record(const LinearizationRecord& r,
                                  const std::map<uint32_t, NoiseSym>& map) {
  LinearizationRecord out = r;
  if (auto it = map.find(r.symbol.id); it != map.end()) out.symbol = it->second;
  out.op_x = rename_form(r.op_x, map);
  out.op_y = rename_form(r.op_y, map);
  out.common = rename_form(r.common, map);
  out.valid_box.clear();
  for (const auto& [id, entry] : r.valid_box) {
    auto it = map.find(id);
    NoiseSym s = it == map.end() ? entry.first : it->second;
    out.valid_box[s.id] = {s, entry.second};
  }
  for (auto& br : out.branches) br.value = rename_form(br.value, map);
  return out;
}

bool record_touches(const LinearizationRecord& r, const std::map<uint32_t, NoiseSym>& map) {
  if (map.count(r.symbol.id)) return true;
  for (const auto& [id, e] : r.valid_box)
    if (map.count(id)) return true;
  for (const auto& br : r.branches)
    for (const auto& t : br.value.terms())
      if (map.count(t.sym.id)) return true;
  for (const auto& t : r.common.terms())
    if (map.count(t.sym.id)) return true;
  return false;
}

}  // namespace

ErrorModel ErrorModel::make(VarType precision) {
  ErrorModel m;
  m.precision = precision;
  if (precision == VarType::Float) {
    m.relative_unit = Scalar(1L).ldexp(-24);
    m.subnormal_unit = Scalar(1L).ldexp(-149);
  } else {
    m.relative_unit = Scalar(1L).ldexp(-53);
    m.subnormal_unit = Scalar(1L).ldexp(-1074);
  }
  return m;
}

bool ErrorModel::representable(const Scalar& v) const {
  if (!v.is_finite()) return false;
  if (precision == VarType::Float) {
    float f = (float)v.to_double();
    return Scalar((double)f) == v;
  }
  return Scalar(v.to_double()) == v;
}

// ===================================================================
// Engine
// ===================================================================

namespace {

struct EvalOut {
  AffineForm r, e, d;
  Interval ia;    // ideal-value interval companion
  Interval ia_f;  // finite-precision interval companion
  bool unbounded = false;
  NoiseSym in_real, in_err;
  bool has_in_real = false, has_in_err = false;
  Interval in_real_range, in_err_range;
};

class Engine {
 public:
  Engine(Program prog, const AnalyzeOptions& opts) : prog_(std::move(prog)), opts_(opts) {
    if (!opts_.precision_set) {
      VarType inferred = VarType::Double;
      for (const auto& [name, ty] : prog_.decls)
        if (ty == VarType::Float) inferred = VarType::Float;
      scan_inputs(prog_.stmts, &inferred);
      opts_.precision = inferred;
    }
    model_ = ErrorModel::make(opts_.precision);
  }

  Analysis run() {
    AbstractValue st;
    st = exec(prog_.stmts, std::move(st));

    Analysis a;
    a.program = std::move(prog_);
    a.options = opts_;
    a.model = model_;
    a.end_state = std::move(st);
    a.at_joins = std::move(at_joins_);
    a.inputs = std::move(inputs_);
    a.disc_terms = std::move(disc_terms_);
    a.unstable = std::move(unstable_);
    a.diagnostics = std::move(diags_);
    return a;
  }

  static void scan_inputs(const std::vector<StmtPtr>& stmts, VarType* ty) {
    for (const auto& s : stmts) {
      if (s->value && s->value->kind == ExprKind::Input &&
          s->value->input.precision == VarType::Float)
        *ty = VarType::Float;
      scan_inputs(s->then_branch, ty);
      scan_inputs(s->else_branch, ty);
    }
  }

 private:
  // ----------------------------------------------------------- contexts

  ConstraintSet hull_ctx(const AbstractValue& X) const { return hull(X.phi_r, X.phi_f); }

  const ConstraintSet& float_phi(const AbstractValue& X) const {
    return X.phi_f.is_empty() ? X.phi_r : X.phi_f;
  }

  Interval bound_disc(const AffineForm& d) const {
    return d.eval([this](const NoiseSym& s) {
      auto it = disc_ranges_.find(s.id);
      return it == disc_ranges_.end() ? Interval::unit() : it->second;
    });
  }

  NoiseSym fresh_disc(uint32_t origin, const Interval& range) {
    NoiseSym s = alloc_.fresh(NoiseKind::Disc, origin);
    disc_ranges_[s.id] = range;
    return s;
  }

  // Folds an interval deviation into (center-shift, fresh-symbol term).
  void fold_into(AffineForm* f, const Interval& dev, NoiseKind kind, uint32_t origin) {
    if (dev.lo().is_zero() && dev.hi().is_zero()) return;
    Scalar mid = dev.mid();
    Scalar h1 = Scalar::sub(dev.hi(), mid, P, MPFR_RNDU);
    Scalar h2 = Scalar::sub(mid, dev.lo(), P, MPFR_RNDU);
    Scalar half = Scalar::max(h1, h2);
    if (kind == NoiseKind::Disc) {
      // discontinuity forms stay centerless; encode the deviation in the
      // symbol's registered range
      Scalar w = dev.mag();
      if (!w.is_zero()) *f = f->with_term(fresh_disc(origin, dev / Interval::point(w)), w);
      return;
    }
    *f = f->plus(mid);
    if (!half.is_zero()) *f = f->with_term(alloc_.fresh(kind, origin), half);
  }

  // mid-scaling of a form by an interval factor; deviation folded into a
  // fresh symbol of the given kind
  AffineForm scale_by_interval(const AffineForm& f, const Interval& k, NoiseKind kind,
                               uint32_t origin, const Interval& f_range) {
    Scalar m = k.mid();
    AffineForm out = f.scaled(m);
    Interval dev = (k - Interval::point(m)) * f_range;
    fold_into(&out, dev, kind, origin);
    return out;
  }

  void mark_bifocal_from(const AffineForm& f, const NoiseSym& fresh) {
    for (const auto& t : f.terms()) {
      if (bifocal_.count(t.sym.id)) {
        bifocal_.emplace(fresh.id, fresh);
        return;
      }
    }
  }

  std::set<uint32_t> bifocal_ids() const {
    std::set<uint32_t> ids;
    for (const auto& [id, s] : bifocal_) ids.insert(id);
    return ids;
  }

  // ----------------------------------------------------------- eval

  Scalar round_pad(const Interval& v) const {
    return Scalar::add(Scalar::mul(model_.relative_unit, v.mag(), P, MPFR_RNDU),
                       model_.subnormal_unit, P, MPFR_RNDU);
  }

  // one rounding step on top of an exactly-computed float range
  Interval inflate_float(const Interval& v) const {
    Scalar pad = round_pad(v);
    return v + Interval(pad.exact_neg(), pad);
  }

  // inverse direction (for backward test refinement through rounded ops)
  Interval widen_for_backward(const Interval& v) const {
    Scalar pad = round_pad(v).ldexp(1);
    return v + Interval(pad.exact_neg(), pad);
  }

  // `raw` is the pre-rounding float range of the operation's result
  void add_rounding(EvalOut* out, AbstractValue& X, uint32_t cp, const Interval& raw) {
    Interval fr = float_phi(X).bound(AffineForm::add(out->r, out->e));
    if (auto t = fr.intersect(raw)) fr = *t;
    Scalar delta = round_pad(fr);
    if (!delta.is_zero())
      out->e = out->e.with_term(alloc_.fresh(NoiseKind::Error, cp), delta);
  }

  EvalOut make_unbounded() {
    EvalOut o;
    o.unbounded = true;
    o.ia = huge_interval();
    o.ia_f = huge_interval();
    return o;
  }

  bool pure_constant(const EvalOut& v) const {
    return !v.unbounded && v.r.is_constant() && is_zero_form(v.e) && is_zero_form(v.d);
  }

  EvalOut eval(const Expr* e, AbstractValue& X, uint32_t cp) {
    switch (e->kind) {
      case ExprKind::Literal: return eval_literal(e, cp);
      case ExprKind::Var: {
        auto it = X.vars.find(e->text);
        if (it == X.vars.end())
          throw AnalysisError("variable " + e->text + " is unassigned", (int)cp);
        EvalOut o;
        if (it->second.unbounded) return make_unbounded();
        o.r = it->second.real;
        o.e = it->second.err;
        o.d = it->second.disc;
        o.ia = it->second.ia_real;
        o.ia_f = it->second.ia_float;
        return o;
      }
      case ExprKind::Add:
      case ExprKind::Sub: {
        EvalOut a = eval(e->lhs.get(), X, cp);
        EvalOut b = eval(e->rhs.get(), X, cp);
        if (a.unbounded || b.unbounded) return make_unbounded();
        bool sub = e->kind == ExprKind::Sub;
        EvalOut o;
        Scalar sgn(sub ? -1L : 1L);
        o.r = AffineForm::combine(Scalar(1L), a.r, sgn, b.r, Scalar());
        o.e = AffineForm::combine(Scalar(1L), a.e, sgn, b.e, Scalar());
        o.d = AffineForm::combine(Scalar(1L), a.d, sgn, b.d, Scalar());
        o.ia = sub ? a.ia - b.ia : a.ia + b.ia;
        Interval raw = sub ? a.ia_f - b.ia_f : a.ia_f + b.ia_f;
        // adding an exact zero is exact; everything else rounds
        bool exact = (pure_constant(a) && a.r.center().is_zero()) ||
                     (pure_constant(b) && b.r.center().is_zero());
        if (pure_constant(a) && pure_constant(b)) {
          Scalar v = sub ? exact_sub(a.r.center(), b.r.center())
                         : exact_add(a.r.center(), b.r.center());
          exact = model_.representable(v);
        }
        o.ia_f = exact ? raw : inflate_float(raw);
        if (!exact) add_rounding(&o, X, cp, raw);
        return o;
      }
      case ExprKind::Neg: {
        EvalOut a = eval(e->lhs.get(), X, cp);
        if (a.unbounded) return a;
        a.r = a.r.negated();
        a.e = a.e.negated();
        a.d = a.d.negated();
        a.ia = -a.ia;
        a.ia_f = -a.ia_f;
        return a;
      }
      case ExprKind::Mul: {
        EvalOut a = eval(e->lhs.get(), X, cp);
        EvalOut b = eval(e->rhs.get(), X, cp);
        return eval_mul(std::move(a), std::move(b), X, cp, /*with_rounding=*/true);
      }
      case ExprKind::Div: {
        EvalOut a = eval(e->lhs.get(), X, cp);
        EvalOut b = eval(e->rhs.get(), X, cp);
        return eval_div(std::move(a), std::move(b), X, cp);
      }
      case ExprKind::Sqrt: {
        EvalOut a = eval(e->lhs.get(), X, cp);
        return eval_sqrt(std::move(a), X, cp);
      }
      case ExprKind::Input: return eval_input(e, cp);
    }
    throw AnalysisError("unreachable expression kind", (int)cp);
  }

  EvalOut eval_literal(const Expr* e, uint32_t cp) {
    EvalOut o;
    Scalar v = Scalar::from_decimal(e->text);
    o.r = AffineForm::constant(v);
    o.ia = Interval::point(v);
    o.ia_f = model_.representable(v) ? Interval::point(v) : inflate_float(Interval::point(v));
    if (!model_.representable(v)) {
      Scalar half_ulp = Scalar::add(
          Scalar::mul(model_.relative_unit, v.abs(), P, MPFR_RNDU), model_.subnormal_unit, P,
          MPFR_RNDU);
      o.e = o.e.with_term(alloc_.fresh(NoiseKind::Error, cp), half_ulp);
    }
    return o;
  }

  EvalOut eval_input(const Expr* e, uint32_t cp) {
    EvalOut o;
    Interval real(Scalar::from_decimal(e->input.real_lo), Scalar::from_decimal(e->input.real_hi));
    Interval err(Scalar::from_decimal(e->input.err_lo), Scalar::from_decimal(e->input.err_hi));
    NoiseSym rs = alloc_.fresh(NoiseKind::Real, 0);
    NoiseSym es = alloc_.fresh(NoiseKind::Error, 0);
    o.r = AffineForm::from_interval(real, rs);
    o.e = AffineForm::from_interval(err, es);
    o.ia = real;
    o.ia_f = inflate_float(real + err);
    o.in_real = rs;
    o.in_err = es;
    o.has_in_real = o.r.mentions(rs.id);
    o.has_in_err = o.e.mentions(es.id);
    o.in_real_range = real;
    o.in_err_range = err;
    (void)cp;
    return o;
  }

  EvalOut eval_mul(EvalOut a, EvalOut b, AbstractValue& X, uint32_t cp, bool with_rounding) {
    if (a.unbounded || b.unbounded) return make_unbounded();
    // scaling by an exact constant keeps everything linear
    if (pure_constant(a) || pure_constant(b)) {
      const EvalOut& c = pure_constant(a) ? a : b;
      const EvalOut& x = pure_constant(a) ? b : a;
      const Scalar& k = c.r.center();
      EvalOut o;
      o.r = x.r.scaled(k);
      o.e = x.e.scaled(k);
      o.d = x.d.scaled(k);
      o.ia = x.ia.scale(k);
      Interval raw = x.ia_f.scale(k);
      long p2 = 0;
      bool exact = is_pow2(k, &p2) || k.is_zero();
      if (pure_constant(a) && pure_constant(b))
        exact = model_.representable(exact_mul(a.r.center(), b.r.center()));
      o.ia_f = exact || !with_rounding ? raw : inflate_float(raw);
      if (!exact && with_rounding) add_rounding(&o, X, cp, raw);
      return o;
    }

    ConstraintSet ctx = hull_ctx(X);
    LinearizedOp lin = mul(a.r, b.r, ctx, alloc_, cp);
    if (lin.has_residue) {
      mark_bifocal_from(a.r, lin.record.symbol);
      mark_bifocal_from(b.r, lin.record.symbol);
      X.records.push_back(lin.record);
    }

    EvalOut o;
    o.r = std::move(lin.form);
    o.ia = a.ia * b.ia;
    Interval raw = a.ia_f * b.ia_f;
    o.ia_f = with_rounding ? inflate_float(raw) : raw;

    // error part: ra*eb + rb*ea + ea*eb, linearized at the float-range mids
    const ConstraintSet& fphi = float_phi(X);
    Interval ra = fphi.bound(a.r), rb = fphi.bound(b.r);
    Interval ea = fphi.bound(a.e), eb = fphi.bound(b.e);
    Scalar ca = ra.mid(), cb = rb.mid();
    o.e = AffineForm::combine(cb, a.e, ca, b.e, Scalar());
    Interval cross = (ra - Interval::point(ca)) * eb + (rb - Interval::point(cb)) * ea + ea * eb;
    fold_into(&o.e, cross, NoiseKind::Error, cp);

    // discontinuity part mirrors the error expansion
    if (!is_zero_form(a.d) || !is_zero_form(b.d)) {
      Interval da = bound_disc(a.d), db = bound_disc(b.d);
      o.d = AffineForm::combine(cb, a.d, ca, b.d, Scalar());
      Interval dcross = (ra - Interval::point(ca)) * db + (rb - Interval::point(cb)) * da +
                        ea * db + eb * da + da * db;
      fold_into(&o.d, dcross, NoiseKind::Disc, cp);
    }

    if (with_rounding) add_rounding(&o, X, cp, raw);
    return o;
  }

  EvalOut eval_div(EvalOut a, EvalOut b, AbstractValue& X, uint32_t cp) {
    if (a.unbounded || b.unbounded) return make_unbounded();
    if (pure_constant(b)) {
      const Scalar& k = b.r.center();
      if (k.is_zero()) throw AnalysisError("division by zero", (int)cp);
      long p2 = 0;
      if (is_pow2(k, &p2)) {
        EvalOut o;
        long shift = -p2;
        o.r = k.sgn() < 0 ? a.r.ldexp(shift).negated() : a.r.ldexp(shift);
        o.e = k.sgn() < 0 ? a.e.ldexp(shift).negated() : a.e.ldexp(shift);
        o.d = k.sgn() < 0 ? a.d.ldexp(shift).negated() : a.d.ldexp(shift);
        o.ia = a.ia.ldexp(shift);
        o.ia_f = a.ia_f.ldexp(shift);
        if (k.sgn() < 0) {
          o.ia = -o.ia;
          o.ia_f = -o.ia_f;
        }
        return o;  // exact, no rounding term
      }
      Interval inv = Interval(Scalar(1L), Scalar(1L)) / Interval::point(k);
      EvalOut o;
      ConstraintSet ctx = hull_ctx(X);
      o.r = scale_by_interval(a.r, inv, NoiseKind::Real, cp, ctx.bound(a.r));
      o.e = scale_by_interval(a.e, inv, NoiseKind::Error, cp, float_phi(X).bound(a.e));
      o.d = scale_by_interval(a.d, inv, NoiseKind::Disc, cp, bound_disc(a.d));
      o.ia = a.ia * inv;
      Interval raw = a.ia_f * inv;
      o.ia_f = inflate_float(raw);
      add_rounding(&o, X, cp, raw);
      return o;
    }

    // general division: multiply by a linear enclosure of 1/b
    ConstraintSet ctx = hull_ctx(X);
    Interval fb = float_phi(X).bound(AffineForm::add(b.r, b.e));
    if (auto t = fb.intersect(b.ia_f)) fb = *t;
    if (fb.contains_zero())
      throw AnalysisError("division by a possibly-zero quantity", (int)cp);
    LinearizedOp lin = reciprocal(b.r, ctx, alloc_, cp);
    if (lin.has_residue) {
      mark_bifocal_from(b.r, lin.record.symbol);
      X.records.push_back(lin.record);
    }

    Interval vb = fb.hull(ctx.bound(b.r));
    Interval deriv = -(Interval(Scalar(1L), Scalar(1L)) / (vb * vb));
    EvalOut recip;
    recip.r = std::move(lin.form);
    recip.e = scale_by_interval(b.e, deriv, NoiseKind::Error, cp, float_phi(X).bound(b.e));
    recip.d = scale_by_interval(b.d, deriv, NoiseKind::Disc, cp, bound_disc(b.d));
    if (b.ia.contains_zero()) {
      recip.ia = huge_interval();
    } else {
      recip.ia = Interval(Scalar(1L), Scalar(1L)) / b.ia;
    }
    recip.ia_f = fb.contains_zero() ? huge_interval()
                                    : Interval(Scalar(1L), Scalar(1L)) / fb;
    EvalOut o = eval_mul(std::move(a), std::move(recip), X, cp, /*with_rounding=*/false);
    Interval raw = o.ia_f;
    o.ia_f = inflate_float(raw);
    add_rounding(&o, X, cp, raw);  // one rounding for the division
    return o;
  }

  EvalOut eval_sqrt(EvalOut a, AbstractValue& X, uint32_t cp) {
    if (a.unbounded) return make_unbounded();
    ConstraintSet ctx = hull_ctx(X);
    Interval rr = ctx.bound(a.r);
    if (rr.lo().sgn() < 0)
      throw AnalysisError("square root of a possibly-negative quantity", (int)cp);
    Interval fr = float_phi(X).bound(AffineForm::add(a.r, a.e));
    if (auto t = fr.intersect(a.ia_f)) fr = *t;
    if (fr.lo().sgn() < 0)
      throw AnalysisError("square root of a possibly-negative float value", (int)cp);

    LinearizedOp lin = sqrt_enclosure(a.r, ctx, alloc_, cp);
    if (lin.has_residue) {
      mark_bifocal_from(a.r, lin.record.symbol);
      X.records.push_back(lin.record);
    }
    EvalOut o;
    o.r = std::move(lin.form);
    o.ia = a.ia.lo().sgn() >= 0 ? a.ia.sqrt() : Interval(Scalar(), kHuge);
    Interval raw = a.ia_f.lo().sgn() >= 0 ? a.ia_f.sqrt() : Interval(Scalar(), kHuge);
    o.ia_f = inflate_float(raw);

    Interval v = fr.hull(rr);
    bool err_free = is_zero_form(a.e) && is_zero_form(a.d);
    if (!err_free) {
      if (v.lo().sgn() <= 0)
        throw AnalysisError("cannot bound sqrt derivative near zero", (int)cp);
      Interval deriv = Interval(Scalar(1L), Scalar(1L)) / v.sqrt().ldexp(1);
      o.e = scale_by_interval(a.e, deriv, NoiseKind::Error, cp, float_phi(X).bound(a.e));
      o.d = scale_by_interval(a.d, deriv, NoiseKind::Disc, cp, bound_disc(a.d));
    }
    add_rounding(&o, X, cp, raw);
    return o;
  }

  // ----------------------------------------------------------- interval companion

  Interval ia_eval(const Expr* e, const AbstractValue& X, bool flt) {
    switch (e->kind) {
      case ExprKind::Literal: {
        Scalar v = Scalar::from_decimal(e->text);
        if (flt && !model_.representable(v)) return inflate_float(Interval::point(v));
        return Interval::point(v);
      }
      case ExprKind::Var: {
        auto it = X.vars.find(e->text);
        if (it == X.vars.end() || it->second.unbounded) return huge_interval();
        return flt ? it->second.ia_float : it->second.ia_real;
      }
      case ExprKind::Add: {
        Interval v = ia_eval(e->lhs.get(), X, flt) + ia_eval(e->rhs.get(), X, flt);
        return flt ? inflate_float(v) : v;
      }
      case ExprKind::Sub: {
        Interval v = ia_eval(e->lhs.get(), X, flt) - ia_eval(e->rhs.get(), X, flt);
        return flt ? inflate_float(v) : v;
      }
      case ExprKind::Mul: {
        Interval v = ia_eval(e->lhs.get(), X, flt) * ia_eval(e->rhs.get(), X, flt);
        return flt ? inflate_float(v) : v;
      }
      case ExprKind::Div: {
        Interval d = ia_eval(e->rhs.get(), X, flt);
        if (d.contains_zero()) return huge_interval();
        Interval v = ia_eval(e->lhs.get(), X, flt) / d;
        return flt ? inflate_float(v) : v;
      }
      case ExprKind::Neg: return -ia_eval(e->lhs.get(), X, flt);
      case ExprKind::Sqrt: {
        Interval v = ia_eval(e->lhs.get(), X, flt);
        if (v.lo().sgn() < 0) v = Interval(Scalar(), Scalar::max(v.hi(), Scalar()));
        Interval r = v.sqrt();
        return flt ? inflate_float(r) : r;
      }
      case ExprKind::Input: {
        Interval real(Scalar::from_decimal(e->input.real_lo),
                      Scalar::from_decimal(e->input.real_hi));
        if (!flt) return real;
        Interval err(Scalar::from_decimal(e->input.err_lo),
                     Scalar::from_decimal(e->input.err_hi));
        return inflate_float(real + err);
      }
    }
    return huge_interval();
  }

  void ia_backward(const Expr* e, const Interval& target, AbstractValue& X, bool flt) {
    // rounded operations only constrain their exact result up to one
    // rounding step; widen the target accordingly before inverting
    Interval T = flt ? widen_for_backward(target) : target;
    switch (e->kind) {
      case ExprKind::Var: {
        auto it = X.vars.find(e->text);
        if (it == X.vars.end() || it->second.unbounded) return;
        Interval& slot = flt ? it->second.ia_float : it->second.ia_real;
        if (auto t = slot.intersect(target)) {
          slot = *t;
        } else {
          // this flow cannot reach the branch
          (flt ? X.phi_f : X.phi_r) = ConstraintSet::bottom();
        }
        return;
      }
      case ExprKind::Add: {
        Interval fl = ia_eval(e->lhs.get(), X, flt), fr = ia_eval(e->rhs.get(), X, flt);
        ia_backward(e->lhs.get(), T - fr, X, flt);
        ia_backward(e->rhs.get(), T - fl, X, flt);
        return;
      }
      case ExprKind::Sub: {
        Interval fl = ia_eval(e->lhs.get(), X, flt), fr = ia_eval(e->rhs.get(), X, flt);
        ia_backward(e->lhs.get(), T + fr, X, flt);
        ia_backward(e->rhs.get(), fl - T, X, flt);
        return;
      }
      case ExprKind::Mul: {
        Interval fl = ia_eval(e->lhs.get(), X, flt), fr = ia_eval(e->rhs.get(), X, flt);
        if (!fr.contains_zero()) ia_backward(e->lhs.get(), T / fr, X, flt);
        if (!fl.contains_zero()) ia_backward(e->rhs.get(), T / fl, X, flt);
        return;
      }
      case ExprKind::Div: {
        Interval fl = ia_eval(e->lhs.get(), X, flt), fr = ia_eval(e->rhs.get(), X, flt);
        if (!fr.contains_zero()) ia_backward(e->lhs.get(), T * fr, X, flt);
        if (!T.contains_zero() && !fr.contains_zero())
          ia_backward(e->rhs.get(), fl / T, X, flt);
        return;
      }
      case ExprKind::Neg: ia_backward(e->lhs.get(), -target, X, flt); return;
      case ExprKind::Sqrt: {
        auto nn = T.intersect(Interval(Scalar(), kHuge));
        if (!nn) return;
        ia_backward(e->lhs.get(), (*nn) * (*nn), X, flt);
        return;
      }
      default: return;
    }
  }

  void ia_refine(AbstractValue& X, const Cond* c, bool polarity, bool flt) {
    CmpOp op = polarity ? c->op : cmp_op_negate(c->op);
    if (op == CmpOp::NE) return;
    Interval fl = ia_eval(c->lhs.get(), X, flt), fr = ia_eval(c->rhs.get(), X, flt);
    switch (op) {
      case CmpOp::LE:
      case CmpOp::LT:
        ia_backward(c->lhs.get(), Interval(kHuge.exact_neg(), fr.hi()), X, flt);
        ia_backward(c->rhs.get(), Interval(fl.lo(), kHuge), X, flt);
        break;
      case CmpOp::GE:
      case CmpOp::GT:
        ia_backward(c->lhs.get(), Interval(fr.lo(), kHuge), X, flt);
        ia_backward(c->rhs.get(), Interval(kHuge.exact_neg(), fl.hi()), X, flt);
        break;
      case CmpOp::EQ: {
        auto common = fl.intersect(fr);
        if (!common) {
          (flt ? X.phi_f : X.phi_r) = ConstraintSet::bottom();
          return;
        }
        ia_backward(c->lhs.get(), *common, X, flt);
        ia_backward(c->rhs.get(), *common, X, flt);
        break;
      }
      default: break;
    }
  }

  // ----------------------------------------------------------- statements

  struct Split {
    AbstractValue then_side, else_side;
  };

  Split split_on(AbstractValue X, const Cond* c, uint32_t cp) {
    EvalOut zl = eval(c->lhs.get(), X, cp);
    EvalOut zr = eval(c->rhs.get(), X, cp);
    Split out;
    if (zl.unbounded || zr.unbounded) {
      out.then_side = X;
      out.else_side = std::move(X);
      return out;
    }
    AffineForm z_r = AffineForm::sub(zl.r, zr.r);
    AffineForm z_f = AffineForm::add(z_r, AffineForm::sub(zl.e, zr.e));

    out.then_side = X;
    out.then_side.phi_r = X.phi_r.meet_halfspace(reg_, z_r, c->op, cp);
    out.then_side.phi_f = X.phi_f.meet_halfspace(reg_, z_f, c->op, cp);
    ia_refine(out.then_side, c, true, false);
    ia_refine(out.then_side, c, true, true);

    CmpOp nop = cmp_op_negate(c->op);
    out.else_side = std::move(X);
    out.else_side.phi_r = out.else_side.phi_r.meet_halfspace(reg_, z_r, nop, cp);
    out.else_side.phi_f = out.else_side.phi_f.meet_halfspace(reg_, z_f, nop, cp);
    ia_refine(out.else_side, c, false, false);
    ia_refine(out.else_side, c, false, true);
    return out;
  }

  void condense_state(VarState* vs, uint32_t cp) {
    auto condense = [&](AffineForm* f, NoiseKind kind) {
      if (f->max_precision() <= kCondensePrec) return;
      Scalar slop;
      AffineForm r = f->rounded(kCondensePrec, &slop);
      if (!slop.is_zero()) {
        if (kind == NoiseKind::Disc)
          r = r.with_term(fresh_disc(cp, Interval::unit()), slop);
        else
          r = r.with_term(alloc_.fresh(kind, cp), slop);
      }
      *f = std::move(r);
    };
    condense(&vs->real, NoiseKind::Real);
    condense(&vs->err, NoiseKind::Error);
    condense(&vs->disc, NoiseKind::Disc);
  }

  AbstractValue exec(const std::vector<StmtPtr>& stmts, AbstractValue X) {
    for (const auto& s : stmts) {
      switch (s->kind) {
        case Stmt::Assign: {
          EvalOut v = eval(s->value.get(), X, (uint32_t)s->cp);
          VarState vs;
          vs.unbounded = v.unbounded;
          if (!v.unbounded) {
            vs.real = std::move(v.r);
            vs.err = std::move(v.e);
            vs.disc = std::move(v.d);
            vs.ia_real = v.ia;
            vs.ia_float = v.ia_f;
            condense_state(&vs, (uint32_t)s->cp);
          } else {
            vs.ia_real = huge_interval();
            vs.ia_float = huge_interval();
          }
          if (v.has_in_real || v.has_in_err) {
            InputBinding b;
            b.var = s->target;
            b.cp = s->cp;
            b.real_range = v.in_real_range;
            b.err_range = v.in_err_range;
            b.real_sym = v.in_real;
            b.err_sym = v.in_err;
            b.has_real_sym = v.has_in_real;
            b.has_err_sym = v.has_in_err;
            inputs_.push_back(b);
          }
          X.vars[s->target] = std::move(vs);
          break;
        }
        case Stmt::If: {
          std::vector<LinearizationRecord> base = X.records;
          Split sp = split_on(std::move(X), s->cond.get(), (uint32_t)s->cp);
          AbstractValue tstate = sp.then_side.fully_dead()
                                     ? std::move(sp.then_side)
                                     : exec(s->then_branch, std::move(sp.then_side));
          AbstractValue estate = sp.else_side.fully_dead()
                                     ? std::move(sp.else_side)
                                     : exec(s->else_branch, std::move(sp.else_side));
          X = join_values(std::move(tstate), std::move(estate), (uint32_t)s->cp, s->line,
                          false, base);
          at_joins_[s->cp] = X;
          break;
        }
        case Stmt::While: {
          X = exec_loop(*s, std::move(X));
          at_joins_[s->cp] = X;
          break;
        }
      }
    }
    return X;
  }

  // ----------------------------------------------------------- joins

  static std::set<uint32_t> universe_of(const AbstractValue& X) {
    std::set<uint32_t> u;
    for (const auto& [name, vs] : X.vars) {
      for (const auto& t : vs.real.terms()) u.insert(t.sym.id);
      for (const auto& t : vs.err.terms()) u.insert(t.sym.id);
      for (const auto& t : vs.disc.terms()) u.insert(t.sym.id);
    }
    for (const ConstraintSet* phi : {&X.phi_r, &X.phi_f}) {
      for (const auto& [id, sb] : phi->bounds()) u.insert(id);
      for (const auto& d : phi->slacks())
        for (const auto& t : d.linear.terms()) u.insert(t.sym.id);
    }
    return u;
  }

  Interval bound_zero_subst(const AffineForm& f, const ConstraintSet& ctx,
                            const std::set<uint32_t>& universe, bool disc) {
    AffineForm reduced = f;
    for (const auto& t : f.terms())
      if (!universe.count(t.sym.id)) reduced = reduced.without(t.sym.id);
    return disc ? bound_disc(reduced) : ctx.bound(reduced);
  }

  AffineForm join_forms(const AffineForm& fx, const ConstraintSet& ctx_x,
                        const std::set<uint32_t>& uni_x, const AffineForm& fy,
                        const ConstraintSet& ctx_y, const std::set<uint32_t>& uni_y,
                        NoiseKind kind, uint32_t origin, bool unstable,
                        std::vector<LinearizationRecord>* record_sink) {
    bool disc = kind == NoiseKind::Disc;
    // shared part: coefficients equal on both sides with equal constrained
    // ranges, or present on one side and meaningless on the other
    AffineBuilder common;
    auto ix = fx.terms().begin();
    auto iy = fy.terms().begin();
    while (ix != fx.terms().end() || iy != fy.terms().end()) {
      if (iy == fy.terms().end() ||
          (ix != fx.terms().end() && ix->sym.id < iy->sym.id)) {
        if (!uni_y.count(ix->sym.id)) common.add(ix->sym, ix->coeff);
        ++ix;
      } else if (ix == fx.terms().end() || iy->sym.id < ix->sym.id) {
        if (!uni_x.count(iy->sym.id)) common.add(iy->sym, iy->coeff);
        ++iy;
      } else {
        if (ix->coeff == iy->coeff) {
          Interval bx = disc ? Interval::unit() : ctx_x.bound_of(ix->sym);
          Interval by = disc ? Interval::unit() : ctx_y.bound_of(iy->sym);
          if (bx == by) common.add(ix->sym, ix->coeff);
        }
        ++ix;
        ++iy;
      }
    }
    AffineForm shared = common.build();
    AffineForm rem_x = AffineForm::sub(fx, shared);
    AffineForm rem_y = AffineForm::sub(fy, shared);
    Interval bx = bound_zero_subst(rem_x, ctx_x, uni_x, disc);
    Interval by = bound_zero_subst(rem_y, ctx_y, uni_y, disc);
    Interval both = bx.hull(by);

    if (both.is_point() && disc == false) return shared.plus(both.lo());
    if (disc) {
      // keep discontinuity forms centerless
      Scalar w = both.mag();
      if (w.is_zero()) return shared;
      Interval range = both / Interval::point(w);
      NoiseSym fresh = fresh_disc(origin, range);
      if (unstable) bifocal_.emplace(fresh.id, fresh);
      return shared.with_term(fresh, w);
    }

    Scalar mid = both.mid();
    Scalar h1 = Scalar::sub(both.hi(), mid, P, MPFR_RNDU);
    Scalar h2 = Scalar::sub(mid, both.lo(), P, MPFR_RNDU);
    Scalar w = Scalar::max(h1, h2);
    AffineForm out = shared.plus(mid);
    if (w.is_zero()) return out;
    NoiseSym fresh = alloc_.fresh(kind, origin);
    if (unstable) bifocal_.emplace(fresh.id, fresh);
    mark_bifocal_from(fx, fresh);
    mark_bifocal_from(fy, fresh);
    out = out.with_term(fresh, w);
    if (record_sink) {
      LinearizationRecord rec;
      rec.symbol = fresh;
      rec.kind = LinKind::JoinSelection;
      rec.common = shared;
      rec.residue_mid = mid;
      rec.residue_half = w;
      rec.branches.push_back({fx, ctx_x});
      rec.branches.push_back({fy, ctx_y});
      record_sink->push_back(std::move(rec));
    }
    return out;
  }

  std::vector<LinearizationRecord> records_for_refine(
      const std::vector<LinearizationRecord>& rs) const {
    std::vector<LinearizationRecord> out;
    for (const auto& r : rs) {
      if (r.kind == LinKind::JoinSelection || opts_.refine_nonlinear) out.push_back(r);
    }
    return out;
  }

  // One direction of a potentially unstable test: the finite-precision flow
  // went through F while the ideal flow went through R.
  UnstableDirection direction(const AbstractValue& fside, const AbstractValue& rside,
                              const std::vector<std::string>& vars,
                              const std::vector<LinearizationRecord>& records) {
    UnstableDirection dir;
    if (fside.phi_f.is_empty() || rside.phi_r.is_empty()) return dir;

    // decouple flow-dependent symbols on the finite-precision side
    std::map<uint32_t, NoiseSym> rename;
    std::vector<NoiseSym> to_rename;
    std::set<uint32_t> ids = bifocal_ids();
    auto mentions_bifocal = [&](uint32_t id) { return ids.count(id) != 0; };
    for (const auto& [id, sb] : fside.phi_f.bounds())
      if (mentions_bifocal(id)) to_rename.push_back(bifocal_.at(id));
    for (const auto& d : fside.phi_f.slacks())
      for (const auto& t : d.linear.terms())
        if (mentions_bifocal(t.sym.id) && !rename.count(t.sym.id))
          to_rename.push_back(bifocal_.at(t.sym.id));
    for (const auto& [name, vs] : fside.vars)
      for (const auto& t : vs.real.terms())
        if (mentions_bifocal(t.sym.id)) to_rename.push_back(bifocal_.at(t.sym.id));

    ConstraintSet phif = fside.phi_f.renamed(to_rename, alloc_, &rename);
    ConstraintSet region = meet(phif, rside.phi_r);
    if (region.is_empty()) return dir;

    dir.possible = true;
    dir.region = region;

    std::vector<LinearizationRecord> recs = records_for_refine(records);
    if (!rename.empty()) {
      size_t n = recs.size();
      for (size_t i = 0; i < n; ++i)
        if (record_touches(recs[i], rename)) recs.push_back(rename_record(recs[i], rename));
    }

    for (const auto& name : vars) {
      auto itf = fside.vars.find(name);
      auto itr = rside.vars.find(name);
      if (itf == fside.vars.end() || itr == rside.vars.end()) continue;
      if (itf->second.unbounded || itr->second.unbounded) continue;
      AffineForm diff =
          AffineForm::sub(rename_form(itf->second.real, rename), itr->second.real);
      dir.value_gap[name] = refine_with_linearization(diff, recs, region);
    }
    return dir;
  }

  void note_unstable(uint32_t cp, int line, bool is_loop, UnstableDirection a,
                     UnstableDirection b) {
    for (auto& u : unstable_) {
      if (u.test_cp == (int)cp) {
        auto merge = [](UnstableDirection* into, UnstableDirection&& from) {
          if (!from.possible) return;
          if (!into->possible) {
            *into = std::move(from);
            return;
          }
          into->region = hull(into->region, from.region);
          for (auto& [k, v] : from.value_gap) {
            auto it = into->value_gap.find(k);
            if (it == into->value_gap.end()) into->value_gap[k] = v;
            else it->second = it->second.hull(v);
          }
        };
        merge(&u.float_then, std::move(a));
        merge(&u.float_else, std::move(b));
        return;
      }
    }
    UnstableTestInfo info;
    info.test_cp = (int)cp;
    info.line = line;
    info.is_loop = is_loop;
    info.float_then = std::move(a);
    info.float_else = std::move(b);
    unstable_.push_back(std::move(info));
  }

  AbstractValue join_values(AbstractValue X, AbstractValue Y, uint32_t cp, int line,
                            bool is_loop, const std::vector<LinearizationRecord>& base) {
    if (X.fully_dead()) {
      Y.records = base;
      return Y;
    }
    if (Y.fully_dead()) {
      X.records = base;
      return X;
    }

    AbstractValue Z;
    Z.phi_r = hull(X.phi_r, Y.phi_r);
    Z.phi_f = hull(X.phi_f, Y.phi_f);
    Z.records = base;

    std::vector<LinearizationRecord> branch_records = X.records;
    for (const auto& r : Y.records) branch_records.push_back(r);

    // variables known on both sides survive the join
    for (const auto& [name, vx] : X.vars) {
      auto it = Y.vars.find(name);
      if (it == Y.vars.end()) continue;
      VarState vs;
      vs.unbounded = vx.unbounded || it->second.unbounded;
      vs.ia_real = vx.ia_real.hull(it->second.ia_real);
      if (X.phi_f.is_empty()) vs.ia_float = it->second.ia_float;
      else if (Y.phi_f.is_empty()) vs.ia_float = vx.ia_float;
      else vs.ia_float = vx.ia_float.hull(it->second.ia_float);
      Z.vars[name] = std::move(vs);
    }

    // the two unstable directions and their per-variable value gaps; the
    // directions are mutually exclusive, so one zero-hulled term per
    // variable covers both
    std::vector<std::string> shared_vars;
    for (const auto& [name, vs] : Z.vars) shared_vars.push_back(name);
    UnstableDirection a = direction(X, Y, shared_vars, branch_records);
    UnstableDirection b = direction(Y, X, shared_vars, branch_records);
    bool unstable = a.possible || b.possible;
    for (auto& [name, vs] : Z.vars) {
      if (vs.unbounded) continue;
      Interval magnitude;  // [0,0]
      auto ga = a.value_gap.find(name);
      auto gb = b.value_gap.find(name);
      if (ga != a.value_gap.end()) magnitude = magnitude.hull(ga->second);
      if (gb != b.value_gap.end()) magnitude = magnitude.hull(gb->second);
      Scalar w = magnitude.mag();
      if (w.is_zero()) continue;
      Interval range = magnitude / Interval::point(w);
      NoiseSym sym = fresh_disc(cp, range);
      bifocal_.emplace(sym.id, sym);
      vs.disc = vs.disc.with_term(sym, w);

      DiscontinuityTerm term;
      term.symbol = sym;
      term.range = range;
      term.test_cp = (int)cp;
      term.var = name;
      term.magnitude = magnitude;
      term.region = a.possible && b.possible ? hull(a.region, b.region)
                    : a.possible            ? a.region
                                            : b.region;
      term.float_took_then = a.possible;
      disc_terms_.push_back(std::move(term));
    }
    note_unstable(cp, line, is_loop, std::move(a), std::move(b));

    ConstraintSet ctx_x = hull_ctx(X), ctx_y = hull_ctx(Y);
    std::set<uint32_t> uni_x = universe_of(X), uni_y = universe_of(Y);
    ConstraintSet none;

    for (auto& [name, vs] : Z.vars) {
      const VarState& vx = X.vars.at(name);
      const VarState& vy = Y.vars.at(name);
      if (vs.unbounded) continue;
      vs.real = join_forms(vx.real, ctx_x, uni_x, vy.real, ctx_y, uni_y, NoiseKind::Real, cp,
                           unstable, &Z.records);
      if (X.phi_f.is_empty()) vs.err = vy.err;
      else if (Y.phi_f.is_empty()) vs.err = vx.err;
      else
        vs.err = join_forms(vx.err, X.phi_f, uni_x, vy.err, Y.phi_f, uni_y, NoiseKind::Error,
                            cp, unstable, nullptr);
      AffineForm joined_d = join_forms(vx.disc, none, uni_x, vy.disc, none, uni_y,
                                       NoiseKind::Disc, cp, unstable, nullptr);
      vs.disc = AffineForm::add(joined_d, vs.disc);  // vs.disc holds the new terms
    }
    return Z;
  }

  // ----------------------------------------------------------- loops

  static void assigned_vars(const std::vector<StmtPtr>& stmts, std::set<std::string>* out) {
    for (const auto& s : stmts) {
      if (s->kind == Stmt::Assign) out->insert(s->target);
      assigned_vars(s->then_branch, out);
      assigned_vars(s->else_branch, out);
    }
  }

  // Drops constraints about symbols that no live form mentions; keeps the
  // widened states small enough to iterate.
  static void prune_constraints(AbstractValue* X) {
    std::set<uint32_t> live;
    for (const auto& [name, vs] : X->vars) {
      for (const auto& t : vs.real.terms()) live.insert(t.sym.id);
      for (const auto& t : vs.err.terms()) live.insert(t.sym.id);
      for (const auto& t : vs.disc.terms()) live.insert(t.sym.id);
    }
    auto prune = [&](ConstraintSet* phi) {
      if (phi->is_empty()) return;
      std::set<uint32_t> slack_keep;
      for (const auto& d : phi->slacks()) {
        bool keep = true;
        for (const auto& t : d.linear.terms())
          if (!live.count(t.sym.id)) keep = false;
        if (keep) slack_keep.insert(d.sym.id);
      }
      *phi = phi->restricted_to(live, slack_keep);
    };
    prune(&X->phi_r);
    prune(&X->phi_f);
  }

  AbstractValue widen_box(AbstractValue X, const std::set<std::string>& carried, uint32_t cp) {
    ConstraintSet ctx = hull_ctx(X);
    for (auto& [name, vs] : X.vars) {
      if (!carried.count(name) || vs.unbounded) continue;
      Interval r = ctx.bound(vs.real);
      Interval e = float_phi(X).bound(vs.err);
      Interval d = bound_disc(vs.disc);
      if (r.mag() > kHuge || e.mag() > kHuge) {
        vs.unbounded = true;
        continue;
      }
      vs.real = AffineForm::from_interval(r, alloc_.fresh(NoiseKind::Real, cp));
      vs.err = AffineForm::from_interval(e, alloc_.fresh(NoiseKind::Error, cp));
      vs.disc = AffineForm();
      Scalar w = d.mag();
      if (!w.is_zero())
        vs.disc = vs.disc.with_term(fresh_disc(cp, d / Interval::point(w)), w);
    }
    X.records.clear();
    prune_constraints(&X);
    return X;
  }

  bool contained(const AbstractValue& inner, const AbstractValue& outer) {
    ConstraintSet ictx = hull_ctx(inner), octx = hull_ctx(outer);
    for (const auto& [name, vo] : outer.vars) {
      auto it = inner.vars.find(name);
      if (it == inner.vars.end()) continue;
      const VarState& vi = it->second;
      if (vo.unbounded) continue;
      if (vi.unbounded) return false;
      if (!octx.bound(vo.real).contains(ictx.bound(vi.real))) return false;
      if (!float_phi(outer).bound(vo.err).contains(float_phi(inner).bound(vi.err)))
        return false;
      if (!bound_disc(vo.disc).contains(bound_disc(vi.disc))) return false;
      if (!vo.ia_real.contains(vi.ia_real)) return false;
      if (!vo.ia_float.contains(vi.ia_float)) return false;
    }
    return true;
  }

  AbstractValue widen_union(AbstractValue W, const AbstractValue& next,
                            const std::set<std::string>& carried, uint32_t cp) {
    for (auto& [name, vs] : W.vars) {
      auto it = next.vars.find(name);
      if (it == next.vars.end()) continue;
      if (!carried.count(name)) continue;
      const VarState& vn = it->second;
      if (vs.unbounded) continue;
      if (vn.unbounded) {
        vs.unbounded = true;
        continue;
      }
      ConstraintSet wctx = hull_ctx(W), nctx = hull_ctx(next);
      Interval r = wctx.bound(vs.real).hull(nctx.bound(vn.real));
      Interval e = float_phi(W).bound(vs.err).hull(float_phi(next).bound(vn.err));
      Interval d = bound_disc(vs.disc).hull(bound_disc(vn.disc));
      if (r.mag() > kHuge || e.mag() > kHuge) {
        vs.unbounded = true;
        continue;
      }
      vs.real = AffineForm::from_interval(r, alloc_.fresh(NoiseKind::Real, cp));
      vs.err = AffineForm::from_interval(e, alloc_.fresh(NoiseKind::Error, cp));
      vs.disc = AffineForm();
      Scalar w = d.mag();
      if (!w.is_zero())
        vs.disc = vs.disc.with_term(fresh_disc(cp, d / Interval::point(w)), w);
      vs.ia_real = vs.ia_real.hull(vn.ia_real);
      vs.ia_float = vs.ia_float.hull(vn.ia_float);
    }
    prune_constraints(&W);
    return W;
  }

  AbstractValue exec_loop(const Stmt& s, AbstractValue X) {
    uint32_t cp = (uint32_t)s.cp;
    std::set<std::string> carried;
    assigned_vars(s.then_branch, &carried);
    std::vector<LinearizationRecord> base = X.records;

    std::vector<AbstractValue> exits;
    auto split_and_note = [&](AbstractValue state) {
      Split sp = split_on(std::move(state), s.cond.get(), cp);
      // an unstable loop condition shows up as a nonempty cross meet
      ConstraintSet u1 = meet(sp.then_side.phi_f, sp.else_side.phi_r);
      ConstraintSet u2 = meet(sp.else_side.phi_f, sp.then_side.phi_r);
      UnstableDirection da, db;
      if (!u1.is_empty() && !sp.then_side.phi_f.is_empty() &&
          !sp.else_side.phi_r.is_empty()) {
        da.possible = true;
        da.region = u1;
      }
      if (!u2.is_empty() && !sp.else_side.phi_f.is_empty() &&
          !sp.then_side.phi_r.is_empty()) {
        db.possible = true;
        db.region = u2;
      }
      if (da.possible || db.possible)
        note_unstable(cp, s.line, true, std::move(da), std::move(db));
      return sp;
    };

    AbstractValue cur = std::move(X);
    bool exited = false;
    for (int k = 0; k < std::max(1, opts_.unroll); ++k) {
      Split sp = split_and_note(std::move(cur));
      if (!sp.else_side.fully_dead()) exits.push_back(std::move(sp.else_side));
      if (sp.then_side.fully_dead()) {
        exited = true;
        break;
      }
      cur = exec(s.then_branch, std::move(sp.then_side));
    }

    if (!exited) {
      AbstractValue W = widen_box(std::move(cur), carried, cp);
      bool stable = false;
      for (int i = 0; i < std::max(1, opts_.widen); ++i) {
        Split sp = split_and_note(W);
        if (!sp.else_side.fully_dead()) exits.push_back(std::move(sp.else_side));
        if (sp.then_side.fully_dead()) {
          stable = true;
          break;
        }
        AbstractValue next;
        try {
          next = exec(s.then_branch, std::move(sp.then_side));
        } catch (const std::exception& err) {
          // inside widening, a transfer-function fault widens to top
          diags_.push_back(std::string("loop body gave up during widening: ") + err.what());
          next = W;
          for (auto& [name, vs] : next.vars)
            if (carried.count(name)) vs.unbounded = true;
        }
        if (contained(next, W)) {
          stable = true;
          break;
        }
        W = widen_union(std::move(W), next, carried, cp);
      }
      if (!stable) {
        diags_.push_back("loop at control point " + std::to_string(cp) +
                         " did not stabilize; loop-carried variables are unbounded");
        for (auto& [name, vs] : W.vars)
          if (carried.count(name)) vs.unbounded = true;
        Split sp = split_and_note(std::move(W));
        exits.push_back(std::move(sp.else_side));
      }
    }

    if (exits.empty()) {
      diags_.push_back("loop at control point " + std::to_string(cp) + " never exits");
      AbstractValue dead;
      dead.phi_r = ConstraintSet::bottom();
      dead.phi_f = ConstraintSet::bottom();
      dead.records = base;
      return dead;
    }
    AbstractValue joined = std::move(exits.front());
    for (size_t i = 1; i < exits.size(); ++i)
      joined = join_values(std::move(joined), std::move(exits[i]), cp, s.line, true, base);
    joined.records = base;
    return joined;
  }

 public:
  // engine-owned registry shared with the Analysis result
  std::map<uint32_t, Interval> disc_ranges_;

 private:
  Program prog_;
  AnalyzeOptions opts_;
  ErrorModel model_;
  SymbolAllocator alloc_;
  SlackRegistry reg_{alloc_};
  std::vector<InputBinding> inputs_;
  std::vector<DiscontinuityTerm> disc_terms_;
  std::vector<UnstableTestInfo> unstable_;
  std::map<int, AbstractValue> at_joins_;
  std::vector<std::string> diags_;
  std::map<uint32_t, NoiseSym> bifocal_;
};

}  // namespace

// ===================================================================
// Analysis accessors
// ===================================================================

Interval Analysis::bound_disc_form(const AffineForm& d) const {
  std::map<uint32_t, Interval> ranges;
  for (const auto& t : disc_terms) ranges.emplace(t.symbol.id, t.range);
  return d.eval([&](const NoiseSym& s) {
    auto it = ranges.find(s.id);
    return it == ranges.end() ? Interval::unit() : it->second;
  });
}

std::optional<Interval> Analysis::real_bound(const AbstractValue& st,
                                             const std::string& var) const {
  auto it = st.vars.find(var);
  if (it == st.vars.end() || it->second.unbounded) return std::nullopt;
  if (st.phi_r.is_empty()) return std::nullopt;
  Interval b = st.phi_r.bound(it->second.real);
  if (auto t = b.intersect(it->second.ia_real)) return *t;
  return b;
}

std::optional<Interval> Analysis::float_bound(const AbstractValue& st,
                                              const std::string& var) const {
  auto it = st.vars.find(var);
  if (it == st.vars.end() || it->second.unbounded) return std::nullopt;
  if (st.phi_f.is_empty()) return std::nullopt;
  Interval b = st.phi_f.bound(AffineForm::add(it->second.real, it->second.err));
  if (auto t = b.intersect(it->second.ia_float)) return *t;
  return b;
}

std::optional<Interval> Analysis::err_bound(const AbstractValue& st,
                                            const std::string& var) const {
  auto it = st.vars.find(var);
  if (it == st.vars.end() || it->second.unbounded) return std::nullopt;
  if (st.phi_f.is_empty()) return std::nullopt;
  return st.phi_f.bound(it->second.err);
}

std::optional<Interval> Analysis::disc_bound(const AbstractValue& st,
                                             const std::string& var) const {
  auto it = st.vars.find(var);
  if (it == st.vars.end() || it->second.unbounded) return std::nullopt;
  return bound_disc_form(it->second.disc);
}

std::vector<Analysis::DecompEntry> Analysis::error_decomposition(
    const AbstractValue& st, const std::string& var) const {
  std::vector<DecompEntry> out;
  auto it = st.vars.find(var);
  if (it == st.vars.end() || it->second.unbounded) return out;

  std::map<uint32_t, const DiscontinuityTerm*> by_sym;
  for (const auto& t : disc_terms) by_sym.emplace(t.symbol.id, &t);

  // initial: the error center plus input-origin error symbols
  Interval initial = Interval::point(it->second.err.center());
  bool has_initial = !it->second.err.center().is_zero();
  std::map<int, Interval> rounding;
  for (const auto& t : it->second.err.terms()) {
    Interval contrib = Interval::unit().scale(t.coeff);
    if (t.sym.origin == 0) {
      initial = initial + contrib;
      has_initial = true;
    } else {
      auto r = rounding.find((int)t.sym.origin);
      if (r == rounding.end()) rounding.emplace((int)t.sym.origin, contrib);
      else r->second = r->second + contrib;
    }
  }
  if (has_initial) out.push_back({0, DecompEntry::Initial, initial, -1});
  for (const auto& [cp, iv] : rounding) out.push_back({cp, DecompEntry::Rounding, iv, -1});

  std::map<int, Interval> disc;
  for (const auto& t : it->second.disc.terms()) {
    auto at = by_sym.find(t.sym.id);
    int cp = at != by_sym.end() ? at->second->test_cp : (int)t.sym.origin;
    Interval range = at != by_sym.end() ? at->second->range : Interval::unit();
    Interval contrib = range.scale(t.coeff);
    auto r = disc.find(cp);
    if (r == disc.end()) disc.emplace(cp, contrib);
    else r->second = r->second + contrib;
  }
  for (const auto& [cp, iv] : disc) out.push_back({cp, DecompEntry::Discontinuity, iv, cp});
  return out;
}

Analysis analyze(Program program, const AnalyzeOptions& opts) {
  Engine engine(std::move(program), opts);
  return engine.run();
}

}  // namespace fpdrift
