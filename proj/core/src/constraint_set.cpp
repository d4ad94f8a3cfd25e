// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include "fpdrift/constraint_set.hpp"

#include <algorithm>
#include <cmath>

namespace fpdrift {

namespace {
const mpfr_prec_t P = kEvalPrec;

// lambda with a == lambda * b, as an outward interval; sign is exact.
Interval ratio_of(const Scalar& a, const Scalar& b) {
  return Interval(Scalar::div(a, b, P, MPFR_RNDD), Scalar::div(a, b, P, MPFR_RNDU));
}

// Exact check that a/b == c/d, via cross products.
bool same_ratio(const Scalar& a, const Scalar& b, const Scalar& c, const Scalar& d) {
  return exact_mul(a, d) == exact_mul(c, b);
}

// Proportional-subset match: every term of `def` appears in `f` with one
// consistent exact ratio. Returns that ratio (f = ratio * def on def's
// symbols) or nullopt.
std::optional<Interval> match_ratio(const AffineForm& f, const AffineForm& def) {
  if (def.is_constant()) return std::nullopt;
  const Scalar* rep_f = nullptr;
  const Scalar* rep_d = nullptr;
  for (const auto& t : def.terms()) {
    const Scalar* c = f.coeff_of(t.sym.id);
    if (!c) return std::nullopt;
    if (!rep_f) {
      rep_f = c;
      rep_d = &t.coeff;
    } else if (!same_ratio(*c, t.coeff, *rep_f, *rep_d)) {
      return std::nullopt;
    }
  }
  return ratio_of(*rep_f, *rep_d);
}

std::string signature_of(const AffineForm& linear) {
  // ratio of each coefficient to the largest magnitude, at double precision;
  // proportional forms produce identical signatures.
  Scalar scale;
  for (const auto& t : linear.terms()) scale = Scalar::max(scale, t.coeff.abs());
  std::string sig;
  for (const auto& t : linear.terms()) {
    double r = Scalar::div(t.coeff, scale, 53, MPFR_RNDN).to_double();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%u:%a;", t.sym.id, r);
    sig += buf;
  }
  return sig;
}

struct Row {
  // sum of coeff * sym == 0
  std::vector<std::pair<NoiseSym, Interval>> terms;
};
}  // namespace

const char* cmp_op_text(CmpOp op) {
  switch (op) {
    case CmpOp::LE: return "<=";
    case CmpOp::LT: return "<";
    case CmpOp::GE: return ">=";
    case CmpOp::GT: return ">";
    case CmpOp::EQ: return "==";
    case CmpOp::NE: return "!=";
  }
  return "?";
}

CmpOp cmp_op_negate(CmpOp op) {
  switch (op) {
    case CmpOp::LE: return CmpOp::GT;
    case CmpOp::LT: return CmpOp::GE;
    case CmpOp::GE: return CmpOp::LT;
    case CmpOp::GT: return CmpOp::LE;
    case CmpOp::EQ: return CmpOp::NE;
    case CmpOp::NE: return CmpOp::EQ;
  }
  return CmpOp::NE;
}

const SlackDef& SlackRegistry::intern(const AffineForm& linear, uint32_t origin) {
  // sign-canonical: first coefficient positive
  AffineForm canon = linear;
  if (!canon.terms().empty() && canon.terms().front().coeff.sgn() < 0) canon = canon.negated();
  std::string sig = signature_of(canon);
  auto& bucket = defs_[sig];
  for (const auto& d : bucket) {
    if (d.linear.size() == canon.size() && match_ratio(canon, d.linear)) return d;
  }
  NoiseKind kind = NoiseKind::Real;
  for (const auto& t : canon.terms())
    if (t.sym.kind == NoiseKind::Error) kind = NoiseKind::Error;
  Scalar scale;
  for (const auto& t : canon.terms()) scale = Scalar::max(scale, t.coeff.abs());
  SlackDef def{alloc_->fresh(kind, origin), canon, scale};
  bucket.push_back(std::move(def));
  return bucket.back();
}

ConstraintSet ConstraintSet::top(const std::vector<NoiseSym>& syms) {
  ConstraintSet s;
  for (const auto& sym : syms) s.bounds_[sym.id] = SymBound{};
  return s;
}

ConstraintSet ConstraintSet::bottom() {
  ConstraintSet s;
  s.empty_ = true;
  return s;
}

bool ConstraintSet::is_slack(uint32_t id) const {
  for (const auto& d : slacks_)
    if (d.sym.id == id) return true;
  return false;
}

const SymBound* ConstraintSet::stored_bound(uint32_t id) const {
  auto it = bounds_.find(id);
  return it == bounds_.end() ? nullptr : &it->second;
}

Interval ConstraintSet::bound_of(const NoiseSym& sym) const {
  if (const SymBound* b = stored_bound(sym.id)) return b->iv;
  for (const auto& d : slacks_) {
    if (d.sym.id == sym.id) {
      Interval v = d.linear.eval([this](const NoiseSym& s) { return bound_of(s); });
      return v / Interval::point(d.scale);
    }
  }
  return Interval::unit();
}

void ConstraintSet::tighten(const NoiseSym& sym, const Interval& iv, bool lo_strict,
                            bool hi_strict) {
  SymBound cur;
  if (const SymBound* b = stored_bound(sym.id)) {
    cur = *b;
  } else {
    cur.iv = bound_of(sym);
  }
  auto isect = cur.iv.intersect(iv);
  if (!isect) {
    empty_ = true;
    return;
  }
  SymBound nb;
  nb.iv = *isect;
  nb.lo_strict = (nb.iv.lo() == iv.lo() && lo_strict) || (nb.iv.lo() == cur.iv.lo() && cur.lo_strict);
  nb.hi_strict = (nb.iv.hi() == iv.hi() && hi_strict) || (nb.iv.hi() == cur.iv.hi() && cur.hi_strict);
  bounds_[sym.id] = nb;
}

ConstraintSet ConstraintSet::meet_halfspace(SlackRegistry& reg, const AffineForm& cond,
                                            CmpOp op, uint32_t origin) const {
  if (empty_) return *this;
  ConstraintSet out = *this;
  if (op == CmpOp::NE) return out;  // removes a measure-zero set only

  const Scalar& c0 = cond.center();
  if (cond.is_constant()) {
    bool holds = true;
    switch (op) {
      case CmpOp::LE: holds = c0.sgn() <= 0; break;
      case CmpOp::LT: holds = c0.sgn() < 0; break;
      case CmpOp::GE: holds = c0.sgn() >= 0; break;
      case CmpOp::GT: holds = c0.sgn() > 0; break;
      case CmpOp::EQ: holds = c0.is_zero(); break;
      default: break;
    }
    if (!holds) out.empty_ = true;
    return out;
  }

  // pick the symbol the constraint is expressed on: the symbol itself for a
  // single-term condition, a slack otherwise
  NoiseSym target;
  Interval coeff = Interval::point(Scalar(1L));
  if (cond.size() == 1) {
    target = cond.terms().front().sym;
    coeff = Interval::point(cond.terms().front().coeff);
  } else {
    AffineForm linear = cond.plus(c0.exact_neg());  // centered copy
    const SlackDef& def = reg.intern(linear, origin);
    if (!out.is_slack(def.sym.id)) out.slacks_.push_back(def);
    std::optional<Interval> lam = match_ratio(linear, def.linear);
    coeff = (*lam) * Interval::point(def.scale);  // cond == c0 + coeff * slack
    target = def.sym;
  }

  // c0 + coeff*target op 0  =>  target op' (-c0 / coeff)
  Interval rhs = Interval::point(c0.exact_neg()) / coeff;
  bool flip = coeff.hi().sgn() < 0;
  CmpOp eff = op;
  if (flip) {
    if (op == CmpOp::LE || op == CmpOp::LT) eff = (op == CmpOp::LE) ? CmpOp::GE : CmpOp::GT;
    else if (op == CmpOp::GE || op == CmpOp::GT) eff = (op == CmpOp::GE) ? CmpOp::LE : CmpOp::LT;
  }
  const Scalar kHuge(1e306);
  switch (eff) {
    case CmpOp::LE:
    case CmpOp::LT:
      out.tighten(target, Interval(kHuge.exact_neg(), rhs.hi()), false, eff == CmpOp::LT);
      break;
    case CmpOp::GE:
    case CmpOp::GT:
      out.tighten(target, Interval(rhs.lo(), kHuge), eff == CmpOp::GT, false);
      break;
    case CmpOp::EQ:
      out.tighten(target, rhs, false, false);
      break;
    default:
      break;
  }
  if (!out.empty_) out.run_propagation();
  return out;
}

void ConstraintSet::run_propagation() {
  if (empty_) return;
  std::vector<Row> rows;
  for (const auto& d : slacks_) {
    Row r;
    r.terms.push_back({d.sym, Interval::point(d.scale.exact_neg())});
    for (const auto& t : d.linear.terms()) r.terms.push_back({t.sym, Interval::point(t.coeff)});
    rows.push_back(std::move(r));
  }
  // derived rows: slack A's definition re-expressed on a smaller slack B
  for (const auto& a : slacks_) {
    for (const auto& b : slacks_) {
      if (a.sym.id == b.sym.id || b.linear.size() >= a.linear.size()) continue;
      auto lam = match_ratio(a.linear, b.linear);
      if (!lam) continue;
      Row r;
      r.terms.push_back({a.sym, Interval::point(a.scale.exact_neg())});
      r.terms.push_back({b.sym, (*lam) * Interval::point(b.scale)});
      for (const auto& t : a.linear.terms())
        if (!b.linear.mentions(t.sym.id)) r.terms.push_back({t.sym, Interval::point(t.coeff)});
      rows.push_back(std::move(r));
    }
  }
  if (rows.empty()) return;

  const Scalar kRelStop(1e-12);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    for (const auto& row : rows) {
      for (size_t k = 0; k < row.terms.size(); ++k) {
        if (row.terms[k].second.contains_zero()) continue;
        Interval acc;  // [0,0]
        for (size_t j = 0; j < row.terms.size(); ++j) {
          if (j == k) continue;
          acc = acc + row.terms[j].second * bound_of(row.terms[j].first);
        }
        Interval cand = (-acc) / row.terms[k].second;
        Interval cur = bound_of(row.terms[k].first);
        auto next = cur.intersect(cand);
        if (!next) {
          empty_ = true;
          return;
        }
        Scalar gain = Scalar::sub(cur.width_up(), next->width_up(), P, MPFR_RNDN);
        Scalar ref = Scalar::max(cur.width_up(), Scalar(1e-300));
        if (Scalar::div(gain, ref, P, MPFR_RNDN) > kRelStop) {
          changed = true;
          SymBound nb;
          if (const SymBound* old = stored_bound(row.terms[k].first.id)) nb = *old;
          nb.iv = *next;
          bounds_[row.terms[k].first.id] = nb;
        }
      }
    }
    if (!changed) break;
  }
}

ConstraintSet ConstraintSet::propagated() const {
  ConstraintSet out = *this;
  out.run_propagation();
  return out;
}

ConstraintSet ConstraintSet::with_bound(const NoiseSym& sym, const Interval& iv) const {
  ConstraintSet out = *this;
  out.tighten(sym, iv, false, false);
  if (!out.empty_) out.run_propagation();
  return out;
}

ConstraintSet ConstraintSet::restricted_to(const std::set<uint32_t>& symbols,
                                           const std::set<uint32_t>& slack_keep) const {
  ConstraintSet out;
  out.empty_ = empty_;
  for (const auto& d : slacks_)
    if (slack_keep.count(d.sym.id)) out.slacks_.push_back(d);
  for (const auto& [id, sb] : bounds_) {
    if (symbols.count(id) || slack_keep.count(id)) out.bounds_.emplace(id, sb);
  }
  return out;
}

Interval ConstraintSet::bound(const AffineForm& f) const {
  Interval naive = f.eval([this](const NoiseSym& s) { return bound_of(s); });
  if (slacks_.empty() || f.is_constant()) return naive;

  // greedy rewrite onto slacks, largest definition first
  std::vector<const SlackDef*> order;
  for (const auto& d : slacks_) order.push_back(&d);
  std::sort(order.begin(), order.end(),
            [](const SlackDef* a, const SlackDef* b) { return a->linear.size() > b->linear.size(); });

  AffineForm rest = f;
  Interval acc = Interval::point(f.center());
  bool rewrote = false;
  for (const SlackDef* d : order) {
    auto lam = match_ratio(rest, d->linear);
    if (!lam) continue;
    rewrote = true;
    for (const auto& t : d->linear.terms()) rest = rest.without(t.sym.id);
    acc = acc + ((*lam) * Interval::point(d->scale)) * bound_of(d->sym);
  }
  if (!rewrote) return naive;
  for (const auto& t : rest.terms()) acc = acc + bound_of(t.sym).scale(t.coeff);
  auto tight = acc.intersect(naive);
  return tight ? *tight : naive;
}

ConstraintSet meet(const ConstraintSet& a, const ConstraintSet& b) {
  if (a.empty_) return a;
  if (b.empty_) return b;
  ConstraintSet out = a;
  for (const auto& d : b.slacks_)
    if (!out.is_slack(d.sym.id)) out.slacks_.push_back(d);
  for (const auto& [id, sb] : b.bounds_) {
    auto it = out.bounds_.find(id);
    if (it == out.bounds_.end()) {
      out.bounds_[id] = sb;
    } else {
      auto isect = it->second.iv.intersect(sb.iv);
      if (!isect) return ConstraintSet::bottom();
      SymBound nb;
      nb.iv = *isect;
      nb.lo_strict = (nb.iv.lo() == sb.iv.lo() && sb.lo_strict) ||
                     (nb.iv.lo() == it->second.iv.lo() && it->second.lo_strict);
      nb.hi_strict = (nb.iv.hi() == sb.iv.hi() && sb.hi_strict) ||
                     (nb.iv.hi() == it->second.iv.hi() && it->second.hi_strict);
      it->second = nb;
    }
  }
  out.run_propagation();
  return out;
}

ConstraintSet hull(const ConstraintSet& a, const ConstraintSet& b) {
  if (a.empty_) return b;
  if (b.empty_) return a;
  ConstraintSet out;
  // slacks kept only when both sides know them
  for (const auto& d : a.slacks_)
    if (b.is_slack(d.sym.id)) out.slacks_.push_back(d);

  auto keep = [&](uint32_t id) {
    if (out.is_slack(id)) return true;
    return !a.is_slack(id) && !b.is_slack(id);
  };
  auto hull_into = [&](uint32_t id, const SymBound& sb, const ConstraintSet& other) {
    if (!keep(id) || out.bounds_.count(id)) return;
    NoiseSym sym{id, NoiseKind::Real, 0};
    Interval ov = other.bounds_.count(id) ? other.bounds_.at(id).iv
                 : other.is_slack(id)     ? other.bound_of(sym)
                                          : Interval::unit();
    SymBound nb;
    nb.iv = sb.iv.hull(ov);
    const SymBound* osb = other.stored_bound(id);
    nb.lo_strict = (nb.iv.lo() == sb.iv.lo() && sb.lo_strict) &&
                   (!osb || !(nb.iv.lo() == osb->iv.lo()) || osb->lo_strict);
    nb.hi_strict = (nb.iv.hi() == sb.iv.hi() && sb.hi_strict) &&
                   (!osb || !(nb.iv.hi() == osb->iv.hi()) || osb->hi_strict);
    out.bounds_[id] = nb;
  };
  for (const auto& [id, sb] : a.bounds_) hull_into(id, sb, b);
  for (const auto& [id, sb] : b.bounds_) hull_into(id, sb, a);
  return out;
}

ConstraintSet ConstraintSet::renamed(const std::vector<NoiseSym>& syms, SymbolAllocator& alloc,
                                     std::map<uint32_t, NoiseSym>* mapping) const {
  ConstraintSet out;
  out.empty_ = empty_;
  for (const auto& s : syms)
    if (!mapping->count(s.id)) (*mapping)[s.id] = alloc.fresh(s.kind, s.origin);

  auto rename_sym = [&](const NoiseSym& s) -> NoiseSym {
    auto it = mapping->find(s.id);
    return it == mapping->end() ? s : it->second;
  };

  // slack defs over renamed primaries become new (fresh) slacks
  std::map<uint32_t, NoiseSym> slack_map;
  for (const auto& d : slacks_) {
    bool touched = false;
    for (const auto& t : d.linear.terms())
      if (mapping->count(t.sym.id)) touched = true;
    if (!touched) {
      out.slacks_.push_back(d);
      continue;
    }
    AffineBuilder bld;
    for (const auto& t : d.linear.terms()) bld.add(rename_sym(t.sym), t.coeff);
    NoiseSym fresh = alloc.fresh(d.sym.kind, d.sym.origin);
    out.slacks_.push_back(SlackDef{fresh, bld.build(), d.scale});
    slack_map[d.sym.id] = fresh;
  }
  for (const auto& [id, sb] : bounds_) {
    uint32_t nid = id;
    if (auto it = mapping->find(id); it != mapping->end()) nid = it->second.id;
    else if (auto it2 = slack_map.find(id); it2 != slack_map.end()) nid = it2->second.id;
    out.bounds_[nid] = sb;
  }
  return out;
}

std::string ConstraintSet::str() const {
  if (empty_) return "{empty}";
  std::string s = "{";
  for (const auto& [id, sb] : bounds_) {
    s += "e" + std::to_string(id) + " in " + sb.iv.str(6) + "; ";
  }
  for (const auto& d : slacks_) s += "s" + std::to_string(d.sym.id) + " := " + d.linear.str() + "; ";
  return s + "}";
}

}  // namespace fpdrift
