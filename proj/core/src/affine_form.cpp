// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include "fpdrift/affine_form.hpp"

#include <algorithm>

namespace fpdrift {

AffineForm AffineForm::constant(Scalar c) {
  AffineForm f;
  f.center_ = std::move(c);
  return f;
}

AffineForm AffineForm::from_interval(const Interval& range, NoiseSym fresh) {
  AffineForm f;
  f.center_ = range.mid_exact();
  Scalar half = exact_sub(range.hi(), range.lo()).ldexp(-1);
  if (!half.is_zero()) f.terms_.push_back({fresh, std::move(half)});
  return f;
}

const Scalar* AffineForm::coeff_of(uint32_t id) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), id,
                             [](const Term& t, uint32_t v) { return t.sym.id < v; });
  if (it != terms_.end() && it->sym.id == id) return &it->coeff;
  return nullptr;
}

AffineForm AffineForm::combine(const Scalar& a, const AffineForm& x, const Scalar& b,
                               const AffineForm& y, const Scalar& c) {
  AffineForm f;
  f.center_ = exact_add(exact_add(exact_mul(a, x.center_), exact_mul(b, y.center_)), c);
  f.terms_.reserve(x.terms_.size() + y.terms_.size());
  auto ix = x.terms_.begin(), iy = y.terms_.begin();
  while (ix != x.terms_.end() || iy != y.terms_.end()) {
    if (iy == y.terms_.end() || (ix != x.terms_.end() && ix->sym.id < iy->sym.id)) {
      Scalar v = exact_mul(a, ix->coeff);
      if (!v.is_zero()) f.terms_.push_back({ix->sym, std::move(v)});
      ++ix;
    } else if (ix == x.terms_.end() || iy->sym.id < ix->sym.id) {
      Scalar v = exact_mul(b, iy->coeff);
      if (!v.is_zero()) f.terms_.push_back({iy->sym, std::move(v)});
      ++iy;
    } else {
      Scalar v = exact_add(exact_mul(a, ix->coeff), exact_mul(b, iy->coeff));
      if (!v.is_zero()) f.terms_.push_back({ix->sym, std::move(v)});
      ++ix;
      ++iy;
    }
  }
  return f;
}

AffineForm AffineForm::add(const AffineForm& x, const AffineForm& y) {
  return combine(Scalar(1L), x, Scalar(1L), y, Scalar());
}

AffineForm AffineForm::sub(const AffineForm& x, const AffineForm& y) {
  return combine(Scalar(1L), x, Scalar(-1L), y, Scalar());
}

AffineForm AffineForm::scaled(const Scalar& a) const {
  return combine(a, *this, Scalar(), AffineForm(), Scalar());
}

AffineForm AffineForm::ldexp(long k) const {
  AffineForm f;
  f.center_ = center_.ldexp(k);
  f.terms_.reserve(terms_.size());
  for (const auto& t : terms_) f.terms_.push_back({t.sym, t.coeff.ldexp(k)});
  return f;
}

AffineForm AffineForm::negated() const { return scaled(Scalar(-1L)); }

AffineForm AffineForm::plus(const Scalar& c) const {
  AffineForm f = *this;
  f.center_ = exact_add(f.center_, c);
  return f;
}

AffineForm AffineForm::with_term(NoiseSym sym, const Scalar& coeff) const {
  if (coeff.is_zero()) return *this;
  AffineForm f = *this;
  auto it = std::lower_bound(f.terms_.begin(), f.terms_.end(), sym.id,
                             [](const Term& t, uint32_t v) { return t.sym.id < v; });
  if (it != f.terms_.end() && it->sym.id == sym.id) {
    it->coeff = exact_add(it->coeff, coeff);
    if (it->coeff.is_zero()) f.terms_.erase(it);
  } else {
    f.terms_.insert(it, Term{sym, coeff});
  }
  return f;
}

AffineForm AffineForm::without(uint32_t id) const {
  AffineForm f = *this;
  auto it = std::lower_bound(f.terms_.begin(), f.terms_.end(), id,
                             [](const Term& t, uint32_t v) { return t.sym.id < v; });
  if (it != f.terms_.end() && it->sym.id == id) f.terms_.erase(it);
  return f;
}

Interval AffineForm::eval(const std::function<Interval(const NoiseSym&)>& bound_of) const {
  Interval acc = Interval::point(center_);
  for (const auto& t : terms_) acc = acc + bound_of(t.sym).scale(t.coeff);
  return acc;
}

AffineForm AffineForm::rounded(mpfr_prec_t prec, Scalar* slop_up) const {
  AffineForm f;
  Scalar slop;
  auto round1 = [&](const Scalar& v) {
    Scalar r = Scalar::round_to(v, prec, MPFR_RNDN);
    Scalar dev = exact_sub(v, r).abs();
    slop = Scalar::add(slop, dev, kEvalPrec, MPFR_RNDU);
    return r;
  };
  f.center_ = round1(center_);
  f.terms_.reserve(terms_.size());
  for (const auto& t : terms_) {
    Scalar r = round1(t.coeff);
    if (!r.is_zero()) f.terms_.push_back({t.sym, std::move(r)});
  }
  *slop_up = slop;
  return f;
}

mpfr_prec_t AffineForm::max_precision() const {
  mpfr_prec_t p = center_.precision();
  for (const auto& t : terms_) p = std::max(p, t.coeff.precision());
  return p;
}

bool AffineForm::same_as(const AffineForm& o) const {
  if (!(center_ == o.center_) || terms_.size() != o.terms_.size()) return false;
  for (size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i].sym.id != o.terms_[i].sym.id || !(terms_[i].coeff == o.terms_[i].coeff))
      return false;
  return true;
}

std::string AffineForm::str() const {
  std::string s = center_.str(8, MPFR_RNDN);
  for (const auto& t : terms_) {
    s += " + " + t.coeff.str(8, MPFR_RNDN) + "*e" + std::to_string(t.sym.id);
  }
  return s;
}

void AffineBuilder::add(const NoiseSym& sym, const Scalar& coeff) {
  if (coeff.is_zero()) return;
  terms_.push_back({sym, coeff});
}

AffineForm AffineBuilder::build() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.sym.id < b.sym.id; });
  AffineForm f;
  f.center_ = center_;
  for (const auto& t : terms_) {
    if (!f.terms_.empty() && f.terms_.back().sym.id == t.sym.id) {
      f.terms_.back().coeff = exact_add(f.terms_.back().coeff, t.coeff);
      if (f.terms_.back().coeff.is_zero()) f.terms_.pop_back();
    } else if (!t.coeff.is_zero()) {
      f.terms_.push_back(t);
    }
  }
  return f;
}

}  // namespace fpdrift
