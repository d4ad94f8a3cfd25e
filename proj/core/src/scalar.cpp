// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include "fpdrift/scalar.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace fpdrift {

namespace {
constexpr mpfr_prec_t kMinPrec = 16;

mpfr_prec_t clamp_prec(mpfr_prec_t p) {
  if (p < kMinPrec) return kMinPrec;
  if (p > kExactCap) throw ScalarError("scalar precision overflow");
  return p;
}
}  // namespace

Scalar::Scalar() {
  mpfr_init2(v_, kMinPrec);
  mpfr_set_zero(v_, 1);
}

Scalar::Scalar(double d) {
  mpfr_init2(v_, 64);
  mpfr_set_d(v_, d, MPFR_RNDN);  // exact: double fits in 64 bits
}

Scalar::Scalar(long i) {
  mpfr_init2(v_, 64);
  mpfr_set_si(v_, i, MPFR_RNDN);
}

Scalar::Scalar(const Scalar& o) {
  mpfr_init2(v_, mpfr_get_prec(o.v_));
  mpfr_set(v_, o.v_, MPFR_RNDN);
}

Scalar::Scalar(Scalar&& o) noexcept {
  mpfr_init2(v_, kMinPrec);
  mpfr_set_zero(v_, 1);
  mpfr_swap(v_, o.v_);
}

Scalar& Scalar::operator=(const Scalar& o) {
  if (this != &o) {
    mpfr_set_prec(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  return *this;
}

Scalar& Scalar::operator=(Scalar&& o) noexcept {
  if (this != &o) mpfr_swap(v_, o.v_);
  return *this;
}

Scalar::~Scalar() { mpfr_clear(v_); }

Scalar Scalar::from_decimal(std::string_view text, mpfr_prec_t prec) {
  Scalar r;
  mpfr_set_prec(r.v_, clamp_prec(prec));
  std::string s(text);
  if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0)
    throw ScalarError("bad decimal literal: " + s);
  return r;
}

Scalar exact_add(const Scalar& a, const Scalar& b) {
  if (!a.is_finite() || !b.is_finite()) throw ScalarError("non-finite operand");
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  mpfr_exp_t ea = mpfr_get_exp(a.v_), eb = mpfr_get_exp(b.v_);
  mpfr_exp_t la = ea - mpfr_get_prec(a.v_), lb = eb - mpfr_get_prec(b.v_);
  mpfr_prec_t need = clamp_prec(std::max(ea, eb) - std::min(la, lb) + 2);
  Scalar r;
  mpfr_set_prec(r.v_, need);
  int t = mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
  if (t != 0) throw ScalarError("exact_add was inexact");
  return r;
}

Scalar exact_sub(const Scalar& a, const Scalar& b) { return exact_add(a, b.exact_neg()); }

Scalar exact_mul(const Scalar& a, const Scalar& b) {
  if (!a.is_finite() || !b.is_finite()) throw ScalarError("non-finite operand");
  if (a.is_zero() || b.is_zero()) return Scalar();
  mpfr_prec_t need = clamp_prec(mpfr_get_prec(a.v_) + mpfr_get_prec(b.v_) + 1);
  Scalar r;
  mpfr_set_prec(r.v_, need);
  int t = mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
  if (t != 0) throw ScalarError("exact_mul was inexact");
  return r;
}

Scalar Scalar::exact_neg() const {
  Scalar r;
  mpfr_set_prec(r.v_, mpfr_get_prec(v_));
  mpfr_neg(r.v_, v_, MPFR_RNDN);
  return r;
}

Scalar Scalar::ldexp(long k) const {
  Scalar r;
  mpfr_set_prec(r.v_, mpfr_get_prec(v_));
  mpfr_mul_2si(r.v_, v_, k, MPFR_RNDN);
  return r;
}

Scalar Scalar::round_to(const Scalar& a, mpfr_prec_t prec, mpfr_rnd_t rnd) {
  Scalar r;
  mpfr_set_prec(r.v_, clamp_prec(prec));
  mpfr_set(r.v_, a.v_, rnd);
  return r;
}

#define FPDRIFT_DIRECTED(name, fn)                                                        \
  Scalar Scalar::name(const Scalar& a, const Scalar& b, mpfr_prec_t prec, mpfr_rnd_t rnd) { \
    Scalar r;                                                                             \
    mpfr_set_prec(r.v_, clamp_prec(prec));                                                \
    fn(r.v_, a.v_, b.v_, rnd);                                                            \
    return r;                                                                             \
  }
FPDRIFT_DIRECTED(add, mpfr_add)
FPDRIFT_DIRECTED(sub, mpfr_sub)
FPDRIFT_DIRECTED(mul, mpfr_mul)
FPDRIFT_DIRECTED(div, mpfr_div)
#undef FPDRIFT_DIRECTED

Scalar Scalar::sqrt(const Scalar& a, mpfr_prec_t prec, mpfr_rnd_t rnd) {
  Scalar r;
  mpfr_set_prec(r.v_, clamp_prec(prec));
  mpfr_sqrt(r.v_, a.v_, rnd);
  return r;
}

Scalar Scalar::abs() const {
  Scalar r;
  mpfr_set_prec(r.v_, mpfr_get_prec(v_));
  mpfr_abs(r.v_, v_, MPFR_RNDN);
  return r;
}

std::string Scalar::str(int sig_digits, mpfr_rnd_t rnd) const {
  if (!is_finite()) return mpfr_sgn(v_) > 0 ? "inf" : (mpfr_nan_p(v_) ? "nan" : "-inf");
  char fmt[32];
  std::snprintf(fmt, sizeof fmt, "%%.%dR*e", sig_digits - 1);
  char* out = nullptr;
  mpfr_asprintf(&out, fmt, rnd, v_);
  std::string s(out);
  mpfr_free_str(out);
  return s;
}

std::string Scalar::hash_key() const {
  if (is_zero()) return "0";
  mpfr_exp_t e = 0;
  char* m = mpfr_get_str(nullptr, &e, 16, 0, v_, MPFR_RNDN);
  std::string s(m);
  mpfr_free_str(m);
  // strip trailing zeros of the mantissa so precision does not leak in
  size_t end = s.find_last_not_of('0');
  if (end != std::string::npos) s.erase(end + 1);
  return s + "@" + std::to_string(e);
}

}  // namespace fpdrift
