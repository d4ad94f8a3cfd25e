// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Multi-precision scalar on top of MPFR. Linear combinations of analyzer
// coefficients are computed exactly (precision grows as needed); everything
// that cannot be exact goes through explicitly rounded operations so callers
// can account for the direction of the error.

#pragma once

#include <mpfr.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fpdrift {

// Working precision for directed (outward-rounded) interval arithmetic.
inline constexpr mpfr_prec_t kEvalPrec = 256;
// Precision at which decimal literals and "real semantics" values live.
inline constexpr mpfr_prec_t kLiteralPrec = 200;
// Forms whose coefficients outgrow this get condensed (slop -> fresh symbol).
inline constexpr mpfr_prec_t kCondensePrec = 512;
// Hard cap for exact arithmetic; exceeding it aborts the analysis.
inline constexpr mpfr_prec_t kExactCap = 1 << 22;

class ScalarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Scalar {
 public:
  Scalar();                       // zero, minimal precision
  explicit Scalar(double d);      // exact
  explicit Scalar(long i);        // exact
  Scalar(const Scalar& o);
  Scalar(Scalar&& o) noexcept;
  Scalar& operator=(const Scalar& o);
  Scalar& operator=(Scalar&& o) noexcept;
  ~Scalar();

  // Decimal string, round-to-nearest at `prec` bits.
  static Scalar from_decimal(std::string_view text, mpfr_prec_t prec = kLiteralPrec);

  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sgn() const { return mpfr_sgn(v_); }

  // Exact ring operations; throw ScalarError past kExactCap or on non-finite
  // operands.
  friend Scalar exact_add(const Scalar& a, const Scalar& b);
  friend Scalar exact_sub(const Scalar& a, const Scalar& b);
  friend Scalar exact_mul(const Scalar& a, const Scalar& b);
  Scalar exact_neg() const;
  Scalar ldexp(long k) const;  // exact scale by 2^k

  static Scalar round_to(const Scalar& a, mpfr_prec_t prec, mpfr_rnd_t rnd);

  // Directed arithmetic at a fixed precision.
  static Scalar add(const Scalar& a, const Scalar& b, mpfr_prec_t prec, mpfr_rnd_t rnd);
  static Scalar sub(const Scalar& a, const Scalar& b, mpfr_prec_t prec, mpfr_rnd_t rnd);
  static Scalar mul(const Scalar& a, const Scalar& b, mpfr_prec_t prec, mpfr_rnd_t rnd);
  static Scalar div(const Scalar& a, const Scalar& b, mpfr_prec_t prec, mpfr_rnd_t rnd);
  static Scalar sqrt(const Scalar& a, mpfr_prec_t prec, mpfr_rnd_t rnd);
  Scalar abs() const;

  static const Scalar& min(const Scalar& a, const Scalar& b) { return b < a ? b : a; }
  static const Scalar& max(const Scalar& a, const Scalar& b) { return a < b ? b : a; }

  double to_double(mpfr_rnd_t rnd = MPFR_RNDN) const { return mpfr_get_d(v_, rnd); }

  bool operator==(const Scalar& o) const { return mpfr_cmp(v_, o.v_) == 0; }
  bool operator!=(const Scalar& o) const { return !(*this == o); }
  bool operator<(const Scalar& o) const { return mpfr_cmp(v_, o.v_) < 0; }
  bool operator<=(const Scalar& o) const { return mpfr_cmp(v_, o.v_) <= 0; }
  bool operator>(const Scalar& o) const { return mpfr_cmp(v_, o.v_) > 0; }
  bool operator>=(const Scalar& o) const { return mpfr_cmp(v_, o.v_) >= 0; }

  // Decimal rendering with an explicit rounding direction. `sig_digits`
  // counts significant digits.
  std::string str(int sig_digits, mpfr_rnd_t rnd) const;
  // Canonical key (hex mantissa + exponent) for hashing; equal values with
  // different precisions map to the same key.
  std::string hash_key() const;

  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

 private:
  mpfr_t v_;
};

}  // namespace fpdrift
