// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Noise symbols: each one is an independent uncertainty component in [-1,1].
// Ids are unique for the lifetime of one analysis and a symbol's kind never
// changes after creation.

#pragma once

#include <atomic>
#include <cstdint>

namespace fpdrift {

enum class NoiseKind : uint8_t {
  Real,  // uncertainty on the ideal (real-number) value
  Error, // uncertainty on rounding / initial errors
  Disc,  // discontinuity error introduced at an unstable join
};

struct NoiseSym {
  uint32_t id = 0;
  NoiseKind kind = NoiseKind::Real;
  uint32_t origin = 0;  // control point that introduced it; 0 for inputs

  friend bool operator==(const NoiseSym& a, const NoiseSym& b) { return a.id == b.id; }
  friend bool operator<(const NoiseSym& a, const NoiseSym& b) { return a.id < b.id; }
};

// Hands out globally unique symbol ids. The analyzer owns one per analysis;
// the counter is atomic so concurrent analyses could share one if needed.
class SymbolAllocator {
 public:
  NoiseSym fresh(NoiseKind kind, uint32_t origin) {
    return NoiseSym{next_.fetch_add(1, std::memory_order_relaxed), kind, origin};
  }
  uint32_t issued() const { return next_.load(std::memory_order_relaxed) - 1; }

 private:
  std::atomic<uint32_t> next_{1};
};

}  // namespace fpdrift
