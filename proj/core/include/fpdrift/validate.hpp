// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Checks analyzer bounds against the concrete oracle: uniform samples plus
// boundary-straddling samples for every test, verifying that ideal values,
// finite-precision values and their difference stay inside the reported
// enclosures, and that every observed path divergence falls inside a
// reported unstable region.

#pragma once

#include "fpdrift/analyzer.hpp"
#include "fpdrift/oracle.hpp"
#include "fpdrift/report.hpp"

namespace fpdrift {

struct ValidateOptions {
  long samples = 10000;
  unsigned long long seed = 12345;
};

ValidationSummary sample_check(const Analysis& analysis, const ValidateOptions& opts);

}  // namespace fpdrift
