// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fpdrift {

// Analysis-level failures: diagnostics that abort the analysis of a program
// (as opposed to programming errors).
class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(const std::string& what, int control_point = -1)
      : std::runtime_error(what), control_point_(control_point) {}
  int control_point() const { return control_point_; }

 private:
  int control_point_;
};

}  // namespace fpdrift
