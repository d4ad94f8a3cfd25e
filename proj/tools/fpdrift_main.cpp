// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fpdrift/report.hpp"
#include "fpdrift/validate.hpp"

using namespace fpdrift;

int main(int argc, char** argv) {
  CLI::App app{"static rounding / discontinuity analysis for small numeric programs"};
  app.require_subcommand(1);

  CLI::App* an = app.add_subcommand("analyze", "analyze a .fx program");
  std::string file;
  std::string precision = "auto";
  std::string format = "text";
  std::string refine = "off";
  std::string report_point = "all";
  long validate_n = 0;
  unsigned long long seed = 12345;
  int unroll = 8, widen = 50;
  an->add_option("file", file, "source file")->required();
  an->add_option("--precision", precision, "single|double (default: inferred)")
      ->check(CLI::IsMember({"single", "double", "auto"}));
  an->add_option("--format", format, "text|json")->check(CLI::IsMember({"text", "json"}));
  an->add_option("--validate", validate_n, "oracle sample count (0 = off)");
  an->add_option("--seed", seed, "sampling seed");
  an->add_option("--unroll", unroll, "loop unroll limit");
  an->add_option("--widen", widen, "widened loop iteration limit");
  an->add_option("--refine-linearization", refine, "on|off")
      ->check(CLI::IsMember({"on", "off"}));
  an->add_option("--report-point", report_point, "control point id, 'end', or 'all'");

  CLI11_PARSE(app, argc, argv);

  std::ifstream in(file);
  if (!in.good()) {
    std::cerr << "error: cannot read " << file << "\n";
    return 2;
  }
  std::ostringstream ss;
  ss << in.rdbuf();

  ParseResult parsed = parse(ss.str());
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors)
      std::cerr << file << ":" << e.line << ":" << e.col << ": error: " << e.message << "\n";
    return 2;
  }
  ParseResult lowered = desugar(std::move(parsed.program));
  if (!lowered.ok()) {
    for (const auto& e : lowered.errors)
      std::cerr << file << ":" << e.line << ":" << e.col << ": error: " << e.message << "\n";
    return 2;
  }

  AnalyzeOptions opts;
  if (precision != "auto") {
    opts.precision = precision == "single" ? VarType::Float : VarType::Double;
    opts.precision_set = true;
  }
  opts.unroll = unroll;
  opts.widen = widen;
  opts.refine_nonlinear = refine == "on";

  Analysis analysis;
  try {
    analysis = analyze(std::move(lowered.program), opts);
  } catch (const AnalysisError& e) {
    std::cerr << file << ": analysis error";
    if (e.control_point() >= 0) std::cerr << " at control point " << e.control_point();
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << file << ": analysis error: " << e.what() << "\n";
    return 2;
  }

  AnalysisReport report = build_report(analysis, file);

  bool violated = false;
  if (validate_n > 0) {
    ValidateOptions vo;
    vo.samples = validate_n;
    vo.seed = seed;
    ValidationSummary summary = sample_check(analysis, vo);
    violated = summary.containment_violations > 0 || summary.divergent_outside_region > 0;
    report.validation = std::move(summary);
  }

  if (report_point != "all") {
    int want = report_point == "end" ? -1 : std::atoi(report_point.c_str());
    std::vector<PointReport> kept;
    for (auto& p : report.points)
      if (p.cp == want) kept.push_back(std::move(p));
    report.points = std::move(kept);
  }

  for (const auto& d : report.diagnostics) std::cerr << "note: " << d << "\n";
  std::cout << (format == "json" ? render_json(report) : render_text(report));
  return violated ? 3 : 0;
}
