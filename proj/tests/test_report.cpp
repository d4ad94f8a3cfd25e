// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fpdrift/report.hpp"
#include "fpdrift/validate.hpp"

using namespace fpdrift;

namespace {
Analysis analyze_file(const std::string& name, AnalyzeOptions opts = {}) {
  std::ifstream in(std::string(FPDRIFT_CORPUS_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse(ss.str());
  REQUIRE(r.ok());
  ParseResult d = desugar(std::move(r.program));
  REQUIRE(d.ok());
  return analyze(std::move(d.program), opts);
}
}  // namespace

TEST_CASE("json report round-trips exactly") {
  AnalyzeOptions opts;
  opts.precision = VarType::Float;
  opts.precision_set = true;
  Analysis a = analyze_file("running.fx", opts);
  AnalysisReport r = build_report(a, "running.fx");

  ValidateOptions vo;
  vo.samples = 200;
  r.validation = sample_check(a, vo);

  std::string text = render_json(r);
  AnalysisReport back = parse_json_report(text);
  CHECK(back == r);
  CHECK(render_json(back) == text);
}

TEST_CASE("text and json carry identical bounds") {
  Analysis a = analyze_file("sqrt.fx");
  AnalysisReport r = build_report(a, "sqrt.fx");
  std::string text = render_text(r);
  // every bound string in the report appears verbatim in the text rendering
  for (const auto& p : r.points) {
    for (const auto& v : p.vars) {
      if (v.unbounded || !v.real_reachable) continue;
      CAPTURE(v.name);
      CHECK(text.find(v.real.lo) != std::string::npos);
      CHECK(text.find(v.real.hi) != std::string::npos);
      CHECK(text.find(v.total_err.lo) != std::string::npos);
    }
  }
}

TEST_CASE("printed bounds are outward decimal roundings") {
  Analysis a = analyze_file("interpolator.fx");
  AnalysisReport r = build_report(a, "interpolator.fx");
  for (const auto& p : r.points) {
    for (const auto& v : p.vars) {
      if (v.unbounded) continue;
      auto rb = a.real_bound(a.end_state, v.name);
      if (p.cp == -1 && rb) {
        CHECK(Scalar::from_decimal(v.real.lo, kEvalPrec) <= rb->lo());
        CHECK(Scalar::from_decimal(v.real.hi, kEvalPrec) >= rb->hi());
      }
    }
  }
}

TEST_CASE("variables with zero error have no decomposition") {
  Analysis a = analyze_file("transmission.fx");
  AnalysisReport r = build_report(a, "transmission.fx");
  for (const auto& p : r.points) {
    for (const auto& v : p.vars) {
      if (v.name == "pressure1" && p.cp == -1) {
        CHECK(v.decomposition.empty());
      }
    }
  }
}

TEST_CASE("discontinuity rows name their test and region") {
  AnalyzeOptions opts;
  opts.precision = VarType::Float;
  opts.precision_set = true;
  Analysis a = analyze_file("running.fx", opts);
  AnalysisReport r = build_report(a, "running.fx");
  bool found = false;
  for (const auto& p : r.points) {
    if (p.cp != -1) continue;
    for (const auto& v : p.vars) {
      if (v.name != "y") continue;
      for (const auto& d : v.decomposition) {
        if (d.kind != "discontinuity") continue;
        found = true;
        CHECK(d.test_cp == 6);
        REQUIRE(!d.region.empty());
        CHECK(d.region[0].input == "x");
        CHECK(d.region[0].lo_strict);   // 2-u < x_real
        CHECK(!d.region[0].hi_strict);  // x_real <= 2
      }
    }
  }
  CHECK(found);
}

TEST_CASE("report schema file exists and a rendered report matches it structurally") {
  std::ifstream in(std::string(FPDRIFT_CORPUS_DIR) + "/../docs/report.schema.json");
  REQUIRE(in.good());
  nlohmann::json schema = nlohmann::json::parse(in);
  CHECK(schema.at("$schema").get<std::string>().find("json-schema.org") != std::string::npos);

  Analysis a = analyze_file("absdiff.fx");
  nlohmann::json doc = nlohmann::json::parse(render_json(build_report(a, "absdiff.fx")));
  for (const auto& key : schema.at("required"))
    CHECK(doc.contains(key.get<std::string>()));
  // spot-check nested shapes against the schema's property names
  const auto& point_props = schema.at("properties").at("points").at("items").at("properties");
  for (const auto& [key, val] : doc.at("points")[0].items()) CHECK(point_props.contains(key));
}
