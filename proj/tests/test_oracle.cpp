// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fpdrift/oracle.hpp"

using namespace fpdrift;

namespace {
Program load(const std::string& name) {
  std::ifstream in(std::string(FPDRIFT_CORPUS_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse(ss.str());
  REQUIRE(r.ok());
  ParseResult d = desugar(std::move(r.program));
  REQUIRE(d.ok());
  return std::move(d.program);
}
}  // namespace

TEST_CASE("running example: unstable input takes different paths") {
  Program p = load("running.fx");
  // float input just above the threshold; real input = float - u below it
  double f = 2.0005, e = 0.001;
  std::vector<InputPoint> in{{f, e}};

  Trace real = run(p, in, {true, VarType::Double, 200});
  Trace flt = run(p, in, {false, VarType::Double, 200});

  REQUIRE(real.verdict == RunVerdict::Ok);
  REQUIRE(flt.verdict == RunVerdict::Ok);
  REQUIRE(real.path.size() == 1);
  CHECK(real.path[0] == std::make_pair(6, true));    // real takes then
  CHECK(flt.path[0] == std::make_pair(6, false));    // float takes else
  CHECK(first_divergence(real, flt) == 6);

  // real y = (f - e) + 2, float y = f
  Scalar want_real = exact_add(exact_sub(Scalar(f), Scalar(e)), Scalar(2.0));
  CHECK(real.final_env.at("y") == want_real);
  CHECK(flt.final_env.at("y") == Scalar(f));

  // the float-minus-real error on y is about -2 + u
  double err = flt.final_env.at("y").to_double() - real.final_env.at("y").to_double();
  CHECK(err == doctest::Approx(-2 + e).epsilon(1e-9));
}

TEST_CASE("straight-line programs take identical paths") {
  ParseResult r = parse("x = DREAL_WITH_ERROR(1.0, 2.0, 0.0, 0.001);\ny = x * x + 1;\n");
  REQUIRE(r.ok());
  ParseResult d = desugar(std::move(r.program));
  REQUIRE(d.ok());
  std::vector<InputPoint> in{{1.5, 0.0005}};
  Trace real = run(d.program, in, {true, VarType::Double, 200});
  Trace flt = run(d.program, in, {false, VarType::Double, 200});
  CHECK(first_divergence(real, flt) == -1);
  CHECK(real.path.empty());
}

TEST_CASE("counting loop exits into [0,1)") {
  ParseResult r = parse("x = DREAL_WITH_ERROR(-2.0, -1.0, 0.0, 0.0);\nwhile (x < 0) { x = x + 1; }\n");
  REQUIRE(r.ok());
  ParseResult d = desugar(std::move(r.program));
  REQUIRE(d.ok());
  for (double v : {-2.0, -1.875, -1.5, -1.25, -1.0001, -1.0}) {
    CAPTURE(v);
    std::vector<InputPoint> in{{v, 0.0}};
    Trace t = run(d.program, in, {true, VarType::Double, 200});
    REQUIRE(t.verdict == RunVerdict::Ok);
    double x = t.final_env.at("x").to_double();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("householder: six real iterations, slower in float32") {
  Program p = load("householder.fx");
  int slow_float = 0;
  for (double f : {16.0, 16.0005, 16.001, 16.0015, 16.002}) {
    CAPTURE(f);
    std::vector<InputPoint> in{{f, 0.0}};
    Trace real = run(p, in, {true, VarType::Double, 200});
    REQUIRE(real.verdict == RunVerdict::Ok);
    CHECK(real.loop_iterations.begin()->second <= 6);
    // Output is close to sqrt(Input)
    CHECK(real.final_env.at("should_be_zero").to_double() ==
          doctest::Approx(0.0).epsilon(1e-6));

    Trace flt = run(p, in, {false, VarType::Float, 200});
    if (flt.verdict != RunVerdict::Ok || flt.loop_iterations.begin()->second >= 7) ++slow_float;
  }
  CHECK(slow_float >= 1);  // single precision needs extra iterations somewhere
}

TEST_CASE("oracle is deterministic") {
  Program p = load("sqrt.fx");
  std::vector<InputPoint> in{{1.75, 0.0004}};
  Trace a = run(p, in, {true, VarType::Double, 200});
  Trace b = run(p, in, {true, VarType::Double, 200});
  CHECK(a.final_env.at("S") == b.final_env.at("S"));
  CHECK(a.path == b.path);
  Trace fa = run(p, in, {false, VarType::Double, 200});
  Trace fb = run(p, in, {false, VarType::Double, 200});
  CHECK(fa.final_env.at("S") == fb.final_env.at("S"));
}

TEST_CASE("doubling the oracle precision moves results by less than 2^-100") {
  for (const char* name : {"running.fx", "sqrt.fx", "interpolator.fx", "householder.fx"}) {
    CAPTURE(name);
    Program p = load(name);
    // midpoint-ish inputs for each program's single input
    double f = name == std::string("interpolator.fx") ? 50.0 : name == std::string("running.fx") ? 2.25 : name == std::string("sqrt.fx") ? 1.6 : 16.001;
    std::vector<InputPoint> in{{f, 0.0}, {f, 0.0}};  // extra entries ignored
    Trace t200 = run(p, in, {true, VarType::Double, 200});
    Trace t400 = run(p, in, {true, VarType::Double, 400});
    REQUIRE(t200.verdict == RunVerdict::Ok);
    for (const auto& [var, v200] : t200.final_env) {
      Scalar v400 = t400.final_env.at(var);
      Scalar diff = exact_sub(v200, v400).abs();
      Scalar ref = Scalar::max(Scalar(1.0), v400.abs());
      CHECK(Scalar::div(diff, ref, 64, MPFR_RNDU).to_double() < 7.9e-31);  // 2^-100
    }
  }
}

TEST_CASE("sqrt of a negative quantity is a domain fault") {
  ParseResult r = parse("x = DREAL_WITH_ERROR(-4.0, -2.0, 0.0, 0.0);\ny = sqrt(x);\n");
  REQUIRE(r.ok());
  ParseResult d = desugar(std::move(r.program));
  REQUIRE(d.ok());
  std::vector<InputPoint> in{{-3.0, 0.0}};
  Trace t = run(d.program, in, {true, VarType::Double, 200});
  CHECK(t.verdict == RunVerdict::DomainFault);
}
