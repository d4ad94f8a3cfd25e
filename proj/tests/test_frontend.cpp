// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fpdrift/ast.hpp"

using namespace fpdrift;

namespace {
std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program parse_ok(const std::string& src) {
  ParseResult r = parse(src);
  for (const auto& e : r.errors) CAPTURE(e.message);
  REQUIRE(r.ok());
  ParseResult d = desugar(std::move(r.program));
  for (const auto& e : d.errors) CAPTURE(e.message);
  REQUIRE(d.ok());
  return std::move(d.program);
}

void collect_cps(const std::vector<StmtPtr>& stmts, std::vector<int>* out) {
  for (const auto& s : stmts) {
    collect_cps(s->then_branch, out);
    collect_cps(s->else_branch, out);
    out->push_back(s->cp);
  }
}
}  // namespace

TEST_CASE("running example yields six control points") {
  Program p = parse_ok(read_file(std::string(FPDRIFT_CORPUS_DIR) + "/running.fx"));
  CHECK(p.max_cp == 6);
  // x=..:1, then-branch y:2 z:3, else-branch y:4 z:5, conditional/join:6
  REQUIRE(p.stmts.size() == 2);
  CHECK(p.stmts[0]->cp == 1);
  CHECK(p.stmts[0]->target == "x");
  const Stmt* iff = p.stmts[1].get();
  CHECK(iff->cp == 6);
  CHECK(iff->then_branch[0]->cp == 2);
  CHECK(iff->then_branch[1]->cp == 3);
  CHECK(iff->else_branch[0]->cp == 4);
  CHECK(iff->else_branch[1]->cp == 5);
}

TEST_CASE("empty file parses to the empty program") {
  Program p = parse_ok("");
  CHECK(p.stmts.empty());
  CHECK(p.max_cp == 0);
}

TEST_CASE("input builtin carries its ranges") {
  Program p = parse_ok("x = FREAL_WITH_ERROR(0.0, 100.0, -0.00001, 0.00001);");
  REQUIRE(p.stmts.size() == 1);
  const Expr* e = p.stmts[0]->value.get();
  REQUIRE(e->kind == ExprKind::Input);
  CHECK(e->input.real_lo == "0.0");
  CHECK(e->input.real_hi == "100.0");
  CHECK(e->input.err_lo == "-0.00001");
  CHECK(e->input.err_hi == "0.00001");
  CHECK(e->input.precision == VarType::Float);
}

TEST_CASE("constant array indices become scalars") {
  Program p = parse_ok("R1[1] = 5 * 2.25;\nx = R1[1] + 1;");
  CHECK(p.stmts[0]->target == "R1__1");
  const Expr* rd = p.stmts[1]->value->lhs.get();
  CHECK(rd->kind == ExprKind::Var);
  CHECK(rd->text == "R1__1");

  // a program without arrays is unchanged by desugaring
  ParseResult r = parse("x = 1.5;\ny = x + 2;");
  Program before = r.program.clone();
  ParseResult d = desugar(std::move(r.program));
  CHECK(same_program(before, d.program));
}

TEST_CASE("non-constant array index is rejected") {
  ParseResult r = parse("i = 1;\nR1[i] = 5;");
  CHECK(!r.ok());
  REQUIRE(!r.errors.empty());
  CHECK(r.errors[0].message.find("unsupported construct") != std::string::npos);
}

TEST_CASE("use before assignment is reported with a location") {
  ParseResult r = parse("y = x + 1;");
  REQUIRE(r.ok());
  ParseResult d = desugar(std::move(r.program));
  REQUIRE(!d.ok());
  CHECK(d.errors[0].message.find("before assignment") != std::string::npos);
  CHECK(d.errors[0].line == 1);
}

TEST_CASE("syntax errors carry line and column") {
  ParseResult r = parse("x = 1;\ny = * 2;");
  CHECK(!r.ok());
  REQUIRE(!r.errors.empty());
  CHECK(r.errors[0].line == 2);
}

TEST_CASE("else-if chains nest and number deterministically") {
  std::string src = read_file(std::string(FPDRIFT_CORPUS_DIR) + "/interpolator.fx");
  Program p1 = parse_ok(src);
  Program p2 = parse_ok(src);
  std::vector<int> c1, c2;
  collect_cps(p1.stmts, &c1);
  collect_cps(p2.stmts, &c2);
  CHECK(c1 == c2);
  CHECK(p1.max_cp == 10);  // 3 table fills, input, 3 assigns, 2 joins, return
}

TEST_CASE("boolean conditions expand to nested conditionals") {
  Program p = parse_ok(
      "x = 1;\n"
      "if (x < 0 || x > 2) { y = 1; } else { y = 2; }\n");
  const Stmt* outer = p.stmts[1].get();
  REQUIRE(outer->kind == Stmt::If);
  REQUIRE(outer->cond->kind == Cond::Cmp);
  // the || lands in the else branch as a nested if
  REQUIRE(outer->else_branch.size() == 1);
  CHECK(outer->else_branch[0]->kind == Stmt::If);

  // composite loop conditions are unsupported
  ParseResult r = parse("x = 1;\nwhile (x < 0 || x > 2) { x = x - 1; }\n");
  REQUIRE(r.ok());
  ParseResult d = desugar(std::move(r.program));
  CHECK(!d.ok());
}

TEST_CASE("parse / pretty-print round trip is the identity") {
  for (const char* name :
       {"running.fx", "absdiff.fx", "interpolator.fx", "sqrt.fx", "householder.fx",
        "transmission.fx"}) {
    CAPTURE(name);
    std::string src = read_file(std::string(FPDRIFT_CORPUS_DIR) + "/" + name);
    ParseResult r1 = parse(src);
    REQUIRE(r1.ok());
    std::string printed = pretty_print(r1.program);
    ParseResult r2 = parse(printed);
    REQUIRE(r2.ok());
    CHECK(same_program(r1.program, r2.program));
    // printing is idempotent
    CHECK(pretty_print(r2.program) == printed);
  }
}

TEST_CASE("all corpus programs desugar cleanly") {
  for (const char* name :
       {"running.fx", "absdiff.fx", "absdiff_u6.fx", "interpolator.fx", "sqrt.fx",
        "householder.fx", "transmission.fx"}) {
    CAPTURE(name);
    std::string src = read_file(std::string(FPDRIFT_CORPUS_DIR) + "/" + name);
    ParseResult r = parse(src);
    REQUIRE(r.ok());
    ParseResult d = desugar(std::move(r.program));
    for (const auto& e : d.errors) CAPTURE(e.message);
    CHECK(d.ok());
  }
}
