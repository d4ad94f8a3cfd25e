// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// AST for the analyzed language: declarations, assignments, if/while,
// arithmetic over float/double scalars, and the range-with-error input
// builtins. Control points number assignments and conditionals; a
// conditional shares one control point with its join.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fpdrift/constraint_set.hpp"  // CmpOp

namespace fpdrift {

enum class VarType : uint8_t { Float, Double };

struct InputSpec {
  std::string real_lo, real_hi;  // decimal literals
  std::string err_lo, err_hi;
  VarType precision = VarType::Double;
};

enum class ExprKind : uint8_t { Literal, Var, Add, Sub, Mul, Div, Neg, Sqrt, Input };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::Literal;
  std::string text;   // literal text or variable name
  int index = -1;     // array subscript before desugaring, -1 if none
  ExprPtr lhs, rhs;   // operands (rhs empty for unary)
  InputSpec input;
  int line = 0, col = 0;

  ExprPtr clone() const;
};

struct Cond;
using CondPtr = std::unique_ptr<Cond>;

struct Cond {
  enum Kind : uint8_t { Cmp, And, Or } kind = Cmp;
  CmpOp op = CmpOp::LE;
  ExprPtr lhs, rhs;  // Cmp
  CondPtr a, b;      // And / Or
  int line = 0, col = 0;

  CondPtr clone() const;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  enum Kind : uint8_t { Assign, If, While } kind = Assign;
  int cp = 0;  // control point: the assignment, or the test/join of a conditional
  int line = 0;

  // Assign
  std::string target;
  int index = -1;
  ExprPtr value;

  // If / While
  CondPtr cond;
  std::vector<StmtPtr> then_branch;  // also the loop body
  std::vector<StmtPtr> else_branch;

  StmtPtr clone() const;
};

struct Diagnostic {
  int line = 0, col = 0;
  std::string message;
};

struct Program {
  std::vector<StmtPtr> stmts;
  std::map<std::string, VarType> decls;      // declared scalars
  std::map<std::string, int> array_decls;    // declared arrays with size
  std::map<int, int> cp_line;                // control point -> source line
  int max_cp = 0;

  Program() = default;
  Program(Program&&) = default;
  Program& operator=(Program&&) = default;
  Program clone() const;
};

struct ParseResult {
  Program program;
  std::vector<Diagnostic> errors;
  bool ok() const { return errors.empty(); }
};

// Text -> AST. Errors are collected, not thrown.
ParseResult parse(std::string_view source);

// Lowers arrays with constant indices to scalars, expands && / || in if
// conditions into nested conditionals, checks use-before-assignment, and
// numbers control points. Composite while conditions are unsupported.
ParseResult desugar(Program p);

// Canonical rendering; parse(pretty_print(parse(s))) is the identity.
std::string pretty_print(const Program& p);

// Structural equality (modulo control point ids, which are renumbered).
bool same_program(const Program& a, const Program& b);

}  // namespace fpdrift
