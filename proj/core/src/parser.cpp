// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "fpdrift/ast.hpp"

namespace fpdrift {

ExprPtr Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->text = text;
  e->index = index;
  e->input = input;
  e->line = line;
  e->col = col;
  if (lhs) e->lhs = lhs->clone();
  if (rhs) e->rhs = rhs->clone();
  return e;
}

CondPtr Cond::clone() const {
  auto c = std::make_unique<Cond>();
  c->kind = kind;
  c->op = op;
  c->line = line;
  c->col = col;
  if (lhs) c->lhs = lhs->clone();
  if (rhs) c->rhs = rhs->clone();
  if (a) c->a = a->clone();
  if (b) c->b = b->clone();
  return c;
}

StmtPtr Stmt::clone() const {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->cp = cp;
  s->line = line;
  s->target = target;
  s->index = index;
  if (value) s->value = value->clone();
  if (cond) s->cond = cond->clone();
  for (const auto& t : then_branch) s->then_branch.push_back(t->clone());
  for (const auto& t : else_branch) s->else_branch.push_back(t->clone());
  return s;
}

Program Program::clone() const {
  Program p;
  for (const auto& s : stmts) p.stmts.push_back(s->clone());
  p.decls = decls;
  p.array_decls = array_decls;
  p.cp_line = cp_line;
  p.max_cp = max_cp;
  return p;
}

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok : uint8_t {
  End, Ident, Number, LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Semi, Assign, Plus, Minus, Star, Slash,
  Le, Lt, Ge, Gt, EqEq, Ne, AndAnd, OrOr,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run(std::vector<Diagnostic>* errs) {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      Token t;
      t.line = line_;
      t.col = col_;
      if (eof()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = peek();
      if (std::isalpha((unsigned char)c) || c == '_') {
        while (!eof() && (std::isalnum((unsigned char)peek()) || peek() == '_'))
          t.text += get();
        t.kind = Tok::Ident;
      } else if (std::isdigit((unsigned char)c) || (c == '.' && std::isdigit((unsigned char)peek(1)))) {
        while (!eof() && (std::isdigit((unsigned char)peek()) || peek() == '.')) t.text += get();
        if (!eof() && (peek() == 'e' || peek() == 'E')) {
          t.text += get();
          if (!eof() && (peek() == '+' || peek() == '-')) t.text += get();
          while (!eof() && std::isdigit((unsigned char)peek())) t.text += get();
        }
        if (!eof() && (peek() == 'f' || peek() == 'F')) get();  // float suffix, ignored
        t.kind = Tok::Number;
      } else {
        switch (c) {
          case '(': t.kind = Tok::LParen; get(); break;
          case ')': t.kind = Tok::RParen; get(); break;
          case '{': t.kind = Tok::LBrace; get(); break;
          case '}': t.kind = Tok::RBrace; get(); break;
          case '[': t.kind = Tok::LBracket; get(); break;
          case ']': t.kind = Tok::RBracket; get(); break;
          case ',': t.kind = Tok::Comma; get(); break;
          case ';': t.kind = Tok::Semi; get(); break;
          case '+': t.kind = Tok::Plus; get(); break;
          case '-': t.kind = Tok::Minus; get(); break;
          case '*': t.kind = Tok::Star; get(); break;
          case '/': t.kind = Tok::Slash; get(); break;
          case '<': get(); t.kind = match('=') ? Tok::Le : Tok::Lt; break;
          case '>': get(); t.kind = match('=') ? Tok::Ge : Tok::Gt; break;
          case '=': get(); t.kind = match('=') ? Tok::EqEq : Tok::Assign; break;
          case '!':
            get();
            if (match('=')) { t.kind = Tok::Ne; }
            else errs->push_back({t.line, t.col, "unexpected '!'"});
            break;
          case '&':
            get();
            if (match('&')) { t.kind = Tok::AndAnd; }
            else errs->push_back({t.line, t.col, "unexpected '&'"});
            break;
          case '|':
            get();
            if (match('|')) { t.kind = Tok::OrOr; }
            else errs->push_back({t.line, t.col, "unexpected '|'"});
            break;
          default:
            errs->push_back({t.line, t.col, std::string("unexpected character '") + c + "'"});
            get();
            continue;
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  bool eof(size_t k = 0) const { return pos_ + k >= src_.size(); }
  char peek(size_t k = 0) const { return eof(k) ? '\0' : src_[pos_ + k]; }
  char get() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  bool match(char c) {
    if (!eof() && peek() == c) {
      get();
      return true;
    }
    return false;
  }
  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (std::isspace((unsigned char)c)) {
        get();
      } else if (c == '/' && peek(1) == '/') {
        while (!eof() && peek() != '\n') get();
      } else if (c == '/' && peek(1) == '*') {
        get();
        get();
        while (!eof() && !(peek() == '*' && peek(1) == '/')) get();
        if (!eof()) {
          get();
          get();
        }
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

// ---------------------------------------------------------------- parser

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>* errs)
      : toks_(std::move(toks)), errs_(errs) {}

  Program run() {
    Program p;
    while (!at(Tok::End) && errs_->size() < 50) {
      if (auto s = statement(&p); s) p.stmts.push_back(std::move(s));
    }
    return p;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& peek(size_t k = 1) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_ident(const char* s) const { return at(Tok::Ident) && cur().text == s; }
  Token eat() { return toks_[std::min(i_++, toks_.size() - 1)]; }
  bool accept(Tok k) {
    if (at(k)) {
      ++i_;
      return true;
    }
    return false;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) {
      error(std::string("expected ") + what);
      if (!at(Tok::End)) ++i_;
    }
  }
  void error(const std::string& msg) { errs_->push_back({cur().line, cur().col, msg}); }

  StmtPtr statement(Program* p) {
    if (at_ident("float") || at_ident("double")) {
      declaration(p);
      return nullptr;
    }
    if (at_ident("if")) return if_stmt(p);
    if (at_ident("while")) return while_stmt(p);
    if (at_ident("return")) return return_stmt();
    if (at(Tok::Ident)) return assignment();
    error("expected a statement");
    eat();
    return nullptr;
  }

  void declaration(Program* p) {
    VarType ty = cur().text == "float" ? VarType::Float : VarType::Double;
    eat();
    do {
      if (!at(Tok::Ident)) {
        error("expected a name in declaration");
        break;
      }
      std::string name = eat().text;
      if (accept(Tok::LBracket)) {
        if (at(Tok::Number)) {
          p->array_decls[name] = std::atoi(eat().text.c_str());
        } else {
          error("array size must be an integer literal");
        }
        expect(Tok::RBracket, "']'");
        p->decls[name] = ty;
      } else {
        p->decls[name] = ty;
      }
    } while (accept(Tok::Comma));
    expect(Tok::Semi, "';'");
  }

  StmtPtr assignment() {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Assign;
    s->line = cur().line;
    s->target = eat().text;
    if (accept(Tok::LBracket)) {
      if (at(Tok::Number)) {
        s->index = std::atoi(eat().text.c_str());
      } else {
        error("unsupported construct: non-constant array index");
        while (!at(Tok::RBracket) && !at(Tok::End)) eat();
      }
      expect(Tok::RBracket, "']'");
    }
    expect(Tok::Assign, "'='");
    s->value = expr();
    expect(Tok::Semi, "';'");
    return s;
  }

  StmtPtr return_stmt() {
    int line = cur().line;
    eat();
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Assign;
    s->line = line;
    s->target = "__ret";
    s->value = expr();
    expect(Tok::Semi, "';'");
    return s;
  }

  std::vector<StmtPtr> block_or_stmt(Program* p) {
    std::vector<StmtPtr> out;
    if (accept(Tok::LBrace)) {
      while (!at(Tok::RBrace) && !at(Tok::End)) {
        if (auto s = statement(p); s) out.push_back(std::move(s));
      }
      expect(Tok::RBrace, "'}'");
    } else {
      if (auto s = statement(p); s) out.push_back(std::move(s));
    }
    return out;
  }

  StmtPtr if_stmt(Program* p) {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::If;
    s->line = cur().line;
    eat();
    expect(Tok::LParen, "'('");
    s->cond = cond_or();
    expect(Tok::RParen, "')'");
    s->then_branch = block_or_stmt(p);
    if (at_ident("else")) {
      eat();
      s->else_branch = block_or_stmt(p);
    }
    return s;
  }

  StmtPtr while_stmt(Program* p) {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::While;
    s->line = cur().line;
    eat();
    expect(Tok::LParen, "'('");
    s->cond = cond_or();
    expect(Tok::RParen, "')'");
    s->then_branch = block_or_stmt(p);
    return s;
  }

  CondPtr cond_or() {
    CondPtr c = cond_and();
    while (at(Tok::OrOr)) {
      eat();
      auto n = std::make_unique<Cond>();
      n->kind = Cond::Or;
      n->line = c ? c->line : cur().line;
      n->a = std::move(c);
      n->b = cond_and();
      c = std::move(n);
    }
    return c;
  }

  CondPtr cond_and() {
    CondPtr c = cond_atom();
    while (at(Tok::AndAnd)) {
      eat();
      auto n = std::make_unique<Cond>();
      n->kind = Cond::And;
      n->line = c ? c->line : cur().line;
      n->a = std::move(c);
      n->b = cond_atom();
      c = std::move(n);
    }
    return c;
  }

  CondPtr cond_atom() {
    // a parenthesized condition or a comparison; backtrack on failure
    if (at(Tok::LParen)) {
      size_t save = i_;
      size_t esave = errs_->size();
      eat();
      CondPtr inner = cond_or();
      if (errs_->size() == esave && inner && accept(Tok::RParen)) return inner;
      i_ = save;
      errs_->resize(esave);
    }
    auto c = std::make_unique<Cond>();
    c->kind = Cond::Cmp;
    c->line = cur().line;
    c->col = cur().col;
    c->lhs = expr();
    switch (cur().kind) {
      case Tok::Le: c->op = CmpOp::LE; break;
      case Tok::Lt: c->op = CmpOp::LT; break;
      case Tok::Ge: c->op = CmpOp::GE; break;
      case Tok::Gt: c->op = CmpOp::GT; break;
      case Tok::EqEq: c->op = CmpOp::EQ; break;
      case Tok::Ne: c->op = CmpOp::NE; break;
      default:
        error("expected a comparison operator");
        return c;
    }
    eat();
    c->rhs = expr();
    return c;
  }

  ExprPtr make_bin(ExprKind k, ExprPtr a, ExprPtr b, int line, int col) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    e->line = line;
    e->col = col;
    return e;
  }

  ExprPtr expr() {
    ExprPtr e = term();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      ExprKind k = at(Tok::Plus) ? ExprKind::Add : ExprKind::Sub;
      int line = cur().line, col = cur().col;
      eat();
      e = make_bin(k, std::move(e), term(), line, col);
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = factor();
    while (at(Tok::Star) || at(Tok::Slash)) {
      ExprKind k = at(Tok::Star) ? ExprKind::Mul : ExprKind::Div;
      int line = cur().line, col = cur().col;
      eat();
      e = make_bin(k, std::move(e), factor(), line, col);
    }
    return e;
  }

  ExprPtr factor() {
    if (at(Tok::Minus)) {
      int line = cur().line, col = cur().col;
      eat();
      ExprPtr inner = factor();
      if (inner && inner->kind == ExprKind::Literal) {
        inner->text = "-" + inner->text;
        return inner;
      }
      auto e = std::make_unique<Expr>();
      e->kind = ExprKind::Neg;
      e->lhs = std::move(inner);
      e->line = line;
      e->col = col;
      return e;
    }
    return primary();
  }

  std::string number_arg() {
    std::string sign;
    if (accept(Tok::Minus)) sign = "-";
    if (!at(Tok::Number)) {
      error("expected a numeric literal");
      return sign + "0";
    }
    return sign + eat().text;
  }

  ExprPtr primary() {
    auto e = std::make_unique<Expr>();
    e->line = cur().line;
    e->col = cur().col;
    if (at(Tok::Number)) {
      e->kind = ExprKind::Literal;
      e->text = eat().text;
      return e;
    }
    if (at(Tok::LParen)) {
      eat();
      ExprPtr inner = expr();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (at(Tok::Ident)) {
      std::string name = cur().text;
      if (name == "sqrt") {
        eat();
        expect(Tok::LParen, "'('");
        e->kind = ExprKind::Sqrt;
        e->lhs = expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      if (name == "FREAL_WITH_ERROR" || name == "DREAL_WITH_ERROR") {
        eat();
        expect(Tok::LParen, "'('");
        e->kind = ExprKind::Input;
        e->input.precision = name[0] == 'F' ? VarType::Float : VarType::Double;
        e->input.real_lo = number_arg();
        expect(Tok::Comma, "','");
        e->input.real_hi = number_arg();
        expect(Tok::Comma, "','");
        e->input.err_lo = number_arg();
        expect(Tok::Comma, "','");
        e->input.err_hi = number_arg();
        expect(Tok::RParen, "')'");
        return e;
      }
      e->kind = ExprKind::Var;
      e->text = eat().text;
      if (accept(Tok::LBracket)) {
        if (at(Tok::Number)) {
          e->index = std::atoi(eat().text.c_str());
        } else {
          error("unsupported construct: non-constant array index");
          while (!at(Tok::RBracket) && !at(Tok::End)) eat();
        }
        expect(Tok::RBracket, "']'");
      }
      return e;
    }
    error("expected an expression");
    if (!at(Tok::End)) eat();
    e->kind = ExprKind::Literal;
    e->text = "0";
    return e;
  }

  std::vector<Token> toks_;
  std::vector<Diagnostic>* errs_;
  size_t i_ = 0;
};

// ---------------------------------------------------------------- desugar

std::string scalar_name(const std::string& base, int index) {
  return base + "__" + std::to_string(index);
}

void lower_expr(Expr* e, std::vector<Diagnostic>* errs) {
  if (!e) return;
  if (e->kind == ExprKind::Var && e->index >= 0) {
    e->text = scalar_name(e->text, e->index);
    e->index = -1;
  }
  lower_expr(e->lhs.get(), errs);
  lower_expr(e->rhs.get(), errs);
}

void lower_cond(Cond* c, std::vector<Diagnostic>* errs) {
  if (!c) return;
  lower_expr(c->lhs.get(), errs);
  lower_expr(c->rhs.get(), errs);
  lower_cond(c->a.get(), errs);
  lower_cond(c->b.get(), errs);
}

// Expand boolean structure in `cond` into nested ifs over atomic
// comparisons. Branch statement lists are cloned where the expansion
// duplicates a branch.
StmtPtr expand_cond(CondPtr cond, std::vector<StmtPtr> then_b, std::vector<StmtPtr> else_b,
                    int line);

std::vector<StmtPtr> clone_stmts(const std::vector<StmtPtr>& v) {
  std::vector<StmtPtr> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s->clone());
  return out;
}

StmtPtr expand_cond(CondPtr cond, std::vector<StmtPtr> then_b, std::vector<StmtPtr> else_b,
                    int line) {
  if (cond->kind == Cond::Cmp) {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::If;
    s->line = line;
    s->cond = std::move(cond);
    s->then_branch = std::move(then_b);
    s->else_branch = std::move(else_b);
    return s;
  }
  if (cond->kind == Cond::And) {
    // if (A && B) T else E  ->  if (A) { if (B) T else E' } else E
    std::vector<StmtPtr> inner_then = std::move(then_b);
    std::vector<StmtPtr> inner_else = clone_stmts(else_b);
    StmtPtr inner =
        expand_cond(std::move(cond->b), std::move(inner_then), std::move(inner_else), line);
    std::vector<StmtPtr> outer_then;
    outer_then.push_back(std::move(inner));
    return expand_cond(std::move(cond->a), std::move(outer_then), std::move(else_b), line);
  }
  // if (A || B) T else E  ->  if (A) T else { if (B) T' else E }
  std::vector<StmtPtr> inner_then = clone_stmts(then_b);
  StmtPtr inner = expand_cond(std::move(cond->b), std::move(inner_then), std::move(else_b), line);
  std::vector<StmtPtr> outer_else;
  outer_else.push_back(std::move(inner));
  return expand_cond(std::move(cond->a), std::move(then_b), std::move(outer_else), line);
}

void lower_stmts(std::vector<StmtPtr>* stmts, std::vector<Diagnostic>* errs) {
  for (auto& s : *stmts) {
    if (s->kind == Stmt::Assign) {
      if (s->index >= 0) {
        s->target = scalar_name(s->target, s->index);
        s->index = -1;
      }
      lower_expr(s->value.get(), errs);
    } else {
      lower_cond(s->cond.get(), errs);
      lower_stmts(&s->then_branch, errs);
      lower_stmts(&s->else_branch, errs);
      if (s->kind == Stmt::If && s->cond && s->cond->kind != Cond::Cmp) {
        StmtPtr expanded = expand_cond(std::move(s->cond), std::move(s->then_branch),
                                       std::move(s->else_branch), s->line);
        s = std::move(expanded);
      } else if (s->kind == Stmt::While && s->cond && s->cond->kind != Cond::Cmp) {
        errs->push_back({s->line, 0, "unsupported construct: composite loop condition"});
      }
    }
  }
}

void number_stmts(std::vector<StmtPtr>* stmts, Program* p) {
  for (auto& s : *stmts) {
    if (s->kind == Stmt::Assign) {
      s->cp = ++p->max_cp;
    } else {
      number_stmts(&s->then_branch, p);
      number_stmts(&s->else_branch, p);
      s->cp = ++p->max_cp;
    }
    p->cp_line[s->cp] = s->line;
  }
}

void check_use(const Expr* e, const std::set<std::string>& assigned,
               std::vector<Diagnostic>* errs) {
  if (!e) return;
  if (e->kind == ExprKind::Var && !assigned.count(e->text))
    errs->push_back({e->line, e->col, "use of '" + e->text + "' before assignment"});
  check_use(e->lhs.get(), assigned, errs);
  check_use(e->rhs.get(), assigned, errs);
}

void check_cond_use(const Cond* c, const std::set<std::string>& assigned,
                    std::vector<Diagnostic>* errs) {
  if (!c) return;
  check_use(c->lhs.get(), assigned, errs);
  check_use(c->rhs.get(), assigned, errs);
  check_cond_use(c->a.get(), assigned, errs);
  check_cond_use(c->b.get(), assigned, errs);
}

void check_assignments(const std::vector<StmtPtr>& stmts, std::set<std::string>* assigned,
                       std::vector<Diagnostic>* errs) {
  for (const auto& s : stmts) {
    if (s->kind == Stmt::Assign) {
      check_use(s->value.get(), *assigned, errs);
      assigned->insert(s->target);
    } else if (s->kind == Stmt::If) {
      check_cond_use(s->cond.get(), *assigned, errs);
      std::set<std::string> t = *assigned, e = *assigned;
      check_assignments(s->then_branch, &t, errs);
      check_assignments(s->else_branch, &e, errs);
      for (const auto& name : t)
        if (e.count(name)) assigned->insert(name);
    } else {
      check_cond_use(s->cond.get(), *assigned, errs);
      std::set<std::string> b = *assigned;
      check_assignments(s->then_branch, &b, errs);
      // the loop body may not run; only prior assignments survive
    }
  }
}

// ---------------------------------------------------------------- printer

void print_expr(const Expr* e, std::ostringstream& os, int parent_prec);

int prec_of(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    default: return 4;
  }
}

void print_expr(const Expr* e, std::ostringstream& os, int parent_prec) {
  int prec = prec_of(e->kind);
  bool paren = prec < parent_prec;
  if (paren) os << "(";
  switch (e->kind) {
    case ExprKind::Literal: os << e->text; break;
    case ExprKind::Var:
      os << e->text;
      if (e->index >= 0) os << "[" << e->index << "]";
      break;
    case ExprKind::Add:
      print_expr(e->lhs.get(), os, prec);
      os << " + ";
      print_expr(e->rhs.get(), os, prec + 1);
      break;
    case ExprKind::Sub:
      print_expr(e->lhs.get(), os, prec);
      os << " - ";
      print_expr(e->rhs.get(), os, prec + 1);
      break;
    case ExprKind::Mul:
      print_expr(e->lhs.get(), os, prec);
      os << " * ";
      print_expr(e->rhs.get(), os, prec + 1);
      break;
    case ExprKind::Div:
      print_expr(e->lhs.get(), os, prec);
      os << " / ";
      print_expr(e->rhs.get(), os, prec + 1);
      break;
    case ExprKind::Neg:
      os << "-";
      print_expr(e->lhs.get(), os, prec);
      break;
    case ExprKind::Sqrt:
      os << "sqrt(";
      print_expr(e->lhs.get(), os, 0);
      os << ")";
      break;
    case ExprKind::Input:
      os << (e->input.precision == VarType::Float ? "FREAL_WITH_ERROR(" : "DREAL_WITH_ERROR(")
         << e->input.real_lo << ", " << e->input.real_hi << ", " << e->input.err_lo << ", "
         << e->input.err_hi << ")";
      break;
  }
  if (paren) os << ")";
}

void print_cond(const Cond* c, std::ostringstream& os) {
  switch (c->kind) {
    case Cond::Cmp:
      print_expr(c->lhs.get(), os, 0);
      os << " " << cmp_op_text(c->op) << " ";
      print_expr(c->rhs.get(), os, 0);
      break;
    case Cond::And:
      os << "(";
      print_cond(c->a.get(), os);
      os << ") && (";
      print_cond(c->b.get(), os);
      os << ")";
      break;
    case Cond::Or:
      os << "(";
      print_cond(c->a.get(), os);
      os << ") || (";
      print_cond(c->b.get(), os);
      os << ")";
      break;
  }
}

void print_stmts(const std::vector<StmtPtr>& stmts, std::ostringstream& os, int indent) {
  std::string pad(indent * 2, ' ');
  for (const auto& s : stmts) {
    os << pad;
    switch (s->kind) {
      case Stmt::Assign:
        os << s->target;
        if (s->index >= 0) os << "[" << s->index << "]";
        os << " = ";
        print_expr(s->value.get(), os, 0);
        os << ";\n";
        break;
      case Stmt::If:
        os << "if (";
        print_cond(s->cond.get(), os);
        os << ") {\n";
        print_stmts(s->then_branch, os, indent + 1);
        os << pad << "}";
        if (!s->else_branch.empty()) {
          os << " else {\n";
          print_stmts(s->else_branch, os, indent + 1);
          os << pad << "}";
        }
        os << "\n";
        break;
      case Stmt::While:
        os << "while (";
        print_cond(s->cond.get(), os);
        os << ") {\n";
        print_stmts(s->then_branch, os, indent + 1);
        os << pad << "}\n";
        break;
    }
  }
}

bool same_expr(const Expr* a, const Expr* b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind || a->text != b->text || a->index != b->index) return false;
  if (a->kind == ExprKind::Input) {
    const InputSpec &x = a->input, &y = b->input;
    if (x.real_lo != y.real_lo || x.real_hi != y.real_hi || x.err_lo != y.err_lo ||
        x.err_hi != y.err_hi || x.precision != y.precision)
      return false;
  }
  return same_expr(a->lhs.get(), b->lhs.get()) && same_expr(a->rhs.get(), b->rhs.get());
}

bool same_cond(const Cond* a, const Cond* b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind || a->op != b->op) return false;
  return same_expr(a->lhs.get(), b->lhs.get()) && same_expr(a->rhs.get(), b->rhs.get()) &&
         same_cond(a->a.get(), b->a.get()) && same_cond(a->b.get(), b->b.get());
}

bool same_stmts(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    const Stmt *x = a[i].get(), *y = b[i].get();
    if (x->kind != y->kind || x->target != y->target || x->index != y->index) return false;
    if (!same_expr(x->value.get(), y->value.get())) return false;
    if (!same_cond(x->cond.get(), y->cond.get())) return false;
    if (!same_stmts(x->then_branch, y->then_branch)) return false;
    if (!same_stmts(x->else_branch, y->else_branch)) return false;
  }
  return true;
}

}  // namespace

ParseResult parse(std::string_view source) {
  ParseResult r;
  Lexer lex(source);
  std::vector<Token> toks = lex.run(&r.errors);
  Parser parser(std::move(toks), &r.errors);
  r.program = parser.run();
  return r;
}

ParseResult desugar(Program p) {
  ParseResult r;
  lower_stmts(&p.stmts, &r.errors);
  std::set<std::string> assigned;
  check_assignments(p.stmts, &assigned, &r.errors);
  p.max_cp = 0;
  p.cp_line.clear();
  number_stmts(&p.stmts, &p);
  r.program = std::move(p);
  return r;
}

std::string pretty_print(const Program& p) {
  std::ostringstream os;
  for (const auto& [name, ty] : p.decls) {
    os << (ty == VarType::Float ? "float " : "double ") << name;
    auto it = p.array_decls.find(name);
    if (it != p.array_decls.end()) os << "[" << it->second << "]";
    os << ";\n";
  }
  print_stmts(p.stmts, os, 0);
  return os.str();
}

bool same_program(const Program& a, const Program& b) {
  return a.decls == b.decls && a.array_decls == b.array_decls && same_stmts(a.stmts, b.stmts);
}

}  // namespace fpdrift
