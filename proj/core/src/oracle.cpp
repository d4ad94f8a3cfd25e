// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include "fpdrift/oracle.hpp"

#include <cmath>
#include <cstring>
#include <set>

#include "fpdrift/errors.hpp"

namespace fpdrift {

namespace {

// Numeric policies. Each provides a value type plus the eight operations the
// language needs; the float policies use native IEEE arithmetic.
template <typename T>
struct NativePolicy {
  using Value = T;
  static Value literal(const std::string& text) { return (Value)strtod(text.c_str(), nullptr); }
  static Value add(Value a, Value b) { return a + b; }
  static Value sub(Value a, Value b) { return a - b; }
  static Value mul(Value a, Value b) { return a * b; }
  static Value div(Value a, Value b) { return a / b; }
  static Value sqrt(Value a) { return std::sqrt(a); }
  static Value neg(Value a) { return -a; }
  static bool bad(Value a) { return !std::isfinite(a); }
  static bool is_nan(Value a) { return std::isnan(a); }
  static int compare(Value a, Value b) { return a < b ? -1 : (a > b ? 1 : 0); }
  static Scalar to_scalar(Value a) { return Scalar((double)a); }
  static std::string key(Value a) {
    char buf[32];
    double d = (double)a;
    std::memcpy(buf, &d, sizeof d);
    return std::string(buf, sizeof d);
  }
};

struct MpfrPolicy {
  using Value = Scalar;
  mpfr_prec_t bits;
  Value literal(const std::string& text) const {
    return Scalar::from_decimal(text, kLiteralPrec);
  }
  Value add(const Value& a, const Value& b) const { return Scalar::add(a, b, bits, MPFR_RNDN); }
  Value sub(const Value& a, const Value& b) const { return Scalar::sub(a, b, bits, MPFR_RNDN); }
  Value mul(const Value& a, const Value& b) const { return Scalar::mul(a, b, bits, MPFR_RNDN); }
  Value div(const Value& a, const Value& b) const { return Scalar::div(a, b, bits, MPFR_RNDN); }
  Value sqrt(const Value& a) const { return Scalar::sqrt(a, bits, MPFR_RNDN); }
  Value neg(const Value& a) const { return a.exact_neg(); }
  bool bad(const Value& a) const { return !a.is_finite(); }
  bool is_nan(const Value& a) const { return mpfr_nan_p(a.raw()) != 0; }
  int compare(const Value& a, const Value& b) const { return a < b ? -1 : (a > b ? 1 : 0); }
  Scalar to_scalar(const Value& a) const { return a; }
  std::string key(const Value& a) const { return a.hash_key(); }
};

struct Halt {
  RunVerdict verdict;
};

template <typename Policy>
class Interp {
 public:
  Interp(const Policy& pol, const Program& prog, const std::vector<InputPoint>& inputs,
         bool real_semantics)
      : pol_(pol), prog_(prog), inputs_(inputs), real_(real_semantics) {}

  Trace go() {
    try {
      exec(prog_.stmts);
    } catch (const Halt& h) {
      trace_.verdict = h.verdict;
    }
    for (const auto& [name, v] : env_) trace_.final_env[name] = pol_.to_scalar(v);
    return std::move(trace_);
  }

 private:
  using Value = typename Policy::Value;

  void step() {
    if (++trace_.steps > kStepLimit) throw Halt{RunVerdict::StepLimit};
  }

  void snapshot(int cp) {
    auto& env = trace_.at_join[cp];
    for (const auto& [name, v] : env_) env[name] = pol_.to_scalar(v);
  }

  Value eval(const Expr* e) {
    switch (e->kind) {
      case ExprKind::Literal: return pol_.literal(e->text);
      case ExprKind::Var: {
        auto it = env_.find(e->text);
        if (it == env_.end()) throw AnalysisError("unassigned variable " + e->text);
        return it->second;
      }
      case ExprKind::Add: return pol_.add(eval(e->lhs.get()), eval(e->rhs.get()));
      case ExprKind::Sub: return pol_.sub(eval(e->lhs.get()), eval(e->rhs.get()));
      case ExprKind::Mul: return pol_.mul(eval(e->lhs.get()), eval(e->rhs.get()));
      case ExprKind::Div: return pol_.div(eval(e->lhs.get()), eval(e->rhs.get()));
      case ExprKind::Neg: return pol_.neg(eval(e->lhs.get()));
      case ExprKind::Sqrt: {
        Value v = eval(e->lhs.get());
        Value r = pol_.sqrt(v);
        if (pol_.is_nan(r)) throw Halt{RunVerdict::DomainFault};
        return r;
      }
      case ExprKind::Input: {
        if (next_input_ >= inputs_.size())
          throw AnalysisError("input valuation shorter than the program's inputs");
        const InputPoint& p = inputs_[next_input_++];
        if (real_) {
          // the real input is float - error, exactly
          Scalar r = exact_sub(Scalar(p.float_value), p.error);
          return to_value(r);
        }
        return pol_.literal(format_double(p.float_value));
      }
    }
    throw AnalysisError("unreachable expression kind");
  }

  // exact conversion hooks (the mpfr policy keeps the scalar as-is)
  Value to_value(const Scalar& s) {
    if constexpr (std::is_same_v<Value, Scalar>) {
      return s;
    } else {
      return (Value)s.to_double();
    }
  }

  static std::string format_double(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
  }

  bool test(const Cond* c) {
    int cmp = pol_.compare(eval(c->lhs.get()), eval(c->rhs.get()));
    switch (c->op) {
      case CmpOp::LE: return cmp <= 0;
      case CmpOp::LT: return cmp < 0;
      case CmpOp::GE: return cmp >= 0;
      case CmpOp::GT: return cmp > 0;
      case CmpOp::EQ: return cmp == 0;
      case CmpOp::NE: return cmp != 0;
    }
    return false;
  }

  void exec(const std::vector<StmtPtr>& stmts) {
    for (const auto& s : stmts) {
      step();
      switch (s->kind) {
        case Stmt::Assign: {
          Value v = eval(s->value.get());
          env_[s->target] = v;
          trace_.at_cp[s->cp] = pol_.to_scalar(v);
          break;
        }
        case Stmt::If: {
          bool t = test(s->cond.get());
          trace_.path.emplace_back(s->cp, t);
          exec(t ? s->then_branch : s->else_branch);
          snapshot(s->cp);
          break;
        }
        case Stmt::While: {
          std::set<std::string> seen;
          long iters = 0;
          while (true) {
            step();
            bool t = test(s->cond.get());
            trace_.path.emplace_back(s->cp, t);
            if (!t) break;
            ++iters;
            trace_.loop_iterations[s->cp] = iters;
            // cycle detection on the loop-visible state: deterministic
            // recurrence of the full environment means nontermination
            std::string state;
            for (const auto& [name, v] : env_) state += name + "=" + pol_.key(v) + ";";
            if (!seen.insert(state).second) {
              trace_.loop_iterations[s->cp] = iters;
              throw Halt{RunVerdict::Cycle};
            }
            exec(s->then_branch);
          }
          if (iters > 0) trace_.loop_iterations[s->cp] = iters;
          snapshot(s->cp);
          break;
        }
      }
    }
  }

  Policy pol_;
  const Program& prog_;
  const std::vector<InputPoint>& inputs_;
  bool real_;
  std::map<std::string, Value> env_;
  size_t next_input_ = 0;
  Trace trace_;
};

}  // namespace

Trace run(const Program& program, const std::vector<InputPoint>& inputs, const RunMode& mode) {
  if (mode.real_semantics) {
    MpfrPolicy pol{mode.extended_bits};
    return Interp<MpfrPolicy>(pol, program, inputs, true).go();
  }
  if (mode.target == VarType::Float) {
    NativePolicy<float> pol;
    return Interp<NativePolicy<float>>(pol, program, inputs, false).go();
  }
  NativePolicy<double> pol;
  return Interp<NativePolicy<double>>(pol, program, inputs, false).go();
}

int first_divergence(const Trace& real_trace, const Trace& float_trace) {
  size_t n = std::min(real_trace.path.size(), float_trace.path.size());
  for (size_t i = 0; i < n; ++i) {
    if (real_trace.path[i].first != float_trace.path[i].first ||
        real_trace.path[i].second != float_trace.path[i].second)
      return real_trace.path[i].first;
  }
  if (real_trace.path.size() != float_trace.path.size()) {
    const auto& longer =
        real_trace.path.size() > float_trace.path.size() ? real_trace : float_trace;
    return longer.path[n].first;
  }
  return -1;
}

}  // namespace fpdrift
