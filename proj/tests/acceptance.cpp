// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the binary exits nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "fpdrift/report.hpp"
#include "fpdrift/validate.hpp"

using namespace fpdrift;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

struct Criterion {
  const char* id;
  std::chrono::steady_clock::time_point start;
  bool ok = true;
  double budget_s;

  Criterion(const char* id, double budget_s)
      : id(id), start(std::chrono::steady_clock::now()), budget_s(budget_s) {}

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      g_notes.push_back(std::string(id) + ": " + what);
    }
  }

  void finish() {
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    expect(secs < budget_s, "runtime " + std::to_string(secs) + "s exceeds budget");
    std::printf("%-3s %-60s %s (%.2fs)\n", id, summary_.c_str(), ok ? "PASS" : "FAIL", secs);
    if (!ok) ++g_failures;
  }

  void describe(std::string s) { summary_ = std::move(s); }

 private:
  std::string summary_;
};

Program load(const std::string& name) {
  std::ifstream in(std::string(FPDRIFT_CORPUS_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse(ss.str());
  if (!r.ok()) throw AnalysisError("parse failed for " + name);
  ParseResult d = desugar(std::move(r.program));
  if (!d.ok()) throw AnalysisError("desugar failed for " + name);
  return std::move(d.program);
}

Analysis analyze_corpus(const std::string& name, AnalyzeOptions opts = {}) {
  return analyze(load(name), opts);
}

double width(const Interval& iv) { return iv.width_up().to_double(); }

// ------------------------------------------------------------------ C1

void criterion1() {
  Criterion c("C1", 1.0);
  c.describe("running example: y discontinuity [-2,0], region, direction");
  AnalyzeOptions opts;
  opts.precision = VarType::Float;
  opts.precision_set = true;
  Analysis a = analyze_corpus("running.fx", opts);

  auto yd = a.disc_bound(a.end_state, "y");
  c.expect(yd.has_value(), "y discontinuity bound missing");
  if (yd) {
    c.expect(yd->lo() == Scalar(-2.0), "lower endpoint not exactly -2");
    c.expect(yd->hi() == Scalar(0.0), "upper endpoint not exactly 0");
  }

  c.expect(a.unstable.size() == 1, "expected exactly one unstable test");
  if (!a.unstable.empty()) {
    const UnstableTestInfo& u = a.unstable[0];
    c.expect(u.float_else.possible, "float-else/real-then direction must be possible");
    c.expect(!u.float_then.possible, "float-then/real-else direction must be impossible");
    if (u.float_else.possible && !a.inputs.empty()) {
      Interval region = u.float_else.region.bound_of(a.inputs[0].real_sym);
      // -u < eps <= 0, endpoints within one double ulp
      Scalar u_lit = Scalar::from_decimal("0.001");
      Scalar ulp = Scalar(std::nextafter(0.001, 1.0) - 0.001);
      c.expect(exact_sub(region.lo(), u_lit.exact_neg()).abs() <= ulp,
               "region lower endpoint is not -u");
      c.expect(region.hi().abs() <= ulp, "region upper endpoint is not 0");
      const SymBound* sb = u.float_else.region.stored_bound(a.inputs[0].real_sym.id);
      c.expect(sb && sb->lo_strict && !sb->hi_strict, "region strictness is not (-u, 0]");
    }
  }
  c.finish();
}

// ------------------------------------------------------------------ C2

void criterion2() {
  Criterion c("C2", 1.0);
  c.describe("absolute difference: discontinuity <= 4u + 10u^2");
  for (const char* name : {"absdiff.fx", "absdiff_u6.fx"}) {
    double u = name == std::string("absdiff.fx") ? 1e-3 : 1e-6;
    Analysis a = analyze_corpus(name);
    auto td = a.disc_bound(a.end_state, "t");
    c.expect(td.has_value(), "t discontinuity missing");
    if (td)
      c.expect(td->mag().to_double() <= 4 * u + 10 * u * u,
               std::string(name) + ": magnitude " + std::to_string(td->mag().to_double()));
  }
  c.finish();
}

// ------------------------------------------------------------------ C3

void criterion3() {
  Criterion c("C3", 2.0);
  c.describe("running example z: refinement brings O(0.25) down to K*u");
  const double u = 1e-3;
  AnalyzeOptions off;
  off.precision = VarType::Float;
  off.precision_set = true;
  Analysis a_off = analyze_corpus("running.fx", off);
  auto z_off = a_off.disc_bound(a_off.end_state, "z");

  AnalyzeOptions on = off;
  on.refine_nonlinear = true;
  Analysis a_on = analyze_corpus("running.fx", on);
  auto z_on = a_on.disc_bound(a_on.end_state, "z");

  c.expect(z_off.has_value() && z_on.has_value(), "z discontinuity missing");
  if (z_off && z_on) {
    c.expect(width(*z_on) <= 10 * u, "refined width above 10u: " + std::to_string(width(*z_on)));
    c.expect(width(*z_off) <= 0.6, "unrefined width above O(0.25) scale");
    c.expect(width(*z_on) < width(*z_off), "refinement did not help");
  }
  c.finish();
}

// ------------------------------------------------------------------ C4

void criterion4() {
  Criterion c("C4", 5.0);
  c.describe("interpolator: res range and error width, all samples inside");
  Analysis a = analyze_corpus("interpolator.fx");
  auto rr = a.real_bound(a.end_state, "res");
  c.expect(rr.has_value(), "res real bound missing");
  if (rr) {
    c.expect(rr->lo() >= Scalar(-2.25e-5 - 1e-9), "res lower bound out of range");
    c.expect(rr->hi() <= exact_add(Scalar(33.25), Scalar(1e-6)), "res upper bound out of range");
  }
  auto eb = a.err_bound(a.end_state, "res");
  auto db = a.disc_bound(a.end_state, "res");
  c.expect(eb.has_value() && db.has_value(), "error bounds missing");
  if (eb && db) {
    Interval total = *eb + *db;
    c.expect(width(total) <= 1.2e-4, "error width above 1.2e-4: " + std::to_string(width(total)));
  }
  ValidateOptions vo;
  vo.samples = 10000;
  ValidationSummary s = sample_check(a, vo);
  c.expect(s.containment_violations == 0, "sampled errors escaped the bound");
  c.finish();
}

// ------------------------------------------------------------------ C5

void criterion5() {
  Criterion c("C5", 5.0);
  c.describe("square root: S range, error contains the near-2 jump");
  Analysis a = analyze_corpus("sqrt.fx");
  auto rr = a.real_bound(a.end_state, "S");
  c.expect(rr.has_value(), "S real bound missing");
  if (rr) {
    c.expect(rr->lo() >= Scalar(1.0 - 1e-6), "S lower bound out of range");
    c.expect(rr->hi() <= Scalar(1.4531 + 1e-3), "S upper bound out of range");
  }
  auto eb = a.err_bound(a.end_state, "S");
  auto db = a.disc_bound(a.end_state, "S");
  c.expect(eb.has_value() && db.has_value(), "S error bounds missing");
  Interval total = *eb + *db;
  c.expect(width(total) <= 0.24, "error width above 0.24");
  c.expect(total.mag().to_double() >= 0.0233, "error bound smaller than the known jump");

  ValidateOptions vo;
  vo.samples = 10000;
  ValidationSummary s = sample_check(a, vo);
  c.expect(s.containment_violations == 0, "sampled errors escaped the bound");
  bool worst_ok = false;
  for (const auto& w : s.worst_discontinuity) {
    if (w.var != "S") continue;
    double err = std::abs(strtod(w.error_value.c_str(), nullptr));
    double at = strtod(w.input_floats.at(0).c_str(), nullptr);
    worst_ok = err >= 0.023 && at > 1.99 && at < 2.01 && total.contains(Scalar(-err));
  }
  c.expect(worst_ok, "worst observed jump not found near input 2");
  c.finish();
}

// ------------------------------------------------------------------ C6

void criterion6() {
  Criterion c("C6", 60.0);
  c.describe("householder: unstable loop flagged, 6 real iterations, slow floats");
  AnalyzeOptions opts;
  opts.precision = VarType::Float;
  opts.precision_set = true;
  opts.unroll = 8;
  opts.widen = 50;
  Analysis a = analyze_corpus("householder.fx", opts);  // must terminate

  bool loop_flagged = false;
  for (const auto& u : a.unstable)
    if (u.is_loop && (u.float_then.possible || u.float_else.possible)) loop_flagged = true;
  c.expect(loop_flagged, "loop condition not flagged unstable");

  ValidateOptions vo;
  vo.samples = 1000;
  ValidationSummary s = sample_check(a, vo);
  long real_max = 0, float_max = 0;
  for (const auto& [cp, v] : s.loop_real_max) real_max = std::max(real_max, v);
  for (const auto& [cp, v] : s.loop_float_max) float_max = std::max(float_max, v);
  c.expect(real_max >= 4 && real_max <= 6,
           "real semantics did not converge in six iterations: " + std::to_string(real_max));
  c.expect(float_max >= 7 || s.float_nonterminating > 0,
           "no float input needed seven iterations or the step guard");
  c.expect(s.containment_violations == 0, "containment violated");
  c.finish();
}

// ------------------------------------------------------------------ C7

int find_test_cp_on(const std::vector<StmtPtr>& stmts, const std::string& var) {
  for (const auto& s : stmts) {
    if (int cp = s->then_branch.empty() ? 0 : find_test_cp_on(s->then_branch, var); cp) return cp;
    if (int cp = s->else_branch.empty() ? 0 : find_test_cp_on(s->else_branch, var); cp) return cp;
    if (s->kind != Stmt::Assign && s->cond && s->cond->kind == Cond::Cmp) {
      const Expr* l = s->cond->lhs.get();
      if (l && l->kind == ExprKind::Var && l->text == var) return s->cp;
    }
  }
  return 0;
}

void criterion7() {
  Criterion c("C7", 10.0);
  c.describe("transmission: pressure bounds and blame on the oval test");
  Analysis a = analyze_corpus("transmission.fx");

  auto p1e = a.err_bound(a.end_state, "pressure1");
  auto p1d = a.disc_bound(a.end_state, "pressure1");
  c.expect(p1e.has_value() && p1d.has_value(), "pressure1 bounds missing");
  if (p1e && p1d) c.expect(width(*p1e + *p1d) <= 1e-3, "pressure1 error too wide");

  auto p2e = a.err_bound(a.end_state, "pressure2");
  auto p2d = a.disc_bound(a.end_state, "pressure2");
  c.expect(p2e.has_value() && p2d.has_value(), "pressure2 bounds missing");
  Interval p2total = *p2e + *p2d;
  c.expect(p2total.contains(Interval(-1000.0, 1000.0)), "pressure2 error misses [-1000,1000]");

  ValidateOptions vo;
  vo.samples = 10000;
  ValidationSummary s = sample_check(a, vo);
  c.expect(s.containment_violations == 0, "containment violated");
  double worst_p2 = 0;
  for (const auto& w : s.worst_discontinuity)
    if (w.var == "pressure2") worst_p2 = std::abs(strtod(w.error_value.c_str(), nullptr));
  c.expect(worst_p2 >= 999.0, "oracle did not observe the 1000 jump");

  int oval_cp = find_test_cp_on(a.program.stmts, "oval");
  c.expect(oval_cp > 0, "oval test not found");
  double dominant = 0;
  int dominant_cp = -1;
  for (const auto& row : a.error_decomposition(a.end_state, "pressure2")) {
    if (row.kind != Analysis::DecompEntry::Discontinuity) continue;
    double w = width(row.contribution);
    if (w > dominant) {
      dominant = w;
      dominant_cp = row.test_cp;
    }
  }
  c.expect(dominant_cp == oval_cp, "dominant discontinuity not attributed to the oval test");
  c.finish();
}

// ------------------------------------------------------------------ C8

void criterion8() {
  Criterion c("C8", 120.0);
  c.describe("soundness: 10^4 samples per corpus program, zero violations");
  struct Entry {
    const char* name;
    bool single;
  };
  for (const Entry& e : {Entry{"running.fx", true}, Entry{"absdiff.fx", false},
                         Entry{"absdiff_u6.fx", false}, Entry{"interpolator.fx", false},
                         Entry{"sqrt.fx", false}, Entry{"transmission.fx", false},
                         Entry{"householder.fx", true}}) {
    AnalyzeOptions opts;
    if (e.single) {
      opts.precision = VarType::Float;
      opts.precision_set = true;
    }
    Analysis a = analyze_corpus(e.name, opts);
    ValidateOptions vo;
    vo.samples = 10000;
    ValidationSummary s = sample_check(a, vo);
    c.expect(s.containment_violations == 0,
             std::string(e.name) + ": " + std::to_string(s.containment_violations) +
                 " containment violations");
    c.expect(s.divergent_outside_region == 0,
             std::string(e.name) + ": divergence outside reported regions");
  }
  c.finish();
}

// ------------------------------------------------------------------ C9

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool property_suites(unsigned long long seed, Criterion& c) {
  std::mt19937_64 rng(seed);
  bool all_ok = true;

  // affine-core: product soundness on random draws
  {
    SymbolAllocator alloc;
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.1, 1.0);
    int bad = 0;
    for (int t = 0; t < 500; ++t) {
      NoiseSym s1 = alloc.fresh(NoiseKind::Real, 0), s2 = alloc.fresh(NoiseKind::Real, 0);
      double l1 = -pos(rng), h1 = pos(rng), l2 = -pos(rng), h2 = pos(rng);
      ConstraintSet phi = ConstraintSet::top({s1, s2})
                              .with_bound(s1, Interval(l1, h1))
                              .with_bound(s2, Interval(l2, h2));
      AffineBuilder bx, by;
      bx.set_center(Scalar(coeff(rng)));
      bx.add(s1, Scalar(coeff(rng)));
      by.set_center(Scalar(coeff(rng)));
      by.add(s1, Scalar(coeff(rng)));
      by.add(s2, Scalar(coeff(rng)));
      LinearizedOp op = mul(bx.build(), by.build(), phi, alloc, 1);
      std::uniform_real_distribution<double> d1(l1, h1), d2(l2, h2);
      for (int k = 0; k < 20; ++k) {
        double v1 = d1(rng), v2 = d2(rng);
        double x = bx.build().center().to_double() + bx.build().terms()[0].coeff.to_double() * v1;
        AffineForm yf = by.build();
        double y = yf.center().to_double();
        for (const auto& term : yf.terms())
          y += term.coeff.to_double() * (term.sym.id == s1.id ? v1 : v2);
        Interval b = phi.bound(op.form);
        double exact = x * y;
        if (b.lo().to_double() > exact + 1e-9 || b.hi().to_double() < exact - 1e-9) ++bad;
      }
    }
    if (bad != 0) {
      all_ok = false;
      c.expect(false, "product soundness sampling failed " + std::to_string(bad) + " times");
    }
  }

  // constraint-domain: slack precision at both input error scales
  {
    for (double u : {1e-3, 1e-6}) {
      SymbolAllocator alloc;
      SlackRegistry reg(alloc);
      NoiseSym e1 = alloc.fresh(NoiseKind::Real, 0), e2 = alloc.fresh(NoiseKind::Real, 0);
      NoiseSym f1 = alloc.fresh(NoiseKind::Error, 0), f2 = alloc.fresh(NoiseKind::Error, 0);
      ConstraintSet t = ConstraintSet::top({e1, e2, f1, f2});
      AffineBuilder real_c, float_c, diff;
      real_c.add(e1, Scalar(1.0));
      real_c.add(e2, Scalar(-1.0));
      float_c.add(e1, Scalar(1.0));
      float_c.add(e2, Scalar(-1.0));
      float_c.add(f1, Scalar(u));
      float_c.add(f2, Scalar(-u));
      diff.add(e1, Scalar(2.0));
      diff.add(e2, Scalar(-2.0));
      ConstraintSet phir = t.meet_halfspace(reg, real_c.build(), CmpOp::LT, 3);
      ConstraintSet phif = t.meet_halfspace(reg, float_c.build(), CmpOp::GE, 4);
      Interval b = meet(phif, phir).bound(diff.build());
      if (b.width_up().to_double() > 4 * u + 10 * u * u) {
        all_ok = false;
        c.expect(false, "slack precision failed at u=" + fmt_num(u));
      }
    }
  }

  // abstract-semantics: join containment via random two-branch programs
  {
    std::uniform_real_distribution<double> k(-3.0, 3.0);
    for (int t = 0; t < 15; ++t) {
      double lo = k(rng), hi = lo + std::abs(k(rng)) + 0.5;
      double thr = lo + (hi - lo) * 0.5;
      std::ostringstream src;
      src << "x = DREAL_WITH_ERROR(" << fmt_num(lo) << ", " << fmt_num(hi)
          << ", -0.0001, 0.0001);\n";
      src << "if (x <= " << fmt_num(thr) << ") { y = " << fmt_num(k(rng)) << " * x + "
          << fmt_num(k(rng)) << "; } else { y = " << fmt_num(k(rng)) << " * x + "
          << fmt_num(k(rng)) << "; }\n";
      ParseResult pr = parse(src.str());
      ParseResult dr = desugar(std::move(pr.program));
      Analysis a = analyze(std::move(dr.program), {});
      ValidateOptions vo;
      vo.samples = 200;
      vo.seed = seed + t;
      ValidationSummary s = sample_check(a, vo);
      if (s.containment_violations != 0 || s.divergent_outside_region != 0) {
        all_ok = false;
        c.expect(false, "join containment failed for a random branch program");
      }
    }
  }

  // oracle determinism
  {
    Analysis a = analyze_corpus("absdiff.fx");
    ValidateOptions vo;
    vo.samples = 300;
    vo.seed = seed;
    if (!(sample_check(a, vo) == sample_check(a, vo))) {
      all_ok = false;
      c.expect(false, "oracle validation is not deterministic");
    }
  }
  return all_ok;
}

void criterion9() {
  Criterion c("C9", 120.0);
  unsigned long long second = std::random_device{}();
  c.describe("property suites under seed 12345 and seed " + std::to_string(second));
  bool a = property_suites(12345, c);
  bool b = property_suites(second, c);
  c.expect(a && b, "property suites failed");
  c.finish();
}

}  // namespace

int main() {
  try {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  for (const auto& n : g_notes) std::printf("  detail: %s\n", n.c_str());
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
