// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "fpdrift/analyzer.hpp"
#include "fpdrift/oracle.hpp"
#include "fpdrift/validate.hpp"

using namespace fpdrift;

namespace {

Program load(const char* name) {
  std::ifstream in(std::string(FPDRIFT_CORPUS_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse(ss.str());
  ParseResult d = desugar(std::move(r.program));
  return std::move(d.program);
}

void BM_AffineProduct(benchmark::State& state) {
  SymbolAllocator alloc;
  std::vector<NoiseSym> syms;
  AffineBuilder bx, by;
  bx.set_center(Scalar(1.5));
  by.set_center(Scalar(-0.75));
  for (long i = 0; i < state.range(0); ++i) {
    NoiseSym s = alloc.fresh(NoiseKind::Real, 0);
    syms.push_back(s);
    bx.add(s, Scalar(0.25 + 0.01 * (double)i));
    by.add(s, Scalar(-0.5 + 0.02 * (double)i));
  }
  AffineForm x = bx.build(), y = by.build();
  ConstraintSet phi = ConstraintSet::top(syms);
  for (auto _ : state) {
    LinearizedOp op = mul(x, y, phi, alloc, 1);
    benchmark::DoNotOptimize(op.form);
  }
}
BENCHMARK(BM_AffineProduct)->Arg(4)->Arg(16)->Arg(64);

void BM_ConstraintMeet(benchmark::State& state) {
  SymbolAllocator alloc;
  SlackRegistry reg(alloc);
  NoiseSym e1 = alloc.fresh(NoiseKind::Real, 0), e2 = alloc.fresh(NoiseKind::Real, 0);
  NoiseSym f1 = alloc.fresh(NoiseKind::Error, 0), f2 = alloc.fresh(NoiseKind::Error, 0);
  ConstraintSet t = ConstraintSet::top({e1, e2, f1, f2});
  AffineBuilder ca, cb;
  ca.add(e1, Scalar(1.0));
  ca.add(e2, Scalar(-1.0));
  cb.add(e1, Scalar(1.0));
  cb.add(e2, Scalar(-1.0));
  cb.add(f1, Scalar(1e-3));
  cb.add(f2, Scalar(-1e-3));
  AffineForm real_cond = ca.build(), float_cond = cb.build();
  for (auto _ : state) {
    ConstraintSet phir = t.meet_halfspace(reg, real_cond, CmpOp::LT, 3);
    ConstraintSet phif = t.meet_halfspace(reg, float_cond, CmpOp::GE, 4);
    benchmark::DoNotOptimize(meet(phif, phir));
  }
}
BENCHMARK(BM_ConstraintMeet);

void BM_AnalyzeCorpus(benchmark::State& state, const char* name, bool single) {
  Program p = load(name);
  for (auto _ : state) {
    AnalyzeOptions opts;
    if (single) {
      opts.precision = VarType::Float;
      opts.precision_set = true;
    }
    Analysis a = analyze(p.clone(), opts);
    benchmark::DoNotOptimize(a.end_state);
  }
}
BENCHMARK_CAPTURE(BM_AnalyzeCorpus, running, "running.fx", true);
BENCHMARK_CAPTURE(BM_AnalyzeCorpus, interpolator, "interpolator.fx", false);
BENCHMARK_CAPTURE(BM_AnalyzeCorpus, sqrt, "sqrt.fx", false);
BENCHMARK_CAPTURE(BM_AnalyzeCorpus, transmission, "transmission.fx", false);

void BM_OracleRun(benchmark::State& state) {
  Program p = load("sqrt.fx");
  std::vector<InputPoint> in{{1.75, 0.0004}};
  for (auto _ : state) {
    Trace t = run(p, in, {true, VarType::Double, 200});
    benchmark::DoNotOptimize(t.final_env);
  }
}
BENCHMARK(BM_OracleRun);

}  // namespace

BENCHMARK_MAIN();
