// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include "fpdrift/validate.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace fpdrift {

namespace {

double round_target(double v, VarType target) {
  return target == VarType::Float ? (double)(float)v : v;
}

double step_ulps(double v, int k, VarType target) {
  if (target == VarType::Float) {
    float f = (float)v;
    for (int i = 0; i < std::abs(k); ++i)
      f = std::nextafterf(f, k > 0 ? HUGE_VALF : -HUGE_VALF);
    return (double)f;
  }
  double d = v;
  for (int i = 0; i < std::abs(k); ++i) d = std::nextafter(d, k > 0 ? HUGE_VAL : -HUGE_VAL);
  return d;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct InputRange {
  Interval real, err;
  double a, b, c, d;  // double views for sampling proposals
};

class Sampler {
 public:
  Sampler(const Analysis& analysis, unsigned long long seed)
      : a_(analysis), rng_(seed) {
    for (const auto& in : a_.inputs) {
      ranges_.push_back({in.real_range, in.err_range, in.real_range.lo().to_double(),
                         in.real_range.hi().to_double(), in.err_range.lo().to_double(),
                         in.err_range.hi().to_double()});
    }
  }

  // Feasible point: f is a target-precision value, e in [c,d] exactly and
  // f - e in [a,b] exactly.
  InputPoint feasible(size_t i, double want_real, double want_err) {
    const InputRange& r = ranges_[i];
    VarType tgt = a_.options.precision;
    for (int tries = 0; tries < 200; ++tries) {
      double f = round_target(want_real + want_err, tgt);
      Scalar fs(f);
      // e must lie in [c,d] and in [f-b, f-a]
      Scalar elo = Scalar::max(r.err.lo(), exact_sub(fs, r.real.hi()));
      Scalar ehi = Scalar::min(r.err.hi(), exact_sub(fs, r.real.lo()));
      if (elo <= ehi) {
        Scalar e = Scalar::min(Scalar::max(Scalar(want_err), elo), ehi);
        return {f, e};
      }
      want_real = uniform(r.a, r.b);
      want_err = uniform(r.c, r.d);
    }
    return {round_target((r.a + r.b) / 2, tgt), r.err.mid_exact()};
  }

  std::vector<InputPoint> uniform_sample() {
    std::vector<InputPoint> s;
    for (size_t i = 0; i < ranges_.size(); ++i)
      s.push_back(feasible(i, uniform(ranges_[i].a, ranges_[i].b),
                           uniform(ranges_[i].c, ranges_[i].d)));
    return s;
  }

  std::vector<InputPoint> midpoint_sample() {
    std::vector<InputPoint> s;
    for (size_t i = 0; i < ranges_.size(); ++i)
      s.push_back(feasible(i, (ranges_[i].a + ranges_[i].b) / 2,
                           (ranges_[i].c + ranges_[i].d) / 2));
    return s;
  }

  double uniform(double lo, double hi) {
    if (!(lo < hi)) return lo;
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng_);
  }

  const std::vector<InputRange>& ranges() const { return ranges_; }

 private:
  const Analysis& a_;
  std::mt19937_64 rng_;
  std::vector<InputRange> ranges_;
};

void collect_test_cps(const std::vector<StmtPtr>& stmts, std::vector<int>* out) {
  for (const auto& s : stmts) {
    collect_test_cps(s->then_branch, out);
    collect_test_cps(s->else_branch, out);
    if (s->kind != Stmt::Assign) out->push_back(s->cp);
  }
}

// branch taken at `cp` on the ideal path, +1 then / -1 else / 0 not reached
int branch_at(const Trace& t, int cp) {
  for (const auto& [pcp, then] : t.path)
    if (pcp == cp) return then ? 1 : -1;
  return 0;
}

class Checker {
 public:
  Checker(const Analysis& a, const ValidateOptions& opts) : a_(a), opts_(opts) {
    summary_.seed = opts.seed;
    mode_real_ = {true, a_.options.precision, kOracleBits};
    mode_float_ = {false, a_.options.precision, kOracleBits};
  }

  ValidationSummary go() {
    Sampler sampler(a_, opts_.seed);
    for (long i = 0; i < opts_.samples; ++i) check_sample(sampler.uniform_sample());
    boundary_samples(sampler);
    replay_witnesses();
    return summary_;
  }

 private:
  void boundary_samples(Sampler& sampler) {
    std::vector<int> tests;
    collect_test_cps(a_.program.stmts, &tests);
    const auto& ranges = sampler.ranges();
    for (int cp : tests) {
      for (size_t axis = 0; axis < ranges.size(); ++axis) {
        std::vector<InputPoint> base = sampler.midpoint_sample();
        auto probe = [&](double f) {
          std::vector<InputPoint> in = base;
          in[axis] = sampler.feasible(axis, f, (ranges[axis].c + ranges[axis].d) / 2);
          Trace t = run(a_.program, in, mode_real_);
          return branch_at(t, cp);
        };
        double lo = ranges[axis].a, hi = ranges[axis].b;
        int blo = probe(lo), bhi = probe(hi);
        if (blo == bhi || blo == 0 || bhi == 0) continue;
        for (int it = 0; it < 120 && lo < hi; ++it) {
          double mid = lo + (hi - lo) / 2;
          if (mid == lo || mid == hi) break;
          (probe(mid) == blo ? lo : hi) = mid;
        }
        double c = ranges[axis].c, d = ranges[axis].d;
        for (int k : {-4, -2, -1, 0, 1, 2, 4}) {
          double f = step_ulps(lo, k, a_.options.precision);
          for (double e : {c, c + (d - c) * 1e-3, (c + d) / 2, d - (d - c) * 1e-3, d}) {
            std::vector<InputPoint> in = base;
            in[axis] = sampler.feasible(axis, f - e, e);
            check_sample(in);
          }
        }
      }
    }
  }

  void check_sample(const std::vector<InputPoint>& in) {
    ++summary_.samples;
    Trace real = run(a_.program, in, mode_real_);
    if (real.verdict != RunVerdict::Ok) {
      ++summary_.skipped;
      return;
    }
    Trace flt = run(a_.program, in, mode_float_);
    bool flt_ok = flt.verdict == RunVerdict::Ok;
    if (!flt_ok) ++summary_.float_nonterminating;

    for (const auto& [cp, iters] : real.loop_iterations) {
      auto& m = summary_.loop_real_max[std::to_string(cp)];
      m = std::max(m, iters);
    }
    for (const auto& [cp, iters] : flt.loop_iterations) {
      auto& m = summary_.loop_float_max[std::to_string(cp)];
      m = std::max(m, iters);
    }

    // containment at every report point
    check_point(a_.end_state, real.final_env, flt_ok ? &flt.final_env : nullptr);
    for (const auto& [cp, st] : a_.at_joins) {
      auto rit = real.at_join.find(cp);
      if (rit == real.at_join.end()) continue;
      const std::map<std::string, Scalar>* fenv = nullptr;
      if (flt_ok) {
        auto fit = flt.at_join.find(cp);
        if (fit != flt.at_join.end()) fenv = &fit->second;
      }
      check_point(st, rit->second, fenv);
    }

    // path divergences must fall in a reported unstable region
    int div = flt_ok ? first_divergence(real, flt) : divergence_cp(real, flt);
    if (div >= 0) {
      ++summary_.divergent;
      if (!divergence_covered(div, real, flt, in)) ++summary_.divergent_outside_region;
      if (flt_ok) track_worst(real, flt, in);
    }
  }

  // when the float run did not terminate, the divergence is at the loop test
  int divergence_cp(const Trace& real, const Trace& flt) {
    int d = first_divergence(real, flt);
    if (d >= 0) return d;
    if (!flt.loop_iterations.empty()) return flt.loop_iterations.begin()->first;
    return -1;
  }

  // The extended-precision run approximates the ideal real value to 2^-100
  // relative (enforced by the oracle self-consistency property); real-trace
  // comparisons allow exactly that slop. Float values are bit-exact.
  static bool contains_with_oracle_slop(const Interval& iv, const Scalar& v) {
    Scalar pad = Scalar::mul(Scalar::max(Scalar(1L), v.abs()), Scalar(1L).ldexp(-100),
                             kEvalPrec, MPFR_RNDU);
    return Scalar::sub(iv.lo(), pad, kEvalPrec, MPFR_RNDD) <= v &&
           v <= Scalar::add(iv.hi(), pad, kEvalPrec, MPFR_RNDU);
  }

  void check_point(const AbstractValue& st, const std::map<std::string, Scalar>& renv,
                   const std::map<std::string, Scalar>* fenv) {
    for (const auto& [name, vs] : st.vars) {
      auto rv = renv.find(name);
      if (rv == renv.end()) continue;
      if (vs.unbounded) continue;
      if (st.phi_r.is_empty()) {
        ++summary_.containment_violations;
        continue;
      }
      auto rb = a_.real_bound(st, name);
      if (rb && !contains_with_oracle_slop(*rb, rv->second))
        ++summary_.containment_violations;

      if (!fenv) continue;
      auto fv = fenv->find(name);
      if (fv == fenv->end()) continue;
      if (st.phi_f.is_empty()) {
        ++summary_.containment_violations;
        continue;
      }
      auto fb = a_.float_bound(st, name);
      if (fb && !fb->contains(fv->second)) ++summary_.containment_violations;
      auto eb = a_.err_bound(st, name);
      auto db = a_.disc_bound(st, name);
      if (eb && db) {
        Interval tot = *eb + *db;
        Scalar err = exact_sub(fv->second, rv->second);
        if (!contains_with_oracle_slop(tot, err)) ++summary_.containment_violations;
      }
    }
  }

  bool region_contains(const ConstraintSet& region, const std::vector<InputPoint>& in) {
    std::map<uint32_t, Interval> eps;  // exact input epsilon values (tiny intervals)
    for (size_t i = 0; i < a_.inputs.size() && i < in.size(); ++i) {
      const InputBinding& b = a_.inputs[i];
      Scalar real = exact_sub(Scalar(in[i].float_value), in[i].error);
      if (b.has_real_sym) {
        const SymBound* sb = region.stored_bound(b.real_sym.id);
        Scalar mid = b.real_range.mid_exact();
        Scalar half = exact_sub(b.real_range.hi(), b.real_range.lo()).ldexp(-1);
        if (sb) {
          Interval allowed = Interval::point(mid) + sb->iv.scale(half);
          if (!allowed.contains(real)) return false;
        }
        if (!half.is_zero()) {
          Interval num = Interval::point(exact_sub(real, mid));
          eps[b.real_sym.id] = num / Interval::point(half);
        }
      }
      if (b.has_err_sym) {
        const SymBound* sb = region.stored_bound(b.err_sym.id);
        Scalar mid = b.err_range.mid_exact();
        Scalar half = exact_sub(b.err_range.hi(), b.err_range.lo()).ldexp(-1);
        if (sb) {
          Interval allowed = Interval::point(mid) + sb->iv.scale(half);
          if (!allowed.contains(in[i].error)) return false;
        }
        if (!half.is_zero()) {
          Interval num = Interval::point(exact_sub(in[i].error, mid));
          eps[b.err_sym.id] = num / Interval::point(half);
        }
      }
    }
    // slack constraints whose definitions mention only input symbols
    for (const auto& d : region.slacks()) {
      const SymBound* sb = region.stored_bound(d.sym.id);
      if (!sb) continue;
      bool evaluable = true;
      Interval acc;
      for (const auto& t : d.linear.terms()) {
        auto it = eps.find(t.sym.id);
        if (it == eps.end()) {
          evaluable = false;
          break;
        }
        acc = acc + it->second.scale(t.coeff);
      }
      if (!evaluable) continue;
      Interval val = acc / Interval::point(d.scale);
      if (!val.intersect(sb->iv)) return false;
    }
    return true;
  }

  bool divergence_covered(int cp, const Trace& real, const Trace& flt,
                          const std::vector<InputPoint>& in) {
    for (const auto& u : a_.unstable) {
      if (u.test_cp != cp) continue;
      // direction: which branch did the float flow take at the divergence?
      int fb = branch_at(flt, cp);
      std::vector<const UnstableDirection*> candidates;
      if (fb == 1 && u.float_then.possible) candidates.push_back(&u.float_then);
      else if (fb == -1 && u.float_else.possible) candidates.push_back(&u.float_else);
      else {
        if (u.float_then.possible) candidates.push_back(&u.float_then);
        if (u.float_else.possible) candidates.push_back(&u.float_else);
      }
      for (const UnstableDirection* d : candidates)
        if (region_contains(d->region, in)) return true;
    }
    return false;
  }

  void track_worst(const Trace& real, const Trace& flt, const std::vector<InputPoint>& in) {
    for (const auto& [name, rv] : real.final_env) {
      auto fv = flt.final_env.find(name);
      if (fv == flt.final_env.end()) continue;
      Scalar err = exact_sub(fv->second, rv).abs();
      auto it = worst_.find(name);
      if (it == worst_.end() || it->second.first < err) {
        worst_[name] = {err, in};
      }
    }
  }

  void replay_witnesses() {
    for (const auto& [name, w] : worst_) {
      Trace real = run(a_.program, w.second, mode_real_);
      Trace flt = run(a_.program, w.second, mode_float_);
      bool ok = real.verdict == RunVerdict::Ok && flt.verdict == RunVerdict::Ok;
      if (ok) {
        Scalar err = exact_sub(flt.final_env.at(name), real.final_env.at(name)).abs();
        ok = (err == w.first) && first_divergence(real, flt) >= 0;
      }
      if (!ok) summary_.witness_replayed = false;
      WitnessText wt;
      wt.var = name;
      wt.error_value = w.first.str(17, MPFR_RNDU);
      for (const auto& p : w.second) {
        wt.input_floats.push_back(fmt(p.float_value));
        wt.input_errors.push_back(p.error.str(17, MPFR_RNDN));
      }
      summary_.worst_discontinuity.push_back(std::move(wt));
    }
  }

  const Analysis& a_;
  ValidateOptions opts_;
  ValidationSummary summary_;
  RunMode mode_real_, mode_float_;
  std::map<std::string, std::pair<Scalar, std::vector<InputPoint>>> worst_;
};

}  // namespace

ValidationSummary sample_check(const Analysis& analysis, const ValidateOptions& opts) {
  Checker checker(analysis, opts);
  return checker.go();
}

}  // namespace fpdrift
