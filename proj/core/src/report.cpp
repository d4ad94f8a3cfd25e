// Copyright (c) fpdrift contributors.
// SPDX-License-Identifier: Apache-2.0
#include "fpdrift/report.hpp"

#include <json.hpp>
#include <sstream>

namespace fpdrift {

using nlohmann::json;

BoundText bound_text(const Interval& iv) {
  return {iv.lo().str(17, MPFR_RNDD), iv.hi().str(17, MPFR_RNDU)};
}

namespace {

std::vector<RegionText> render_region(const Analysis& a, const ConstraintSet& region) {
  std::vector<RegionText> out;
  for (const auto& in : a.inputs) {
    if (!in.has_real_sym) continue;
    const SymBound* sb = region.stored_bound(in.real_sym.id);
    if (!sb) continue;
    if (sb->iv == Interval::unit()) continue;
    // input value = mid + eps * halfwidth
    Scalar mid = in.real_range.mid_exact();
    Scalar half = exact_sub(in.real_range.hi(), in.real_range.lo()).ldexp(-1);
    Interval v = Interval::point(mid) + sb->iv.scale(half);
    RegionText rt;
    rt.input = in.var;
    rt.iv = bound_text(v);
    rt.lo_strict = sb->lo_strict;
    rt.hi_strict = sb->hi_strict;
    out.push_back(std::move(rt));
  }
  return out;
}

VarRow make_var_row(const Analysis& a, const AbstractValue& st, const std::string& name) {
  VarRow row;
  row.name = name;
  const VarState& vs = st.vars.at(name);
  row.unbounded = vs.unbounded;
  row.real_reachable = !st.phi_r.is_empty();
  row.float_reachable = !st.phi_f.is_empty();
  if (row.unbounded) return row;

  auto rb = a.real_bound(st, name);
  auto fb = a.float_bound(st, name);
  auto eb = a.err_bound(st, name);
  auto db = a.disc_bound(st, name);
  if (rb) row.real = bound_text(*rb);
  if (fb) row.flt = bound_text(*fb);
  if (db) row.disc = bound_text(*db);
  if (eb && db) {
    Interval total = *eb + *db;
    row.err = bound_text(*eb);
    row.total_err = bound_text(total);
    bool zero_err = total.lo().is_zero() && total.hi().is_zero();
    if (!zero_err) {
      std::map<uint32_t, const DiscontinuityTerm*> by_sym;
      for (const auto& t : a.disc_terms) by_sym.emplace(t.symbol.id, &t);
      for (const auto& e : a.error_decomposition(st, name)) {
        DecompRow dr;
        dr.origin_cp = e.origin_cp;
        dr.kind = e.kind == Analysis::DecompEntry::Initial    ? "initial"
                  : e.kind == Analysis::DecompEntry::Rounding ? "rounding"
                                                              : "discontinuity";
        dr.iv = bound_text(e.contribution);
        dr.test_cp = e.test_cp;
        if (e.kind == Analysis::DecompEntry::Discontinuity) {
          for (const auto& t : a.disc_terms) {
            if (t.test_cp == e.test_cp && t.var == name) {
              dr.region = render_region(a, t.region);
              break;
            }
          }
        }
        row.decomposition.push_back(std::move(dr));
      }
    }
  }
  return row;
}

PointReport make_point(const Analysis& a, const AbstractValue& st, int cp) {
  PointReport p;
  p.cp = cp;
  if (cp > 0) {
    auto it = a.program.cp_line.find(cp);
    p.line = it == a.program.cp_line.end() ? 0 : it->second;
  }
  for (const auto& [name, vs] : st.vars) p.vars.push_back(make_var_row(a, st, name));
  return p;
}

json to_json(const BoundText& b) { return json{{"lo", b.lo}, {"hi", b.hi}}; }
BoundText bound_from(const json& j) { return {j.at("lo"), j.at("hi")}; }

json to_json(const RegionText& r) {
  return json{{"input", r.input},
              {"lo", r.iv.lo},
              {"hi", r.iv.hi},
              {"lo_strict", r.lo_strict},
              {"hi_strict", r.hi_strict}};
}

RegionText region_from(const json& j) {
  RegionText r;
  r.input = j.at("input");
  r.iv.lo = j.at("lo");
  r.iv.hi = j.at("hi");
  r.lo_strict = j.at("lo_strict");
  r.hi_strict = j.at("hi_strict");
  return r;
}

std::string region_text_line(const RegionText& r) {
  std::string s;
  s += r.iv.lo + (r.lo_strict ? " < " : " <= ");
  s += r.input + "_real";
  s += (r.hi_strict ? " < " : " <= ") + r.iv.hi;
  return s;
}

}  // namespace

AnalysisReport build_report(const Analysis& a, const std::string& program_name) {
  AnalysisReport r;
  r.program = program_name;
  r.precision = a.options.precision == VarType::Float ? "single" : "double";
  r.diagnostics = a.diagnostics;

  for (const auto& [cp, st] : a.at_joins) r.points.push_back(make_point(a, st, cp));
  r.points.push_back(make_point(a, a.end_state, -1));

  for (const auto& u : a.unstable) {
    WarningRow w;
    w.test_cp = u.test_cp;
    w.line = u.line;
    w.is_loop = u.is_loop;
    w.float_then.possible = u.float_then.possible;
    if (u.float_then.possible) w.float_then.region = render_region(a, u.float_then.region);
    w.float_else.possible = u.float_else.possible;
    if (u.float_else.possible) w.float_else.region = render_region(a, u.float_else.region);
    r.warnings.push_back(std::move(w));
  }
  return r;
}

std::string render_json(const AnalysisReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["program"] = r.program;
  j["precision"] = r.precision;
  j["points"] = json::array();
  for (const auto& p : r.points) {
    json jp;
    jp["cp"] = p.cp;
    jp["line"] = p.line;
    jp["vars"] = json::array();
    for (const auto& v : p.vars) {
      json jv;
      jv["name"] = v.name;
      jv["unbounded"] = v.unbounded;
      jv["real_reachable"] = v.real_reachable;
      jv["float_reachable"] = v.float_reachable;
      jv["real"] = to_json(v.real);
      jv["float"] = to_json(v.flt);
      jv["error"] = to_json(v.err);
      jv["discontinuity"] = to_json(v.disc);
      jv["total_error"] = to_json(v.total_err);
      jv["decomposition"] = json::array();
      for (const auto& d : v.decomposition) {
        json jd;
        jd["origin_cp"] = d.origin_cp;
        jd["kind"] = d.kind;
        jd["iv"] = to_json(d.iv);
        jd["test_cp"] = d.test_cp;
        jd["region"] = json::array();
        for (const auto& reg : d.region) jd["region"].push_back(to_json(reg));
        jv["decomposition"].push_back(std::move(jd));
      }
      jp["vars"].push_back(std::move(jv));
    }
    j["points"].push_back(std::move(jp));
  }
  j["warnings"] = json::array();
  for (const auto& w : r.warnings) {
    json jw;
    jw["test_cp"] = w.test_cp;
    jw["line"] = w.line;
    jw["is_loop"] = w.is_loop;
    for (const char* key : {"float_then", "float_else"}) {
      const DirectionText& d = key == std::string("float_then") ? w.float_then : w.float_else;
      json jd;
      jd["possible"] = d.possible;
      jd["region"] = json::array();
      for (const auto& reg : d.region) jd["region"].push_back(to_json(reg));
      jw[key] = std::move(jd);
    }
    j["warnings"].push_back(std::move(jw));
  }
  j["diagnostics"] = r.diagnostics;
  if (r.validation) {
    const ValidationSummary& v = *r.validation;
    json jv;
    jv["samples"] = v.samples;
    jv["skipped"] = v.skipped;
    jv["containment_violations"] = v.containment_violations;
    jv["divergent"] = v.divergent;
    jv["divergent_outside_region"] = v.divergent_outside_region;
    jv["float_nonterminating"] = v.float_nonterminating;
    jv["seed"] = v.seed;
    jv["loop_real_max"] = v.loop_real_max;
    jv["loop_float_max"] = v.loop_float_max;
    jv["witness_replayed"] = v.witness_replayed;
    jv["worst_discontinuity"] = json::array();
    for (const auto& w : v.worst_discontinuity) {
      jv["worst_discontinuity"].push_back(json{{"var", w.var},
                                               {"error_value", w.error_value},
                                               {"input_floats", w.input_floats},
                                               {"input_errors", w.input_errors}});
    }
    j["validation"] = std::move(jv);
  }
  return j.dump(2) + "\n";
}

AnalysisReport parse_json_report(const std::string& text) {
  json j = json::parse(text);
  AnalysisReport r;
  r.schema_version = j.at("schema_version");
  r.program = j.at("program");
  r.precision = j.at("precision");
  for (const auto& jp : j.at("points")) {
    PointReport p;
    p.cp = jp.at("cp");
    p.line = jp.at("line");
    for (const auto& jv : jp.at("vars")) {
      VarRow v;
      v.name = jv.at("name");
      v.unbounded = jv.at("unbounded");
      v.real_reachable = jv.at("real_reachable");
      v.float_reachable = jv.at("float_reachable");
      v.real = bound_from(jv.at("real"));
      v.flt = bound_from(jv.at("float"));
      v.err = bound_from(jv.at("error"));
      v.disc = bound_from(jv.at("discontinuity"));
      v.total_err = bound_from(jv.at("total_error"));
      for (const auto& jd : jv.at("decomposition")) {
        DecompRow d;
        d.origin_cp = jd.at("origin_cp");
        d.kind = jd.at("kind");
        d.iv = bound_from(jd.at("iv"));
        d.test_cp = jd.at("test_cp");
        for (const auto& jr : jd.at("region")) d.region.push_back(region_from(jr));
        v.decomposition.push_back(std::move(d));
      }
      p.vars.push_back(std::move(v));
    }
    r.points.push_back(std::move(p));
  }
  for (const auto& jw : j.at("warnings")) {
    WarningRow w;
    w.test_cp = jw.at("test_cp");
    w.line = jw.at("line");
    w.is_loop = jw.at("is_loop");
    for (const char* key : {"float_then", "float_else"}) {
      DirectionText& d = key == std::string("float_then") ? w.float_then : w.float_else;
      d.possible = jw.at(key).at("possible");
      for (const auto& jr : jw.at(key).at("region")) d.region.push_back(region_from(jr));
    }
    r.warnings.push_back(std::move(w));
  }
  for (const auto& s : j.at("diagnostics")) r.diagnostics.push_back(s);
  if (j.contains("validation")) {
    const json& jv = j.at("validation");
    ValidationSummary v;
    v.samples = jv.at("samples");
    v.skipped = jv.at("skipped");
    v.containment_violations = jv.at("containment_violations");
    v.divergent = jv.at("divergent");
    v.divergent_outside_region = jv.at("divergent_outside_region");
    v.float_nonterminating = jv.at("float_nonterminating");
    v.seed = jv.at("seed");
    v.loop_real_max = jv.at("loop_real_max").get<std::map<std::string, long>>();
    v.loop_float_max = jv.at("loop_float_max").get<std::map<std::string, long>>();
    v.witness_replayed = jv.at("witness_replayed");
    for (const auto& jw : jv.at("worst_discontinuity")) {
      WitnessText w;
      w.var = jw.at("var");
      w.error_value = jw.at("error_value");
      for (const auto& s : jw.at("input_floats")) w.input_floats.push_back(s);
      for (const auto& s : jw.at("input_errors")) w.input_errors.push_back(s);
      v.worst_discontinuity.push_back(std::move(w));
    }
    r.validation = std::move(v);
  }
  return r;
}

std::string render_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "program: " << r.program << "\n";
  os << "precision: " << r.precision << "\n";

  for (const auto& w : r.warnings) {
    os << (w.is_loop ? "unstable loop condition" : "unstable test") << " at line " << w.line
       << " (control point " << w.test_cp << ")\n";
    auto dir = [&](const char* label, const DirectionText& d) {
      os << "  " << label << ": ";
      if (!d.possible) {
        os << "impossible\n";
        return;
      }
      os << "possible";
      for (const auto& reg : d.region) os << "  [" << region_text_line(reg) << "]";
      os << "\n";
    };
    dir("float->then / real->else", w.float_then);
    dir("float->else / real->then", w.float_else);
  }

  for (const auto& p : r.points) {
    if (p.cp < 0) os << "at program end:\n";
    else os << "at control point " << p.cp << " (line " << p.line << "):\n";
    for (const auto& v : p.vars) {
      os << "  " << v.name << ":\n";
      if (v.unbounded) {
        os << "    unbounded\n";
        continue;
      }
      if (!v.real_reachable && !v.float_reachable) {
        os << "    unreachable\n";
        continue;
      }
      if (v.real_reachable)
        os << "    real          [" << v.real.lo << ", " << v.real.hi << "]\n";
      if (v.float_reachable) {
        os << "    float         [" << v.flt.lo << ", " << v.flt.hi << "]\n";
        os << "    error         [" << v.total_err.lo << ", " << v.total_err.hi << "]\n";
      }
      if (!v.decomposition.empty()) {
        os << "    decomposition:\n";
        for (const auto& d : v.decomposition) {
          os << "      " << d.kind;
          if (d.kind == "rounding") os << " at cp " << d.origin_cp;
          if (d.kind == "discontinuity") os << " from test cp " << d.test_cp;
          os << "  [" << d.iv.lo << ", " << d.iv.hi << "]";
          for (const auto& reg : d.region) os << "  where " << region_text_line(reg);
          os << "\n";
        }
      }
    }
  }
  for (const auto& d : r.diagnostics) os << "note: " << d << "\n";
  if (r.validation) {
    const ValidationSummary& v = *r.validation;
    os << "validation: " << v.samples << " samples, " << v.containment_violations
       << " containment violations, " << v.divergent << " path-divergent ("
       << v.divergent_outside_region << " outside reported regions), "
       << v.float_nonterminating << " float runs without termination\n";
    for (const auto& w : v.worst_discontinuity) {
      os << "  worst observed error for " << w.var << ": " << w.error_value << " at inputs";
      for (size_t i = 0; i < w.input_floats.size(); ++i)
        os << " " << w.input_floats[i] << " (err " << w.input_errors[i] << ")";
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace fpdrift
