#pragma once

// The charpoint command line: argument parsing, the six commands, text and
// json rendering. Commands write to the given streams and return the exit code.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "charpoint/asympt.hpp"
#include "charpoint/charpt.hpp"
#include "charpoint/registry.hpp"
#include "charpoint/solve.hpp"
#include "charpoint/sysdef.hpp"
#include "charpoint/transform.hpp"
#include "charpoint/validate.hpp"

namespace charpoint::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kFailure = 1, kInvalid = 2, kCap = 3, kMultipleEigenpoints = 4 };

enum class Format { text, json };

struct RunConfig {
  std::string command;
  std::string input_path;
  std::string registry_key;
  std::optional<unsigned> order;  // N; the default depends on the command
  unsigned probe_order = 24;
  int n_starts = 64;
  std::uint64_t seed = 0;
  std::vector<double> box;  // x_max, y_max... (empty: default box)
  Format format = Format::text;
  double eigentol = 1e-6;
  std::vector<std::string> steps;
  bool saturate = false;
  std::size_t max_steps = 100;  // saturation cap
  std::string only;

  unsigned N() const {
    if (order) return *order;
    if (command == "asympt") return 2000;
    if (command == "transform") return 64;
    return 512;
  }
};

/// A diagnostic that ends the command with the given exit code.
class Failure : public std::runtime_error {
 public:
  Failure(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

// ---------------------------------------------------------------- rendering helpers

inline Json rational_json(const Rational& q) { return Json{{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}}; }

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string vec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + ")";
}

inline Json point_json(const CharPoint& p) {
  return Json{{"a", p.a},           {"b", p.b},
              {"residual", p.residual}, {"lambda", p.lambda},
              {"location", to_string(p.location)}, {"is_eigenpoint", p.is_eigenpoint}};
}

inline void write_json(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

// ---------------------------------------------------------------- input

struct Input {
  std::string source;  // registry key or path
  SystemSpec spec;
};

inline Input load_input(const RunConfig& cfg) {
  if (!cfg.registry_key.empty() && !cfg.input_path.empty())
    throw Failure(kInvalid, "give either --registry or a FILE, not both");
  if (!cfg.registry_key.empty()) {
    const RegistryEntry* e = find_registry_entry(cfg.registry_key);
    if (!e) {
      std::string keys;
      for (const auto& r : registry()) keys += " " + r.key;
      throw Failure(kInvalid, "unknown registry key '" + cfg.registry_key + "'; known:" + keys);
    }
    return {e->key, parse(e->text)};
  }
  if (cfg.input_path.empty()) throw Failure(kInvalid, "no input: give --registry KEY or a FILE");
  std::ifstream in(cfg.input_path, std::ios::binary);
  if (!in) throw Failure(kInvalid, "cannot read '" + cfg.input_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return {cfg.input_path, parse(ss.str())};
  } catch (const ParseError& e) {
    throw Failure(kInvalid, cfg.input_path + ":" + e.what());
  }
}

inline void check_config(const RunConfig& cfg) {
  const unsigned min_order = cfg.command == "solve" ? 1 : 16;
  if (cfg.N() < min_order) throw Failure(kInvalid, "-N must be at least " + std::to_string(min_order));
  if (cfg.n_starts < 1) throw Failure(kInvalid, "--starts must be at least 1");
  if (cfg.probe_order < 2) throw Failure(kInvalid, "--probe-order must be at least 2");
  if (!(cfg.eigentol > 0.0) || !std::isfinite(cfg.eigentol)) throw Failure(kInvalid, "--eigentol must be positive");
  for (double b : cfg.box)
    if (!(b > 0.0) || !std::isfinite(b)) throw Failure(kInvalid, "--box entries must be positive");
}

/// Validation failures end the command; undecidable conditions are warned about.
inline void require_well_conditioned(const SystemSpec& spec, const RunConfig& cfg, std::ostream& err) {
  const ValidationReport rep = validate(spec, cfg.probe_order);
  const std::pair<const char*, const ConditionResult*> conds[] = {{"a", &rep.a}, {"b", &rep.b}, {"c", &rep.c},
                                                                  {"d", &rep.d}, {"e", &rep.e}, {"f", &rep.f},
                                                                  {"g", &rep.g}};
  std::string failed;
  for (const auto& [name, r] : conds) {
    if (r->verdict == Verdict::fail) failed += std::string("\n  (") + name + ") " + r->witness;
    if (r->verdict == Verdict::undecidable)
      err << "warning: condition (" << name << ") undecidable at probe order " << cfg.probe_order << ": " << r->witness
          << "\n";
  }
  if (!failed.empty()) throw Failure(kInvalid, "system is not well-conditioned:" + failed);
}

// ---------------------------------------------------------------- shared pipeline

struct Analysis {
  std::shared_ptr<const CompiledSystem> cs;
  std::optional<double> rho_coefficients;  // ratio estimate from the first component
  double rho_seed = 0.0;
  SearchBox box;
  std::vector<CharPoint> points;
  std::vector<std::string> notes;
};

inline SearchBox box_from(const std::vector<double>& v, std::size_t m) {
  if (v.size() != 2 && v.size() != m + 1)
    throw Failure(kInvalid, "--box takes x_max and either one y_max or " + std::to_string(m) + " of them");
  SearchBox b;
  b.x_max = v[0];
  b.y_max.assign(m, v[1]);
  if (v.size() == m + 1) b.y_max.assign(v.begin() + 1, v.end());
  return b;
}

/// Coefficients to order N, the ratio estimate of rho, the search box and
/// the characteristic points found in it.
inline Analysis analyze(const SystemSpec& spec, const RunConfig& cfg) {
  Analysis a;
  a.cs = std::make_shared<const CompiledSystem>(spec);
  const StandardSolution sol = solve_coefficients(spec, cfg.N());
  try {
    a.rho_coefficients = estimate_radius(sol, 0);
  } catch (const AsymptError& e) {
    a.notes.push_back(std::string("no coefficient radius estimate: ") + e.what());
  }
  a.rho_seed = a.rho_coefficients.value_or(0.0);
  if (!(a.rho_seed > 0.0) || !std::isfinite(a.rho_seed)) a.rho_seed = domain_radius(*a.cs);
  a.box = cfg.box.empty() ? default_search_box(*a.cs, a.rho_seed) : box_from(cfg.box, spec.arity());
  a.points = find_char_points(*a.cs, a.box, SearchOptions{cfg.n_starts, cfg.seed, cfg.eigentol});
  return a;
}

inline ExtremeReport extreme_of(const Analysis& a, const RunConfig& cfg) {
  try {
    return classify(a.points, *a.cs, a.rho_seed, cfg.eigentol);
  } catch (const MultipleEigenpointsError& e) {
    throw Failure(kMultipleEigenpoints, e.what());
  }
}

inline Json box_json(const SearchBox& b) { return Json{{"x_max", b.x_max}, {"y_max", b.y_max}}; }

// ---------------------------------------------------------------- commands

inline int cmd_solve(const RunConfig& cfg, const Input& in, std::ostream& out) {
  const StandardSolution sol = solve_coefficients(in.spec, cfg.N());
  const std::size_t m = sol.arity();
  if (cfg.format == Format::json) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m; ++i)
      for (unsigned n = 0; n <= cfg.N(); ++n)
        rows.push_back(Json{{"component", i + 1},
                            {"n", n},
                            {"num", sol.coefficients[i][n].get_num().get_str()},
                            {"den", sol.coefficients[i][n].get_den().get_str()}});
    Json strides = Json::array();
    for (unsigned s : sol.support_stride) strides.push_back(s);
    write_json(out, Json{{"command", "solve"},
                         {"system", in.source},
                         {"order", cfg.N()},
                         {"support_stride", strides},
                         {"coefficients", rows}});
    return kOk;
  }
  out << "n";
  for (std::size_t i = 0; i < m; ++i) out << "\t" << detail::yname(in.spec, i);
  out << "\n";
  for (unsigned n = 0; n <= cfg.N(); ++n) {
    out << n;
    for (std::size_t i = 0; i < m; ++i) out << "\t" << to_string(sol.coefficients[i][n]);
    out << "\n";
  }
  return kOk;
}

inline int cmd_charpoints(const RunConfig& cfg, const Input& in, std::ostream& out) {
  const Analysis a = analyze(in.spec, cfg);
  if (cfg.format == Format::json) {
    Json pts = Json::array();
    for (const auto& p : a.points) pts.push_back(point_json(p));
    write_json(out, Json{{"command", "charpoints"},
                         {"system", in.source},
                         {"box", box_json(a.box)},
                         {"n_starts", cfg.n_starts},
                         {"seed", cfg.seed},
                         {"points", pts}});
    return kOk;
  }
  out << a.points.size() << " characteristic point(s) found in x <= " << num(a.box.x_max) << ", y <= "
      << vec(a.box.y_max) << "\n";
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    const auto& p = a.points[k];
    out << k + 1 << ". a = " << num(p.a) << "  b = " << vec(p.b) << "  Lambda = " << num(p.lambda)
        << (p.is_eigenpoint ? "  eigenpoint" : "") << "  [" << to_string(p.location)
        << "]  residual = " << num(p.residual) << "\n";
  }
  return kOk;
}

inline Json report_json(const ExtremeReport& r) {
  return Json{{"rho", r.rho},
              {"tau", r.tau},
              {"method", to_string(r.method)},
              {"lambda_at_extreme", r.lambda_at_extreme},
              {"cross_check", Json{{"rho_hat", r.cross_check_rho}, {"gap", r.cross_check_gap}}},
              {"warnings", r.warnings}};
}

inline int cmd_classify(const RunConfig& cfg, const Input& in, std::ostream& out) {
  const Analysis a = analyze(in.spec, cfg);
  const ExtremeReport r = extreme_of(a, cfg);
  if (cfg.format == Format::json) {
    Json j{{"command", "classify"}, {"system", in.source}};
    const Json body = report_json(r);
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    j["points_found"] = a.points.size();
    write_json(out, j);
    return kOk;
  }
  if (r.method == ExtremeMethod::eigenpoint) {
    out << "eigenpoint: rho = " << num(r.rho) << ", tau = " << vec(r.tau) << "\n";
    out << "Lambda(rho, tau) = " << num(r.lambda_at_extreme) << "\n";
  } else {
    out << "no eigenpoint found; boundary-estimated rho = " << num(r.rho) << ", tau = " << vec(r.tau) << "\n";
    out << "Lambda(rho, tau) = " << num(r.lambda_at_extreme) << (r.lambda_at_extreme < 1.0 ? " < 1" : "") << "\n";
  }
  out << "method: " << to_string(r.method) << "\n";
  out << "cross-check: coefficient radius " << num(r.cross_check_rho) << ", relative gap " << num(r.cross_check_gap)
      << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  return kOk;
}

inline int cmd_asympt(const RunConfig& cfg, const Input& in, std::ostream& out) {
  const StandardSolution sol = solve_coefficients(in.spec, cfg.N());
  const CompiledSystem cs(in.spec);
  std::vector<double> rho_hat;
  std::vector<AsymptoticFit> fits;
  try {
    for (std::size_t i = 0; i < sol.arity(); ++i) rho_hat.push_back(estimate_radius(sol, i));
    // exponents are fitted against the pointwise radius, which is far sharper
    // than the ratio estimate
    const double rho_ref = domain_radius(cs, rho_hat[0]);
    for (std::size_t i = 0; i < sol.arity(); ++i) fits.push_back(fit_exponent(sol, i, rho_ref));
  } catch (const AsymptError& e) {
    throw Failure(kInvalid, std::string(e.what()) + " (raise -N)");
  }
  if (cfg.format == Format::json) {
    Json comps = Json::array();
    for (std::size_t i = 0; i < fits.size(); ++i) {
      const auto& f = fits[i];
      comps.push_back(Json{{"component", i + 1},
                           {"rho_hat", rho_hat[i]},
                           {"rho_fit", f.rho_hat},
                           {"exponent_hat", f.exponent_hat},
                           {"C_hat", f.C_hat},
                           {"stride", f.stride},
                           {"window", {f.window_lo, f.window_hi}},
                           {"window_exponents", f.window_exponents},
                           {"fit_residual", f.fit_residual},
                           {"out_of_family", f.out_of_family}});
    }
    write_json(out, Json{{"command", "asympt"}, {"system", in.source}, {"order", cfg.N()}, {"components", comps}});
    return kOk;
  }
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    out << detail::yname(in.spec, i) << ": rho_hat = " << num(rho_hat[i]) << "  alpha_hat = " << num(f.exponent_hat)
        << " (fitted at rho = " << num(f.rho_hat) << ")  C_hat = " << num(f.C_hat) << "\n";
    out << "    stride " << f.stride << ", window [" << f.window_lo << ", " << f.window_hi << "], residual "
        << num(f.fit_residual) << (f.out_of_family ? ", out of family (no singular factor)" : "") << "\n";
  }
  return kOk;
}

inline int cmd_transform(const RunConfig& cfg, const Input& in, std::ostream& out) {
  if (cfg.steps.empty() && !cfg.saturate) throw Failure(kInvalid, "transform needs --step or --saturate");
  SystemSpec spec = in.spec;
  std::vector<SubstitutionStep> log;
  try {
    for (const auto& text : cfg.steps) {
      log.push_back(parse_step(text));
      spec = minimal_substitute(spec, log.back(), cfg.probe_order);
    }
    if (cfg.saturate) {
      const SaturationResult r = saturate_jacobian(spec, cfg.probe_order, cfg.max_steps);
      log.insert(log.end(), r.steps.begin(), r.steps.end());
      spec = r.spec;
    }
  } catch (const SaturationError& e) {
    throw Failure(kCap, e.what());
  } catch (const TransformError& e) {
    throw Failure(kInvalid, e.what());
  }

  RunConfig search = cfg;
  search.order = 512;
  const Analysis a = analyze(in.spec, search);
  const InvarianceReport inv = verify_invariance(in.spec, spec, a.points, cfg.eigentol);
  const StandardSolution s0 = solve_coefficients(in.spec, cfg.N()), s1 = solve_coefficients(spec, cfg.N());
  const bool same_solution = s0.coefficients == s1.coefficients;
  const bool pass = inv.pass() && same_solution;
  const auto zeros = jacobian_zero_entries(spec, cfg.probe_order);

  if (cfg.format == Format::json) {
    Json steps = Json::array();
    for (const auto& s : log)
      steps.push_back(Json{{"i", s.i + 1}, {"j", s.j + 1}, {"occ", s.occurrence + 1}, {"alpha", rational_json(s.alpha)}});
    Json z = Json::array();
    for (const auto& [i, j] : zeros) z.push_back({i + 1, j + 1});
    Json pts = Json::array();
    for (const auto& e : inv.entries)
      pts.push_back(Json{{"a", e.a},
                         {"b", e.b},
                         {"residual", e.residual},
                         {"lambda", e.lambda},
                         {"lambda_transformed", e.lambda_transformed},
                         {"eigen", e.eigen},
                         {"eigen_transformed", e.eigen_transformed},
                         {"pass", e.pass}});
    write_json(out, Json{{"command", "transform"},
                         {"system", in.source},
                         {"steps", steps},
                         {"transformed", print(spec)},
                         {"jacobian_zeros", z},
                         {"invariance", Json{{"order", cfg.N()},
                                             {"standard_solution_equal", same_solution},
                                             {"points", pts},
                                             {"pass", pass}}}});
    return pass ? kOk : kFailure;
  }
  for (const auto& s : log) out << "# step " << to_string(s) << "\n";
  out << print(spec);
  out << "# zero Jacobian entries: " << zeros.size() << "\n";
  out << "# standard solution equal through order " << cfg.N() << ": " << (same_solution ? "yes" : "NO") << "\n";
  for (const auto& e : inv.entries)
    out << "# point a = " << num(e.a) << ": residual " << num(e.residual) << ", Lambda " << num(e.lambda) << " -> "
        << num(e.lambda_transformed) << ", eigen flag " << (e.eigen ? "1" : "0") << " -> "
        << (e.eigen_transformed ? "1" : "0") << (e.pass ? "" : "  FAIL") << "\n";
  out << "# invariance: " << (pass ? "pass" : "FAIL") << "\n";
  return pass ? kOk : kFailure;
}

// ---------------------------------------------------------------- verify

struct VerifyOutcome {
  std::string key;
  bool pass = true;
  std::vector<std::string> failures;
};

inline double max_diff(const std::vector<double>& got, const std::vector<ExpectedCoordinate>& want) {
  if (got.size() != want.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) d = std::max(d, std::fabs(got[i] - want[i].value));
  return std::isnan(d) ? INFINITY : d;
}

inline std::string printed(const std::vector<ExpectedCoordinate>& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? ", " : "") + c[i].printed;
  return s + ")";
}

/// Runs one registry entry through charpoints and classify and compares with
/// its expectations.
inline VerifyOutcome verify_entry(const RegistryEntry& e, const RunConfig& cfg) {
  VerifyOutcome v{e.key, true, {}};
  auto fail = [&](const std::string& s) {
    v.pass = false;
    v.failures.push_back(s);
  };
  try {
    const Analysis a = analyze(parse(e.text), cfg);
    if (e.point_count && a.points.size() != *e.point_count)
      fail("expected " + std::to_string(*e.point_count) + " characteristic point(s), found " +
           std::to_string(a.points.size()));
    for (std::size_t k = 0; k < e.points.size(); ++k) {
      const auto& want = e.points[k];
      const CharPoint* best = nullptr;
      double bd = INFINITY;
      for (const auto& p : a.points) {
        std::vector<double> got{p.a};
        got.insert(got.end(), p.b.begin(), p.b.end());
        const double d = max_diff(got, want.coords);
        if (d < bd) bd = d, best = &p;
      }
      if (!best || bd > want.tolerance) {
        fail("point " + printed(want.coords) + ": " +
             (best ? "closest found (" + num(best->a) + ", " + vec(best->b).substr(1) + " differs by " + num(bd)
                   : std::string("nothing found")) +
             " (tolerance " + num(want.tolerance) + ")");
        continue;
      }
      if (want.eigenpoint && *want.eigenpoint != best->is_eigenpoint)
        fail("point " + printed(want.coords) + ": eigenpoint flag " + (best->is_eigenpoint ? "true" : "false") +
             ", expected " + (*want.eigenpoint ? "true" : "false") + " (Lambda = " + num(best->lambda) + ")");
    }
    if (e.extreme) {
      const ExtremeReport r = classify(a.points, *a.cs, a.rho_seed, cfg.eigentol);
      const auto& x = *e.extreme;
      if (x.method != to_string(r.method)) fail("method " + std::string(to_string(r.method)) + ", expected " + x.method);
      if (!x.coords.empty()) {
        std::vector<double> got{r.rho};
        got.insert(got.end(), r.tau.begin(), r.tau.end());
        const double d = max_diff(got, x.coords);
        if (!(d <= x.tolerance))
          fail("extreme point (" + num(r.rho) + ", " + vec(r.tau).substr(1) + ", expected " + printed(x.coords) +
               " (difference " + num(d) + ", tolerance " + num(x.tolerance) + ")");
      }
      if (x.lambda && !(std::fabs(r.lambda_at_extreme - *x.lambda) <= x.lambda_tolerance))
        fail("Lambda at the extreme point " + num(r.lambda_at_extreme) + ", expected " + num(*x.lambda) + " +- " +
             num(x.lambda_tolerance));
    }
  } catch (const std::exception& ex) {
    fail(std::string("error: ") + ex.what());
  }
  return v;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  std::vector<const RegistryEntry*> entries;
  for (const auto& e : registry())
    if (cfg.only.empty() || e.key == cfg.only) entries.push_back(&e);
  if (entries.empty()) throw Failure(kInvalid, "unknown registry key '" + cfg.only + "'");
  bool all = true;
  Json rows = Json::array();
  for (const auto* e : entries) {
    const VerifyOutcome v = verify_entry(*e, cfg);
    all = all && v.pass;
    if (cfg.format == Format::json) {
      rows.push_back(Json{{"key", v.key}, {"pass", v.pass}, {"failures", v.failures}});
    } else {
      out << (v.pass ? "PASS " : "FAIL ") << v.key << "\n";
      for (const auto& f : v.failures) out << "    " << f << "\n";
    }
  }
  if (cfg.format == Format::json) write_json(out, Json{{"command", "verify"}, {"entries", rows}, {"pass", all}});
  return all ? kOk : kFailure;
}

// ---------------------------------------------------------------- entry points

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    check_config(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    const Input in = load_input(cfg);
    require_well_conditioned(in.spec, cfg, err);
    if (cfg.command == "solve") return cmd_solve(cfg, in, out);
    if (cfg.command == "charpoints") return cmd_charpoints(cfg, in, out);
    if (cfg.command == "classify") return cmd_classify(cfg, in, out);
    if (cfg.command == "asympt") return cmd_asympt(cfg, in, out);
    if (cfg.command == "transform") return cmd_transform(cfg, in, out);
    throw Failure(kInvalid, "unknown command '" + cfg.command + "'");
  } catch (const Failure& f) {
    err << "charpoint: " << f.what() << "\n";
    return f.code;
  } catch (const ParseError& e) {
    err << "charpoint: " << e.what() << "\n";
    return kInvalid;
  } catch (const SolveError& e) {
    err << "charpoint: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    err << "charpoint: " << e.what() << "\n";
    return kFailure;
  }
}

/// Parses argv into a RunConfig and runs it. Usage errors exit with 2.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extreme points of positive systems y = G(x, y) via characteristic points", "charpoint"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string box, format = "text";
  unsigned order = 0;

  auto common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input) {
      sub->add_option("--registry", cfg.registry_key, "built-in example key");
      sub->add_option("FILE", cfg.input_path, "system file");
    }
    sub->add_option("-N", order, "coefficient order");
    sub->add_option("--probe-order", cfg.probe_order, "series order for structural checks");
    sub->add_option("--starts", cfg.n_starts, "Newton starts");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--box", box, "search box x_max,y_max[,y_max...]");
    sub->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--eigentol", cfg.eigentol, "tolerance on |Lambda - 1|");
  };
  const std::pair<const char*, const char*> plain[] = {
      {"solve", "exact coefficients of the standard solution"},
      {"charpoints", "characteristic points in the search box"},
      {"classify", "the extreme point (rho, tau) and how it was found"},
      {"asympt", "radius and exponent fitted to the coefficients"}};
  for (const auto& [name, about] : plain) common(app.add_subcommand(name, about), true);
  auto* tr = app.add_subcommand("transform", "self-substitution transforms");
  common(tr, true);
  tr->add_option("--step", cfg.steps, "i=1,j=2,occ=1,alpha=1/2, all 1-based (repeatable)");
  tr->add_flag("--saturate", cfg.saturate, "substitute until no Jacobian entry is zero");
  tr->add_option("--max-steps", cfg.max_steps, "saturation cap");
  auto* ver = app.add_subcommand("verify", "check every registry entry");
  common(ver, false);
  ver->add_option("--only", cfg.only, "single registry key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "charpoint: " << e.what() << "\n";
    return kInvalid;
  }
  for (auto* sub : app.get_subcommands())
    if (sub->parsed()) cfg.command = sub->get_name();
  if (order != 0 || app.get_subcommand(cfg.command)->count("-N")) cfg.order = order;
  cfg.format = format == "json" ? Format::json : Format::text;
  if (!box.empty()) {
    std::stringstream ss(box);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        cfg.box.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        err << "charpoint: bad --box entry '" << item << "'\n";
        return kInvalid;
      }
    }
  }
  return run(cfg, out, err);
}

}  // namespace charpoint::cli
