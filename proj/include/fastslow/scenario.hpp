#pragma once

// Scenario files: one JSON object with four blocks.
//
//   {
//     "name": "section5",                       (optional)
//     "system":   { "A": [[..]], "B": [[..]], "G1": [[..]], "G2": [[..]], "Lambda": [..] },
//     "initial":  { "z0": [..], "y0": ["expr", ...] }      or  "y0_grid": [[..], ..]
//     "run":      { "eps": [..], "T": 5, "dt": 1e-3, "K": 200, "solver": "both",
//                   "euler_z": false, "courant": 0.9, "upwind_dt": .. },
//     "analysis": { "alpha": 0.5, "re_min": .., "re_max": .., "im_max": ..,
//                   "root_tol": 1e-12, "compat_tol": 1e-9, "det_tol": 1e-12,
//                   "rho2_tol": 1e-8, "seed": 388818, "eps_max": .., "eps_tol": 1e-3,
//                   "radius_cap": 1e5, "fit_start": .., "fit_end": .. }
//   }
//
// Matrices are row-major nested arrays. An empty block or missing key takes the
// default shown; "system" and "initial" are required. Unknown keys are errors.

#include "fastslow/error.hpp"
#include "fastslow/expression.hpp"
#include "fastslow/numeric.hpp"
#include "fastslow/system.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fastslow {

enum class SolverChoice { characteristics, upwind, both };

inline const char* to_string(SolverChoice s) {
  switch (s) {
    case SolverChoice::characteristics: return "characteristics";
    case SolverChoice::upwind: return "upwind";
    case SolverChoice::both: return "both";
  }
  return "?";
}

inline std::optional<SolverChoice> solver_from_string(const std::string& s) {
  if (s == "characteristics") return SolverChoice::characteristics;
  if (s == "upwind") return SolverChoice::upwind;
  if (s == "both") return SolverChoice::both;
  return std::nullopt;
}

struct RunSettings {
  std::vector<double> eps{0.2, 0.1, 0.05, 0.01};
  double T = 5.0;
  /// Requested step of the characteristics solver.
  double dt = 1e-3;
  /// Profile grid (both solvers) and upwind cell count.
  int K = 200;
  SolverChoice solver = SolverChoice::characteristics;
  bool euler_z = false;
  double courant = 0.9;
  /// Forces the upwind step; checked against the CFL bound.
  std::optional<double> upwind_dt;

  bool operator==(const RunSettings&) const = default;
};

struct AnalysisSettings {
  double alpha = 0.5;
  /// Window overrides; unset means the per-subsystem defaults.
  std::optional<double> re_min, re_max, im_max;
  double root_tol = 1e-12;
  double compat_tol = 1e-9;
  double det_tol = 1e-12;
  double rho2_tol = 1e-8;
  std::uint64_t seed = 0x5eed2;
  /// Upper end of the eps* search; defaults to the largest run eps.
  std::optional<double> eps_max;
  double eps_tol = 1e-3;
  double radius_cap = 1e5;
  /// Decay fit window; defaults to [T/4, T].
  std::optional<double> fit_start, fit_end;

  bool operator==(const AnalysisSettings&) const = default;
};

struct InitialSpec {
  Vec z0;
  /// One expression per channel, or a sampled grid (m x (N+1)).
  std::vector<std::string> y0_expr;
  std::optional<Mat> y0_grid;

  bool operator==(const InitialSpec& o) const {
    const bool grids = y0_grid.has_value() == o.y0_grid.has_value() &&
                       (!y0_grid || (y0_grid->rows() == o.y0_grid->rows() &&
                                     y0_grid->cols() == o.y0_grid->cols() && *y0_grid == *o.y0_grid));
    return z0.size() == o.z0.size() && z0 == o.z0 && y0_expr == o.y0_expr && grids;
  }
};

struct Scenario {
  std::string name;
  SystemParams system;
  InitialSpec initial;
  RunSettings run;
  AnalysisSettings analysis;

  bool operator==(const Scenario& o) const {
    return name == o.name && system == o.system && initial == o.initial && run == o.run &&
           analysis == o.analysis;
  }

  Profile y0() const {
    if (initial.y0_grid) return Profile::sampled(*initial.y0_grid);
    std::vector<Expression> exprs;
    for (const auto& s : initial.y0_expr) exprs.push_back(Expression::parse(s));
    const int m = static_cast<int>(exprs.size());
    return Profile::closed_form(m, [exprs](double x) {
      Vec v(static_cast<Eigen::Index>(exprs.size()));
      for (std::size_t i = 0; i < exprs.size(); ++i) v(static_cast<Eigen::Index>(i)) = exprs[i](x);
      return v;
    });
  }

  InitialCondition initial_condition() const {
    return make_initial_condition(system, initial.z0, y0(), analysis.compat_tol);
  }

  double eps_max() const {
    if (analysis.eps_max) return *analysis.eps_max;
    double e = 0.0;
    for (double v : run.eps) e = std::max(e, v);
    return e > 0.0 ? e : 1.0;
  }
  double fit_start() const { return analysis.fit_start.value_or(0.25 * run.T); }
  double fit_end() const { return analysis.fit_end.value_or(run.T); }
};

namespace detail {

using nlohmann::json;

inline Error field_error(const std::string& field, const std::string& what) {
  return Error(ErrorKind::ParseError, "field '" + field + "': " + what);
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw field_error(path + it.key(), "unknown key");
}

inline const json& object_at(const json& parent, const char* key, const std::string& path, bool required) {
  static const json empty = json::object();
  if (!parent.contains(key)) {
    if (required) throw field_error(path + key, "missing");
    return empty;
  }
  const json& v = parent.at(key);
  if (!v.is_object()) throw field_error(path + key, "expected an object");
  return v;
}

inline double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw field_error(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw field_error(field, "not finite");
  return d;
}

inline Vec vector_of(const json& v, const std::string& field) {
  if (!v.is_array()) throw field_error(field, "expected an array of numbers");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = number(v[i], field + "[" + std::to_string(i) + "]");
  return out;
}

/// Row-major nested array. An empty array is a matrix with zero rows and
/// `cols_if_empty` columns.
inline Mat matrix_of(const json& v, const std::string& field, Eigen::Index cols_if_empty = 0) {
  if (!v.is_array()) throw field_error(field, "expected a nested array");
  if (v.empty()) return Mat(0, cols_if_empty);
  const auto rows = static_cast<Eigen::Index>(v.size());
  if (!v[0].is_array()) throw field_error(field, "expected a nested array");
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Mat M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw field_error(row_field, "rows must all have " + std::to_string(cols) + " entries");
    for (Eigen::Index c = 0; c < cols; ++c)
      M(r, c) = number(row[static_cast<std::size_t>(c)], row_field + "[" + std::to_string(c) + "]");
  }
  return M;
}

inline json matrix_json(const Mat& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Parses and validates a scenario. Syntax and schema problems raise
/// ParseError (with line/column or the offending field); an invalid system or
/// initial condition raises ValidationError whose cause is the underlying kind.
inline Scenario parse_scenario(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "line 1: scenario must be a JSON object");
  detail::reject_unknown(doc, "", {"name", "system", "initial", "run", "analysis"});

  std::string name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw detail::field_error("name", "expected a string");
    name = doc["name"].get<std::string>();
  }

  const json& js = detail::object_at(doc, "system", "", true);
  detail::reject_unknown(js, "system.", {"A", "B", "G1", "G2", "Lambda"});
  for (const char* k : {"A", "B", "G1", "G2", "Lambda"})
    if (!js.contains(k)) throw detail::field_error(std::string("system.") + k, "missing");
  SystemData data;
  data.lambda = detail::vector_of(js["Lambda"], "system.Lambda");
  const auto m = data.lambda.size();
  data.A = detail::matrix_of(js["A"], "system.A");
  data.B = detail::matrix_of(js["B"], "system.B", m);
  data.G1 = detail::matrix_of(js["G1"], "system.G1");
  data.G2 = detail::matrix_of(js["G2"], "system.G2", data.A.rows());
  if (data.A.rows() == 0) data.A.resize(0, 0);

  AnalysisSettings an;
  const json& ja = detail::object_at(doc, "analysis", "", false);
  detail::reject_unknown(ja, "analysis.",
                         {"alpha", "re_min", "re_max", "im_max", "root_tol", "compat_tol", "det_tol", "rho2_tol",
                          "seed", "eps_max", "eps_tol", "radius_cap", "fit_start", "fit_end"});
  auto num_or = [](const json& obj, const char* key, const std::string& path, double& dst) {
    if (obj.contains(key)) dst = detail::number(obj[key], path + key);
  };
  auto opt_num = [](const json& obj, const char* key, const std::string& path, std::optional<double>& dst) {
    if (obj.contains(key)) dst = detail::number(obj[key], path + key);
  };
  num_or(ja, "alpha", "analysis.", an.alpha);
  opt_num(ja, "re_min", "analysis.", an.re_min);
  opt_num(ja, "re_max", "analysis.", an.re_max);
  opt_num(ja, "im_max", "analysis.", an.im_max);
  num_or(ja, "root_tol", "analysis.", an.root_tol);
  num_or(ja, "compat_tol", "analysis.", an.compat_tol);
  num_or(ja, "det_tol", "analysis.", an.det_tol);
  num_or(ja, "rho2_tol", "analysis.", an.rho2_tol);
  opt_num(ja, "eps_max", "analysis.", an.eps_max);
  num_or(ja, "eps_tol", "analysis.", an.eps_tol);
  num_or(ja, "radius_cap", "analysis.", an.radius_cap);
  opt_num(ja, "fit_start", "analysis.", an.fit_start);
  opt_num(ja, "fit_end", "analysis.", an.fit_end);
  if (ja.contains("seed")) {
    if (!ja["seed"].is_number_unsigned()) throw detail::field_error("analysis.seed", "expected a nonnegative integer");
    an.seed = ja["seed"].get<std::uint64_t>();
  }
  if (!(an.alpha > 0.0)) throw detail::field_error("analysis.alpha", "must be positive");
  const std::pair<double, const char*> positive[] = {{an.root_tol, "root_tol"}, {an.compat_tol, "compat_tol"},
                                                     {an.det_tol, "det_tol"},   {an.rho2_tol, "rho2_tol"},
                                                     {an.eps_tol, "eps_tol"},   {an.radius_cap, "radius_cap"}};
  for (const auto& [v, f] : positive)
    if (!(v > 0.0)) throw detail::field_error(std::string("analysis.") + f, "must be positive");

  RunSettings run;
  const json& jr = detail::object_at(doc, "run", "", false);
  detail::reject_unknown(jr, "run.", {"eps", "T", "dt", "K", "solver", "euler_z", "courant", "upwind_dt"});
  if (jr.contains("eps")) {
    const Vec e = detail::vector_of(jr["eps"], "run.eps");
    run.eps.assign(e.data(), e.data() + e.size());
    for (double v : run.eps)
      if (!(v > 0.0)) throw detail::field_error("run.eps", "values must be positive");
  }
  num_or(jr, "T", "run.", run.T);
  num_or(jr, "dt", "run.", run.dt);
  num_or(jr, "courant", "run.", run.courant);
  opt_num(jr, "upwind_dt", "run.", run.upwind_dt);
  if (jr.contains("K")) {
    if (!jr["K"].is_number_integer() || jr["K"].get<long long>() < 1)
      throw detail::field_error("run.K", "expected a positive integer");
    run.K = jr["K"].get<int>();
  }
  if (jr.contains("solver")) {
    const auto s = jr["solver"].is_string() ? solver_from_string(jr["solver"].get<std::string>()) : std::nullopt;
    if (!s) throw detail::field_error("run.solver", "expected characteristics, upwind or both");
    run.solver = *s;
  }
  if (jr.contains("euler_z")) {
    if (!jr["euler_z"].is_boolean()) throw detail::field_error("run.euler_z", "expected true or false");
    run.euler_z = jr["euler_z"].get<bool>();
  }
  if (!(run.T >= 0.0)) throw detail::field_error("run.T", "must be nonnegative");
  if (!(run.dt > 0.0)) throw detail::field_error("run.dt", "must be positive");
  if (!(run.courant > 0.0 && run.courant <= 1.0)) throw detail::field_error("run.courant", "must lie in (0, 1]");

  InitialSpec init;
  const json& ji = detail::object_at(doc, "initial", "", true);
  detail::reject_unknown(ji, "initial.", {"z0", "y0", "y0_grid"});
  if (!ji.contains("z0")) throw detail::field_error("initial.z0", "missing");
  init.z0 = detail::vector_of(ji["z0"], "initial.z0");
  if (ji.contains("y0") == ji.contains("y0_grid"))
    throw detail::field_error("initial.y0", "give exactly one of y0 (expressions) or y0_grid");
  if (ji.contains("y0")) {
    const json& ye = ji["y0"];
    if (!ye.is_array()) throw detail::field_error("initial.y0", "expected an array of expression strings");
    for (std::size_t i = 0; i < ye.size(); ++i) {
      const std::string f = "initial.y0[" + std::to_string(i) + "]";
      if (!ye[i].is_string()) throw detail::field_error(f, "expected an expression string");
      const std::string s = ye[i].get<std::string>();
      Expression e = [&] {
        try {
          return Expression::parse(s);
        } catch (const Error& err) {
          throw detail::field_error(f, err.what());
        }
      }();
      for (double x : {0.0, 1.0})
        if (!std::isfinite(e(x))) throw detail::field_error(f, "not finite at x = " + std::to_string(x));
      init.y0_expr.push_back(s);
    }
  } else {
    init.y0_grid = detail::matrix_of(ji["y0_grid"], "initial.y0_grid");
    if (init.y0_grid->cols() < 2) throw detail::field_error("initial.y0_grid", "needs at least two grid points");
  }

  std::optional<SystemParams> sys;
  try {
    sys = validate(data, ValidationOptions{an.det_tol});
  } catch (const Error& e) {
    throw Error(ErrorKind::ValidationError, e.kind(), std::string("system: ") + e.what());
  }
  const auto y0_dim = init.y0_grid ? init.y0_grid->rows() : static_cast<Eigen::Index>(init.y0_expr.size());
  if (init.z0.size() != sys->n())
    throw Error(ErrorKind::ValidationError, ErrorKind::DimensionMismatch,
                "initial.z0 has " + std::to_string(init.z0.size()) + " entries, expected " + std::to_string(sys->n()));
  if (y0_dim != sys->m())
    throw Error(ErrorKind::ValidationError, ErrorKind::DimensionMismatch,
                "initial y0 has " + std::to_string(y0_dim) + " channels, expected " + std::to_string(sys->m()));

  return Scenario{std::move(name), std::move(*sys), std::move(init), std::move(run), std::move(an)};
}

/// Every field written explicitly, defaults included.
inline std::string serialize_scenario(const Scenario& sc) {
  using detail::json;
  json doc = json::object();
  if (!sc.name.empty()) doc["name"] = sc.name;
  const auto& s = sc.system;
  doc["system"] = {{"A", detail::matrix_json(s.A())},
                   {"B", detail::matrix_json(s.B())},
                   {"G1", detail::matrix_json(s.G1())},
                   {"G2", detail::matrix_json(s.G2())},
                   {"Lambda", detail::vector_json(s.speeds())}};
  json init = {{"z0", detail::vector_json(sc.initial.z0)}};
  if (sc.initial.y0_grid) init["y0_grid"] = detail::matrix_json(*sc.initial.y0_grid);
  else init["y0"] = sc.initial.y0_expr;
  doc["initial"] = init;

  const auto& r = sc.run;
  json run = {{"eps", r.eps},          {"T", r.T},       {"dt", r.dt},
              {"K", r.K},              {"solver", to_string(r.solver)},
              {"euler_z", r.euler_z},  {"courant", r.courant}};
  if (r.upwind_dt) run["upwind_dt"] = *r.upwind_dt;
  doc["run"] = run;

  const auto& a = sc.analysis;
  json an = {{"alpha", a.alpha},       {"root_tol", a.root_tol}, {"compat_tol", a.compat_tol},
             {"det_tol", a.det_tol},   {"rho2_tol", a.rho2_tol}, {"seed", a.seed},
             {"eps_tol", a.eps_tol},   {"radius_cap", a.radius_cap}};
  const std::pair<const char*, std::optional<double>> optional_fields[] = {
      {"re_min", a.re_min},   {"re_max", a.re_max},       {"im_max", a.im_max},
      {"eps_max", a.eps_max}, {"fit_start", a.fit_start}, {"fit_end", a.fit_end}};
  for (const auto& [key, v] : optional_fields)
    if (v) an[key] = *v;
  doc["analysis"] = an;
  return doc.dump(2) + "\n";
}

}  // namespace fastslow
