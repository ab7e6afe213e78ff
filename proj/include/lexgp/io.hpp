#pragma once

// Problem files and solver reports (JSON). Key names here are the wire
// format documented in the README; changing one is a format break.

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lexgp/error.hpp"
#include "lexgp/lex_driver.hpp"
#include "lexgp/posy_core.hpp"

namespace lexgp {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Problem files

namespace io_detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& field, const std::string& msg) {
  throw Error(code, field + ": " + msg);
}

inline const ojson& require(const ojson& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) fail(ErrorCode::MalformedDocument, path + "." + key, "missing required field");
  return obj.at(key);
}

inline double number(const ojson& v, const std::string& path) {
  if (!v.is_number()) fail(ErrorCode::MalformedDocument, path, "expected a number");
  return v.get<double>();
}

inline Posynomial parse_terms(const ojson& terms, Index n, const std::string& path) {
  if (!terms.is_array() || terms.empty()) fail(ErrorCode::MalformedDocument, path, "expected a nonempty array of terms");
  std::vector<Term> out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string tp = path + "[" + std::to_string(t) + "]";
    const ojson& term = terms[t];
    if (!term.is_object()) fail(ErrorCode::MalformedDocument, tp, "expected an object");
    const double coeff = number(require(term, "coeff", tp), tp + ".coeff");
    if (!(coeff > 0.0)) fail(ErrorCode::NonpositiveCoefficient, tp + ".coeff", "coefficient must be positive, got " + term["coeff"].dump());
    const ojson& ex = require(term, "exponents", tp);
    if (!ex.is_array()) fail(ErrorCode::MalformedDocument, tp + ".exponents", "expected an array");
    if (static_cast<Index>(ex.size()) != n)
      fail(ErrorCode::ExponentLengthMismatch, tp + ".exponents",
           "has " + std::to_string(ex.size()) + " entries but there are " + std::to_string(n) + " variables");
    VectorXd e(n);
    for (Index j = 0; j < n; ++j)
      e(j) = number(ex[static_cast<std::size_t>(j)], tp + ".exponents[" + std::to_string(j) + "]");
    out.push_back(Term{coeff, std::move(e)});
  }
  return Posynomial(std::move(out));
}

}  // namespace io_detail

/// Parses and validates a problem document. Errors name the offending field
/// (e.g. "objectives[0].terms[1].coeff"); syntax errors carry the parser's
/// line and column.
inline LexGPProblem parse_problem(const std::string& text) {
  using namespace io_detail;
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("document: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::MalformedDocument, "document", "top level must be an object");
  for (const auto& item : doc.items())
    if (item.key() != "variables" && item.key() != "objectives" && item.key() != "constraints")
      fail(ErrorCode::MalformedDocument, item.key(), "unknown top-level field");

  const ojson& vars = require(doc, "variables", "document");
  if (!vars.is_array() || vars.empty()) fail(ErrorCode::MalformedDocument, "variables", "expected a nonempty array of names");
  std::vector<std::string> names;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (!vars[j].is_string()) fail(ErrorCode::MalformedDocument, "variables[" + std::to_string(j) + "]", "expected a string");
    const std::string name = vars[j].get<std::string>();
    for (const auto& prior : names)
      if (prior == name) fail(ErrorCode::MalformedDocument, "variables[" + std::to_string(j) + "]", "duplicate name '" + name + "'");
    names.push_back(name);
  }
  const Index n = static_cast<Index>(names.size());

  if (!doc.contains("objectives")) fail(ErrorCode::EmptyObjectives, "objectives", "missing; at least one objective is required");
  const ojson& objs = doc.at("objectives");
  if (!objs.is_array()) fail(ErrorCode::MalformedDocument, "objectives", "expected an array");
  if (objs.empty()) fail(ErrorCode::EmptyObjectives, "objectives", "at least one objective is required");
  std::vector<Posynomial> objectives;
  std::vector<std::string> objective_names;
  for (std::size_t k = 0; k < objs.size(); ++k) {
    const std::string path = "objectives[" + std::to_string(k) + "]";
    if (!objs[k].is_object()) fail(ErrorCode::MalformedDocument, path, "expected an object");
    std::string name = "g" + std::to_string(k + 1);
    if (objs[k].contains("name")) {
      if (!objs[k]["name"].is_string()) fail(ErrorCode::MalformedDocument, path + ".name", "expected a string");
      name = objs[k]["name"].get<std::string>();
    }
    objective_names.push_back(name);
    objectives.push_back(parse_terms(require(objs[k], "terms", path), n, path + ".terms"));
  }

  std::vector<Constraint> constraints;
  if (doc.contains("constraints")) {
    const ojson& cons = doc.at("constraints");
    if (!cons.is_array()) fail(ErrorCode::MalformedDocument, "constraints", "expected an array");
    for (std::size_t i = 0; i < cons.size(); ++i) {
      const std::string path = "constraints[" + std::to_string(i) + "]";
      if (!cons[i].is_object()) fail(ErrorCode::MalformedDocument, path, "expected an object");
      Posynomial lhs = parse_terms(require(cons[i], "terms", path), n, path + ".terms");
      const double bound = number(require(cons[i], "bound", path), path + ".bound");
      if (!(bound > 0.0)) fail(ErrorCode::NonpositiveBound, path + ".bound", "bound must be positive, got " + cons[i]["bound"].dump());
      constraints.emplace_back(std::move(lhs), bound);
    }
  }
  return LexGPProblem(std::move(names), std::move(objectives), std::move(constraints), std::move(objective_names));
}

inline LexGPProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedDocument, "file: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

// ---------------------------------------------------------------------------
// Reports

/// Rounds to 9 significant digits, the precision every report carries.
inline double round_sig9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct WeightRecord {
  std::string block;  // "objective" or the constraint label
  std::size_t term = 0;
  double weight = 0.0;
  bool operator==(const WeightRecord&) const = default;
};

struct ActivityRecord {
  std::string constraint;
  double u = 0.0;
  bool operator==(const ActivityRecord&) const = default;
};

struct StageRecord {
  std::size_t index = 1;  // 1-based priority
  std::string objective;
  int degree_of_difficulty = 0;
  std::string dual_method;
  int dual_iterations = 0;
  double dual_value = 0.0;
  std::vector<WeightRecord> dual_weights;
  std::vector<ActivityRecord> constraint_activity;
  std::vector<double> primal;
  double objective_value = 0.0;
  bool unique = true;
  long rank = 0;
  long optimal_set_dimension = 0;
  std::optional<double> carried_bound;
  double equality_residual = 0.0;
  double system_residual = 0.0;
  double consistency_residual = 0.0;
  double duality_gap = 0.0;
  double feasibility_margin = 0.0;
  std::optional<double> oracle_value;
  std::optional<std::string> oracle_status;
  std::optional<double> sampled_min_objective;
  bool operator==(const StageRecord&) const = default;
};

struct ReportDocument {
  std::string mode;
  double carry_eps = 0.0;
  std::vector<std::string> variables;
  std::vector<std::string> objectives;
  std::vector<StageRecord> stages;
  std::vector<double> final_x;
  std::vector<double> objective_vector;
  bool operator==(const ReportDocument&) const = default;
};

inline std::vector<double> rounded(const VectorXd& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Index j = 0; j < v.size(); ++j) out[static_cast<std::size_t>(j)] = round_sig9(v(j));
  return out;
}

inline StageRecord make_stage_record(const LexGPProblem& p, const StageSolution& st) {
  StageRecord r;
  r.index = st.stage_index + 1;
  r.objective = p.objective_names[st.stage_index];
  r.degree_of_difficulty = st.degree_of_difficulty;
  r.dual_method = to_string(st.dual.method);
  r.dual_iterations = st.dual.iterations;
  r.dual_value = round_sig9(st.dual.value);
  Index flat = 0;
  for (std::size_t t = 0; t < st.stage.objective.size(); ++t)
    r.dual_weights.push_back({"objective", t, round_sig9(st.dual.w(flat++))});
  for (std::size_t i = 0; i < st.stage.constraints.size(); ++i) {
    for (std::size_t t = 0; t < st.stage.constraints[i].size(); ++t)
      r.dual_weights.push_back({st.stage.constraint_labels[i], t, round_sig9(st.dual.w(flat++))});
    r.constraint_activity.push_back({st.stage.constraint_labels[i], round_sig9(st.dual.lambda(static_cast<Index>(i)))});
  }
  r.primal = rounded(st.primal.x);
  r.objective_value = round_sig9(st.objective_value);
  r.unique = st.primal.unique;
  r.rank = static_cast<long>(st.primal.rank);
  r.optimal_set_dimension = static_cast<long>(st.primal.optimal_set_dimension);
  if (st.carried_bound) r.carried_bound = round_sig9(*st.carried_bound);
  r.equality_residual = round_sig9(st.dual.residual);
  r.system_residual = round_sig9(st.primal.system_residual);
  r.consistency_residual = round_sig9(st.primal.consistency_residual);
  r.duality_gap = round_sig9(st.primal.duality_gap);
  r.feasibility_margin = round_sig9(st.primal.feasibility_margin);
  return r;
}

inline ReportDocument make_report(const LexGPProblem& p, const LexSolution& sol) {
  ReportDocument doc;
  doc.mode = to_string(sol.mode);
  doc.carry_eps = round_sig9(sol.carry_eps);
  doc.variables = p.variable_names;
  doc.objectives = p.objective_names;
  for (const auto& st : sol.stages) doc.stages.push_back(make_stage_record(p, st));
  doc.final_x = rounded(sol.final_x);
  doc.objective_vector = rounded(sol.objective_vector);
  return doc;
}

namespace io_detail {

template <class T>
ojson optional_json(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

template <class T>
std::optional<T> optional_from(const ojson& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace io_detail

inline ojson to_json(const StageRecord& r) {
  ojson weights = ojson::array();
  for (const auto& w : r.dual_weights) weights.push_back({{"block", w.block}, {"term", w.term}, {"weight", w.weight}});
  ojson activity = ojson::array();
  for (const auto& a : r.constraint_activity) activity.push_back({{"constraint", a.constraint}, {"u", a.u}});
  return ojson{
      {"index", r.index},
      {"objective", r.objective},
      {"degree_of_difficulty", r.degree_of_difficulty},
      {"dual_method", r.dual_method},
      {"dual_iterations", r.dual_iterations},
      {"dual_value", r.dual_value},
      {"dual_weights", weights},
      {"constraint_activity", activity},
      {"primal", r.primal},
      {"objective_value", r.objective_value},
      {"unique", r.unique},
      {"rank", r.rank},
      {"optimal_set_dimension", r.optimal_set_dimension},
      {"carried_bound", io_detail::optional_json(r.carried_bound)},
      {"residuals",
       {{"equality", r.equality_residual},
        {"log_system", r.system_residual},
        {"weight_consistency", r.consistency_residual},
        {"duality_gap", r.duality_gap},
        {"feasibility_margin", r.feasibility_margin}}},
      {"oracle",
       {{"value", io_detail::optional_json(r.oracle_value)},
        {"status", io_detail::optional_json(r.oracle_status)},
        {"sampled_min_objective", io_detail::optional_json(r.sampled_min_objective)}}},
  };
}

inline ojson to_json(const ReportDocument& doc) {
  ojson stages = ojson::array();
  for (const auto& s : doc.stages) stages.push_back(to_json(s));
  return ojson{
      {"mode", doc.mode},
      {"carry_eps", doc.carry_eps},
      {"variables", doc.variables},
      {"objectives", doc.objectives},
      {"stages", stages},
      {"final_x", doc.final_x},
      {"objective_vector", doc.objective_vector},
  };
}

inline StageRecord stage_record_from_json(const ojson& j) {
  StageRecord r;
  r.index = j.at("index").get<std::size_t>();
  r.objective = j.at("objective").get<std::string>();
  r.degree_of_difficulty = j.at("degree_of_difficulty").get<int>();
  r.dual_method = j.at("dual_method").get<std::string>();
  r.dual_iterations = j.at("dual_iterations").get<int>();
  r.dual_value = j.at("dual_value").get<double>();
  for (const auto& w : j.at("dual_weights"))
    r.dual_weights.push_back({w.at("block").get<std::string>(), w.at("term").get<std::size_t>(), w.at("weight").get<double>()});
  for (const auto& a : j.at("constraint_activity"))
    r.constraint_activity.push_back({a.at("constraint").get<std::string>(), a.at("u").get<double>()});
  r.primal = j.at("primal").get<std::vector<double>>();
  r.objective_value = j.at("objective_value").get<double>();
  r.unique = j.at("unique").get<bool>();
  r.rank = j.at("rank").get<long>();
  r.optimal_set_dimension = j.at("optimal_set_dimension").get<long>();
  r.carried_bound = io_detail::optional_from<double>(j, "carried_bound");
  const ojson& res = j.at("residuals");
  r.equality_residual = res.at("equality").get<double>();
  r.system_residual = res.at("log_system").get<double>();
  r.consistency_residual = res.at("weight_consistency").get<double>();
  r.duality_gap = res.at("duality_gap").get<double>();
  r.feasibility_margin = res.at("feasibility_margin").get<double>();
  const ojson& orc = j.at("oracle");
  r.oracle_value = io_detail::optional_from<double>(orc, "value");
  r.oracle_status = io_detail::optional_from<std::string>(orc, "status");
  r.sampled_min_objective = io_detail::optional_from<double>(orc, "sampled_min_objective");
  return r;
}

inline ReportDocument report_from_json(const ojson& j) {
  ReportDocument doc;
  doc.mode = j.at("mode").get<std::string>();
  doc.carry_eps = j.at("carry_eps").get<double>();
  doc.variables = j.at("variables").get<std::vector<std::string>>();
  doc.objectives = j.at("objectives").get<std::vector<std::string>>();
  for (const auto& s : j.at("stages")) doc.stages.push_back(stage_record_from_json(s));
  doc.final_x = j.at("final_x").get<std::vector<double>>();
  doc.objective_vector = j.at("objective_vector").get<std::vector<double>>();
  return doc;
}

inline std::string emit_report(const ReportDocument& doc) { return to_json(doc).dump(2) + "\n"; }

inline ReportDocument parse_report(const std::string& text) {
  try {
    return report_from_json(ojson::parse(text));
  } catch (const ojson::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("report: ") + e.what());
  }
}

/// Human-readable projection of a report; every number is printed with the
/// same 9 significant digits as the JSON form.
inline std::string render_table(const ReportDocument& doc) {
  std::ostringstream os;
  auto g = [](double v) { return format_sig9(v); };
  auto opt = [&](const std::optional<double>& v) { return v ? g(*v) : std::string("-"); };
  os << "mode " << doc.mode << "  carry_eps " << g(doc.carry_eps) << "\n";
  for (const auto& s : doc.stages) {
    os << "\nstage " << s.index << "  objective " << s.objective << "\n";
    os << "  degree of difficulty   " << s.degree_of_difficulty << "\n";
    os << "  dual method            " << s.dual_method << " (" << s.dual_iterations << " iterations)\n";
    os << "  dual value             " << g(s.dual_value) << "\n";
    os << "  dual weights          ";
    for (const auto& w : s.dual_weights) os << " " << w.block << "[" << w.term << "]=" << g(w.weight);
    os << "\n  constraint activity   ";
    for (const auto& a : s.constraint_activity) os << " " << a.constraint << "=" << g(a.u);
    os << "\n  primal point          ";
    for (std::size_t j = 0; j < s.primal.size(); ++j) os << " " << doc.variables[j] << "=" << g(s.primal[j]);
    os << "\n  objective value        " << g(s.objective_value) << "\n";
    os << "  unique                 " << (s.unique ? "yes" : "no") << " (rank " << s.rank << ", optimal set dimension "
       << s.optimal_set_dimension << ")\n";
    os << "  carried bound          " << opt(s.carried_bound) << "\n";
    os << "  residuals              equality=" << g(s.equality_residual) << " log_system=" << g(s.system_residual)
       << " weight_consistency=" << g(s.consistency_residual) << " duality_gap=" << g(s.duality_gap)
       << " feasibility_margin=" << g(s.feasibility_margin) << "\n";
    if (s.oracle_value || s.oracle_status || s.sampled_min_objective)
      os << "  oracle                 value=" << opt(s.oracle_value) << " status=" << s.oracle_status.value_or("-")
         << " sampled_min_objective=" << opt(s.sampled_min_objective) << "\n";
  }
  os << "\nfinal point           ";
  for (std::size_t j = 0; j < doc.final_x.size(); ++j) os << " " << doc.variables[j] << "=" << g(doc.final_x[j]);
  os << "\nobjective vector      ";
  for (std::size_t k = 0; k < doc.objective_vector.size(); ++k) os << " " << doc.objectives[k] << "=" << g(doc.objective_vector[k]);
  os << "\n";
  return os.str();
}

}  // namespace lexgp
