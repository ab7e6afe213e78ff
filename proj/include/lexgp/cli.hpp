#pragma once

// Command dispatch for the lexgp tool. `run` is the whole program minus
// process plumbing, so tests can drive it with in-memory streams.
//
// Exit status: 0 success, 1 solver failure, 2 bad input or usage.

#include "CLI11.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lexgp/duality.hpp"
#include "lexgp/io.hpp"
#include "lexgp/lex_driver.hpp"
#include "lexgp/oracle.hpp"
#include "lexgp/posy_core.hpp"

namespace lexgp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolver = 1;
inline constexpr int kExitInput = 2;

struct CliSettings {
  std::string command;
  std::string file;
  std::size_t index = 1;  // 1-based priority for `stage` and `dual`
  std::string mode = "strict";
  double carry_eps = 1e-6;
  std::optional<double> tol;
  std::string format = "table";
  std::uint64_t seed = 42;
  bool oracle = false;
  bool quiet = false;
};

namespace cli_detail {

inline constexpr int kOracleSamples = 200;

inline LexOptions lex_options(const CliSettings& cfg) {
  LexOptions opt;
  if (cfg.tol) opt.dual.optimality_tol = *cfg.tol;
  return opt;
}

inline LexMode lex_mode(const CliSettings& cfg) {
  return cfg.mode == "independent" ? LexMode::Independent : LexMode::Strict;
}

inline void check_index(const CliSettings& cfg, const LexGPProblem& p) {
  if (cfg.index < 1 || cfg.index > p.objectives.size())
    throw Error(ErrorCode::InvalidInput, "--index: must be between 1 and " + std::to_string(p.objectives.size()));
}

inline void warn_difficulty(const CliSettings& cfg, const StageSolution& st, std::ostream& err) {
  if (!cfg.quiet && st.degree_of_difficulty < 0)
    err << "warning: stage " << st.stage_index + 1 << " has negative degree of difficulty "
        << st.degree_of_difficulty << "; dual system is overdetermined\n";
}

inline void attach_oracle(const CliSettings& cfg, const StageSolution& st, StageRecord& rec) {
  const OracleResult o = solve_primal_log_space(st.stage);
  rec.oracle_value = round_sig9(o.value);
  rec.oracle_status = to_string(o.status);
  try {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : sample_feasible_points(st.stage, kOracleSamples, cfg.seed))
      best = std::min(best, eval(st.stage.objective, x));
    rec.sampled_min_objective = round_sig9(best);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SamplerExhausted) throw;
  }
}

inline void emit(const CliSettings& cfg, const ReportDocument& doc, std::ostream& out) {
  out << (cfg.format == "json" ? emit_report(doc) : render_table(doc));
}

inline int cmd_solve(const CliSettings& cfg, const LexGPProblem& p, std::ostream& out, std::ostream& err) {
  LexOptions opt = lex_options(cfg);
  if (cfg.command == "stage") {
    check_index(cfg, p);
    opt.last_stage = cfg.index - 1;
  }
  const LexSolution sol = solve_lexicographic(p, lex_mode(cfg), cfg.carry_eps, opt);
  ReportDocument doc = make_report(p, sol);
  if (cfg.command == "stage") {
    doc.stages = {doc.stages.back()};
    doc.final_x = rounded(sol.stages.back().primal.x);
  }
  for (std::size_t s = 0; s < doc.stages.size(); ++s) {
    const StageSolution& st = sol.stages[doc.stages[s].index - 1];
    warn_difficulty(cfg, st, err);
    if (cfg.oracle) attach_oracle(cfg, st, doc.stages[s]);
  }
  emit(cfg, doc, out);
  return kExitOk;
}

inline int cmd_dual(const CliSettings& cfg, const LexGPProblem& p, std::ostream& out) {
  check_index(cfg, p);
  const std::size_t k = cfg.index - 1;
  std::vector<double> carried;
  if (lex_mode(cfg) == LexMode::Strict && k > 0) {
    LexOptions opt = lex_options(cfg);
    opt.last_stage = k - 1;
    const LexSolution prior = solve_lexicographic(p, LexMode::Strict, cfg.carry_eps, opt);
    for (const auto& st : prior.stages) carried.push_back(carry_constraint(p.objectives[st.stage_index], st.objective_value, cfg.carry_eps).bound);
  }
  const GPStage stage = build_lex_stage(p, k, carried);
  const DualProgram d = build_dual(stage);

  ojson weights = ojson::array();
  for (Index t = 0; t < d.num_weights(); ++t) {
    const WeightSlot& slot = d.layout[static_cast<std::size_t>(t)];
    weights.push_back({{"block", slot.block == 0 ? std::string("objective") : stage.constraint_labels[slot.block - 1]},
                       {"term", slot.term},
                       {"coeff", round_sig9(d.coeffs(t))}});
  }
  ojson matrix = ojson::array();
  for (Index r = 0; r < d.equality_matrix.rows(); ++r) matrix.push_back(rounded(d.equality_matrix.row(r).transpose()));
  const ojson doc{{"stage", cfg.index},
                  {"objective", p.objective_names[k]},
                  {"mode", cfg.mode},
                  {"degree_of_difficulty", degree_of_difficulty(stage)},
                  {"weights", weights},
                  {"equality_matrix", matrix},
                  {"equality_rhs", rounded(d.equality_rhs)}};
  if (cfg.format == "json") {
    out << doc.dump(2) << "\n";
    return kExitOk;
  }
  out << "dual program for stage " << cfg.index << " (objective " << p.objective_names[k] << ", degree of difficulty "
      << degree_of_difficulty(stage) << ")\n";
  out << "weights:";
  for (const auto& w : weights)
    out << " " << w["block"].get<std::string>() << "[" << w["term"].get<std::size_t>() << "](c=" << format_sig9(w["coeff"].get<double>()) << ")";
  out << "\nnormality and orthogonality (rows = 1 normality + one per variable):\n";
  for (Index r = 0; r < d.equality_matrix.rows(); ++r) {
    out << " ";
    for (Index c = 0; c < d.equality_matrix.cols(); ++c) out << " " << format_sig9(d.equality_matrix(r, c));
    out << "  = " << format_sig9(d.equality_rhs(r)) << "\n";
  }
  return kExitOk;
}

inline int cmd_check(const CliSettings& cfg, const LexGPProblem& p, std::ostream& out) {
  ojson stages = ojson::array();
  std::size_t aggregate_terms = 0;
  for (const auto& c : p.constraints) aggregate_terms += c.lhs.size();
  MatrixXd all(0, p.num_variables());
  long first_rank = 0;
  for (std::size_t k = 0; k < p.objectives.size(); ++k) {
    const GPStage s = independent_stage(p, k);
    const MatrixXd a = exponent_matrix(s);
    const long r = static_cast<long>(rank(a));
    if (k == 0) first_rank = r;
    aggregate_terms += p.objectives[k].size();
    stages.push_back({{"index", k + 1},
                      {"objective", p.objective_names[k]},
                      {"terms", s.num_terms()},
                      {"rank", r},
                      {"degree_of_difficulty", degree_of_difficulty(s)},
                      {"full_column_rank", r == static_cast<long>(s.n)}});
  }
  const long n = static_cast<long>(p.num_variables());
  const long aggregate_dod = static_cast<long>(aggregate_terms) - n - 1;
  const ojson doc{{"variables", p.variable_names},
                  {"objectives", p.objective_names},
                  {"constraints", p.constraints.size()},
                  {"rank", first_rank},
                  {"aggregate_terms", aggregate_terms},
                  {"aggregate_degree_of_difficulty", aggregate_dod},
                  {"stages", stages}};
  if (cfg.format == "json") {
    out << doc.dump(2) << "\n";
    return kExitOk;
  }
  out << "valid problem: " << n << " variables, " << p.objectives.size() << " objectives, " << p.constraints.size()
      << " constraints\n";
  out << "rank " << first_rank << "  aggregate degree of difficulty " << aggregate_dod << " (" << aggregate_terms
      << " terms)\n";
  for (const auto& s : stages)
    out << "  stage " << s["index"].get<std::size_t>() << " " << s["objective"].get<std::string>() << ": "
        << s["terms"].get<std::size_t>() << " terms, rank " << s["rank"].get<long>() << ", degree of difficulty "
        << s["degree_of_difficulty"].get<int>() << (s["full_column_rank"].get<bool>() ? "" : ", optimum not unique if attained")
        << "\n";
  return kExitOk;
}

}  // namespace cli_detail

/// Runs one command. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliSettings cfg;
  CLI::App app{"Lexicographic multi-objective geometric programming solver", "lexgp"};
  app.require_subcommand(1);
  app.add_option("--mode", cfg.mode, "strict | independent")->check(CLI::IsMember({"strict", "independent"}));
  app.add_option("--carry-eps", cfg.carry_eps, "relative slack on carried bounds")->check(CLI::NonNegativeNumber);
  app.add_option("--tol", cfg.tol, "dual optimality tolerance")->check(CLI::PositiveNumber);
  app.add_option("--format", cfg.format, "table | json")->check(CLI::IsMember({"table", "json"}));
  app.add_option("--seed", cfg.seed, "seed for oracle sampling");
  app.add_flag("--oracle", cfg.oracle, "add the log-space oracle cross-check");
  app.add_flag("--quiet", cfg.quiet, "suppress warnings");

  auto add = [&](const char* name, const char* help, bool indexed) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("file", cfg.file, "problem file (JSON)")->required();
    if (indexed) sub->add_option("--index", cfg.index, "1-based objective priority")->required();
    sub->callback([&cfg, name] { cfg.command = name; });
  };
  add("solve", "full lexicographic run", false);
  add("stage", "solve up to and report a single stage", true);
  add("dual", "print the dual program of one stage", true);
  add("check", "validate and report rank and degree of difficulty", false);

  std::vector<const char*> argv{"lexgp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  try {
    const LexGPProblem problem = load_problem(cfg.file);
    if (cfg.command == "check") return cli_detail::cmd_check(cfg, problem, out);
    if (cfg.command == "dual") return cli_detail::cmd_dual(cfg, problem, out);
    return cli_detail::cmd_solve(cfg, problem, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_input_error() ? kExitInput : kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace lexgp
