#pragma once

// Deterministic conjunctive-query evaluation and trace simulation.
//
// Resolution is depth-first, left-to-right, in input order: example facts in
// dataset order first, then background clauses in file order. Step and depth
// budgets turn potential nontermination in background rules into a distinct
// budget_exhausted outcome. The fault layer plants reproducible,
// content-triggered bugs (crash or flipped results) for experiments; faults
// match queries by unifiability, never by position, so they survive slicing.

#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "term.hpp"
#include "trace.hpp"

namespace tracemin {

class fault_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FaultEffect { crash, flip_result, corrupt_then_flip };

inline const char* fault_effect_name(FaultEffect e) {
  switch (e) {
    case FaultEffect::crash: return "crash";
    case FaultEffect::flip_result: return "flip_result";
    case FaultEffect::corrupt_then_flip: return "corrupt_then_flip";
  }
  return "?";
}

/// Declarative planted bug. The trigger fires on any query containing an
/// atom unifiable with trigger_pattern, once every arm pattern has been
/// matched by a query executed no later than the trigger (arms are checked
/// before the trigger within a run). With no arm patterns the trigger is
/// always live.
struct FaultSpec {
  std::vector<Term> arm_patterns;
  Term trigger_pattern;
  FaultEffect effect = FaultEffect::crash;

  /// Reads `fault(arm(P)..., trigger(T), effect(E)).` — arm fields optional
  /// and repeatable, field order free.
  static FaultSpec parse(std::string_view text) {
    SentenceReader reader(text);
    auto sentence = reader.next();
    if (!sentence) throw fault_error("empty fault file");
    if (sentence->is_rule || !sentence->head.is_compound() || sentence->head.name() != "fault")
      throw fault_error("expected a fault(...) fact");
    FaultSpec spec;
    bool have_trigger = false, have_effect = false;
    for (const Term& field : sentence->head.args()) {
      if (!field.is_compound() || field.arity() != 1)
        throw fault_error("bad fault field: " + print_term(field));
      const Term& value = field.args()[0];
      if (field.name() == "arm") {
        spec.arm_patterns.push_back(value);
      } else if (field.name() == "trigger") {
        if (have_trigger) throw fault_error("duplicate trigger field");
        spec.trigger_pattern = value;
        have_trigger = true;
      } else if (field.name() == "effect") {
        if (have_effect) throw fault_error("duplicate effect field");
        if (!value.is_symbol()) throw fault_error("bad effect: " + print_term(value));
        if (value.name() == "crash")
          spec.effect = FaultEffect::crash;
        else if (value.name() == "flip_result")
          spec.effect = FaultEffect::flip_result;
        else if (value.name() == "corrupt_then_flip")
          spec.effect = FaultEffect::corrupt_then_flip;
        else
          throw fault_error("unknown effect: " + value.name());
        have_effect = true;
      } else {
        throw fault_error("unknown fault field: " + field.name());
      }
    }
    if (!have_trigger) throw fault_error("fault spec needs a trigger field");
    if (!have_effect) throw fault_error("fault spec needs an effect field");
    if (reader.next()) throw fault_error("trailing content after fault fact");
    return spec;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << "fault(";
    for (const Term& arm : arm_patterns) os << "arm(" << arm << "), ";
    os << "trigger(" << trigger_pattern << "), effect(" << fault_effect_name(effect) << ")).\n";
    return os.str();
  }
};

struct EngineConfig {
  std::optional<FaultSpec> fault;
  long long step_budget = 100000;  // resolution attempts per query
  int depth_budget = 1000;         // max clause-expansion depth
};

enum class EvalStatus { proved, failed, budget_exhausted };

/// One (query, example) run and whether the query succeeded on it.
struct RunRecord {
  QueryUid uid;
  Term example_id;
  bool succeeded = false;

  bool operator==(const RunRecord&) const = default;
};

struct SuccessLog {
  std::vector<RunRecord> entries;

  bool operator==(const SuccessLog&) const = default;
};

/// `run(QueryUid, ExampleId, true|false).` — one line per run.
inline std::string serialize_log(const SuccessLog& log) {
  std::ostringstream os;
  for (const RunRecord& r : log.entries)
    os << "run(" << uid_term(r.uid) << ", " << r.example_id << ", "
       << (r.succeeded ? "true" : "false") << ").\n";
  return os.str();
}

enum class SimOutcome { completed, crashed, budget_exhausted };

/// Result of simulating a trace. When the run crashed or exhausted a budget,
/// the log holds exactly the runs completed before the stopping run; the
/// stopping run itself is never logged.
struct RunReport {
  SuccessLog log;
  SimOutcome outcome = SimOutcome::completed;
  QueryUid stopped_at_uid{};
  Term stopped_at_example;
};

namespace detail {

inline Term rename_variables(const Term& t, const std::string& prefix,
                             std::map<std::string, Term>& renamed) {
  switch (t.kind()) {
    case TermKind::variable: {
      auto it = renamed.find(t.name());
      if (it == renamed.end())
        it = renamed.emplace(t.name(), Term::variable(prefix + t.name())).first;
      return it->second;
    }
    case TermKind::compound: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      for (const Term& a : t.args()) args.push_back(rename_variables(a, prefix, renamed));
      return Term::compound(t.name(), std::move(args), t.display_quoted());
    }
    default:
      return t;
  }
}

inline Term rename_apart(const Term& t, const std::string& prefix) {
  std::map<std::string, Term> renamed;
  return rename_variables(t, prefix, renamed);
}

class QuerySolver {
 public:
  QuerySolver(const Example& example, const Background& background, const EngineConfig& config)
      : example_(example), background_(background), config_(config) {}

  EvalStatus solve(std::span<const Term> atoms) {
    std::vector<Goal> goals;
    goals.reserve(atoms.size());
    for (const Term& a : atoms) {
      if (!a.is_callable())
        throw std::logic_error("query atom must be a symbol or compound: " + print_term(a));
      goals.push_back(Goal{a, 0});
    }
    return solve_(goals, Substitution{});
  }

 private:
  struct Goal {
    Term atom;
    int depth;
  };

  EvalStatus solve_(const std::vector<Goal>& goals, const Substitution& subst) {
    if (goals.empty()) return EvalStatus::proved;
    const Goal& goal = goals.front();
    Term atom = subst.walk(goal.atom);
    if (!atom.is_callable())
      throw std::logic_error("goal reduced to a non-callable term: " + print_term(atom));
    FunctorKey key = functor_key(atom);
    std::vector<Goal> rest(goals.begin() + 1, goals.end());

    for (std::size_t idx : example_.facts_with_key(key)) {
      if (++steps_ > config_.step_budget) return EvalStatus::budget_exhausted;
      Substitution extended = subst;
      if (!unify_into(atom, example_.facts()[idx], extended)) continue;
      EvalStatus status = solve_(rest, extended);
      if (status != EvalStatus::failed) return status;
    }
    for (std::size_t idx : background_.clauses_with_key(key)) {
      if (++steps_ > config_.step_budget) return EvalStatus::budget_exhausted;
      if (goal.depth + 1 > config_.depth_budget) return EvalStatus::budget_exhausted;
      const Clause& clause = background_.clauses()[idx];
      std::string prefix = "_#r" + std::to_string(++rename_counter_) + "_";
      std::map<std::string, Term> renamed;
      Term head = rename_variables(clause.head, prefix, renamed);
      Substitution extended = subst;
      if (!unify_into(atom, head, extended)) continue;
      std::vector<Goal> expanded;
      expanded.reserve(clause.body.size() + rest.size());
      for (const Term& b : clause.body)
        expanded.push_back(Goal{rename_variables(b, prefix, renamed), goal.depth + 1});
      expanded.insert(expanded.end(), rest.begin(), rest.end());
      EvalStatus status = solve_(expanded, extended);
      if (status != EvalStatus::failed) return status;
    }
    return EvalStatus::failed;
  }

  const Example& example_;
  const Background& background_;
  const EngineConfig& config_;
  long long steps_ = 0;
  int rename_counter_ = 0;
};

inline void check_budgets(const EngineConfig& config) {
  if (config.step_budget < 1) throw std::invalid_argument("step_budget must be >= 1");
  if (config.depth_budget < 1) throw std::invalid_argument("depth_budget must be >= 1");
}

}  // namespace detail

/// True iff some substitution satisfies all atoms in order, within budgets.
/// Pure and deterministic; the empty conjunction is vacuously proved.
inline EvalStatus evaluate_query(std::span<const Term> atoms, const Example& example,
                                 const Background& background, const EngineConfig& config) {
  detail::check_budgets(config);
  detail::QuerySolver solver(example, background, config);
  return solver.solve(atoms);
}

/// Per-simulation fault state: which arm patterns have fired so far.
/// Confined to one simulation run.
class FaultState {
 public:
  enum class Action { none, crash, flip };

  FaultState() = default;
  explicit FaultState(std::size_t arm_count) : arms_fired_(arm_count, false) {}

  /// Processes one run of a query: arms first, then the trigger check.
  Action on_run(const FaultSpec& fault, std::span<const Term> query_atoms) {
    if (arms_fired_.size() != fault.arm_patterns.size())
      arms_fired_.assign(fault.arm_patterns.size(), false);
    for (std::size_t i = 0; i < fault.arm_patterns.size(); ++i)
      if (!arms_fired_[i] && matches(fault.arm_patterns[i], query_atoms)) arms_fired_[i] = true;
    if (!armed()) return Action::none;
    if (!matches(fault.trigger_pattern, query_atoms)) return Action::none;
    return fault.effect == FaultEffect::crash ? Action::crash : Action::flip;
  }

  bool armed() const {
    for (bool fired : arms_fired_)
      if (!fired) return false;
    return true;
  }

  /// Pattern matching is by unifiability against any atom of the query,
  /// with pattern variables renamed apart first.
  static bool matches(const Term& pattern, std::span<const Term> query_atoms) {
    Term p = detail::rename_apart(pattern, "_#p_");
    for (const Term& atom : query_atoms)
      if (unify(p, atom).has_value()) return true;
    return false;
  }

 private:
  std::vector<bool> arms_fired_;
};

struct FaultApplication {
  bool crashed = false;
  bool reported_result = false;
};

/// Applies the configured fault to one run: pass-through without a fault or
/// on unmatched queries, crash aborts, flip inverts the true result.
inline FaultApplication apply_fault(const EngineConfig& config, std::span<const Term> query_atoms,
                                    bool true_result, FaultState& state) {
  if (!config.fault) return {false, true_result};
  switch (state.on_run(*config.fault, query_atoms)) {
    case FaultState::Action::crash: return {true, true_result};
    case FaultState::Action::flip: return {false, !true_result};
    case FaultState::Action::none: break;
  }
  return {false, true_result};
}

/// Runs every query of the trace on each of its listed examples, in trace
/// order. Pure function of (trace, dataset, config): repeated calls produce
/// identical reports. All example ids are resolved before the first run.
inline RunReport simulate(const Trace& trace, const Dataset& dataset, const EngineConfig& config) {
  detail::check_budgets(config);
  for (const TraceIteration& it : trace.iterations())
    for (const QueryEntry& e : it.entries)
      for (const Term& id : e.example_ids) dataset.example(id);  // throws unknown_example_error

  RunReport report;
  FaultState state(config.fault ? config.fault->arm_patterns.size() : 0);
  for (const TraceIteration& it : trace.iterations()) {
    for (const QueryEntry& e : it.entries) {
      for (const Term& id : e.example_ids) {
        FaultState::Action action = FaultState::Action::none;
        if (config.fault) action = state.on_run(*config.fault, e.atoms);
        if (action == FaultState::Action::crash) {
          report.outcome = SimOutcome::crashed;
          report.stopped_at_uid = e.uid;
          report.stopped_at_example = id;
          return report;
        }
        EvalStatus status = evaluate_query(e.atoms, dataset.example(id), dataset.background(), config);
        if (status == EvalStatus::budget_exhausted) {
          report.outcome = SimOutcome::budget_exhausted;
          report.stopped_at_uid = e.uid;
          report.stopped_at_example = id;
          return report;
        }
        bool result = status == EvalStatus::proved;
        if (action == FaultState::Action::flip) result = !result;
        report.log.entries.push_back(RunRecord{e.uid, id, result});
      }
    }
  }
  report.outcome = SimOutcome::completed;
  return report;
}

}  // namespace tracemin
