#pragma once

// Shared test helpers: seeded random generators for terms, traces and
// datasets, independent reference oracles (substitution enumeration,
// bottom-up least model, fault ground truth), and subprocess plumbing for
// driving the CLI binary. The reference oracles deliberately avoid the
// library's evaluator and fault state machine.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tracemin/dataset.hpp"
#include "tracemin/engine.hpp"
#include "tracemin/oracle.hpp"
#include "tracemin/synthetic.hpp"
#include "tracemin/term.hpp"
#include "tracemin/trace.hpp"

namespace test_support {

using namespace tracemin;

// ---------------------------------------------------------------------------
// randomness

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  std::size_t below(std::size_t n) { return eng() % n; }
  bool chance(unsigned num, unsigned den) { return below(den) < num; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }
};

// ---------------------------------------------------------------------------
// random structures for round-trip properties

// Functor/constant pools avoid names with reader-level meaning (true,
// begin/end/model in dataset files, query/iteration heads in trace files).
inline const std::vector<std::string>& safe_functors() {
  static const std::vector<std::string> v = {"p", "q", "r", "atom", "bond", "edge", "f", "g"};
  return v;
}

inline Term random_constant(Rng& rng) {
  switch (rng.below(6)) {
    case 0: return Term::integer(static_cast<long long>(rng.below(200)) - 100);
    case 1: return Term::symbol(rng.pick(safe_functors()));
    case 2: return Term::symbol("w " + std::to_string(rng.below(10)), true);  // needs quotes
    case 3: return Term::symbol(rng.pick(safe_functors()), true);             // quoted plain atom
    case 4: return Term::str("s" + std::to_string(rng.below(10)) + "\n\"\\");
    default: return Term::symbol("[]");
  }
}

inline Term random_term(Rng& rng, int depth = 0) {
  if (depth < 3 && rng.chance(2, 5)) {
    if (rng.chance(1, 4)) {  // list
      std::vector<Term> items;
      std::size_t n = 1 + rng.below(3);
      for (std::size_t i = 0; i < n; ++i) items.push_back(random_term(rng, depth + 1));
      return Term::list(items);
    }
    std::vector<Term> args;
    std::size_t n = 1 + rng.below(3);
    for (std::size_t i = 0; i < n; ++i) args.push_back(random_term(rng, depth + 1));
    return Term::compound(rng.pick(safe_functors()), std::move(args));
  }
  if (rng.chance(1, 3)) return Term::variable("X" + std::to_string(rng.below(4)));
  return random_constant(rng);
}

/// Ground callable term for dataset facts.
inline Term random_fact(Rng& rng) {
  std::vector<Term> args;
  std::size_t n = 1 + rng.below(3);
  for (std::size_t i = 0; i < n; ++i) args.push_back(random_constant(rng));
  return Term::compound(rng.pick(safe_functors()), std::move(args));
}

/// Callable atom (possibly with variables) for trace queries.
inline Term random_atom(Rng& rng) {
  if (rng.chance(1, 8)) return Term::symbol(rng.pick(safe_functors()));
  std::vector<Term> args;
  std::size_t n = 1 + rng.below(3);
  for (std::size_t i = 0; i < n; ++i)
    args.push_back(rng.chance(1, 2) ? Term::variable("X" + std::to_string(rng.below(4)))
                                    : random_constant(rng));
  return Term::compound(rng.pick(safe_functors()), std::move(args));
}

/// Trace with contiguous iteration indices and positional uids, the shape
/// parse_trace produces.
inline Trace random_trace(Rng& rng) {
  std::vector<TraceIteration> iterations;
  int iteration_count = 1 + static_cast<int>(rng.below(4));
  for (int i = 1; i <= iteration_count; ++i) {
    TraceIteration it;
    it.index = i;
    int entries = 1 + static_cast<int>(rng.below(4));
    for (int p = 1; p <= entries; ++p) {
      QueryEntry e;
      e.uid = QueryUid{i, p};
      std::size_t atom_count = 1 + rng.below(3);
      for (std::size_t a = 0; a < atom_count; ++a) e.atoms.push_back(random_atom(rng));
      std::set<Term> ids;
      std::size_t id_count = 1 + rng.below(4);
      while (ids.size() < id_count) {
        if (rng.chance(1, 6))
          ids.insert(Term::symbol("m " + std::to_string(rng.below(20)), true));
        else
          ids.insert(Term::integer(static_cast<long long>(rng.below(20))));
      }
      e.example_ids.assign(ids.begin(), ids.end());
      it.entries.push_back(std::move(e));
    }
    iterations.push_back(std::move(it));
  }
  return Trace(std::move(iterations));
}

inline Dataset random_dataset(Rng& rng) {
  std::vector<Example> examples;
  int example_count = 1 + static_cast<int>(rng.below(5));
  for (int e = 1; e <= example_count; ++e) {
    std::vector<Term> facts;
    std::size_t n = rng.below(6);
    for (std::size_t i = 0; i < n; ++i) facts.push_back(random_fact(rng));
    Term id = rng.chance(1, 5) ? Term::symbol("m" + std::to_string(e)) : Term::integer(e);
    examples.emplace_back(id, std::move(facts));
  }
  std::vector<Clause> clauses;
  std::size_t clause_count = rng.below(3);
  for (std::size_t c = 0; c < clause_count; ++c) {
    Clause clause;
    clause.head = random_atom(rng);
    std::size_t body = rng.below(3);
    for (std::size_t b = 0; b < body; ++b) clause.body.push_back(random_atom(rng));
    clauses.push_back(std::move(clause));
  }
  return Dataset(std::move(examples), Background(std::move(clauses)));
}

// ---------------------------------------------------------------------------
// reference oracles

/// All constant leaves of the example's facts (the constant universe).
inline std::vector<Term> constant_universe(const Example& example) {
  std::set<Term> constants;
  struct Walk {
    std::set<Term>& out;
    void go(const Term& t) {
      if (t.is_constant()) {
        out.insert(t);
        return;
      }
      for (const Term& a : t.args()) go(a);
    }
  } walk{constants};
  for (const Term& f : example.facts()) walk.go(f);
  return {constants.begin(), constants.end()};
}

inline Term ground_with(const Term& t, const std::map<std::string, Term>& assignment) {
  if (t.is_variable()) return assignment.at(t.name());
  if (!t.is_compound()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(ground_with(a, assignment));
  return Term::compound(t.name(), std::move(args));
}

/// Reference decision for a conjunctive query over facts alone: enumerate
/// every assignment of the query's variables to the example's constants and
/// check membership of each ground atom in the fact set.
inline bool enumerate_query(std::span<const Term> atoms, const Example& example) {
  std::set<Term> facts(example.facts().begin(), example.facts().end());
  std::vector<std::string> vars;
  for (const Term& a : atoms) a.collect_variables(vars);
  std::vector<Term> universe = constant_universe(example);
  if (!vars.empty() && universe.empty()) return false;

  std::vector<std::size_t> choice(vars.size(), 0);
  for (;;) {
    std::map<std::string, Term> assignment;
    for (std::size_t i = 0; i < vars.size(); ++i) assignment.emplace(vars[i], universe[choice[i]]);
    bool all = true;
    for (const Term& a : atoms)
      if (!facts.count(ground_with(a, assignment))) {
        all = false;
        break;
      }
    if (all) return true;
    std::size_t i = 0;
    for (; i < choice.size(); ++i) {
      if (++choice[i] < universe.size()) break;
      choice[i] = 0;
    }
    if (i == choice.size()) return false;
    if (vars.empty()) return false;  // single empty assignment already checked
  }
}

/// Least model of (facts + function-free background) over the constant
/// universe, computed bottom-up to a fixpoint.
inline std::set<Term> least_model(const Example& example, const std::vector<Clause>& background) {
  std::set<Term> model(example.facts().begin(), example.facts().end());
  std::vector<Term> universe = constant_universe(example);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Clause& clause : background) {
      std::vector<std::string> vars;
      clause.head.collect_variables(vars);
      for (const Term& b : clause.body) b.collect_variables(vars);
      if (!vars.empty() && universe.empty()) continue;
      std::vector<std::size_t> choice(vars.size(), 0);
      for (;;) {
        std::map<std::string, Term> assignment;
        for (std::size_t i = 0; i < vars.size(); ++i)
          assignment.emplace(vars[i], universe[choice[i]]);
        bool body_holds = true;
        for (const Term& b : clause.body)
          if (!model.count(ground_with(b, assignment))) {
            body_holds = false;
            break;
          }
        if (body_holds && model.insert(ground_with(clause.head, assignment)).second) changed = true;
        std::size_t i = 0;
        for (; i < choice.size(); ++i) {
          if (++choice[i] < universe.size()) break;
          choice[i] = 0;
        }
        if (i == choice.size()) break;
        if (vars.empty()) break;
      }
    }
  }
  return model;
}

/// enumerate_query against an explicit model instead of the fact set.
inline bool enumerate_query_in_model(std::span<const Term> atoms, const std::set<Term>& model,
                                     const std::vector<Term>& universe) {
  std::vector<std::string> vars;
  for (const Term& a : atoms) a.collect_variables(vars);
  if (!vars.empty() && universe.empty()) return false;
  std::vector<std::size_t> choice(vars.size(), 0);
  for (;;) {
    std::map<std::string, Term> assignment;
    for (std::size_t i = 0; i < vars.size(); ++i) assignment.emplace(vars[i], universe[choice[i]]);
    bool all = true;
    for (const Term& a : atoms)
      if (!model.count(ground_with(a, assignment))) {
        all = false;
        break;
      }
    if (all) return true;
    std::size_t i = 0;
    for (; i < choice.size(); ++i) {
      if (++choice[i] < universe.size()) break;
      choice[i] = 0;
    }
    if (i == choice.size()) return false;
    if (vars.empty()) return false;
  }
}

/// Independent ground truth for planted faults: walking the trace's runs in
/// order, does some run hit the trigger with every arm already fired?
/// Written against the FaultSpec fields directly, not the engine's state
/// machine.
inline bool reproduces_bug(const Trace& trace, const FaultSpec& fault) {
  auto hits = [](const Term& pattern, const std::vector<Term>& atoms) {
    Term p = detail::rename_apart(pattern, "_#t_");
    for (const Term& a : atoms)
      if (unify(p, a).has_value()) return true;
    return false;
  };
  std::vector<bool> armed(fault.arm_patterns.size(), false);
  for (const TraceIteration& it : trace.iterations()) {
    for (const QueryEntry& e : it.entries) {
      for (std::size_t run = 0; run < e.example_ids.size(); ++run) {
        for (std::size_t i = 0; i < armed.size(); ++i)
          if (!armed[i] && hits(fault.arm_patterns[i], e.atoms)) armed[i] = true;
        bool all_armed = true;
        for (bool b : armed) all_armed &= b;
        if (all_armed && hits(fault.trigger_pattern, e.atoms)) return true;
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// subprocess / CLI plumbing

inline std::string cli_path() {
  const char* env = std::getenv("TRACEMIN_CLI");
  if (!env || !*env)
    throw std::runtime_error("TRACEMIN_CLI is not set; run the tests through ctest");
  return env;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "tracemin-test-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CliResult {
  ProcessResult process;
  std::string out;
  std::string err;
  bool exited_with(int code) const {
    return process.status == ProcessResult::Status::exited && process.exit_code == code;
  }
};

inline CliResult run_cli(const std::vector<std::string>& args,
                         std::chrono::milliseconds timeout = std::chrono::milliseconds(30000)) {
  TempDir dir;
  std::string out_path = dir.file("stdout");
  std::string err_path = dir.file("stderr");
  std::vector<std::string> argv;
  argv.push_back(cli_path());
  argv.insert(argv.end(), args.begin(), args.end());
  CliResult result;
  result.process = run_process(argv, timeout, out_path, err_path);
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

}  // namespace test_support
