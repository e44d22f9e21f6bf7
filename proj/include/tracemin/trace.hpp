#pragma once

// Trace data model and slicing. A trace is an ordered list of iterations,
// each holding query entries: one conjunctive query plus the example ids it
// runs on. Slices select an ordered subset of the trace's units at one
// granularity (iterations, queries, or individual runs) and can be turned
// back into a runnable trace.

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "term.hpp"

namespace tracemin {

class trace_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stable query identity: (iteration index, position within the iteration),
/// both 1-based for parsed traces. Slicing never renumbers uids, so success
/// logs remain comparable across slices of the same base trace.
struct QueryUid {
  int iteration = 0;
  int position = 0;

  auto operator<=>(const QueryUid&) const = default;
};

inline Term uid_term(QueryUid uid) {
  return Term::compound("q", {Term::integer(uid.iteration), Term::integer(uid.position)});
}

struct QueryEntry {
  QueryUid uid;
  std::vector<Term> atoms;        // conjunction, left to right; empty = vacuously true
  std::vector<Term> example_ids;  // nonempty, duplicate-free, in file order

  bool operator==(const QueryEntry&) const = default;
};

struct TraceIteration {
  int index = 0;
  std::vector<QueryEntry> entries;

  bool operator==(const TraceIteration&) const = default;
};

struct UnitCounts {
  std::size_t iterations = 0;
  std::size_t queries = 0;
  std::size_t runs = 0;

  bool operator==(const UnitCounts&) const = default;
};

class Trace {
 public:
  Trace() = default;
  explicit Trace(std::vector<TraceIteration> iterations) : iterations_(std::move(iterations)) {}

  const std::vector<TraceIteration>& iterations() const noexcept { return iterations_; }
  bool empty() const noexcept { return iterations_.empty(); }

  UnitCounts unit_counts() const {
    UnitCounts c;
    c.iterations = iterations_.size();
    for (const TraceIteration& it : iterations_) {
      c.queries += it.entries.size();
      for (const QueryEntry& e : it.entries) c.runs += e.example_ids.size();
    }
    return c;
  }

  const QueryEntry* find_entry(QueryUid uid) const {
    for (const TraceIteration& it : iterations_)
      if (it.index == uid.iteration)
        for (const QueryEntry& e : it.entries)
          if (e.uid == uid) return &e;
    return nullptr;
  }

  bool operator==(const Trace&) const = default;

 private:
  std::vector<TraceIteration> iterations_;
};

namespace detail {

inline QueryEntry entry_from_sentence(const Sentence& s, int iteration, int position) {
  if (s.is_rule)
    throw trace_error("rule not allowed in trace file (line " + std::to_string(s.line) + ")");
  const Term& head = s.head;
  if (!head.is_compound() || head.name() != "query" || head.arity() != 2)
    throw trace_error("expected query/2 fact at line " + std::to_string(s.line) + ", found " +
                      print_term(head));
  QueryEntry entry;
  entry.uid = QueryUid{iteration, position};
  entry.atoms = conjunction_atoms(head.args()[0]);
  for (const Term& atom : entry.atoms)
    if (!atom.is_callable())
      throw trace_error("query atom must be a symbol or compound at line " + std::to_string(s.line) +
                        ": " + print_term(atom));
  // example id list
  Term cell = head.args()[1];
  std::set<Term> seen;
  while (cell.is_compound() && cell.name() == "." && cell.arity() == 2) {
    const Term& id = cell.args()[0];
    if (!id.is_constant())
      throw trace_error("example id must be a constant at line " + std::to_string(s.line) + ": " +
                        print_term(id));
    if (!seen.insert(id).second)
      throw trace_error("duplicate example id " + print_term(id) + " in entry at line " +
                        std::to_string(s.line));
    entry.example_ids.push_back(id);
    cell = cell.args()[1];
  }
  if (!(cell.is_symbol() && cell.name() == "[]"))
    throw trace_error("expected a list of example ids at line " + std::to_string(s.line));
  if (entry.example_ids.empty())
    throw trace_error("empty example list at line " + std::to_string(s.line));
  return entry;
}

}  // namespace detail

/// Parses a trace file: `query(Conjunction, [Ids]).` facts, with iterations
/// delimited by blank lines. Explicit `iteration(N).` marker facts win when
/// present; every query must then follow a marker. Comment-only lines do not
/// separate iterations. Empty iterations never materialize.
inline Trace parse_trace(std::string_view text) {
  std::vector<Sentence> sentences;
  {
    SentenceReader reader(text);
    while (auto s = reader.next()) sentences.push_back(std::move(*s));
  }
  bool has_markers = false;
  for (const Sentence& s : sentences)
    if (!s.is_rule && s.head.is_compound() && s.head.name() == "iteration" && s.head.arity() == 1)
      has_markers = true;

  std::vector<TraceIteration> iterations;
  auto close = [&](TraceIteration& current) {
    if (!current.entries.empty()) iterations.push_back(std::move(current));
    current = TraceIteration{};
  };

  if (has_markers) {
    std::set<long long> marker_indices;
    TraceIteration current;
    bool open = false;
    for (const Sentence& s : sentences) {
      if (!s.is_rule && s.head.is_compound() && s.head.name() == "iteration" && s.head.arity() == 1) {
        const Term& n = s.head.args()[0];
        if (!n.is_integer())
          throw trace_error("iteration marker must carry an integer at line " + std::to_string(s.line));
        if (!marker_indices.insert(n.int_value()).second)
          throw trace_error("duplicate iteration marker " + print_term(n) + " at line " +
                            std::to_string(s.line));
        if (open) close(current);
        current.index = static_cast<int>(n.int_value());
        open = true;
        continue;
      }
      if (!open)
        throw trace_error("query before first iteration marker at line " + std::to_string(s.line));
      current.entries.push_back(
          detail::entry_from_sentence(s, current.index, static_cast<int>(current.entries.size()) + 1));
    }
    if (open) close(current);
  } else {
    TraceIteration current;
    current.index = 1;
    for (const Sentence& s : sentences) {
      if (s.blank_lines_before > 0 && !current.entries.empty()) {
        int next_index = current.index + 1;
        close(current);
        current.index = next_index;
      }
      current.entries.push_back(
          detail::entry_from_sentence(s, current.index, static_cast<int>(current.entries.size()) + 1));
    }
    close(current);
  }

  if (iterations.empty()) throw trace_error("empty trace: no query facts");
  return Trace(std::move(iterations));
}

/// Writes a trace back in file syntax; iterations are separated by one blank
/// line. Re-parsing assigns fresh contiguous iteration numbers 1..k, so the
/// round trip is exact for parser-produced traces.
inline std::string print_trace(const Trace& trace) {
  std::ostringstream os;
  bool first = true;
  for (const TraceIteration& it : trace.iterations()) {
    if (it.entries.empty()) continue;
    if (!first) os << '\n';
    first = false;
    for (const QueryEntry& e : it.entries) {
      os << "query((";
      if (e.atoms.empty()) {
        os << "true";
      } else {
        for (std::size_t i = 0; i < e.atoms.size(); ++i) {
          if (i) os << ',';
          os << e.atoms[i];
        }
      }
      os << "), [";
      for (std::size_t i = 0; i < e.example_ids.size(); ++i) {
        if (i) os << ',';
        os << e.example_ids[i];
      }
      os << "]).\n";
    }
  }
  return os.str();
}

enum class Granularity { iterations, queries, runs };

inline const char* granularity_name(Granularity g) {
  switch (g) {
    case Granularity::iterations: return "iterations";
    case Granularity::queries: return "queries";
    case Granularity::runs: return "runs";
  }
  return "?";
}

/// Accepts "iterations", "queries", "runs" and the alias "examples" (= runs,
/// the name used for the finest setting in minimization schedules).
inline std::optional<Granularity> granularity_from_name(std::string_view name) {
  if (name == "iterations") return Granularity::iterations;
  if (name == "queries") return Granularity::queries;
  if (name == "runs" || name == "examples") return Granularity::runs;
  return std::nullopt;
}

struct IterationUnit {
  int index = 0;
  auto operator<=>(const IterationUnit&) const = default;
};

struct QueryUnit {
  QueryUid uid;
  auto operator<=>(const QueryUnit&) const = default;
};

/// One (query, example) run; also the alignment key for success logs.
struct RunId {
  QueryUid uid;
  Term example_id;
  auto operator<=>(const RunId&) const = default;
};

using Unit = std::variant<IterationUnit, QueryUnit, RunId>;

inline Term unit_term(const Unit& u) {
  if (const auto* it = std::get_if<IterationUnit>(&u))
    return Term::compound("it", {Term::integer(it->index)});
  if (const auto* q = std::get_if<QueryUnit>(&u)) return uid_term(q->uid);
  const auto& r = std::get<RunId>(u);
  return Term::compound("run", {uid_term(r.uid), r.example_id});
}

/// Full unit list of a trace at a granularity, in trace order.
inline std::vector<Unit> units_of(const Trace& trace, Granularity g) {
  std::vector<Unit> units;
  for (const TraceIteration& it : trace.iterations()) {
    if (g == Granularity::iterations) {
      units.push_back(IterationUnit{it.index});
      continue;
    }
    for (const QueryEntry& e : it.entries) {
      if (g == Granularity::queries) {
        units.push_back(QueryUnit{e.uid});
        continue;
      }
      for (const Term& id : e.example_ids) units.push_back(RunId{e.uid, id});
    }
  }
  return units;
}

/// An ordered subset of a base trace's units at one granularity. This is the
/// object the delta debugger partitions, complements and materializes.
class Slice {
 public:
  Slice() = default;

  static Slice full(std::shared_ptr<const Trace> base, Granularity g) {
    if (!base) throw std::invalid_argument("Slice::full: null base trace");
    auto units = std::make_shared<const std::vector<Unit>>(units_of(*base, g));
    std::vector<std::size_t> selection(units->size());
    std::iota(selection.begin(), selection.end(), std::size_t{0});
    return Slice(std::move(base), g, std::move(units), std::move(selection));
  }

  const Trace& base() const { return *base_; }
  const std::shared_ptr<const Trace>& base_ptr() const noexcept { return base_; }
  Granularity granularity() const noexcept { return granularity_; }

  std::size_t size() const noexcept { return selection_.size(); }
  bool empty() const noexcept { return selection_.empty(); }

  /// Sorted indices into all_units().
  const std::vector<std::size_t>& selection() const noexcept { return selection_; }
  const std::vector<Unit>& all_units() const { return *units_; }

  std::vector<Unit> units() const {
    std::vector<Unit> out;
    out.reserve(selection_.size());
    for (std::size_t i : selection_) out.push_back((*units_)[i]);
    return out;
  }

  Slice with_selection(std::vector<std::size_t> selection) const {
    for (std::size_t i = 0; i < selection.size(); ++i) {
      if (selection[i] >= units_->size())
        throw std::invalid_argument("Slice::with_selection: index out of range");
      if (i > 0 && selection[i] <= selection[i - 1])
        throw std::invalid_argument("Slice::with_selection: indices must be strictly increasing");
    }
    return Slice(base_, granularity_, units_, std::move(selection));
  }

  /// Removes the unit at the given position of this slice's selection.
  Slice without_position(std::size_t position) const {
    if (position >= selection_.size())
      throw std::invalid_argument("Slice::without_position: position out of range");
    std::vector<std::size_t> sel;
    sel.reserve(selection_.size() - 1);
    for (std::size_t i = 0; i < selection_.size(); ++i)
      if (i != position) sel.push_back(selection_[i]);
    return Slice(base_, granularity_, units_, std::move(sel));
  }

  /// Set difference over the same base and granularity.
  Slice minus(const Slice& other) const {
    if (base_ != other.base_ || granularity_ != other.granularity_)
      throw std::invalid_argument("Slice::minus: slices over different bases");
    std::vector<std::size_t> sel;
    sel.reserve(selection_.size());
    std::set_difference(selection_.begin(), selection_.end(), other.selection_.begin(),
                        other.selection_.end(), std::back_inserter(sel));
    return Slice(base_, granularity_, units_, std::move(sel));
  }

  /// Rebuilds a runnable trace from the selected units. Iteration structure,
  /// iteration indices and query uids are retained from the base; entries
  /// whose example list empties out are dropped, as are empty iterations.
  Trace materialize() const {
    std::set<int> keep_iterations;
    std::set<QueryUid> keep_queries;
    std::set<RunId> keep_runs;
    for (std::size_t i : selection_) {
      const Unit& u = (*units_)[i];
      if (const auto* it = std::get_if<IterationUnit>(&u))
        keep_iterations.insert(it->index);
      else if (const auto* q = std::get_if<QueryUnit>(&u))
        keep_queries.insert(q->uid);
      else
        keep_runs.insert(std::get<RunId>(u));
    }
    std::vector<TraceIteration> iterations;
    for (const TraceIteration& it : base_->iterations()) {
      TraceIteration out;
      out.index = it.index;
      switch (granularity_) {
        case Granularity::iterations:
          if (keep_iterations.count(it.index)) out.entries = it.entries;
          break;
        case Granularity::queries:
          for (const QueryEntry& e : it.entries)
            if (keep_queries.count(e.uid)) out.entries.push_back(e);
          break;
        case Granularity::runs:
          for (const QueryEntry& e : it.entries) {
            QueryEntry kept;
            kept.uid = e.uid;
            kept.atoms = e.atoms;
            for (const Term& id : e.example_ids)
              if (keep_runs.count(RunId{e.uid, id})) kept.example_ids.push_back(id);
            if (!kept.example_ids.empty()) out.entries.push_back(std::move(kept));
          }
          break;
      }
      if (!out.entries.empty()) iterations.push_back(std::move(out));
    }
    return Trace(std::move(iterations));
  }

  /// The (query, example) runs this slice executes, in trace order. Two
  /// slices with equal run sets materialize to behaviorally identical
  /// traces, which makes this the test-cache key.
  std::vector<RunId> run_ids() const {
    std::set<int> keep_iterations;
    std::set<QueryUid> keep_queries;
    std::vector<RunId> runs;
    for (std::size_t i : selection_) {
      const Unit& u = (*units_)[i];
      if (const auto* it = std::get_if<IterationUnit>(&u))
        keep_iterations.insert(it->index);
      else if (const auto* q = std::get_if<QueryUnit>(&u))
        keep_queries.insert(q->uid);
    }
    if (granularity_ == Granularity::runs) {
      runs.reserve(selection_.size());
      for (std::size_t i : selection_) runs.push_back(std::get<RunId>((*units_)[i]));
      return runs;
    }
    for (const TraceIteration& it : base_->iterations()) {
      if (granularity_ == Granularity::iterations && !keep_iterations.count(it.index)) continue;
      for (const QueryEntry& e : it.entries) {
        if (granularity_ == Granularity::queries && !keep_queries.count(e.uid)) continue;
        for (const Term& id : e.example_ids) runs.push_back(RunId{e.uid, id});
      }
    }
    return runs;
  }

  std::string run_key() const {
    std::ostringstream os;
    for (const RunId& r : run_ids())
      os << r.uid.iteration << '.' << r.uid.position << ':' << r.example_id << ';';
    return os.str();
  }

  friend bool operator==(const Slice& a, const Slice& b) {
    return a.base_ == b.base_ && a.granularity_ == b.granularity_ && a.selection_ == b.selection_;
  }

 private:
  Slice(std::shared_ptr<const Trace> base, Granularity g,
        std::shared_ptr<const std::vector<Unit>> units, std::vector<std::size_t> selection)
      : base_(std::move(base)),
        granularity_(g),
        units_(std::move(units)),
        selection_(std::move(selection)) {}

  std::shared_ptr<const Trace> base_;
  Granularity granularity_ = Granularity::queries;
  std::shared_ptr<const std::vector<Unit>> units_;
  std::vector<std::size_t> selection_;
};

/// Audit form: `slice(granularity, [unit terms]).`
inline std::string print_slice(const Slice& s) {
  std::ostringstream os;
  os << "slice(" << granularity_name(s.granularity()) << ", [";
  bool first = true;
  for (const Unit& u : s.units()) {
    if (!first) os << ',';
    first = false;
    os << unit_term(u);
  }
  os << "]).";
  return os.str();
}

}  // namespace tracemin
