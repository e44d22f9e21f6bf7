#pragma once

// Seeded generator for desk-scale minimization experiments: a dataset of
// small molecule-style examples, a trace of conjunctive queries shaped like
// a refinement search (queries of one iteration extend queries of the
// previous one), and a fault spec planting one of three bug shapes via
// marker atoms that identify the involved queries by content. The same seed
// and parameters always produce byte-identical output.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "engine.hpp"
#include "trace.hpp"

namespace tracemin {

enum class BugShape { last, first_and_last, first_and_middle };

inline const char* bug_shape_name(BugShape shape) {
  switch (shape) {
    case BugShape::last: return "last";
    case BugShape::first_and_last: return "first_and_last";
    case BugShape::first_and_middle: return "first_and_middle";
  }
  return "?";
}

inline std::optional<BugShape> bug_shape_from_name(std::string_view name) {
  if (name == "last") return BugShape::last;
  if (name == "first_and_last") return BugShape::first_and_last;
  if (name == "first_and_middle") return BugShape::first_and_middle;
  return std::nullopt;
}

struct SyntheticSpec {
  int iterations = 1;
  int queries_per_iteration = 1;  // average; the total is iterations * this
  int examples = 1;
  BugShape shape = BugShape::last;
  std::uint64_t seed = 0;
  /// crash plants a crashing bug; any other value plants a result-flipping
  /// bug (corrupt_then_flip when the shape has arming queries).
  FaultEffect effect = FaultEffect::flip_result;
};

struct SyntheticBundle {
  Trace trace;
  Dataset dataset;
  FaultSpec fault;
  /// Ground truth: the marker-carrying queries, in trace order. The bug
  /// reproduces iff a slice runs all of them (arming runs before the
  /// trigger run); minimal reproductions need exactly one run of each.
  std::vector<QueryUid> required_queries;
};

namespace detail {

// mt19937_64 is fully specified by the standard; avoiding the distribution
// classes keeps generated bytes identical across standard libraries.
inline std::size_t bounded(std::mt19937_64& rng, std::size_t n) { return rng() % n; }

/// Per-iteration query counts: a triangular ramp peaked mid-run, every
/// iteration nonempty, summing exactly to `total`.
inline std::vector<int> iteration_counts(int iterations, long long total) {
  std::vector<long long> weight(iterations);
  for (int i = 0; i < iterations; ++i) weight[i] = 1 + std::min(i, iterations - 1 - i);
  long long weight_sum = 0;
  for (long long w : weight) weight_sum += w;
  std::vector<int> counts(iterations, 1);
  long long assigned = iterations;
  for (int i = 0; i < iterations && assigned < total; ++i) {
    long long share = total * weight[i] / weight_sum;
    long long add = std::min(share > 1 ? share - 1 : 0, total - assigned);
    counts[i] += static_cast<int>(add);
    assigned += add;
  }
  for (int i = 0; assigned < total; i = (i + 1) % iterations) {
    ++counts[i];
    ++assigned;
  }
  return counts;
}

}  // namespace detail

inline SyntheticBundle generate_synthetic(const SyntheticSpec& spec) {
  if (spec.iterations < 1 || spec.queries_per_iteration < 1 || spec.examples < 1)
    throw std::invalid_argument("generate_synthetic: counts must be >= 1");
  const long long total =
      static_cast<long long>(spec.iterations) * spec.queries_per_iteration;
  if (spec.shape == BugShape::first_and_last && total < 2)
    throw std::invalid_argument("first_and_last needs at least 2 queries");
  if (spec.shape == BugShape::first_and_middle && total < 3)
    throw std::invalid_argument("first_and_middle needs at least 3 queries");

  std::mt19937_64 rng(spec.seed);
  const std::vector<std::string> elements = {"c", "h", "o", "n"};

  // Markers in use, by role.
  const Term marker_first = Term::compound("probe", {Term::symbol("p_first")});
  const Term marker_mid = Term::compound("probe", {Term::symbol("p_mid")});
  const Term marker_last = Term::compound("probe", {Term::symbol("p_last")});
  std::vector<Term> markers = {marker_last};
  if (spec.shape != BugShape::last) markers.push_back(marker_first);
  if (spec.shape == BugShape::first_and_middle) markers.push_back(marker_mid);

  // Examples: a chain of atoms with random elements, consecutive bonds, and
  // one extra bond. Marker facts hold in every example so marked queries
  // keep their unmarked success behavior.
  std::vector<Example> examples;
  examples.reserve(spec.examples);
  for (int e = 1; e <= spec.examples; ++e) {
    std::size_t atom_count = 4 + detail::bounded(rng, 3);
    std::vector<Term> facts;
    for (std::size_t i = 1; i <= atom_count; ++i)
      facts.push_back(Term::compound(
          "atom", {Term::symbol("a" + std::to_string(i)),
                   Term::symbol(elements[detail::bounded(rng, elements.size())], true)}));
    for (std::size_t i = 1; i < atom_count; ++i)
      facts.push_back(Term::compound("bond", {Term::symbol("a" + std::to_string(i)),
                                              Term::symbol("a" + std::to_string(i + 1))}));
    facts.push_back(Term::compound(
        "bond", {Term::symbol("a1"),
                 Term::symbol("a" + std::to_string(2 + detail::bounded(rng, atom_count - 1)))}));
    for (const Term& m : markers) facts.push_back(m);
    examples.emplace_back(Term::integer(e), std::move(facts));
  }
  Dataset dataset(std::move(examples), Background{});

  // Trace: iteration 1 holds single-atom queries; every later query extends
  // a random query of the previous iteration by one connected atom.
  std::vector<int> counts = detail::iteration_counts(spec.iterations, total);
  auto fresh_var = [](std::size_t n) { return Term::variable("V" + std::to_string(n)); };
  auto base_query = [&]() -> std::vector<Term> {
    if (detail::bounded(rng, 3) == 0)
      return {Term::compound("bond", {fresh_var(1), fresh_var(2)})};
    return {Term::compound(
        "atom", {fresh_var(1), Term::symbol(elements[detail::bounded(rng, elements.size())], true)})};
  };
  auto count_vars = [](const std::vector<Term>& atoms) {
    std::vector<std::string> names;
    for (const Term& a : atoms) a.collect_variables(names);
    return names.size();
  };
  auto pick_example_ids = [&]() {
    std::vector<int> ids(spec.examples);
    for (int i = 0; i < spec.examples; ++i) ids[i] = i + 1;
    std::size_t take = 1 + detail::bounded(rng, spec.examples);
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t j = i + detail::bounded(rng, ids.size() - i);
      std::swap(ids[i], ids[j]);
    }
    ids.resize(take);
    std::sort(ids.begin(), ids.end());
    std::vector<Term> out;
    out.reserve(take);
    for (int id : ids) out.push_back(Term::integer(id));
    return out;
  };

  std::vector<TraceIteration> iterations;
  std::vector<std::vector<Term>> previous;
  for (int it = 1; it <= spec.iterations; ++it) {
    TraceIteration iteration;
    iteration.index = it;
    std::vector<std::vector<Term>> current;
    for (int q = 0; q < counts[it - 1]; ++q) {
      std::vector<Term> atoms;
      if (previous.empty()) {
        atoms = base_query();
      } else {
        atoms = previous[detail::bounded(rng, previous.size())];
        std::size_t vars = count_vars(atoms);
        Term hook = fresh_var(1 + detail::bounded(rng, vars));
        switch (detail::bounded(rng, 3)) {
          case 0:
            atoms.push_back(Term::compound("bond", {hook, fresh_var(vars + 1)}));
            break;
          case 1:
            atoms.push_back(Term::compound("bond", {fresh_var(vars + 1), hook}));
            break;
          default:
            atoms.push_back(Term::compound(
                "atom", {hook, Term::symbol(elements[detail::bounded(rng, elements.size())], true)}));
            break;
        }
      }
      QueryEntry entry;
      entry.uid = QueryUid{it, q + 1};
      entry.atoms = std::move(atoms);
      entry.example_ids = pick_example_ids();
      iteration.entries.push_back(std::move(entry));
      current.push_back(iteration.entries.back().atoms);
    }
    previous = std::move(current);
    iterations.push_back(std::move(iteration));
  }

  // Attach markers: first query of the first iteration, the query at the
  // global middle, and the last query of the last iteration.
  std::vector<QueryEntry*> flat;
  for (TraceIteration& it : iterations)
    for (QueryEntry& e : it.entries) flat.push_back(&e);
  std::size_t first_at = 0;
  std::size_t last_at = flat.size() - 1;
  std::size_t mid_at = flat.size() / 2;
  if (mid_at == first_at) mid_at = first_at + 1;
  if (mid_at == last_at && mid_at > 1) mid_at = last_at - 1;

  SyntheticBundle bundle{Trace{}, std::move(dataset), FaultSpec{}, {}};
  flat[last_at]->atoms.push_back(marker_last);
  if (spec.shape != BugShape::last) {
    flat[first_at]->atoms.push_back(marker_first);
    bundle.fault.arm_patterns.push_back(marker_first);
    bundle.required_queries.push_back(flat[first_at]->uid);
  }
  if (spec.shape == BugShape::first_and_middle) {
    flat[mid_at]->atoms.push_back(marker_mid);
    bundle.fault.arm_patterns.push_back(marker_mid);
    bundle.required_queries.push_back(flat[mid_at]->uid);
  }
  bundle.required_queries.push_back(flat[last_at]->uid);
  bundle.fault.trigger_pattern = marker_last;
  if (spec.effect == FaultEffect::crash)
    bundle.fault.effect = FaultEffect::crash;
  else
    bundle.fault.effect = bundle.fault.arm_patterns.empty() ? FaultEffect::flip_result
                                                            : FaultEffect::corrupt_then_flip;
  bundle.trace = Trace(std::move(iterations));
  return bundle;
}

}  // namespace tracemin
