#pragma once

// Example databases and background knowledge. An examples file is a sequence
// of `begin(model(Id)). ... end(model(Id)).` blocks of ground facts; a
// background file is a list of definite clauses. Both are immutable after
// load and indexed by (functor, arity) for the evaluator.

#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "term.hpp"

namespace tracemin {

class dataset_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class unknown_example_error : public std::runtime_error {
 public:
  explicit unknown_example_error(Term id)
      : std::runtime_error("unknown example id " + print_term(id)), id_(std::move(id)) {}
  const Term& id() const noexcept { return id_; }

 private:
  Term id_;
};

/// Definite clause `head :- body`; a fact has an empty body.
struct Clause {
  Term head;
  std::vector<Term> body;

  bool operator==(const Clause&) const = default;
};

struct FunctorKey {
  std::string name;
  std::size_t arity = 0;

  auto operator<=>(const FunctorKey&) const = default;
};

inline FunctorKey functor_key(const Term& t) {
  if (!t.is_callable()) throw std::invalid_argument("functor_key: term is not callable: " + print_term(t));
  return FunctorKey{t.name(), t.arity()};
}

/// One example: an id plus its ground facts in file order.
class Example {
 public:
  Example(Term id, std::vector<Term> facts) : id_(std::move(id)), facts_(std::move(facts)) {
    if (!id_.is_constant()) throw dataset_error("example id must be a constant: " + print_term(id_));
    for (std::size_t i = 0; i < facts_.size(); ++i) {
      if (!facts_[i].is_callable())
        throw dataset_error("example fact must be a symbol or compound: " + print_term(facts_[i]));
      if (!facts_[i].is_ground())
        throw dataset_error("non-ground fact in example " + print_term(id_) + ": " + print_term(facts_[i]));
      index_[functor_key(facts_[i])].push_back(i);
    }
  }

  const Term& id() const noexcept { return id_; }
  const std::vector<Term>& facts() const noexcept { return facts_; }

  /// Positions of facts with the given functor/arity, in file order.
  std::span<const std::size_t> facts_with_key(const FunctorKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return {};
    return it->second;
  }

 private:
  Term id_;
  std::vector<Term> facts_;
  std::map<FunctorKey, std::vector<std::size_t>> index_;
};

/// Global background clauses, indexed by head functor/arity.
class Background {
 public:
  Background() = default;

  explicit Background(std::vector<Clause> clauses) : clauses_(std::move(clauses)) {
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
      const Clause& c = clauses_[i];
      if (!c.head.is_callable())
        throw dataset_error("clause head must be a symbol or compound: " + print_term(c.head));
      for (const Term& atom : c.body)
        if (!atom.is_callable())
          throw dataset_error("clause body atom must be a symbol or compound: " + print_term(atom));
      index_[functor_key(c.head)].push_back(i);
    }
  }

  const std::vector<Clause>& clauses() const noexcept { return clauses_; }
  bool empty() const noexcept { return clauses_.empty(); }

  std::span<const std::size_t> clauses_with_key(const FunctorKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return {};
    return it->second;
  }

 private:
  std::vector<Clause> clauses_;
  std::map<FunctorKey, std::vector<std::size_t>> index_;
};

/// Examples plus background knowledge; immutable after load, safe to share
/// across concurrently running simulations.
class Dataset {
 public:
  Dataset(std::vector<Example> examples, Background background)
      : examples_(std::move(examples)), background_(std::move(background)) {
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      auto [it, inserted] = by_id_.emplace(examples_[i].id(), i);
      if (!inserted) throw dataset_error("duplicate example id " + print_term(examples_[i].id()));
    }
  }

  static Dataset load(std::string_view examples_text, std::string_view background_text = {}) {
    return Dataset(parse_examples_(examples_text), parse_background_(background_text));
  }

  const std::vector<Example>& examples() const noexcept { return examples_; }
  const Background& background() const noexcept { return background_; }

  const Example* find_example(const Term& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &examples_[it->second];
  }

  const Example& example(const Term& id) const {
    const Example* e = find_example(id);
    if (!e) throw unknown_example_error(id);
    return *e;
  }

  std::string serialize_examples() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      if (i) os << '\n';
      const Example& e = examples_[i];
      os << "begin(model(" << e.id() << ")).\n";
      for (const Term& fact : e.facts()) os << fact << ".\n";
      os << "end(model(" << e.id() << ")).\n";
    }
    return os.str();
  }

  std::string serialize_background() const {
    std::ostringstream os;
    for (const Clause& c : background_.clauses()) {
      os << c.head;
      if (!c.body.empty()) {
        os << " :- ";
        for (std::size_t i = 0; i < c.body.size(); ++i) {
          if (i) os << ", ";
          os << c.body[i];
        }
      }
      os << ".\n";
    }
    return os.str();
  }

 private:
  // Matches `begin(model(Id))` / `end(model(Id))`, yielding the id.
  static const Term* block_marker_(const Term& t, std::string_view which) {
    if (!t.is_compound() || t.name() != which || t.arity() != 1) return nullptr;
    const Term& model = t.args()[0];
    if (!model.is_compound() || model.name() != "model" || model.arity() != 1) return nullptr;
    return &model.args()[0];
  }

  static std::vector<Example> parse_examples_(std::string_view text) {
    std::vector<Example> examples;
    SentenceReader reader(text);
    bool in_block = false;
    Term current_id;
    std::vector<Term> facts;
    int block_line = 0;
    while (auto s = reader.next()) {
      if (s->is_rule)
        throw dataset_error("rule not allowed in examples file (line " + std::to_string(s->line) + ")");
      if (const Term* id = block_marker_(s->head, "begin")) {
        if (in_block)
          throw dataset_error("unterminated example block " + print_term(current_id) +
                              " (new begin at line " + std::to_string(s->line) + ")");
        if (!id->is_constant())
          throw dataset_error("example id must be a constant: " + print_term(*id));
        in_block = true;
        current_id = *id;
        facts.clear();
        block_line = s->line;
        continue;
      }
      if (const Term* id = block_marker_(s->head, "end")) {
        if (!in_block)
          throw dataset_error("end(model(...)) without matching begin at line " + std::to_string(s->line));
        if (*id != current_id)
          throw dataset_error("mismatched end(model(" + print_term(*id) + ")) for block " +
                              print_term(current_id) + " at line " + std::to_string(s->line));
        examples.emplace_back(current_id, facts);
        in_block = false;
        continue;
      }
      if (!in_block)
        throw dataset_error("fact outside model block at line " + std::to_string(s->line) + ": " +
                            print_term(s->head));
      facts.push_back(s->head);
    }
    if (in_block)
      throw dataset_error("unterminated example block " + print_term(current_id) + " (begin at line " +
                          std::to_string(block_line) + ")");
    if (examples.empty()) throw dataset_error("no examples");
    return examples;
  }

  static Background parse_background_(std::string_view text) {
    std::vector<Clause> clauses;
    SentenceReader reader(text);
    while (auto s = reader.next()) clauses.push_back(Clause{s->head, s->body});
    return Background(std::move(clauses));
  }

  std::vector<Example> examples_;
  std::map<Term, std::size_t> by_id_;
  Background background_;
};

}  // namespace tracemin
