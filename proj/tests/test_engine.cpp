#include <catch2/catch.hpp>

#include "support.hpp"
#include "tracemin/engine.hpp"

using namespace tracemin;
using test_support::Rng;

namespace {

const char* kSampleTrace =
    "query((atom(X,'c')), [1,2,3,4,5]).\n"
    "query((atom(X,'h')), [1,2,3,4,5]).\n"
    "\n"
    "query((atom(X,'c'),atom(Y,'o'),bond(X,Y)), [1,5]).\n"
    "query((atom(X,'c'),atom(Y,'c'),bond(X,Y)), [1,5]).\n";

const char* kSampleExamples =
    "begin(model(1)). atom(a1,'c'). atom(a2,'o'). bond(a1,a2). end(model(1)).\n"
    "begin(model(2)). atom(b1,'h'). atom(b2,'c'). end(model(2)).\n"
    "begin(model(3)). atom(c1,'n'). end(model(3)).\n"
    "begin(model(4)). atom(d1,'h'). end(model(4)).\n"
    "begin(model(5)). atom(e1,'c'). atom(e2,'c'). bond(e1,e2). end(model(5)).\n";

std::vector<Term> atoms(const char* text) { return conjunction_atoms(parse_term(text)); }

}  // namespace

TEST_CASE("evaluate_query finds solutions over example facts") {
  Dataset d = Dataset::load(kSampleExamples);
  EngineConfig cfg;
  const Example& e1 = d.example(Term::integer(1));
  CHECK(evaluate_query(atoms("(atom(X,'c'))"), e1, d.background(), cfg) == EvalStatus::proved);
  // each atom id carries exactly one element, so no X is both 'c' and 'h'
  CHECK(evaluate_query(atoms("(atom(X,'c'),atom(X,'h'))"), e1, d.background(), cfg) ==
        EvalStatus::failed);
  CHECK(evaluate_query({}, e1, d.background(), cfg) == EvalStatus::proved);
  // agreement with assignment enumeration on these hand-written cases
  CHECK(test_support::enumerate_query(atoms("(atom(X,'c'))"), e1));
  CHECK_FALSE(test_support::enumerate_query(atoms("(atom(X,'c'),atom(X,'h'))"), e1));
}

TEST_CASE("evaluate_query agrees with assignment enumeration on random conjunctions") {
  Rng rng(23);
  EngineConfig cfg;
  Background empty_bg;
  for (int round = 0; round < 80; ++round) {
    // small molecule-flavored example
    std::vector<Term> facts;
    std::size_t atom_count = 2 + rng.below(4);
    std::vector<std::string> elements = {"c", "h", "o"};
    for (std::size_t i = 1; i <= atom_count; ++i)
      facts.push_back(Term::compound("atom", {Term::symbol("a" + std::to_string(i)),
                                              Term::symbol(rng.pick(elements), true)}));
    for (std::size_t i = 1; i < atom_count; ++i)
      if (rng.chance(2, 3))
        facts.push_back(Term::compound("bond", {Term::symbol("a" + std::to_string(i)),
                                                Term::symbol("a" + std::to_string(i + 1))}));
    Example example(Term::integer(1), facts);
    for (int q = 0; q < 10; ++q) {
      std::vector<Term> query;
      std::size_t len = 1 + rng.below(3);
      for (std::size_t a = 0; a < len; ++a) {
        Term v1 = Term::variable("X" + std::to_string(rng.below(3)));
        if (rng.chance(1, 2)) {
          query.push_back(Term::compound("atom", {v1, Term::symbol(rng.pick(elements), true)}));
        } else {
          Term v2 = Term::variable("X" + std::to_string(rng.below(3)));
          query.push_back(Term::compound("bond", {v1, v2}));
        }
      }
      bool engine = evaluate_query(query, example, empty_bg, cfg) == EvalStatus::proved;
      bool reference = test_support::enumerate_query(query, example);
      INFO(print_term(conjunction_term(query)));
      CHECK(engine == reference);
    }
  }
}

TEST_CASE("background clauses resolve with facts-first, file-order strategy") {
  Dataset d = Dataset::load(
      "begin(model(1)). bond(a1,a2). bond(a2,a3). bond(a3,a4). end(model(1)).",
      "path(X,Y) :- bond(X,Y).\n"
      "path(X,Y) :- bond(X,Z), path(Z,Y).\n");
  EngineConfig cfg;
  const Example& e = d.example(Term::integer(1));
  CHECK(evaluate_query(atoms("(path(a1,a4))"), e, d.background(), cfg) == EvalStatus::proved);
  CHECK(evaluate_query(atoms("(path(a4,a1))"), e, d.background(), cfg) == EvalStatus::failed);
  CHECK(evaluate_query(atoms("(path(a1,X),atom(X,'c'))"), e, d.background(), cfg) ==
        EvalStatus::failed);

  // cross-check against the bottom-up least model
  auto model = test_support::least_model(e, d.background().clauses());
  auto universe = test_support::constant_universe(e);
  for (const char* q : {"(path(a1,a2))", "(path(a1,a3))", "(path(a2,a1))", "(path(X,a4))",
                        "(path(a1,X),path(X,a4))", "(bond(X,Y),path(Y,Z))"}) {
    bool engine = evaluate_query(atoms(q), e, d.background(), cfg) == EvalStatus::proved;
    bool reference = test_support::enumerate_query_in_model(atoms(q), model, universe);
    INFO(q);
    CHECK(engine == reference);
  }
}

TEST_CASE("budgets surface as a distinct outcome, not failure") {
  Dataset d = Dataset::load("begin(model(1)). p(a). end(model(1)).", "loop :- loop.\n");
  const Example& e = d.example(Term::integer(1));
  SECTION("depth budget catches left recursion") {
    EngineConfig cfg;
    CHECK(evaluate_query(atoms("(loop)"), e, d.background(), cfg) == EvalStatus::budget_exhausted);
  }
  SECTION("step budget caps total resolution work") {
    EngineConfig cfg;
    cfg.step_budget = 10;
    cfg.depth_budget = 1000000;
    CHECK(evaluate_query(atoms("(loop)"), e, d.background(), cfg) == EvalStatus::budget_exhausted);
  }
  SECTION("budgets must be positive") {
    EngineConfig cfg;
    cfg.step_budget = 0;
    CHECK_THROWS_AS(evaluate_query(atoms("(p(a))"), e, d.background(), cfg), std::invalid_argument);
  }
}

TEST_CASE("simulate runs every query on each of its examples, in order") {
  Trace t = parse_trace(kSampleTrace);
  Dataset d = Dataset::load(kSampleExamples);
  EngineConfig cfg;
  RunReport report = simulate(t, d, cfg);
  CHECK(report.outcome == SimOutcome::completed);
  REQUIRE(report.log.entries.size() == 14);
  CHECK(report.log.entries[0].uid == QueryUid{1, 1});
  CHECK(report.log.entries[0].example_id == Term::integer(1));
  CHECK(report.log.entries[13].uid == QueryUid{2, 2});
  CHECK(report.log.entries[13].example_id == Term::integer(5));
  // every logged bit matches the reference oracle
  for (const RunRecord& r : report.log.entries) {
    const QueryEntry* entry = t.find_entry(r.uid);
    REQUIRE(entry != nullptr);
    CHECK(r.succeeded == test_support::enumerate_query(entry->atoms, d.example(r.example_id)));
  }
  // two runs are identical
  RunReport again = simulate(t, d, cfg);
  CHECK(again.log == report.log);
  CHECK(again.outcome == report.outcome);
}

TEST_CASE("simulate handles the empty trace and unknown examples") {
  Dataset d = Dataset::load(kSampleExamples);
  EngineConfig cfg;
  RunReport report = simulate(Trace{}, d, cfg);
  CHECK(report.outcome == SimOutcome::completed);
  CHECK(report.log.entries.empty());
  CHECK_THROWS_AS(simulate(parse_trace("query((p(a)), [9])."), d, cfg), unknown_example_error);
}

TEST_CASE("success logs serialize one run per line") {
  SuccessLog log;
  log.entries.push_back(RunRecord{QueryUid{1, 1}, Term::integer(5), true});
  log.entries.push_back(RunRecord{QueryUid{2, 1}, Term::symbol("m1"), false});
  CHECK(serialize_log(log) == "run(q(1,1), 5, true).\nrun(q(2,1), m1, false).\n");
}

TEST_CASE("fault specs parse and serialize") {
  FaultSpec f = FaultSpec::parse(
      "fault(arm(atom(_,'c')), trigger(bond(_,_)), effect(flip_result)).");
  REQUIRE(f.arm_patterns.size() == 1);
  CHECK(f.effect == FaultEffect::flip_result);
  CHECK(FaultSpec::parse(f.serialize()).serialize() == f.serialize());

  FaultSpec two = FaultSpec::parse(
      "fault(arm(probe(p1)), arm(probe(p2)), trigger(probe(p3)), effect(corrupt_then_flip)).");
  CHECK(two.arm_patterns.size() == 2);

  FaultSpec bare = FaultSpec::parse("fault(trigger(probe(p3)), effect(crash)).");
  CHECK(bare.arm_patterns.empty());
  CHECK(bare.effect == FaultEffect::crash);

  CHECK_THROWS_AS(FaultSpec::parse("fault(effect(crash))."), fault_error);
  CHECK_THROWS_AS(FaultSpec::parse("fault(trigger(p))."), fault_error);
  CHECK_THROWS_AS(FaultSpec::parse("fault(trigger(p), effect(explode))."), fault_error);
  CHECK_THROWS_AS(FaultSpec::parse("nope."), fault_error);
}

TEST_CASE("apply_fault gates the effect on arming state") {
  std::vector<Term> trigger_query = {parse_term("bond(a1,a2)")};
  std::vector<Term> arm_query = {parse_term("atom(a1,'c')")};
  std::vector<Term> other_query = {parse_term("p(zzz)")};

  SECTION("flip with no arm pattern fires immediately") {
    EngineConfig cfg;
    cfg.fault = FaultSpec{{}, parse_term("bond(_,_)"), FaultEffect::flip_result};
    FaultState state;
    auto r = apply_fault(cfg, trigger_query, true, state);
    CHECK_FALSE(r.crashed);
    CHECK(r.reported_result == false);
    // unmatched queries pass through
    auto pass = apply_fault(cfg, other_query, true, state);
    CHECK(pass.reported_result == true);
  }
  SECTION("corrupt_then_flip stays latent until armed") {
    EngineConfig cfg;
    cfg.fault =
        FaultSpec{{parse_term("atom(_,'c')")}, parse_term("bond(_,_)"), FaultEffect::corrupt_then_flip};
    FaultState state(1);
    auto before = apply_fault(cfg, trigger_query, true, state);
    CHECK(before.reported_result == true);  // bug latent
    apply_fault(cfg, arm_query, true, state);
    auto after = apply_fault(cfg, trigger_query, true, state);
    CHECK(after.reported_result == false);
  }
  SECTION("a query matching arm and trigger arms before it triggers") {
    EngineConfig cfg;
    cfg.fault = FaultSpec{{parse_term("atom(_,'c')")}, parse_term("atom(_,'c')"),
                          FaultEffect::corrupt_then_flip};
    FaultState state(1);
    auto r = apply_fault(cfg, arm_query, true, state);
    CHECK(r.reported_result == false);
  }
  SECTION("all arm patterns must fire") {
    EngineConfig cfg;
    cfg.fault = FaultSpec{{parse_term("probe(p1)"), parse_term("probe(p2)")},
                          parse_term("bond(_,_)"), FaultEffect::corrupt_then_flip};
    FaultState state(2);
    std::vector<Term> arm1 = {parse_term("probe(p1)")};
    apply_fault(cfg, arm1, true, state);
    CHECK(apply_fault(cfg, trigger_query, true, state).reported_result == true);
    std::vector<Term> arm2 = {parse_term("probe(p2)")};
    apply_fault(cfg, arm2, true, state);
    CHECK(apply_fault(cfg, trigger_query, true, state).reported_result == false);
  }
  SECTION("crash effect reports a crash") {
    EngineConfig cfg;
    cfg.fault = FaultSpec{{}, parse_term("bond(_,_)"), FaultEffect::crash};
    FaultState state;
    CHECK(apply_fault(cfg, trigger_query, true, state).crashed);
  }
}

TEST_CASE("fault patterns match by content, not position") {
  // the pattern's variables are fresh for every match
  std::vector<Term> q = {parse_term("atom(k1,'c')")};
  std::vector<Term> doubled = {parse_term("atom(a,a)")};
  CHECK(FaultState::matches(parse_term("atom(_,'c')"), q));
  CHECK(FaultState::matches(parse_term("atom(X,X)"), doubled));
  CHECK_FALSE(FaultState::matches(parse_term("atom(X,X)"), q));
  CHECK_FALSE(FaultState::matches(parse_term("atom(_,'h')"), q));
}

TEST_CASE("a crashed simulation logs a strict prefix of the clean run") {
  Trace t = parse_trace(kSampleTrace);
  Dataset d = Dataset::load(kSampleExamples);
  EngineConfig clean;
  EngineConfig crashing;
  crashing.fault = FaultSpec{{}, parse_term("atom(_,'h')"), FaultEffect::crash};

  RunReport good = simulate(t, d, clean);
  RunReport bad = simulate(t, d, crashing);
  CHECK(bad.outcome == SimOutcome::crashed);
  // second query is the first 'h' query; it crashes on its first example
  CHECK(bad.stopped_at_uid == QueryUid{1, 2});
  CHECK(bad.stopped_at_example == Term::integer(1));
  REQUIRE(bad.log.entries.size() == 5);
  REQUIRE(bad.log.entries.size() < good.log.entries.size());
  for (std::size_t i = 0; i < bad.log.entries.size(); ++i)
    CHECK(bad.log.entries[i] == good.log.entries[i]);
}

TEST_CASE("flip faults invert logged results on trigger-matching runs") {
  Trace t = parse_trace(kSampleTrace);
  Dataset d = Dataset::load(kSampleExamples);
  EngineConfig clean;
  EngineConfig flipped;
  flipped.fault = FaultSpec{{}, parse_term("bond(_,_)"), FaultEffect::flip_result};

  RunReport good = simulate(t, d, clean);
  RunReport bad = simulate(t, d, flipped);
  CHECK(bad.outcome == SimOutcome::completed);
  REQUIRE(bad.log.entries.size() == good.log.entries.size());
  for (std::size_t i = 0; i < good.log.entries.size(); ++i) {
    const QueryEntry* entry = t.find_entry(good.log.entries[i].uid);
    bool has_bond = false;
    for (const Term& a : entry->atoms) has_bond |= a.is_compound() && a.name() == "bond";
    CHECK(bad.log.entries[i].succeeded ==
          (has_bond ? !good.log.entries[i].succeeded : good.log.entries[i].succeeded));
  }
}

TEST_CASE("budget exhaustion stops a simulation at the exhausting run") {
  Dataset d = Dataset::load("begin(model(1)). p(a). end(model(1)).", "loop :- loop.\n");
  Trace t = parse_trace("query((p(a)), [1]). query((loop), [1]). query((p(a)), [1]).");
  EngineConfig cfg;
  RunReport report = simulate(t, d, cfg);
  CHECK(report.outcome == SimOutcome::budget_exhausted);
  CHECK(report.stopped_at_uid == QueryUid{1, 2});
  CHECK(report.log.entries.size() == 1);
}
