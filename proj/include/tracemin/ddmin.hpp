#pragma once

// Delta debugging over trace slices: the DDebug recursion producing a
// 1-minimal failing slice, with test memoization keyed on the materialized
// run set, granularity composition, per-stage statistics, an optional
// deterministic parallel round mode, and brute-force minimality verifiers
// used as testing oracles.

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "trace.hpp"

namespace tracemin {

/// Fail means "bug reproduced". Unresolved covers oracle infrastructure
/// errors (spawn failures, timeouts, exhausted budgets) and never steers
/// the recursion the way Fail does.
enum class TestOutcome { fail, pass, unresolved };

using TestFn = std::function<TestOutcome(const Slice&)>;

/// The slice handed to a minimization did not reproduce the bug.
class entry_condition_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DDStats {
  std::size_t tests_executed = 0;   // oracle invocations, cache hits excluded
  std::size_t cache_hits = 0;
  std::size_t unresolved_tests = 0;
  std::chrono::milliseconds wall_time{0};
  UnitCounts result_units{};
};

struct DDOptions {
  bool use_cache = true;
  /// Worker threads for one round's candidate tests. With more than one
  /// thread, all candidates of a round are tested and the lowest-index Fail
  /// wins, so results are identical to sequential mode.
  unsigned threads = 1;
  /// Observer fired once per real oracle invocation, in a deterministic
  /// order (candidate order within each round).
  std::function<void(const Slice&, TestOutcome)> on_oracle_call;
};

/// Contiguous, order-preserving split into n disjoint subsets covering s;
/// sizes differ by at most one, larger subsets first.
inline std::vector<Slice> partition(const Slice& s, std::size_t n) {
  if (n < 1 || n > s.size()) throw std::invalid_argument("partition: n out of range");
  const auto& sel = s.selection();
  std::vector<Slice> parts;
  parts.reserve(n);
  std::size_t base = sel.size() / n;
  std::size_t extra = sel.size() % n;
  std::size_t at = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = base + (i < extra ? 1 : 0);
    parts.push_back(s.with_selection({sel.begin() + at, sel.begin() + at + len}));
    at += len;
  }
  return parts;
}

/// Drives one minimization (or one composed schedule): owns the test cache
/// and the statistics. The cache key is the canonical run set of the slice,
/// so equal unit sets — and equal traces reached at different granularities —
/// are tested at most once.
class DeltaDebugger {
 public:
  explicit DeltaDebugger(TestFn test, DDOptions options = {})
      : test_(std::move(test)), options_(std::move(options)) {
    if (options_.threads < 1) options_.threads = 1;
  }

  const DDStats& stats() const noexcept { return stats_; }

  /// Cache-aware single test. The empty slice is defined as Pass and never
  /// reaches the oracle.
  TestOutcome run_test(const Slice& s) {
    if (s.empty()) return TestOutcome::pass;
    std::string key;
    if (options_.use_cache) {
      key = s.run_key();
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        ++stats_.cache_hits;
        return it->second;
      }
    }
    TestOutcome outcome = invoke_(s);
    if (options_.use_cache) cache_.emplace(std::move(key), outcome);
    return outcome;
  }

  /// The delta-debugging recursion. Assumes test(s) = Fail; callers that
  /// need the entry condition checked do so explicitly (see
  /// ddebug_composed). Returns a 1-minimal failing slice.
  Slice minimize(Slice d) {
    if (d.size() < 2) return d;
    std::size_t n = 2;
    for (;;) {
      std::vector<Slice> subsets = partition(d, n);
      if (auto hit = first_failing_(subsets)) {
        // Reduce to subset, restart with n = 2.
        d = std::move(subsets[*hit]);
        if (d.size() < 2) return d;
        n = 2;
        continue;
      }
      if (n > 2) {
        // At n == 2 each complement equals the other subset, already tested.
        std::vector<Slice> complements;
        complements.reserve(subsets.size());
        for (const Slice& part : subsets) complements.push_back(d.minus(part));
        if (auto hit = first_failing_(complements)) {
          d = std::move(complements[*hit]);
          n = std::max<std::size_t>(n - 1, 2);
          continue;
        }
      }
      if (n < d.size()) {
        n = std::min(d.size(), 2 * n);
        continue;
      }
      return d;
    }
  }

 private:
  TestOutcome invoke_(const Slice& s) {
    TestOutcome outcome = test_(s);
    ++stats_.tests_executed;
    if (outcome == TestOutcome::unresolved) ++stats_.unresolved_tests;
    if (options_.on_oracle_call) options_.on_oracle_call(s, outcome);
    return outcome;
  }

  std::optional<std::size_t> first_failing_(const std::vector<Slice>& candidates) {
    if (options_.threads == 1) {
      for (std::size_t i = 0; i < candidates.size(); ++i)
        if (run_test(candidates[i]) == TestOutcome::fail) return i;
      return std::nullopt;
    }
    return first_failing_parallel_(candidates);
  }

  // Batch mode: resolve cache hits, run all misses concurrently, then fold
  // results back in candidate order so stats and recorder stay deterministic.
  std::optional<std::size_t> first_failing_parallel_(const std::vector<Slice>& candidates) {
    struct Pending {
      std::size_t index;
      std::string key;
      TestOutcome outcome = TestOutcome::unresolved;
    };
    std::vector<std::optional<TestOutcome>> resolved(candidates.size());
    std::vector<Pending> misses;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].empty()) {
        resolved[i] = TestOutcome::pass;
        continue;
      }
      std::string key;
      if (options_.use_cache) {
        key = candidates[i].run_key();
        auto it = cache_.find(key);
        if (it != cache_.end()) {
          ++stats_.cache_hits;
          resolved[i] = it->second;
          continue;
        }
      }
      misses.push_back(Pending{i, std::move(key)});
    }
    if (!misses.empty()) {
      std::atomic<std::size_t> next{0};
      unsigned workers = std::min<std::size_t>(options_.threads, misses.size());
      auto work = [&] {
        for (;;) {
          std::size_t k = next.fetch_add(1);
          if (k >= misses.size()) return;
          misses[k].outcome = test_(candidates[misses[k].index]);
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
      for (Pending& miss : misses) {
        ++stats_.tests_executed;
        if (miss.outcome == TestOutcome::unresolved) ++stats_.unresolved_tests;
        if (options_.on_oracle_call) options_.on_oracle_call(candidates[miss.index], miss.outcome);
        if (options_.use_cache) cache_.emplace(std::move(miss.key), miss.outcome);
        resolved[miss.index] = miss.outcome;
      }
    }
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (*resolved[i] == TestOutcome::fail) return i;
    return std::nullopt;
  }

  TestFn test_;
  DDOptions options_;
  std::map<std::string, TestOutcome> cache_;
  DDStats stats_;
};

/// Plain DDebug without memoization: every candidate reaches the oracle.
inline Slice ddebug(const Slice& s, const TestFn& test, DDOptions options = {}) {
  options.use_cache = false;
  DeltaDebugger dd(test, std::move(options));
  return dd.minimize(s);
}

/// Memoizing DDebug: each distinct unit set is tested at most once.
/// Identical result to ddebug.
inline std::pair<Slice, DDStats> ddebug_cached(const Slice& s, const TestFn& test,
                                               DDOptions options = {}) {
  options.use_cache = true;
  DeltaDebugger dd(test, std::move(options));
  auto start = std::chrono::steady_clock::now();
  Slice result = dd.minimize(s);
  DDStats stats = dd.stats();
  stats.wall_time =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  stats.result_units = result.materialize().unit_counts();
  return {std::move(result), std::move(stats)};
}

struct StageResult {
  Granularity granularity{};
  DDStats stats;
};

struct ComposedResult {
  Trace minimized;
  std::vector<StageResult> stages;
  DDStats total;
};

/// Applies the memoizing DDebug at each granularity in schedule order,
/// rematerializing the trace between stages. The cache persists across
/// stages; stats are reported per stage and in total. Throws
/// entry_condition_error when the full trace does not Fail.
inline ComposedResult ddebug_composed(const Trace& trace, const TestFn& test,
                                      const std::vector<Granularity>& schedule,
                                      DDOptions options = {}) {
  if (schedule.empty()) throw std::invalid_argument("ddebug_composed: empty schedule");
  options.use_cache = true;
  DeltaDebugger dd(test, std::move(options));

  ComposedResult out;
  auto base = std::make_shared<const Trace>(trace);
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    Slice full = Slice::full(base, schedule[stage]);
    DDStats before = dd.stats();
    auto start = std::chrono::steady_clock::now();
    TestOutcome entry = dd.run_test(full);
    if (entry != TestOutcome::fail) {
      if (stage == 0)
        throw entry_condition_error("the full trace does not reproduce the bug (test != Fail)");
      throw std::logic_error("minimized stage input no longer fails; materialization is broken");
    }
    Slice reduced = dd.minimize(full);
    base = std::make_shared<const Trace>(reduced.materialize());

    StageResult sr;
    sr.granularity = schedule[stage];
    sr.stats.tests_executed = dd.stats().tests_executed - before.tests_executed;
    sr.stats.cache_hits = dd.stats().cache_hits - before.cache_hits;
    sr.stats.unresolved_tests = dd.stats().unresolved_tests - before.unresolved_tests;
    sr.stats.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    sr.stats.result_units = base->unit_counts();
    out.stages.push_back(std::move(sr));
  }
  out.minimized = *base;
  out.total = dd.stats();
  for (const StageResult& sr : out.stages) out.total.wall_time += sr.stats.wall_time;
  out.total.result_units = out.minimized.unit_counts();
  return out;
}

struct MinimalityReport {
  bool is_one_minimal = false;
  /// Size of a global minimal failing subset, when small enough to compute.
  std::optional<std::size_t> global_min_size;
  /// Units whose single removal still fails; empty iff is_one_minimal.
  std::vector<Unit> witnesses;
};

/// Tests all single-unit removals of s. The empty removal (|s| = 1) is
/// defined as Pass and not tested. Throws entry_condition_error when s
/// itself does not Fail.
inline MinimalityReport verify_one_minimal(const Slice& s, const TestFn& test) {
  if (test(s) != TestOutcome::fail)
    throw entry_condition_error("verify_one_minimal: the slice does not reproduce the bug");
  MinimalityReport report;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Slice removal = s.without_position(i);
    if (removal.empty()) continue;
    if (test(removal) == TestOutcome::fail) report.witnesses.push_back(s.units()[i]);
  }
  report.is_one_minimal = report.witnesses.empty();
  return report;
}

/// Exhaustive search for a smallest failing subset, enumerating subsets by
/// increasing size (lexicographic within a size). Testing oracle only —
/// exponential. Returns nullopt when |s| exceeds size_cap.
inline std::optional<Slice> brute_force_global_min(const Slice& s, const TestFn& test,
                                                   std::size_t size_cap = 16) {
  if (s.size() > size_cap) return std::nullopt;
  const auto& sel = s.selection();
  std::vector<std::size_t> combo;
  for (std::size_t k = 1; k <= sel.size(); ++k) {
    combo.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) combo[i] = i;
    for (;;) {
      std::vector<std::size_t> chosen;
      chosen.reserve(k);
      for (std::size_t i : combo) chosen.push_back(sel[i]);
      Slice candidate = s.with_selection(std::move(chosen));
      if (test(candidate) == TestOutcome::fail) return candidate;
      // next k-combination of [0, sel.size())
      std::size_t i = k;
      while (i-- > 0) {
        if (combo[i] != i + sel.size() - k) {
          ++combo[i];
          for (std::size_t j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
          break;
        }
        if (i == 0) goto next_size;
      }
    }
  next_size:;
  }
  throw entry_condition_error("brute_force_global_min: no subset reproduces the bug");
}

}  // namespace tracemin
