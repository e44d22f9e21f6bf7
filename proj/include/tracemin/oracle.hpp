#pragma once

// The two test types used to drive minimization: subprocess crash detection
// (run a simulator in a separate process and observe how it terminates) and
// differential log comparison (simulate a slice under a trusted baseline and
// a candidate engine and compare the success logs). Both are packaged as
// TestFn closures over slices. The subprocess runner doubles as the generic
// external-command oracle.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "ddmin.hpp"
#include "engine.hpp"
#include "trace.hpp"

namespace tracemin {

struct ProcessResult {
  enum class Status { exited, signaled, timed_out, spawn_failed };
  Status status = Status::spawn_failed;
  int exit_code = -1;
  int term_signal = 0;
};

/// Spawns argv[0] with the given arguments (no shell), waits up to timeout,
/// then kills the whole process group. stdin is /dev/null; stdout/stderr go
/// to the given files or /dev/null. Safe to call from several threads.
inline ProcessResult run_process(const std::vector<std::string>& argv,
                                 std::chrono::milliseconds timeout,
                                 const std::optional<std::string>& stdout_file = std::nullopt,
                                 const std::optional<std::string>& stderr_file = std::nullopt) {
  ProcessResult result;
  if (argv.empty()) return result;

  int err_pipe[2];
  if (pipe(err_pipe) != 0) return result;
  fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

  pid_t pid = fork();
  if (pid < 0) {
    close(err_pipe[0]);
    close(err_pipe[1]);
    return result;
  }
  if (pid == 0) {
    // child
    setpgid(0, 0);
    close(err_pipe[0]);
    int devnull = open("/dev/null", O_RDWR);
    if (devnull >= 0) dup2(devnull, STDIN_FILENO);
    auto redirect = [&](const std::optional<std::string>& path, int fd) {
      if (path) {
        int out = open(path->c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (out >= 0) {
          dup2(out, fd);
          close(out);
          return;
        }
      }
      if (devnull >= 0) dup2(devnull, fd);
    };
    redirect(stdout_file, STDOUT_FILENO);
    redirect(stderr_file, STDERR_FILENO);
    if (devnull >= 0) close(devnull);

    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    int err = errno;
    ssize_t ignored = write(err_pipe[1], &err, sizeof(err));
    (void)ignored;
    _exit(127);
  }

  close(err_pipe[1]);
  int exec_errno = 0;
  ssize_t got = read(err_pipe[0], &exec_errno, sizeof(exec_errno));
  close(err_pipe[0]);
  if (got > 0) {
    waitpid(pid, nullptr, 0);
    result.status = ProcessResult::Status::spawn_failed;
    return result;
  }

  auto deadline = std::chrono::steady_clock::now() + timeout;
  int wstatus = 0;
  for (;;) {
    pid_t done = waitpid(pid, &wstatus, WNOHANG);
    if (done == pid) break;
    if (done < 0) {
      result.status = ProcessResult::Status::spawn_failed;
      return result;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &wstatus, 0);
      result.status = ProcessResult::Status::timed_out;
      return result;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (WIFEXITED(wstatus)) {
    result.status = ProcessResult::Status::exited;
    result.exit_code = WEXITSTATUS(wstatus);
  } else if (WIFSIGNALED(wstatus)) {
    result.status = ProcessResult::Status::signaled;
    result.term_signal = WTERMSIG(wstatus);
  }
  return result;
}

namespace detail {

/// Unique temp path; the counter keeps concurrent oracle runs apart.
inline std::filesystem::path fresh_temp_path(const char* suffix) {
  static std::atomic<unsigned long> counter{0};
  auto dir = std::filesystem::temp_directory_path();
  return dir / ("tracemin-" + std::to_string(getpid()) + "-" +
                std::to_string(counter.fetch_add(1)) + suffix);
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const char* suffix) : path(fresh_temp_path(suffix)) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string substitute_all(std::string text, const std::string& key, const std::string& value) {
  std::size_t at = 0;
  while ((at = text.find(key, at)) != std::string::npos) {
    text.replace(at, key.size(), value);
    at += value.size();
  }
  return text;
}

}  // namespace detail

/// Configuration of the crash oracle: a command template run on each
/// materialized slice. `{trace}` is replaced by a fresh temporary trace file;
/// further placeholders (e.g. `{dataset}`) come from `substitutions`.
struct CrashOracleConfig {
  std::vector<std::string> command;
  std::map<std::string, std::string> substitutions;
  std::chrono::milliseconds timeout{10000};
  /// Death by signal counts as Fail.
  bool fail_on_signal = true;
  /// Exit codes that count as Fail; 3 is the simulator's crash exit.
  std::set<int> fail_exit_codes{3};
  /// Hangs are Unresolved by default; set to treat them as failures.
  bool timeout_is_fail = false;
};

/// Fail iff the spawned process terminates abnormally (fail exit code or
/// signal); Pass on clean exit 0; Unresolved on spawn failure, timeout, or
/// an unlisted nonzero exit (infrastructure error).
inline TestOutcome crash_test(const Slice& slice, const CrashOracleConfig& config) {
  detail::TempFile trace_file(".trace");
  detail::write_file(trace_file.path, print_trace(slice.materialize()));

  std::vector<std::string> argv;
  argv.reserve(config.command.size());
  for (std::string part : config.command) {
    part = detail::substitute_all(std::move(part), "{trace}", trace_file.path.string());
    for (const auto& [key, value] : config.substitutions)
      part = detail::substitute_all(std::move(part), key, value);
    argv.push_back(std::move(part));
  }

  ProcessResult result = run_process(argv, config.timeout);
  switch (result.status) {
    case ProcessResult::Status::spawn_failed:
      return TestOutcome::unresolved;
    case ProcessResult::Status::timed_out:
      return config.timeout_is_fail ? TestOutcome::fail : TestOutcome::unresolved;
    case ProcessResult::Status::signaled:
      return config.fail_on_signal ? TestOutcome::fail : TestOutcome::unresolved;
    case ProcessResult::Status::exited:
      if (result.exit_code == 0) return TestOutcome::pass;
      if (config.fail_exit_codes.count(result.exit_code)) return TestOutcome::fail;
      return TestOutcome::unresolved;
  }
  return TestOutcome::unresolved;
}

inline TestFn make_crash_test(CrashOracleConfig config) {
  auto shared = std::make_shared<const CrashOracleConfig>(std::move(config));
  return [shared](const Slice& s) { return crash_test(s, *shared); };
}

/// Differential oracle: the baseline engine is trusted (no fault allowed),
/// the candidate carries the behavior under test.
struct DiffOracleConfig {
  EngineConfig baseline;
  EngineConfig candidate;
  std::shared_ptr<const Dataset> dataset;
};

/// All aligned runs whose success bits differ, plus runs present in only one
/// log (baseline order first, then candidate-only runs). Empty iff the logs
/// agree.
inline std::vector<RunId> locate_divergence(const SuccessLog& baseline, const SuccessLog& candidate) {
  std::map<RunId, bool> candidate_bits;
  for (const RunRecord& r : candidate.entries) candidate_bits.emplace(RunId{r.uid, r.example_id}, r.succeeded);
  std::set<RunId> baseline_keys;
  std::vector<RunId> diverging;
  for (const RunRecord& r : baseline.entries) {
    RunId id{r.uid, r.example_id};
    baseline_keys.insert(id);
    auto it = candidate_bits.find(id);
    if (it == candidate_bits.end() || it->second != r.succeeded) diverging.push_back(id);
  }
  for (const RunRecord& r : candidate.entries) {
    RunId id{r.uid, r.example_id};
    if (!baseline_keys.count(id)) diverging.push_back(id);
  }
  return diverging;
}

/// Materializes the slice, simulates it under both engines, and compares the
/// logs aligned on (query uid, example id). Fail iff any success bit differs
/// or the run sets differ (a candidate crash truncates its log); Unresolved
/// when either run exhausts a budget.
inline TestOutcome diff_test(const Slice& slice, const DiffOracleConfig& config) {
  if (config.baseline.fault.has_value())
    throw std::invalid_argument("diff oracle: the baseline engine must not carry a fault");
  if (!config.dataset) throw std::invalid_argument("diff oracle: missing dataset");
  Trace trace = slice.materialize();
  RunReport baseline = simulate(trace, *config.dataset, config.baseline);
  RunReport candidate = simulate(trace, *config.dataset, config.candidate);
  if (baseline.outcome == SimOutcome::budget_exhausted ||
      candidate.outcome == SimOutcome::budget_exhausted)
    return TestOutcome::unresolved;
  if (candidate.outcome == SimOutcome::crashed) return TestOutcome::fail;
  return locate_divergence(baseline.log, candidate.log).empty() ? TestOutcome::pass
                                                                : TestOutcome::fail;
}

inline TestFn make_diff_test(DiffOracleConfig config) {
  if (config.baseline.fault.has_value())
    throw std::invalid_argument("diff oracle: the baseline engine must not carry a fault");
  auto shared = std::make_shared<const DiffOracleConfig>(std::move(config));
  return [shared](const Slice& s) { return diff_test(s, *shared); };
}

}  // namespace tracemin
