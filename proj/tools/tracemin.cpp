// tracemin: simulate query-execution traces of a small logic-query engine,
// plant reproducible bugs, and shrink failing traces with delta debugging.
//
// Subcommands: simulate, minimize, verify-minimal, gen-synthetic.
// Exit codes: 0 success, 1 usage or input error, 2 the full trace does not
// reproduce the bug, 3 simulated crash (from simulate), 4 budget exhausted
// (from simulate).

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "tracemin/dataset.hpp"
#include "tracemin/ddmin.hpp"
#include "tracemin/engine.hpp"
#include "tracemin/oracle.hpp"
#include "tracemin/synthetic.hpp"
#include "tracemin/term.hpp"
#include "tracemin/trace.hpp"

namespace {

using nlohmann::json;
using namespace tracemin;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

std::string self_executable(const char* argv0) {
  char buffer[4096];
  ssize_t n = readlink("/proc/self/exe", buffer, sizeof(buffer) - 1);
  if (n > 0) {
    buffer[n] = '\0';
    return buffer;
  }
  return argv0;
}

std::vector<std::string> split_command(const std::string& text) {
  std::vector<std::string> parts;
  std::istringstream in(text);
  std::string word;
  while (in >> word) parts.push_back(word);
  return parts;
}

/// "--granularity a,b,c" lists composition order: the rightmost granularity
/// runs first. Returns the schedule in execution order.
std::vector<Granularity> parse_schedule(const std::string& flag) {
  std::vector<Granularity> composition;
  std::string token;
  std::istringstream in(flag);
  while (std::getline(in, token, ',')) {
    while (!token.empty() && token.front() == ' ') token.erase(token.begin());
    while (!token.empty() && token.back() == ' ') token.pop_back();
    auto g = granularity_from_name(token);
    if (!g) throw CLI::ValidationError("--granularity", "unknown granularity: " + token);
    composition.push_back(*g);
  }
  if (composition.empty()) throw CLI::ValidationError("--granularity", "empty schedule");
  return {composition.rbegin(), composition.rend()};
}

struct OracleInputs {
  std::string oracle_kind = "diff";
  std::string cmd_template;
  std::string trace_path;
  std::string examples_path;
  std::string background_path;
  std::string fault_path;
  long long step_budget = 100000;
  int depth_budget = 1000;
  double timeout_seconds = 10.0;
  std::string self_exe;
};

struct LoadedProblem {
  std::shared_ptr<const Trace> trace;
  std::shared_ptr<const Dataset> dataset;
  std::optional<FaultSpec> fault;
};

LoadedProblem load_problem(const OracleInputs& in) {
  LoadedProblem problem;
  problem.trace = std::make_shared<const Trace>(parse_trace(read_file(in.trace_path)));
  std::string background = in.background_path.empty() ? std::string{} : read_file(in.background_path);
  problem.dataset =
      std::make_shared<const Dataset>(Dataset::load(read_file(in.examples_path), background));
  if (!in.fault_path.empty()) problem.fault = FaultSpec::parse(read_file(in.fault_path));
  return problem;
}

TestFn build_oracle(const OracleInputs& in, const LoadedProblem& problem) {
  auto timeout = std::chrono::milliseconds(static_cast<long long>(in.timeout_seconds * 1000.0));
  if (in.oracle_kind == "diff") {
    if (!problem.fault)
      throw std::runtime_error("--oracle diff needs --fault-spec for the candidate engine");
    DiffOracleConfig config;
    config.baseline.step_budget = in.step_budget;
    config.baseline.depth_budget = in.depth_budget;
    config.candidate = config.baseline;
    config.candidate.fault = problem.fault;
    config.dataset = problem.dataset;
    return make_diff_test(std::move(config));
  }
  CrashOracleConfig config;
  config.timeout = timeout;
  if (in.oracle_kind == "crash") {
    if (in.fault_path.empty())
      throw std::runtime_error("--oracle crash needs --fault-spec for the spawned engine");
    config.command = {in.self_exe,       "simulate",
                      "--trace",         "{trace}",
                      "--examples",      in.examples_path,
                      "--fault-spec",    in.fault_path,
                      "--step-budget",   std::to_string(in.step_budget),
                      "--depth-budget",  std::to_string(in.depth_budget)};
    if (!in.background_path.empty()) {
      config.command.push_back("--background");
      config.command.push_back(in.background_path);
    }
    return make_crash_test(std::move(config));
  }
  if (in.oracle_kind == "cmd") {
    config.command = split_command(in.cmd_template);
    if (config.command.empty()) throw std::runtime_error("--oracle cmd needs a --cmd template");
    bool has_trace = false;
    for (const std::string& part : config.command)
      if (part.find("{trace}") != std::string::npos) has_trace = true;
    if (!has_trace) throw std::runtime_error("--cmd template must mention {trace}");
    config.substitutions["{dataset}"] = in.examples_path;
    config.substitutions["{examples}"] = in.examples_path;
    config.substitutions["{background}"] = in.background_path;
    config.substitutions["{fault}"] = in.fault_path;
    return make_crash_test(std::move(config));
  }
  throw std::runtime_error("unknown oracle kind: " + in.oracle_kind);
}

json stats_json(const DDStats& stats) {
  return json{{"tests", stats.tests_executed},
              {"cache_hits", stats.cache_hits},
              {"unresolved", stats.unresolved_tests},
              {"wall_time_ms", stats.wall_time.count()},
              {"result",
               {{"iterations", stats.result_units.iterations},
                {"queries", stats.result_units.queries},
                {"runs", stats.result_units.runs}}}};
}

void print_stats_table(std::ostream& os, const ComposedResult& result) {
  os << "stage  granularity  tests  cache-hits  unresolved  time(s)  It  Qu  R\n";
  auto row = [&os](const std::string& label, const std::string& g, const DDStats& s) {
    os << label << "  " << g << "  " << s.tests_executed << "  " << s.cache_hits << "  "
       << s.unresolved_tests << "  " << (static_cast<double>(s.wall_time.count()) / 1000.0) << "  "
       << s.result_units.iterations << "  " << s.result_units.queries << "  " << s.result_units.runs
       << "\n";
  };
  for (std::size_t i = 0; i < result.stages.size(); ++i)
    row(std::to_string(i + 1), granularity_name(result.stages[i].granularity),
        result.stages[i].stats);
  row("total", "-", result.total);
}

int run_simulate(const OracleInputs& in, const std::string& out_path, bool hard_crash) {
  LoadedProblem problem = load_problem(in);
  EngineConfig config;
  config.step_budget = in.step_budget;
  config.depth_budget = in.depth_budget;
  config.fault = problem.fault;
  RunReport report = simulate(*problem.trace, *problem.dataset, config);
  std::string log = serialize_log(report.log);
  if (out_path.empty())
    std::cout << log;
  else
    write_file(out_path, log);
  switch (report.outcome) {
    case SimOutcome::completed:
      return 0;
    case SimOutcome::crashed:
      std::cerr << "simulated crash at " << uid_term(report.stopped_at_uid) << " on example "
                << report.stopped_at_example << "\n";
      if (hard_crash) std::abort();
      return 3;
    case SimOutcome::budget_exhausted:
      std::cerr << "budget exhausted at " << uid_term(report.stopped_at_uid) << " on example "
                << report.stopped_at_example << "\n";
      return 4;
  }
  return 0;
}

int run_minimize(const OracleInputs& in, const std::string& granularity_flag,
                 const std::string& out_path, const std::string& stats_path, unsigned parallel) {
  LoadedProblem problem = load_problem(in);
  TestFn test = build_oracle(in, problem);
  std::vector<Granularity> schedule = parse_schedule(granularity_flag);
  DDOptions options;
  options.threads = parallel;

  ComposedResult result;
  try {
    result = ddebug_composed(*problem.trace, test, schedule, options);
  } catch (const entry_condition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::string minimized = print_trace(result.minimized);
  if (out_path.empty())
    std::cout << minimized;
  else
    write_file(out_path, minimized);

  if (!stats_path.empty()) {
    json stages = json::array();
    for (const StageResult& sr : result.stages) {
      json stage = stats_json(sr.stats);
      stage["granularity"] = granularity_name(sr.granularity);
      stages.push_back(std::move(stage));
    }
    json report{{"schedule", granularity_flag}, {"stages", std::move(stages)},
                {"total", stats_json(result.total)}};
    write_file(stats_path, report.dump(2) + "\n");
  }
  print_stats_table(std::cerr, result);
  return 0;
}

int run_verify_minimal(const OracleInputs& in, const std::string& granularity_flag,
                       std::size_t global_cap) {
  LoadedProblem problem = load_problem(in);
  TestFn test = build_oracle(in, problem);
  auto g = granularity_from_name(granularity_flag);
  if (!g) throw std::runtime_error("unknown granularity: " + granularity_flag);
  Slice full = Slice::full(problem.trace, *g);

  MinimalityReport report;
  try {
    report = verify_one_minimal(full, test);
  } catch (const entry_condition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (full.size() <= global_cap) {
    auto smallest = brute_force_global_min(full, test, global_cap);
    if (smallest) report.global_min_size = smallest->size();
  }

  std::cout << "units: " << full.size() << " (" << granularity_name(*g) << ")\n";
  std::cout << "one_minimal: " << (report.is_one_minimal ? "true" : "false") << "\n";
  for (const Unit& u : report.witnesses) std::cout << "witness: " << unit_term(u) << "\n";
  if (report.global_min_size)
    std::cout << "global_min_size: " << *report.global_min_size << "\n";
  else
    std::cout << "global_min_size: unknown\n";
  return 0;
}

int run_gen_synthetic(const SyntheticSpec& spec, const std::string& prefix) {
  SyntheticBundle bundle = generate_synthetic(spec);
  write_file(prefix + ".trace", print_trace(bundle.trace));
  write_file(prefix + ".examples", bundle.dataset.serialize_examples());
  write_file(prefix + ".fault", bundle.fault.serialize());
  std::cout << prefix << ".trace " << prefix << ".examples " << prefix << ".fault\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace simulation and delta debugging for logic-query engines"};
  app.require_subcommand(1);

  OracleInputs inputs;
  inputs.self_exe = self_executable(argv[0]);

  auto add_engine_flags = [&inputs](CLI::App* cmd, bool trace_required = true) {
    cmd->add_option("--trace", inputs.trace_path, "trace file")->required(trace_required);
    cmd->add_option("--examples", inputs.examples_path, "examples file (model blocks)")->required();
    cmd->add_option("--background", inputs.background_path, "background clauses file");
    cmd->add_option("--fault-spec", inputs.fault_path, "fault spec file (planted bug)");
    cmd->add_option("--step-budget", inputs.step_budget, "resolution steps per query")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--depth-budget", inputs.depth_budget, "max derivation depth")
        ->check(CLI::PositiveNumber);
  };
  auto add_oracle_flags = [&inputs](CLI::App* cmd) {
    cmd->add_option("--oracle", inputs.oracle_kind, "test type: crash, diff or cmd")
        ->check(CLI::IsMember({"crash", "diff", "cmd"}));
    cmd->add_option("--cmd", inputs.cmd_template, "external command template (use {trace})");
    cmd->add_option("--timeout", inputs.timeout_seconds, "oracle timeout in seconds")
        ->check(CLI::PositiveNumber);
  };

  // simulate
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "run a trace and write the success log");
  std::string sim_out;
  bool hard_crash = false;
  add_engine_flags(simulate_cmd);
  simulate_cmd->add_option("--out", sim_out, "success log file (stdout when omitted)");
  simulate_cmd->add_flag("--hard-crash", hard_crash, "abort the process on a simulated crash");

  // minimize
  CLI::App* minimize_cmd =
      app.add_subcommand("minimize", "shrink a failing trace to a 1-minimal one");
  std::string min_granularity = "queries";
  std::string min_out, min_stats;
  unsigned parallel = 1;
  add_engine_flags(minimize_cmd);
  add_oracle_flags(minimize_cmd);
  minimize_cmd->add_option("--granularity", min_granularity,
                           "composition schedule, rightmost runs first (iterations, queries, "
                           "runs/examples)");
  minimize_cmd->add_option("--out", min_out, "minimized trace file (stdout when omitted)");
  minimize_cmd->add_option("--stats", min_stats, "stats report file (JSON)");
  minimize_cmd->add_option("--parallel", parallel, "worker threads per test round")
      ->check(CLI::PositiveNumber);

  // verify-minimal
  CLI::App* verify_cmd =
      app.add_subcommand("verify-minimal", "check 1-minimality of a failing trace");
  std::string verify_granularity = "queries";
  std::size_t global_cap = 16;
  add_engine_flags(verify_cmd);
  add_oracle_flags(verify_cmd);
  verify_cmd->add_option("--granularity", verify_granularity, "unit granularity to check");
  verify_cmd->add_option("--global-cap", global_cap,
                         "max units for the exhaustive global-minimum search");

  // gen-synthetic
  CLI::App* gen_cmd =
      app.add_subcommand("gen-synthetic", "generate a trace, dataset and planted fault");
  SyntheticSpec spec;
  std::string bug_shape = "last";
  std::string effect = "flip";
  std::string out_prefix;
  gen_cmd->add_option("--iterations", spec.iterations, "iteration count")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--queries", spec.queries_per_iteration, "average queries per iteration")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--examples", spec.examples, "example count")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--bug-shape", bug_shape, "last, first_and_last or first_and_middle")
      ->check(CLI::IsMember({"last", "first_and_last", "first_and_middle"}));
  gen_cmd->add_option("--seed", spec.seed, "generator seed");
  gen_cmd->add_option("--effect", effect, "planted effect: flip or crash")
      ->check(CLI::IsMember({"flip", "crash"}));
  gen_cmd->add_option("--out-prefix", out_prefix, "output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*simulate_cmd) return run_simulate(inputs, sim_out, hard_crash);
    if (*minimize_cmd) return run_minimize(inputs, min_granularity, min_out, min_stats, parallel);
    if (*verify_cmd) return run_verify_minimal(inputs, verify_granularity, global_cap);
    if (*gen_cmd) {
      spec.shape = *bug_shape_from_name(bug_shape);
      spec.effect = effect == "crash" ? FaultEffect::crash : FaultEffect::flip_result;
      return run_gen_synthetic(spec, out_prefix);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
