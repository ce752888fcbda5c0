// Command-line front end: run experiments, plan against domain files,
// re-validate logged traces, and recompute metrics from logs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "nstamp/harness.hpp"
#include "nstamp/metrics.hpp"
#include "nstamp/pddl.hpp"
#include "nstamp/trace_io.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& config_path, std::optional<uint64_t> seed,
            const std::string& out_dir) {
  nstamp::harness::ExperimentConfig cfg =
      nstamp::harness::load_config(config_path);
  if (seed.has_value()) cfg.seed = *seed;
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  const auto result = nstamp::harness::run_experiment(cfg);
  std::cout << "iteration  task_count  sus      avg_replans\n";
  for (const auto& it : result.iterations) {
    std::printf("%-10d %-11d %-8.4f %.4f\n", it.iteration, it.task_count,
                it.sus, it.avg_replans);
  }
  std::cout << "updates triggered: " << result.updates.size() << "\n";
  std::cout << "outputs written to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_plan(const std::string& domain_path, const std::string& problem_path) {
  const auto domain = nstamp::pddl::parse_domain(read_file(domain_path));
  const auto problem =
      nstamp::pddl::parse_problem(read_file(problem_path), domain);
  const auto plan =
      nstamp::pddl::plan(problem.init, problem.goal, domain.actions);
  if (!plan.has_value()) {
    std::cout << "no plan\n";
    return 1;
  }
  if (plan->steps.empty()) {
    std::cout << "empty plan (init satisfies goal)\n";
    return 0;
  }
  for (const auto& step : plan->steps) std::cout << step << "\n";
  return 0;
}

int cmd_replay(const std::string& trace_path) {
  const auto log = nstamp::trace_io::read_log_file(trace_path);
  const auto& domain = nstamp::pddl::disassembly_domain();

  std::size_t bad = 0;
  for (const auto& logged : log.traces) {
    const auto problems =
        nstamp::trace_io::validate_logged_trace(logged, domain);
    if (problems.empty()) continue;
    ++bad;
    for (const auto& p : problems) std::cout << "INVALID " << p << "\n";
  }
  std::cout << log.traces.size() << " traces checked, "
            << (log.traces.size() - bad) << " valid, " << bad << " invalid\n";
  return bad == 0 ? 0 : 1;
}

int cmd_metrics(const std::string& traces_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(traces_dir)) {
    for (const auto& entry : fs::directory_iterator(traces_dir)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.emplace_back(traces_dir);
  }
  if (files.empty()) {
    std::cerr << "no .jsonl files under " << traces_dir << "\n";
    return 1;
  }

  std::map<int, std::vector<int>> by_iteration;
  int n_th = 0;
  for (const auto& file : files) {
    const auto log = nstamp::trace_io::read_log_file(file.string());
    for (const auto& logged : log.traces) {
      by_iteration[logged.iteration].push_back(logged.trace.replan_count);
      n_th = logged.trace.task.n_th;
    }
  }
  if (by_iteration.empty()) {
    std::cerr << "no trace summaries found\n";
    return 1;
  }

  std::cout << "iteration,task_count,sus,avg_replans\n";
  for (const auto& [iteration, ns] : by_iteration) {
    std::printf("%d,%zu,%.6f,%.6f\n", iteration, ns.size(),
                nstamp::metrics::compute_sus(ns, n_th),
                nstamp::metrics::compute_avg_replans(ns));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuro-symbolic disassembly planning and continual learning"};
  app.require_subcommand(1);

  std::string config_path = "default";
  std::optional<uint64_t> seed;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run a seeded experiment");
  run->add_option("--config", config_path,
                  "Config JSON file, or 'default' for built-ins");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Override the output directory");

  std::string domain_path, problem_path;
  auto* plan = app.add_subcommand("plan", "Plan a domain/problem pair");
  plan->add_option("--domain", domain_path, "Domain file")->required();
  plan->add_option("--problem", problem_path, "Problem file")->required();

  std::string trace_path;
  auto* replay = app.add_subcommand("replay", "Re-validate a logged trace");
  replay->add_option("--trace", trace_path, "events.jsonl file")->required();

  std::string traces_dir;
  auto* metrics = app.add_subcommand("metrics", "Recompute metrics from logs");
  metrics->add_option("--traces", traces_dir, "Directory of .jsonl logs")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, seed, out_dir);
    if (plan->parsed()) return cmd_plan(domain_path, problem_path);
    if (replay->parsed()) return cmd_replay(trace_path);
    if (metrics->parsed()) return cmd_metrics(traces_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
