#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nstamp/executive.hpp"
#include "nstamp/learner.hpp"
#include "nstamp/metrics.hpp"

namespace nstamp::trace_io {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

// One JSON object per line. Record types: run_header, step,
// trace_summary, update_report, iteration_result. Step and summary
// records carry an episode index so traces can be regrouped on read.
void write_run_header(std::ostream& os, uint64_t seed,
                      const std::string& config_json);
void write_step(std::ostream& os, int episode, int iteration,
                const exec::StepRecord& step);
void write_trace_summary(std::ostream& os, int iteration,
                         const exec::ExecutionTrace& trace);
void write_update_report(std::ostream& os, int episode,
                         const learn::UpdateReport& report);
void write_iteration_result(std::ostream& os,
                            const metrics::IterationResult& result);

// A trace reassembled from a log: the summary plus its step records.
struct LoggedTrace {
  exec::ExecutionTrace trace;
  int iteration = 0;
};

struct LogContents {
  int schema_version = 0;
  uint64_t seed = 0;
  int n_th = 0;
  std::vector<LoggedTrace> traces;
  std::vector<metrics::IterationResult> iteration_results;
};

// Reads an events stream back; unknown record types are skipped so the
// format can grow.
LogContents read_log(std::istream& is);
LogContents read_log_file(const std::string& path);

// Re-validates a logged trace against the domain semantics: replan
// bookkeeping, the outcome/threshold relation, per-step symbolic state
// transitions, and precondition satisfaction for executed steps.
// Returns human-readable violations; empty means the trace is
// internally consistent.
std::vector<std::string> validate_logged_trace(const LoggedTrace& logged,
                                               const pddl::Domain& domain);

}  // namespace nstamp::trace_io
