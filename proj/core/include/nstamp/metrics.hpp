#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace nstamp::metrics {

struct EmptyInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary success indicator: 1 when the replan count stayed under the
// threshold, 0 at or beyond it (n >= n_th is task failure).
int indicator(int n, int n_th);

// Task success rate: mean of indicators.
double compute_sus(std::span<const int> replan_counts, int n_th);

// Average number of replans per task.
double compute_avg_replans(std::span<const int> replan_counts);

struct IterationResult {
  int iteration = 0;
  int task_count = 0;
  double sus = 0.0;
  double avg_replans = 0.0;
  std::vector<int> replan_counts;
};

}  // namespace nstamp::metrics
