#include "nstamp/metrics.hpp"

namespace nstamp::metrics {

int indicator(int n, int n_th) { return n < n_th ? 1 : 0; }

double compute_sus(std::span<const int> replan_counts, int n_th) {
  if (replan_counts.empty()) {
    throw EmptyInput("compute_sus: no replan counts");
  }
  long successes = 0;
  for (int n : replan_counts) successes += indicator(n, n_th);
  return static_cast<double>(successes) /
         static_cast<double>(replan_counts.size());
}

double compute_avg_replans(std::span<const int> replan_counts) {
  if (replan_counts.empty()) {
    throw EmptyInput("compute_avg_replans: no replan counts");
  }
  long total = 0;
  for (int n : replan_counts) total += n;
  return static_cast<double>(total) /
         static_cast<double>(replan_counts.size());
}

}  // namespace nstamp::metrics
