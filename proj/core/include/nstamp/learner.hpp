#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nstamp/executive.hpp"
#include "nstamp/perception.hpp"

namespace nstamp::learn {

struct MalformedTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-model correction-sample store. Buckets are keyed "pose:vision",
// "pose:force", or "pred:<predicate>"; each bucket triggers an update
// independently once it reaches the threshold.
struct LearningBuffer {
  std::map<std::string, std::vector<perception::CorrectionSample>> buckets;
  int trigger_threshold = 75;

  static std::string bucket_key(const perception::CorrectionSample& s);

  int count(const std::string& key) const;
  bool trigger_ready(const std::string& key) const;
  int total() const;
};

// Appends samples to their buckets in order; never drops or reorders.
LearningBuffer ingest(LearningBuffer buffer,
                      std::vector<perception::CorrectionSample> samples);

// Retrospective trace analysis. Only traces that succeeded after at
// least one replan qualify; they yield
//   - one pose correction per earlier Mate step of the modality opposite
//     the final successful Mate (whose estimate acts as ground truth),
//   - at most one predicate correction: the lowest-confidence neural
//     precondition reading of the first failed action, label flipped.
// Confidence ties break by position in `predicate_order` (the domain's
// declaration order by default).
std::vector<perception::CorrectionSample> analyze_trace(
    const exec::ExecutionTrace& trace);
std::vector<perception::CorrectionSample> analyze_trace(
    const exec::ExecutionTrace& trace,
    std::span<const pddl::Proposition> predicate_order);

struct UpdateReport {
  int iteration = 0;
  std::vector<std::string> models_updated;
  std::map<std::string, int> samples_consumed;
  std::map<std::string, double> pre_loss;
  std::map<std::string, double> post_loss;
};

// Held-out evaluation hooks supplied by the harness: each returns the
// validation loss of the given model on freshly generated synthetic
// data (pose models: mean pose loss; classifiers: mean cross-entropy).
struct ValidationSuite {
  std::function<double(const perception::PoseEstimator&)> pose_loss_of;
  std::function<double(const perception::PredicateClassifier&)> classifier_loss_of;
};

// Drains every bucket at or beyond the trigger threshold and applies one
// SGD step per sample in insertion order. Buckets below threshold and
// the corresponding models are left untouched; with nothing to drain the
// models come back bit-identical and the report is empty.
std::pair<exec::PerceptionModels, std::optional<UpdateReport>> maybe_update(
    LearningBuffer& buffer, exec::PerceptionModels models,
    const ValidationSuite& validation, int iteration);

}  // namespace nstamp::learn
