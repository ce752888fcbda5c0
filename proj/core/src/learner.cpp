#include "nstamp/learner.hpp"

#include <algorithm>
#include <limits>

namespace nstamp::learn {

namespace {

using perception::CorrectionSample;
using perception::Modality;

const exec::StepRecord* final_successful_mate(const exec::ExecutionTrace& t) {
  for (auto it = t.steps.rbegin(); it != t.steps.rend(); ++it) {
    if (it->executed && it->pose_estimate.has_value()) return &*it;
  }
  return nullptr;
}

const exec::StepRecord* first_failed_action(const exec::ExecutionTrace& t) {
  for (const auto& step : t.steps) {
    if (step.verification.has_value() && !step.verification->expected_met) {
      return &step;
    }
  }
  return nullptr;
}

}  // namespace

std::string LearningBuffer::bucket_key(const CorrectionSample& s) {
  return (s.kind == CorrectionSample::Kind::pose ? "pose:" : "pred:") +
         s.target_model;
}

int LearningBuffer::count(const std::string& key) const {
  auto it = buckets.find(key);
  return it == buckets.end() ? 0 : static_cast<int>(it->second.size());
}

bool LearningBuffer::trigger_ready(const std::string& key) const {
  return count(key) >= trigger_threshold;
}

int LearningBuffer::total() const {
  int total = 0;
  for (const auto& [key, samples] : buckets) {
    total += static_cast<int>(samples.size());
  }
  return total;
}

LearningBuffer ingest(LearningBuffer buffer,
                      std::vector<CorrectionSample> samples) {
  for (auto& s : samples) {
    buffer.buckets[LearningBuffer::bucket_key(s)].push_back(std::move(s));
  }
  return buffer;
}

std::vector<CorrectionSample> analyze_trace(const exec::ExecutionTrace& trace) {
  return analyze_trace(trace, pddl::disassembly_domain().predicates);
}

std::vector<CorrectionSample> analyze_trace(
    const exec::ExecutionTrace& trace,
    std::span<const pddl::Proposition> predicate_order) {
  // Only "eventually successful but required at least one replan"
  // traces carry a usable supervision signal.
  if (trace.outcome != exec::Outcome::success || trace.replan_count == 0) {
    return {};
  }

  const exec::StepRecord* truth_step = final_successful_mate(trace);
  if (truth_step == nullptr) {
    throw MalformedTrace("successful replanned trace has no Mate step");
  }
  const Modality truth_modality = truth_step->pose_estimate->modality;
  const world::Pose ground_truth = truth_step->pose_estimate->estimate;

  std::vector<CorrectionSample> samples;

  // (a) Cross-modal pose correction: every earlier Mate of the other
  // modality gets the ground-truth pose as its corrected label.
  for (const auto& step : trace.steps) {
    if (&step == truth_step) break;
    if (!step.executed || !step.pose_estimate.has_value()) continue;
    if (step.pose_estimate->modality == truth_modality) continue;
    samples.push_back(CorrectionSample::for_pose(
        step.pose_estimate->modality, step.pose_estimate->observation,
        ground_truth));
  }

  // (b) Predicate correction: flip the lowest-confidence neural
  // precondition of the first failed action, then stop.
  const exec::StepRecord* failed = first_failed_action(trace);
  if (failed != nullptr && !failed->pre_readings.empty()) {
    auto rank = [&](const std::string& name) {
      for (std::size_t i = 0; i < predicate_order.size(); ++i) {
        if (predicate_order[i].name == name) return i;
      }
      return predicate_order.size();
    };
    const perception::PredicateReading* lowest = nullptr;
    for (const auto& r : failed->pre_readings) {
      if (lowest == nullptr || r.confidence < lowest->confidence ||
          (r.confidence == lowest->confidence &&
           rank(r.predicate) < rank(lowest->predicate))) {
        lowest = &r;
      }
    }
    samples.push_back(CorrectionSample::for_predicate(
        lowest->predicate, lowest->input_snapshot, !lowest->value));
  }

  return samples;
}

std::pair<exec::PerceptionModels, std::optional<UpdateReport>> maybe_update(
    LearningBuffer& buffer, exec::PerceptionModels models,
    const ValidationSuite& validation, int iteration) {
  UpdateReport report;
  report.iteration = iteration;

  for (auto& [key, samples] : buffer.buckets) {
    if (static_cast<int>(samples.size()) < buffer.trigger_threshold) continue;

    std::vector<CorrectionSample> drained;
    drained.swap(samples);

    const bool is_pose = key.rfind("pose:", 0) == 0;
    const std::string target = key.substr(5);

    if (is_pose) {
      const Modality m = perception::modality_from_string(target);
      perception::PoseEstimator& model =
          m == Modality::vision ? models.vision : models.force;
      if (validation.pose_loss_of) {
        report.pre_loss[key] = validation.pose_loss_of(model);
      }
      for (const auto& s : drained) model = update_pose_model(model, s);
      if (validation.pose_loss_of) {
        report.post_loss[key] = validation.pose_loss_of(model);
      }
    } else {
      auto it = models.classifiers.find(target);
      if (it == models.classifiers.end()) {
        throw std::invalid_argument("buffered samples for unknown classifier '" +
                                    target + "'");
      }
      if (validation.classifier_loss_of) {
        report.pre_loss[key] = validation.classifier_loss_of(it->second);
      }
      for (const auto& s : drained) {
        it->second = update_classifier(it->second, s);
      }
      if (validation.classifier_loss_of) {
        report.post_loss[key] = validation.classifier_loss_of(it->second);
      }
    }

    report.models_updated.push_back(key);
    report.samples_consumed[key] = static_cast<int>(drained.size());
  }

  if (report.models_updated.empty()) {
    return {std::move(models), std::nullopt};
  }
  return {std::move(models), std::move(report)};
}

}  // namespace nstamp::learn
