#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nstamp/pddl.hpp"
#include "nstamp/perception.hpp"
#include "nstamp/world.hpp"

namespace nstamp::exec {

struct TaskSpec {
  pddl::GroundState init;
  std::vector<pddl::Literal> goal;
  int n_th = 10;  // replans at or beyond this count fail the task
};

// The perception stack the executive runs against: one pose estimator
// per modality, one classifier per neural predicate, and the split that
// says which propositions are sensed versus tracked symbolically.
struct PerceptionModels {
  perception::PoseEstimator vision;
  perception::PoseEstimator force;
  std::map<std::string, perception::PredicateClassifier> classifiers;
  std::set<std::string> neural_predicates;

  bool is_neural(const std::string& predicate) const {
    return neural_predicates.count(predicate) > 0;
  }
  const perception::PoseEstimator& estimator(perception::Modality m) const {
    return m == perception::Modality::vision ? vision : force;
  }
  const perception::PredicateClassifier& classifier(
      const std::string& predicate) const;

  bool operator==(const PerceptionModels&) const = default;
};

struct PoseEstimateRecord {
  perception::Modality modality = perception::Modality::vision;
  std::vector<double> observation;
  world::Pose estimate;
};

struct VerificationRecord {
  std::vector<pddl::Literal> expected;
  std::vector<perception::PredicateReading> readings;
  bool expected_met = false;
};

struct StepRecord {
  std::string primitive;
  bool executed = false;         // false: the precondition check rejected it
  bool triggered_replan = false;
  std::vector<perception::PredicateReading> pre_readings;
  std::optional<PoseEstimateRecord> pose_estimate;  // Mate steps only
  std::optional<VerificationRecord> verification;   // Insert / terminal checks
  pddl::GroundState state_before;
  pddl::GroundState state_after;
};

enum class Outcome { success, failure };

struct ExecutionTrace {
  TaskSpec task;
  std::vector<StepRecord> steps;
  int replan_count = 0;
  Outcome outcome = Outcome::failure;
  std::optional<perception::Modality> final_pose_truth_source;
  int episode_index = 0;
};

struct PlanningFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pseudo-primitive recorded when the plan ran out while the world still
// reports an unmet goal; carries the terminal verification.
inline constexpr std::string_view kGoalCheck = "goal_check";

// Runs one task to success or replan exhaustion. Owns the world for the
// duration of the episode; every check, execution, verification, and
// replan is appended to the returned trace.
ExecutionTrace run_task(const TaskSpec& task, const pddl::Domain& domain,
                        world::WorldState& world,
                        const PerceptionModels& models);

// Cross-modal verification: senses force, classifies each expected
// literal's predicate on the force-derived features, and reports
// whether every expectation is met.
VerificationRecord verify_cross_modal(world::WorldState& world,
                                      std::span<const pddl::Literal> expected,
                                      const PerceptionModels& models,
                                      const world::Pose& tool_belief);

// Replan start state after an abnormal event: proximity facts
// (have_coarse_pose, near_screw) are kept, alignment and socket facts
// (above_screw, target_aim, socketed) are cleared, and the pattern flag
// is toggled so the planner switches perception modality.
pddl::GroundState abnormal_state_update(const pddl::GroundState& current);

// Applies readings onto the symbolic state: each read predicate becomes
// exactly its read value.
pddl::GroundState update_from_readings(
    const pddl::GroundState& state,
    std::span<const perception::PredicateReading> readings);

// Replan start state after a precondition-check failure: the belief is
// corrected from the readings and the modality flag is left alone, so
// the planner typically retries the same modality with fresh sensing.
// Losing proximity additionally resets the flag to the vision side.
pddl::GroundState check_failure_update(
    const pddl::GroundState& state,
    std::span<const perception::PredicateReading> readings);

}  // namespace nstamp::exec
