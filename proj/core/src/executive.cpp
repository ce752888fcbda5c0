#include "nstamp/executive.hpp"

#include <algorithm>
#include <utility>

namespace nstamp::exec {

namespace {

using perception::Modality;

constexpr std::string_view kPatternFlag = "pattern";

bool touches_pattern(const pddl::Literal& lit) {
  return lit.prop.name == kPatternFlag;
}

// Belief update after executing an action. Effects on the pattern flag
// are skipped: the executive owns that flag and flips it only through
// the abnormal-state handler, so a failed attempt hands the next one to
// the other modality.
pddl::GroundState apply_effects_to_belief(const pddl::GroundState& belief,
                                          const pddl::ActionSchema& action) {
  pddl::GroundState next = belief;
  for (const auto& eff : action.effects) {
    if (touches_pattern(eff)) continue;
    next = eff.positive ? next.with(eff.prop) : next.without(eff.prop);
  }
  return next;
}

struct SenseResult {
  std::vector<double> observation;
  world::Pose estimate;
  std::vector<double> features;
};

SenseResult sense_and_estimate(world::WorldState& world,
                               const PerceptionModels& models, Modality m,
                               const world::Pose& tool_belief) {
  SenseResult r;
  r.observation = m == Modality::vision ? world::sense_vision(world)
                                        : world::sense_force(world);
  r.estimate = perception::estimate_pose(models.estimator(m), r.observation);

  perception::FeatureContext ctx;
  ctx.tool = tool_belief;
  ctx.estimate = r.estimate;
  ctx.modality = m;
  ctx.lighting = world.lighting;
  ctx.engagement = m == Modality::force ? r.observation[4] : 0.0;
  ctx.insert_tolerance = world.config.insert_tolerance;
  ctx.hover_height = world.workspace.hover_height;
  r.features = perception::predicate_features(ctx);
  return r;
}

// socketed/disassembled are force-perception facts regardless of which
// modality drove the current plan step.
Modality predicate_check_modality(const std::string& predicate,
                                  Modality context) {
  if (predicate == "socketed" || predicate == "disassembled") {
    return Modality::force;
  }
  return context;
}

Modality context_modality(const pddl::ActionSchema& action,
                          const std::optional<Modality>& last_mate,
                          const pddl::GroundState& belief) {
  if (action.name == world::kMateVision) return Modality::vision;
  if (action.name == world::kMateForce) return Modality::force;
  if (action.name == world::kMove) return Modality::vision;
  if (last_mate.has_value()) return *last_mate;
  return belief.contains(std::string(kPatternFlag)) ? Modality::force
                                                    : Modality::vision;
}

}  // namespace

const perception::PredicateClassifier& PerceptionModels::classifier(
    const std::string& predicate) const {
  auto it = classifiers.find(predicate);
  if (it == classifiers.end()) {
    throw std::invalid_argument("no classifier for neural predicate '" +
                                predicate + "'");
  }
  return it->second;
}

pddl::GroundState abnormal_state_update(const pddl::GroundState& current) {
  pddl::GroundState next = current;
  next = next.without(pddl::Proposition("above_screw"));
  next = next.without(pddl::Proposition("target_aim"));
  next = next.without(pddl::Proposition("socketed"));
  const pddl::Proposition pattern{std::string(kPatternFlag)};
  next = current.contains(pattern) ? next.without(pattern) : next.with(pattern);
  // Force perception is a contact search: without proximity the only
  // viable continuation is Move followed by vision, so the flag falls
  // back to the vision side. (pattern without near_screw is also a dead
  // state under the action schemas: Move asserts above_screw, which
  // blocks Mate_force.)
  if (!next.contains(pddl::Proposition("near_screw"))) {
    next = next.without(pattern);
  }
  return next;
}

pddl::GroundState update_from_readings(
    const pddl::GroundState& state,
    std::span<const perception::PredicateReading> readings) {
  pddl::GroundState next = state;
  for (const auto& r : readings) {
    const pddl::Proposition prop{r.predicate};
    next = r.value ? next.with(prop) : next.without(prop);
  }
  return next;
}

pddl::GroundState check_failure_update(
    const pddl::GroundState& state,
    std::span<const perception::PredicateReading> readings) {
  pddl::GroundState next = update_from_readings(state, readings);
  if (!next.contains(pddl::Proposition("near_screw"))) {
    // re-approach runs vision-first; pattern without near_screw is also
    // a dead state under the action schemas (Move asserts above_screw,
    // which blocks Mate_force)
    next = next.without(pddl::Proposition(std::string(kPatternFlag)));
  }
  return next;
}

VerificationRecord verify_cross_modal(world::WorldState& world,
                                      std::span<const pddl::Literal> expected,
                                      const PerceptionModels& models,
                                      const world::Pose& tool_belief) {
  VerificationRecord ver;
  ver.expected.assign(expected.begin(), expected.end());
  ver.expected_met = true;
  const SenseResult sense =
      sense_and_estimate(world, models, Modality::force, tool_belief);
  for (const auto& lit : expected) {
    auto reading =
        perception::classify(models.classifier(lit.prop.name), sense.features);
    if (reading.value != lit.positive) ver.expected_met = false;
    ver.readings.push_back(std::move(reading));
  }
  return ver;
}

ExecutionTrace run_task(const TaskSpec& task, const pddl::Domain& domain,
                        world::WorldState& world,
                        const PerceptionModels& models) {
  if (task.n_th < 1) throw std::invalid_argument("n_th must be >= 1");

  ExecutionTrace trace;
  trace.task = task;
  trace.episode_index = world.episode_index;

  pddl::GroundState belief = task.init;
  int n = 0;

  auto make_plan = [&](const pddl::GroundState& from) {
    auto p = pddl::plan(from, task.goal, domain.actions);
    if (!p.has_value()) {
      throw PlanningFailure("no plan from the current symbolic state");
    }
    return *p;
  };

  pddl::Plan current_plan = make_plan(belief);
  std::size_t step_idx = 0;

  world::Pose tool_belief = world.workspace.home;  // encoder-side tool pose
  std::optional<Modality> last_mate;
  double descend_z = world.workspace.home.z - world.workspace.hover_height;

  // reset_on_noplan: readings can fold into a belief no schema applies
  // to (e.g. aimed but not hovering); the abnormal reset un-wedges it.
  auto replan = [&](pddl::GroundState next_belief, StepRecord&& rec,
                    bool reset_on_noplan) {
    // Abort reflex: pull the tool back above the work area so the next
    // attempt starts from a clean approach. Without this the old tool
    // position keeps reading as aimed/above and blocks every Mate.
    const world::Pose retract{tool_belief.x, tool_belief.y,
                              descend_z + 2.5 * world.workspace.hover_height,
                              tool_belief.theta};
    world = world::execute_primitive(world, world::kMove, retract).first;
    tool_belief = retract;

    rec.triggered_replan = true;
    ++n;
    if (n < task.n_th) {
      auto p = pddl::plan(next_belief, task.goal, domain.actions);
      if (!p.has_value() && reset_on_noplan) {
        next_belief = abnormal_state_update(next_belief);
        p = pddl::plan(next_belief, task.goal, domain.actions);
      }
      if (!p.has_value()) {
        throw PlanningFailure("no plan from the current symbolic state");
      }
      current_plan = std::move(*p);
      step_idx = 0;
    }
    rec.state_after = next_belief;
    trace.steps.push_back(std::move(rec));
    belief = std::move(next_belief);
  };

  while (true) {
    if (world.disassembled) {
      trace.outcome = Outcome::success;
      break;
    }
    if (n >= task.n_th) {
      trace.outcome = Outcome::failure;
      break;
    }

    if (step_idx >= current_plan.steps.size()) {
      // The belief says the goal holds but the world disagrees: run the
      // terminal check, correct the belief from it, and replan.
      StepRecord rec;
      rec.primitive = std::string(kGoalCheck);
      rec.state_before = belief;
      rec.verification =
          verify_cross_modal(world, task.goal, models, tool_belief);
      pddl::GroundState next =
          update_from_readings(belief, rec.verification->readings);
      replan(abnormal_state_update(next), std::move(rec), false);
      continue;
    }

    const pddl::ActionSchema* action =
        domain.find_action(current_plan.steps[step_idx]);
    if (action == nullptr) {
      throw pddl::UnknownAction("plan step '" + current_plan.steps[step_idx] +
                                "' not in domain");
    }

    StepRecord rec;
    rec.primitive = action->name;
    rec.state_before = belief;

    // Precondition check: neural predicates via fresh sensing, symbolic
    // flags against the belief state.
    const Modality ctx_mod = context_modality(*action, last_mate, belief);
    std::map<Modality, SenseResult> senses;
    bool pre_ok = true;
    for (const auto& lit : action->preconditions) {
      if (!models.is_neural(lit.prop.name)) {
        if (belief.contains(lit.prop) != lit.positive) pre_ok = false;
        continue;
      }
      const Modality m = predicate_check_modality(lit.prop.name, ctx_mod);
      auto it = senses.find(m);
      if (it == senses.end()) {
        it = senses.emplace(m, sense_and_estimate(world, models, m, tool_belief))
                 .first;
      }
      auto reading = perception::classify(models.classifier(lit.prop.name),
                                          it->second.features);
      if (reading.value != lit.positive) pre_ok = false;
      rec.pre_readings.push_back(std::move(reading));
    }

    if (!pre_ok) {
      // A failed check corrects the belief from the readings and replans
      // from there; the modality flag only flips on verification
      // failures. A typical outcome is a fresh Mate with the same
      // modality, which re-approaches and re-aims the tool.
      rec.executed = false;
      replan(check_failure_update(belief, rec.pre_readings), std::move(rec),
             true);
      continue;
    }

    // The readings passed, so folding them into the belief keeps the
    // executed action's preconditions satisfied there as well.
    belief = update_from_readings(belief, rec.pre_readings);

    // Execute the primitive.
    std::optional<world::Pose> commanded;
    if (action->name == world::kMove) {
      commanded = world::sample_coarse_pose(world);
    } else if (action->name == world::kMateVision ||
               action->name == world::kMateForce) {
      const Modality m = action->name == world::kMateVision ? Modality::vision
                                                            : Modality::force;
      SenseResult sense = sense_and_estimate(world, models, m, tool_belief);
      rec.pose_estimate = PoseEstimateRecord{m, sense.observation, sense.estimate};
      commanded = world::Pose{sense.estimate.x, sense.estimate.y,
                              sense.estimate.z + world.workspace.hover_height,
                              sense.estimate.theta};
      descend_z = sense.estimate.z;
      last_mate = m;
    } else if (action->name == world::kInsert) {
      commanded = world::Pose{tool_belief.x, tool_belief.y, descend_z,
                              tool_belief.theta};
    }

    // The executive never sees PrimitiveOutcome: success or failure of
    // the physical attempt only reaches it through verification.
    world = world::execute_primitive(world, action->name, commanded).first;
    if (commanded.has_value()) tool_belief = *commanded;

    rec.executed = true;
    belief = apply_effects_to_belief(belief, *action);

    // Cross-modal verification after the critical action and the final
    // Disassemble.
    std::vector<pddl::Literal> expected;
    if (action->name == world::kInsert) {
      expected = {pddl::pos("socketed")};
    } else if (action->name == world::kDisassemble) {
      expected = {pddl::pos("disassembled")};
    }
    if (!expected.empty()) {
      rec.verification =
          verify_cross_modal(world, expected, models, tool_belief);
      if (!rec.verification->expected_met) {
        pddl::GroundState next =
            update_from_readings(belief, rec.verification->readings);
        replan(abnormal_state_update(next), std::move(rec), false);
        continue;
      }
    }

    rec.state_after = belief;
    trace.steps.push_back(std::move(rec));
    ++step_idx;
  }

  trace.replan_count = n;
  if (trace.outcome == Outcome::success) {
    for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
      if (it->executed && it->pose_estimate.has_value()) {
        trace.final_pose_truth_source = it->pose_estimate->modality;
        break;
      }
    }
  }
  return trace;
}

}  // namespace nstamp::exec
