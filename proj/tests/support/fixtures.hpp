// Shared scenario configs for executive/learner/harness tests.
#pragma once

#include "nstamp/executive.hpp"
#include "nstamp/harness.hpp"
#include "nstamp/world.hpp"

namespace test_support {

// No disturbances at all: perfect sensors, constant dark lighting.
inline nstamp::harness::ExperimentConfig quiet_cfg() {
  auto cfg = nstamp::harness::default_config();
  cfg.disturbance.lighting_schedule =
      nstamp::world::LightingSchedule::constant(0.0);
  cfg.disturbance.vision_bias_gain = 0.0;
  cfg.disturbance.vision_noise_std = 0.0;
  cfg.disturbance.force_noise_std = 0.0;
  cfg.disturbance.wear_rate = 0.0;
  return cfg;
}

// Vision bias well beyond the insert tolerance plus nominal sensor
// noise; force exact.
inline nstamp::harness::ExperimentConfig biased_vision_cfg() {
  auto cfg = quiet_cfg();
  cfg.disturbance.lighting_schedule =
      nstamp::world::LightingSchedule::constant(1.0);
  cfg.disturbance.vision_bias_gain = 4.0 * cfg.disturbance.insert_tolerance;
  cfg.disturbance.vision_noise_std = 0.0005;
  return cfg;
}

// Moderate corruption on both modalities: gates mostly pass, inserts
// fail physically, so verification drives the recovery.
inline nstamp::harness::ExperimentConfig flaky_both_cfg() {
  auto cfg = quiet_cfg();
  cfg.disturbance.lighting_schedule =
      nstamp::world::LightingSchedule::constant(1.0);
  cfg.disturbance.vision_bias_gain = 4.0 * cfg.disturbance.insert_tolerance;
  cfg.disturbance.vision_noise_std = 0.001;
  cfg.disturbance.force_noise_std = 0.002;
  return cfg;
}

// Both modalities corrupted far beyond the insert tolerance.
inline nstamp::harness::ExperimentConfig corrupted_cfg() {
  auto cfg = nstamp::harness::default_config();
  cfg.disturbance.lighting_schedule =
      nstamp::world::LightingSchedule::constant(1.0);
  cfg.disturbance.vision_bias_gain = 0.5;
  cfg.disturbance.vision_noise_std = 0.01;
  cfg.disturbance.force_noise_std = 0.5;
  cfg.disturbance.wear_rate = 0.0;
  return cfg;
}

inline nstamp::exec::TaskSpec screw_task(int n_th = 10) {
  nstamp::exec::TaskSpec task;
  task.init = nstamp::pddl::GroundState{"have_coarse_pose"};
  task.goal = {nstamp::pddl::pos("disassembled")};
  task.n_th = n_th;
  return task;
}

struct EpisodeRun {
  nstamp::exec::ExecutionTrace trace;
  nstamp::world::WorldState world;
};

inline EpisodeRun run_episode(const nstamp::harness::ExperimentConfig& cfg,
                              const nstamp::exec::PerceptionModels& models,
                              int episode, int n_th = 10) {
  EpisodeRun run{
      {},
      nstamp::world::new_episode(cfg.disturbance, cfg.workspace, episode,
                                 cfg.seed)};
  run.trace = nstamp::exec::run_task(screw_task(n_th),
                                     nstamp::pddl::disassembly_domain(),
                                     run.world, models);
  return run;
}

}  // namespace test_support
