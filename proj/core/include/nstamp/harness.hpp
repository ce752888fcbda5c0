#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nstamp/executive.hpp"
#include "nstamp/learner.hpp"
#include "nstamp/metrics.hpp"
#include "nstamp/world.hpp"

namespace nstamp::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Classifier calibration performed once before the first iteration: a
// synthetic nominal-rig dataset (no lighting bias, rig-known ground
// truth) fitted by full-batch gradient descent. This stands in for the
// pre-trained perception networks a deployed system starts from; the
// continual-learning loop only ever refines it.
struct BootstrapConfig {
  int samples_per_predicate = 900;
  int epochs = 1200;
  double learning_rate = 0.5;
  double l2 = 1e-6;
  // Sensor noise floor of the calibration rig. Scenes are sensed with at
  // least this much noise even when the deployment config is noise-free,
  // which keeps the learned boundaries honestly soft.
  double rig_noise_std = 0.001;
};

struct ExperimentConfig {
  uint64_t seed = 42;
  std::vector<int> episodes_per_iteration{131, 162, 62, 39};
  int n_th = 10;
  int trigger_threshold = 75;
  double learning_rate = 0.01;             // pose-estimator SGD step
  double classifier_learning_rate = 0.001; // predicate-classifier SGD step
  std::string output_dir = "out";
  bool log_steps = true;
  std::set<std::string> neural_predicates{
      "near_screw", "above_screw", "target_aim", "socketed", "disassembled"};
  world::DisturbanceConfig disturbance;
  world::Workspace workspace;
  BootstrapConfig bootstrap;
};

ExperimentConfig default_config();

// Loads a config from a JSON file; the literal name "default" yields the
// built-in defaults. Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path_or_default);
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);

// Identity pose estimators plus bootstrap-calibrated classifiers,
// deterministic in config.seed.
exec::PerceptionModels bootstrap_models(const ExperimentConfig& config);

// Held-out synthetic validation for maybe_update reports: 200 pose
// observation/truth pairs under the configured disturbances and 200
// labeled classifier scenes, regenerated per update round from a
// reserved stream.
learn::ValidationSuite make_validation_suite(const ExperimentConfig& config,
                                             int update_round);

// Mean pose loss of an estimator over held-out pairs drawn at the given
// lighting level (used by reports and the evaluation tooling).
double held_out_pose_loss(const perception::PoseEstimator& model,
                          const ExperimentConfig& config, double lighting,
                          rng::Stream stream, int pairs);

// Root-mean-square 4-vector pose error over held-out pairs.
double held_out_pose_rmse(const perception::PoseEstimator& model,
                          const ExperimentConfig& config, double lighting,
                          rng::Stream stream, int pairs);

struct ExperimentResult {
  std::vector<metrics::IterationResult> iterations;
  std::vector<learn::UpdateReport> updates;
};

// Runs the full experiment: seeded episodes through the forward flow,
// every trace through the backward flow, buffered updates between
// episodes, metrics per iteration. Writes results.csv, events.jsonl and
// per-iteration model checkpoints under config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

// As above but with redirected streams (no filesystem side effects);
// used by tests and the determinism checks.
ExperimentResult run_experiment_streams(const ExperimentConfig& config,
                                        std::ostream& results_csv,
                                        std::ostream* events_jsonl);

std::string results_csv_text(const std::vector<metrics::IterationResult>& it);

}  // namespace nstamp::harness
