#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nstamp/world.hpp"

namespace nstamp::perception {

enum class Modality { vision, force };

std::string_view to_string(Modality m);
Modality modality_from_string(std::string_view s);

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Affine pose estimator: pose = W * obs + b with W in R^{4 x d}. The
// default model passes the observation's pose slots straight through,
// which is how an uncalibrated sensor pipeline behaves.
struct PoseEstimator {
  Modality modality = Modality::vision;
  int input_dim = 0;
  std::vector<double> weights;  // row-major, 4 rows x input_dim cols
  std::array<double, 4> bias{};
  double learning_rate = 0.01;

  static PoseEstimator identity(Modality modality, int input_dim,
                                double learning_rate);

  bool operator==(const PoseEstimator&) const = default;
};

// Binary predicate classifier: p1 = sigmoid(w . x + b), p0 = 1 - p1.
struct PredicateClassifier {
  std::string predicate;
  std::vector<double> weights;
  double bias = 0.0;
  double learning_rate = 0.01;

  static PredicateClassifier zero(std::string predicate, int input_dim,
                                  double learning_rate);

  bool operator==(const PredicateClassifier&) const = default;
};

struct PredicateReading {
  std::string predicate;
  bool value = false;
  double confidence = 0.5;  // max(p0, p1), always in [0.5, 1)
  std::vector<double> input_snapshot;
};

// A (input, corrected-label) pair produced by the backward flow.
struct CorrectionSample {
  enum class Kind { pose, predicate };
  Kind kind = Kind::pose;
  std::string target_model;  // modality name or predicate name
  std::vector<double> input;
  std::variant<world::Pose, bool> corrected_label;

  static CorrectionSample for_pose(Modality m, std::vector<double> input,
                                   const world::Pose& label);
  static CorrectionSample for_predicate(std::string predicate,
                                        std::vector<double> input, bool label);
};

world::Pose estimate_pose(const PoseEstimator& model,
                          std::span<const double> obs);

// Half squared Euclidean norm of the pose difference, theta wrapped to
// [-pi, pi) before squaring.
double pose_loss(const world::Pose& estimate, const world::Pose& truth);

// One SGD step on the pose loss; returns the updated model, the input
// model is untouched.
PoseEstimator update_pose_model(const PoseEstimator& model,
                                const CorrectionSample& sample);

PredicateReading classify(const PredicateClassifier& model,
                          std::span<const double> x);

// One SGD step on the binary cross-entropy at the corrected label.
PredicateClassifier update_classifier(const PredicateClassifier& model,
                                      const CorrectionSample& sample);

// Classifier input layout, shared by every predicate:
//   [0] |tool.x - est.x| / insert_tolerance
//   [1] |tool.y - est.y| / insert_tolerance
//   [2] (tool.z - est.z) / hover_height
//   [3] |(tool.z - est.z) / hover_height - 1|, deviation from the
//       nominal mate height (hover facts form a band in z)
//   [4] modality flag (1 vision, 0 force)
//   [5] lighting
//   [6] engagement (force channel; 0 for vision contexts)
//   [7] constant 1
inline constexpr int kFeatureDim = 8;

struct FeatureContext {
  world::Pose tool;      // where the executive believes the tool is
  world::Pose estimate;  // current pose estimate for the sensing modality
  Modality modality = Modality::vision;
  double lighting = 0.0;
  double engagement = 0.0;
  double insert_tolerance = 0.002;
  double hover_height = 0.02;
};

std::vector<double> predicate_features(const FeatureContext& ctx);

}  // namespace nstamp::perception
