#include "nstamp/perception.hpp"

#include <algorithm>
#include <cmath>

namespace nstamp::perception {

namespace {

// Logits are clamped so both class probabilities stay strictly inside
// (0, 1) in double precision.
constexpr double kLogitClamp = 30.0;

double sigmoid(double z) {
  z = std::clamp(z, -kLogitClamp, kLogitClamp);
  return 1.0 / (1.0 + std::exp(-z));
}

void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionMismatch(std::string(what) + ": expected " +
                            std::to_string(expected) + " inputs, got " +
                            std::to_string(got));
  }
}

}  // namespace

std::string_view to_string(Modality m) {
  return m == Modality::vision ? "vision" : "force";
}

Modality modality_from_string(std::string_view s) {
  if (s == "vision") return Modality::vision;
  if (s == "force") return Modality::force;
  throw std::invalid_argument("unknown modality '" + std::string(s) + "'");
}

PoseEstimator PoseEstimator::identity(Modality modality, int input_dim,
                                      double learning_rate) {
  if (input_dim < 4) {
    throw std::invalid_argument("pose estimator needs at least 4 inputs");
  }
  PoseEstimator m;
  m.modality = modality;
  m.input_dim = input_dim;
  m.learning_rate = learning_rate;
  m.weights.assign(static_cast<std::size_t>(4 * input_dim), 0.0);
  for (int row = 0; row < 4; ++row) {
    m.weights[static_cast<std::size_t>(row * input_dim + row)] = 1.0;
  }
  return m;
}

PredicateClassifier PredicateClassifier::zero(std::string predicate,
                                              int input_dim,
                                              double learning_rate) {
  PredicateClassifier c;
  c.predicate = std::move(predicate);
  c.weights.assign(static_cast<std::size_t>(input_dim), 0.0);
  c.learning_rate = learning_rate;
  return c;
}

CorrectionSample CorrectionSample::for_pose(Modality m,
                                            std::vector<double> input,
                                            const world::Pose& label) {
  CorrectionSample s;
  s.kind = Kind::pose;
  s.target_model = std::string(to_string(m));
  s.input = std::move(input);
  s.corrected_label = label;
  return s;
}

CorrectionSample CorrectionSample::for_predicate(std::string predicate,
                                                 std::vector<double> input,
                                                 bool label) {
  CorrectionSample s;
  s.kind = Kind::predicate;
  s.target_model = std::move(predicate);
  s.input = std::move(input);
  s.corrected_label = label;
  return s;
}

world::Pose estimate_pose(const PoseEstimator& model,
                          std::span<const double> obs) {
  check_dim(static_cast<std::size_t>(model.input_dim), obs.size(),
            "estimate_pose");
  std::array<double, 4> out = model.bias;
  for (int row = 0; row < 4; ++row) {
    const double* w = model.weights.data() + row * model.input_dim;
    for (int col = 0; col < model.input_dim; ++col) {
      out[static_cast<std::size_t>(row)] += w[col] * obs[static_cast<std::size_t>(col)];
    }
  }
  return world::normalized({out[0], out[1], out[2], out[3]});
}

double pose_loss(const world::Pose& estimate, const world::Pose& truth) {
  const double dx = estimate.x - truth.x;
  const double dy = estimate.y - truth.y;
  const double dz = estimate.z - truth.z;
  const double dt = world::wrap_angle(estimate.theta - truth.theta);
  return 0.5 * (dx * dx + dy * dy + dz * dz + dt * dt);
}

PoseEstimator update_pose_model(const PoseEstimator& model,
                                const CorrectionSample& sample) {
  if (sample.kind != CorrectionSample::Kind::pose) {
    throw std::invalid_argument("update_pose_model needs a pose sample");
  }
  check_dim(static_cast<std::size_t>(model.input_dim), sample.input.size(),
            "update_pose_model");
  const auto& truth = std::get<world::Pose>(sample.corrected_label);
  const world::Pose est = estimate_pose(model, sample.input);

  // dL/d(est) is the wrapped residual; wrapping has unit slope wherever
  // it is differentiable.
  const std::array<double, 4> residual{
      est.x - truth.x, est.y - truth.y, est.z - truth.z,
      world::wrap_angle(est.theta - truth.theta)};

  PoseEstimator next = model;
  for (int row = 0; row < 4; ++row) {
    const double r = residual[static_cast<std::size_t>(row)];
    double* w = next.weights.data() + row * model.input_dim;
    for (int col = 0; col < model.input_dim; ++col) {
      w[col] -= model.learning_rate * r * sample.input[static_cast<std::size_t>(col)];
    }
    next.bias[static_cast<std::size_t>(row)] -= model.learning_rate * r;
  }
  return next;
}

PredicateReading classify(const PredicateClassifier& model,
                          std::span<const double> x) {
  check_dim(model.weights.size(), x.size(), "classify");
  double z = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += model.weights[i] * x[i];
  const double p1 = sigmoid(z);
  const double p0 = 1.0 - p1;

  PredicateReading reading;
  reading.predicate = model.predicate;
  reading.value = p1 > p0;  // argmax; exact tie resolves to false
  reading.confidence = std::max(p0, p1);
  reading.input_snapshot.assign(x.begin(), x.end());
  return reading;
}

PredicateClassifier update_classifier(const PredicateClassifier& model,
                                      const CorrectionSample& sample) {
  if (sample.kind != CorrectionSample::Kind::predicate) {
    throw std::invalid_argument("update_classifier needs a predicate sample");
  }
  check_dim(model.weights.size(), sample.input.size(), "update_classifier");
  const double label = std::get<bool>(sample.corrected_label) ? 1.0 : 0.0;

  double z = model.bias;
  for (std::size_t i = 0; i < sample.input.size(); ++i) {
    z += model.weights[i] * sample.input[i];
  }
  const double grad = sigmoid(z) - label;  // d(cross-entropy)/d(logit)

  PredicateClassifier next = model;
  for (std::size_t i = 0; i < sample.input.size(); ++i) {
    next.weights[i] -= model.learning_rate * grad * sample.input[i];
  }
  next.bias -= model.learning_rate * grad;
  return next;
}

std::vector<double> predicate_features(const FeatureContext& ctx) {
  std::vector<double> f(kFeatureDim);
  f[0] = std::abs(ctx.tool.x - ctx.estimate.x) / ctx.insert_tolerance;
  f[1] = std::abs(ctx.tool.y - ctx.estimate.y) / ctx.insert_tolerance;
  f[2] = (ctx.tool.z - ctx.estimate.z) / ctx.hover_height;
  f[3] = std::abs(f[2] - 1.0);
  f[4] = ctx.modality == Modality::vision ? 1.0 : 0.0;
  f[5] = ctx.lighting;
  f[6] = ctx.engagement;
  f[7] = 1.0;
  return f;
}

}  // namespace nstamp::perception
