#include <benchmark/benchmark.h>

#include "nstamp/perception.hpp"
#include "nstamp/rng.hpp"

namespace {

using namespace nstamp::perception;

void BM_Classify(benchmark::State& state) {
  nstamp::rng::Stream s(1);
  PredicateClassifier c = PredicateClassifier::zero("target_aim", kFeatureDim, 0.01);
  for (auto& w : c.weights) w = s.next_gaussian();
  std::vector<double> x(kFeatureDim);
  for (auto& v : x) v = s.next_gaussian();
  for (auto _ : state) {
    auto r = classify(c, x);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_Classify);

void BM_UpdateClassifier(benchmark::State& state) {
  nstamp::rng::Stream s(2);
  PredicateClassifier c = PredicateClassifier::zero("target_aim", kFeatureDim, 0.01);
  std::vector<double> x(kFeatureDim);
  for (auto& v : x) v = s.next_gaussian();
  const auto sample = CorrectionSample::for_predicate("target_aim", x, true);
  for (auto _ : state) {
    c = update_classifier(c, sample);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_UpdateClassifier);

void BM_UpdatePoseModel(benchmark::State& state) {
  nstamp::rng::Stream s(3);
  PoseEstimator m = PoseEstimator::identity(Modality::vision, 5, 0.01);
  std::vector<double> obs(5);
  for (auto& v : obs) v = s.next_gaussian();
  const auto sample = CorrectionSample::for_pose(
      Modality::vision, obs, nstamp::world::Pose{0.1, 0.2, 0.0, 0.3});
  for (auto _ : state) {
    m = update_pose_model(m, sample);
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_UpdatePoseModel);

}  // namespace
