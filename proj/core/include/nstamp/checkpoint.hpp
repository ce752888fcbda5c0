#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "nstamp/perception.hpp"

namespace nstamp::checkpoint {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat-text model checkpoints, one value per whitespace-separated token,
// printed with enough digits to round-trip doubles exactly:
//
//   nstamp-pose-model 1
//   <modality> <input_dim> <learning_rate>
//   <row 0 of W> ... <row 3 of W>
//   <bias[0..3]>
//
//   nstamp-classifier 1
//   <predicate> <input_dim> <learning_rate>
//   <weights>
//   <bias>
void write_pose_model(std::ostream& os, const perception::PoseEstimator& m);
perception::PoseEstimator read_pose_model(std::istream& is);

void write_classifier(std::ostream& os, const perception::PredicateClassifier& m);
perception::PredicateClassifier read_classifier(std::istream& is);

void save_pose_model(const std::string& path, const perception::PoseEstimator& m);
perception::PoseEstimator load_pose_model(const std::string& path);

void save_classifier(const std::string& path,
                     const perception::PredicateClassifier& m);
perception::PredicateClassifier load_classifier(const std::string& path);

}  // namespace nstamp::checkpoint
