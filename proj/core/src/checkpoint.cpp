#include "nstamp/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nstamp::checkpoint {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void expect_header(std::istream& is, const std::string& magic) {
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != magic || version != 1) {
    throw FormatError("bad checkpoint header, expected '" + magic + " 1'");
  }
}

double read_value(std::istream& is, const char* what) {
  double v = 0.0;
  if (!(is >> v)) {
    throw FormatError(std::string("truncated checkpoint while reading ") + what);
  }
  return v;
}

template <typename WriteFn>
void save_file(const std::string& path, WriteFn&& write) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  write(os);
  if (!os) throw FormatError("write to '" + path + "' failed");
}

template <typename ReadFn>
auto load_file(const std::string& path, ReadFn&& read) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return read(is);
}

}  // namespace

void write_pose_model(std::ostream& os, const perception::PoseEstimator& m) {
  os << "nstamp-pose-model 1\n";
  os << perception::to_string(m.modality) << ' ' << m.input_dim << ' '
     << fmt(m.learning_rate) << '\n';
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < m.input_dim; ++col) {
      os << (col ? " " : "") << fmt(m.weights[static_cast<std::size_t>(row * m.input_dim + col)]);
    }
    os << '\n';
  }
  for (int i = 0; i < 4; ++i) {
    os << (i ? " " : "") << fmt(m.bias[static_cast<std::size_t>(i)]);
  }
  os << '\n';
}

perception::PoseEstimator read_pose_model(std::istream& is) {
  expect_header(is, "nstamp-pose-model");
  perception::PoseEstimator m;
  std::string modality;
  if (!(is >> modality >> m.input_dim >> m.learning_rate) || m.input_dim < 4) {
    throw FormatError("bad pose-model metadata line");
  }
  m.modality = perception::modality_from_string(modality);
  m.weights.resize(static_cast<std::size_t>(4 * m.input_dim));
  for (auto& w : m.weights) w = read_value(is, "weights");
  for (auto& b : m.bias) b = read_value(is, "bias");
  return m;
}

void write_classifier(std::ostream& os,
                      const perception::PredicateClassifier& m) {
  os << "nstamp-classifier 1\n";
  os << m.predicate << ' ' << m.weights.size() << ' ' << fmt(m.learning_rate)
     << '\n';
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    os << (i ? " " : "") << fmt(m.weights[i]);
  }
  os << '\n' << fmt(m.bias) << '\n';
}

perception::PredicateClassifier read_classifier(std::istream& is) {
  expect_header(is, "nstamp-classifier");
  perception::PredicateClassifier m;
  std::size_t dim = 0;
  if (!(is >> m.predicate >> dim >> m.learning_rate)) {
    throw FormatError("bad classifier metadata line");
  }
  m.weights.resize(dim);
  for (auto& w : m.weights) w = read_value(is, "weights");
  m.bias = read_value(is, "bias");
  return m;
}

void save_pose_model(const std::string& path,
                     const perception::PoseEstimator& m) {
  save_file(path, [&](std::ostream& os) { write_pose_model(os, m); });
}

perception::PoseEstimator load_pose_model(const std::string& path) {
  return load_file(path, [](std::istream& is) { return read_pose_model(is); });
}

void save_classifier(const std::string& path,
                     const perception::PredicateClassifier& m) {
  save_file(path, [&](std::ostream& os) { write_classifier(os, m); });
}

perception::PredicateClassifier load_classifier(const std::string& path) {
  return load_file(path, [](std::istream& is) { return read_classifier(is); });
}

}  // namespace nstamp::checkpoint
