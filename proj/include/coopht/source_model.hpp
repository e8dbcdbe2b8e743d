#pragma once

#include "coopht/probability.hpp"

#include <string>

namespace coopht {

struct BinaryExampleParams {
  double a = 0.5;  // P(X1 = 1)
  double p = 0.5;  // flip probability X1 -> X2
  double q = 0.5;  // flip probability X2 -> Y
};

/// Hypothesis pair: under the null, (X1,X2,Y) ~ P(X1,X2) P(Y|X2); under the
/// alternative Y is drawn independently from its null marginal.
class SourceModel {
 public:
  SourceModel(JointPmf px1x2, CondPmf py_given_x2);

  const JointPmf& px1x2() const { return px1x2_; }
  const CondPmf& py_given_x2() const { return py_given_x2_; }
  const Pmf& py() const { return py_; }
  int x1_size() const { return px1x2_.axis_sizes()[0]; }
  int x2_size() const { return px1x2_.axis_sizes()[1]; }
  int y_size() const { return py_given_x2_.output_size(); }

 private:
  JointPmf px1x2_;
  CondPmf py_given_x2_;
  Pmf py_;
};

SourceModel binary_example(const BinaryExampleParams& params);

JointPmf null_joint(const SourceModel& s);  // axes (X1, X2, Y)
JointPmf alt_joint(const SourceModel& s);

/// Parses the JSON source description (either explicit tables or a
/// binary_example block). Throws validation_error / usage_error with the
/// offending field named.
SourceModel load_source(const std::string& path);
SourceModel parse_source_json(const std::string& text);

}  // namespace coopht
