#include "coopht/source_model.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace coopht {

namespace {

Pmf derive_py(const JointPmf& px1x2, const CondPmf& py_given_x2) {
  const Pmf px2 = axis_marginal(px1x2, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(py_given_x2.output_size());
  for (int x2 = 0; x2 < px2.size(); ++x2)
    y += px2[x2] * py_given_x2.table().row(x2).transpose();
  return Pmf(std::move(y));
}

}  // namespace

SourceModel::SourceModel(JointPmf px1x2, CondPmf py_given_x2)
    : px1x2_(std::move(px1x2)),
      py_given_x2_(std::move(py_given_x2)),
      py_(derive_py(px1x2_, py_given_x2_)) {
  if (px1x2_.rank() != 2)
    throw usage_error("SourceModel: P(X1,X2) must have exactly two axes");
  if (py_given_x2_.input_size() != px1x2_.axis_sizes()[1])
    throw usage_error("SourceModel: P(Y|X2) rows do not match |X2|");
}

SourceModel binary_example(const BinaryExampleParams& params) {
  if (params.a < 0 || params.a > 1 || params.p < 0 || params.p > 1 ||
      params.q < 0 || params.q > 1)
    throw usage_error("binary_example: parameters must lie in [0,1]");
  const Pmf px1 = Pmf::bernoulli(params.a);
  const CondPmf px2_given_x1 = CondPmf::bsc(params.p);
  Eigen::VectorXd joint(4);
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2)
      joint(x1 * 2 + x2) = px1[x1] * px2_given_x1.at(x1, x2);
  return SourceModel(JointPmf({2, 2}, std::move(joint)),
                     CondPmf::bsc(params.q));
}

JointPmf null_joint(const SourceModel& s) {
  const int nx1 = s.x1_size(), nx2 = s.x2_size(), ny = s.y_size();
  Eigen::VectorXd out(static_cast<long>(nx1) * nx2 * ny);
  int f = 0;
  for (int x1 = 0; x1 < nx1; ++x1)
    for (int x2 = 0; x2 < nx2; ++x2)
      for (int y = 0; y < ny; ++y)
        out(f++) = s.px1x2().probs()(x1 * nx2 + x2) * s.py_given_x2().at(x2, y);
  return JointPmf({nx1, nx2, ny}, std::move(out));
}

JointPmf alt_joint(const SourceModel& s) {
  const int nx1 = s.x1_size(), nx2 = s.x2_size(), ny = s.y_size();
  Eigen::VectorXd out(static_cast<long>(nx1) * nx2 * ny);
  int f = 0;
  for (int x1 = 0; x1 < nx1; ++x1)
    for (int x2 = 0; x2 < nx2; ++x2)
      for (int y = 0; y < ny; ++y)
        out(f++) = s.px1x2().probs()(x1 * nx2 + x2) * s.py()[y];
  return JointPmf({nx1, nx2, ny}, std::move(out));
}

SourceModel parse_source_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error(std::string("source: JSON parse error: ") +
                           e.what());
  }

  const bool has_tables = doc.contains("p_x1x2") || doc.contains("p_y_given_x2") ||
                          doc.contains("alphabet_sizes");
  const bool has_binary = doc.contains("binary_example");
  if (has_tables == has_binary)
    throw validation_error(
        "source: exactly one of table form or binary_example required");

  if (has_binary) {
    const auto& b = doc["binary_example"];
    BinaryExampleParams params;
    params.a = b.at("a").get<double>();
    params.p = b.at("p").get<double>();
    params.q = b.at("q").get<double>();
    return binary_example(params);
  }

  const auto& sizes = doc.at("alphabet_sizes");
  const int nx1 = sizes.at("x1").get<int>();
  const int nx2 = sizes.at("x2").get<int>();
  const int ny = sizes.at("y").get<int>();
  if (nx1 < 1 || nx2 < 1 || ny < 1)
    throw validation_error("source.alphabet_sizes: sizes must be positive");

  const auto& jt = doc.at("p_x1x2");
  if (static_cast<int>(jt.size()) != nx1 * nx2)
    throw validation_error("source.p_x1x2: expected " +
                           std::to_string(nx1 * nx2) + " entries, got " +
                           std::to_string(jt.size()));
  Eigen::VectorXd joint(nx1 * nx2);
  for (int i = 0; i < nx1 * nx2; ++i) joint(i) = jt[i].get<double>();

  const auto& ct = doc.at("p_y_given_x2");
  if (static_cast<int>(ct.size()) != nx2 * ny)
    throw validation_error("source.p_y_given_x2: expected " +
                           std::to_string(nx2 * ny) + " entries, got " +
                           std::to_string(ct.size()));
  Eigen::MatrixXd cond(nx2, ny);
  for (int x2 = 0; x2 < nx2; ++x2)
    for (int y = 0; y < ny; ++y) cond(x2, y) = ct[x2 * ny + y].get<double>();

  try {
    return SourceModel(JointPmf({nx1, nx2}, std::move(joint)),
                       CondPmf(std::move(cond)));
  } catch (const validation_error& e) {
    throw validation_error(std::string("source tables: ") + e.what());
  }
}

SourceModel load_source(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("load_source: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_source_json(ss.str());
}

}  // namespace coopht
