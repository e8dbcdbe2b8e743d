#include "coopht/probability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace coopht {

namespace {

void check_distribution(const Eigen::VectorXd& v, const char* what) {
  if (v.size() < 1) throw usage_error(std::string(what) + ": empty support");
  if ((v.array() < 0.0).any())
    throw validation_error(std::string(what) + ": negative entry");
  const double sum = v.sum();
  if (std::abs(sum - 1.0) > kProbTol)
    throw validation_error(std::string(what) + ": entries sum to " +
                           std::to_string(sum) + ", expected 1");
}

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

void check_axes(const JointPmf& j, const std::vector<int>& axes,
                const char* what) {
  if (axes.empty()) throw usage_error(std::string(what) + ": empty axis set");
  for (int a : axes) {
    if (a < 0 || a >= j.rank())
      throw usage_error(std::string(what) + ": axis " + std::to_string(a) +
                        " out of range");
  }
}

void check_disjoint(const std::vector<int>& a, const std::vector<int>& b) {
  for (int x : a)
    for (int y : b)
      if (x == y)
        throw usage_error("axis groups overlap at axis " + std::to_string(x));
}

int group_size(const JointPmf& j, const std::vector<int>& axes) {
  int s = 1;
  for (int a : axes) s *= j.axis_sizes()[a];
  return s;
}

int group_index(const std::vector<int>& axes, std::span<const int> idx,
                const JointPmf& j) {
  int g = 0;
  for (int a : axes) g = g * j.axis_sizes()[a] + idx[a];
  return g;
}

}  // namespace

Pmf::Pmf(Eigen::VectorXd probs) : p_(std::move(probs)) {
  check_distribution(p_, "Pmf");
  p_ /= p_.sum();  // remove sub-tolerance drift
}

Pmf Pmf::uniform(int size) {
  if (size < 1) throw usage_error("Pmf::uniform: size < 1");
  return Pmf(Eigen::VectorXd::Constant(size, 1.0 / size));
}

Pmf Pmf::point_mass(int size, int index) {
  if (size < 1 || index < 0 || index >= size)
    throw usage_error("Pmf::point_mass: bad index");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  v(index) = 1.0;
  return Pmf(std::move(v));
}

Pmf Pmf::bernoulli(double p) {
  if (p < 0.0 || p > 1.0) throw usage_error("Pmf::bernoulli: p outside [0,1]");
  Eigen::VectorXd v(2);
  v << 1.0 - p, p;
  return Pmf(std::move(v));
}

CondPmf::CondPmf(Eigen::MatrixXd rows) : t_(std::move(rows)) {
  if (t_.rows() < 1 || t_.cols() < 1)
    throw usage_error("CondPmf: empty table");
  for (Eigen::Index i = 0; i < t_.rows(); ++i) {
    check_distribution(t_.row(i).transpose(), "CondPmf row");
    t_.row(i) /= t_.row(i).sum();
  }
}

CondPmf CondPmf::identity(int size) {
  return CondPmf(Eigen::MatrixXd::Identity(size, size));
}

CondPmf CondPmf::uniform(int input_size, int output_size) {
  return CondPmf(
      Eigen::MatrixXd::Constant(input_size, output_size, 1.0 / output_size));
}

CondPmf CondPmf::constant(const Pmf& out, int input_size) {
  Eigen::MatrixXd t(input_size, out.size());
  for (int i = 0; i < input_size; ++i) t.row(i) = out.probs().transpose();
  return CondPmf(std::move(t));
}

CondPmf CondPmf::bsc(double crossover) {
  if (crossover < 0.0 || crossover > 1.0)
    throw usage_error("CondPmf::bsc: crossover outside [0,1]");
  Eigen::MatrixXd t(2, 2);
  t << 1.0 - crossover, crossover, crossover, 1.0 - crossover;
  return CondPmf(std::move(t));
}

JointPmf::JointPmf(std::vector<int> axis_sizes, Eigen::VectorXd probs)
    : sizes_(std::move(axis_sizes)), p_(std::move(probs)) {
  if (sizes_.empty()) throw usage_error("JointPmf: no axes");
  long total = 1;
  for (int s : sizes_) {
    if (s < 1) throw usage_error("JointPmf: axis size < 1");
    total *= s;
  }
  if (total != p_.size())
    throw usage_error("JointPmf: table size does not match axis sizes");
  check_distribution(p_, "JointPmf");
  p_ /= p_.sum();
}

JointPmf JointPmf::from_pmf(const Pmf& p) {
  return JointPmf({p.size()}, p.probs());
}

JointPmf JointPmf::product(const Pmf& a, const Pmf& b) {
  Eigen::VectorXd v(a.size() * b.size());
  for (int i = 0; i < a.size(); ++i)
    for (int k = 0; k < b.size(); ++k) v(i * b.size() + k) = a[i] * b[k];
  return JointPmf({a.size(), b.size()}, std::move(v));
}

int JointPmf::flat_index(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != rank())
    throw usage_error("JointPmf: index rank mismatch");
  int f = 0;
  for (int a = 0; a < rank(); ++a) {
    if (idx[a] < 0 || idx[a] >= sizes_[a])
      throw usage_error("JointPmf: index out of range");
    f = f * sizes_[a] + idx[a];
  }
  return f;
}

void JointPmf::unflatten(int flat, std::span<int> idx) const {
  for (int a = rank() - 1; a >= 0; --a) {
    idx[a] = flat % sizes_[a];
    flat /= sizes_[a];
  }
}

double entropy(const Pmf& p) {
  double h = 0.0;
  for (int i = 0; i < p.size(); ++i) h -= xlog2x(p[i]);
  return std::max(h, 0.0);
}

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0)
    throw usage_error("binary_entropy: argument outside [0,1]");
  return -xlog2x(p) - xlog2x(1.0 - p);
}

JointPmf marginalize(const JointPmf& j, const std::vector<int>& keep_axes) {
  check_axes(j, keep_axes, "marginalize");
  std::vector<int> sorted = keep_axes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw usage_error("marginalize: repeated axis");

  std::vector<int> out_sizes;
  out_sizes.reserve(sorted.size());
  for (int a : sorted) out_sizes.push_back(j.axis_sizes()[a]);

  int out_total = 1;
  for (int s : out_sizes) out_total *= s;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_total);

  std::vector<int> idx(j.rank());
  for (int f = 0; f < j.total_size(); ++f) {
    j.unflatten(f, idx);
    int g = 0;
    for (size_t k = 0; k < sorted.size(); ++k)
      g = g * out_sizes[k] + idx[sorted[k]];
    out(g) += j.probs()(f);
  }
  return JointPmf(std::move(out_sizes), std::move(out));
}

Pmf axis_marginal(const JointPmf& j, int axis) {
  JointPmf m = marginalize(j, {axis});
  return Pmf(m.probs());
}

double mutual_information(const JointPmf& j, const std::vector<int>& group_a,
                          const std::vector<int>& group_b) {
  check_axes(j, group_a, "mutual_information");
  check_axes(j, group_b, "mutual_information");
  check_disjoint(group_a, group_b);

  const int na = group_size(j, group_a);
  const int nb = group_size(j, group_b);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(na, nb);
  std::vector<int> idx(j.rank());
  for (int f = 0; f < j.total_size(); ++f) {
    j.unflatten(f, idx);
    q(group_index(group_a, idx, j), group_index(group_b, idx, j)) +=
        j.probs()(f);
  }
  const Eigen::VectorXd qa = q.rowwise().sum();
  const Eigen::VectorXd qb = q.colwise().sum();
  double mi = 0.0;
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b)
      if (q(a, b) > 0.0) mi += q(a, b) * std::log2(q(a, b) / (qa(a) * qb(b)));
  return std::max(mi, 0.0);
}

double conditional_mutual_information(const JointPmf& j,
                                      const std::vector<int>& group_a,
                                      const std::vector<int>& group_b,
                                      const std::vector<int>& group_c) {
  check_axes(j, group_a, "conditional_mutual_information");
  check_axes(j, group_b, "conditional_mutual_information");
  check_axes(j, group_c, "conditional_mutual_information");
  check_disjoint(group_a, group_b);
  check_disjoint(group_a, group_c);
  check_disjoint(group_b, group_c);

  const int na = group_size(j, group_a);
  const int nb = group_size(j, group_b);
  const int nc = group_size(j, group_c);
  std::vector<double> q(static_cast<size_t>(na) * nb * nc, 0.0);
  std::vector<int> idx(j.rank());
  for (int f = 0; f < j.total_size(); ++f) {
    j.unflatten(f, idx);
    const int a = group_index(group_a, idx, j);
    const int b = group_index(group_b, idx, j);
    const int c = group_index(group_c, idx, j);
    q[(static_cast<size_t>(a) * nb + b) * nc + c] += j.probs()(f);
  }
  std::vector<double> qc(nc, 0.0), qac(static_cast<size_t>(na) * nc, 0.0),
      qbc(static_cast<size_t>(nb) * nc, 0.0);
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b)
      for (int c = 0; c < nc; ++c) {
        const double v = q[(static_cast<size_t>(a) * nb + b) * nc + c];
        qc[c] += v;
        qac[static_cast<size_t>(a) * nc + c] += v;
        qbc[static_cast<size_t>(b) * nc + c] += v;
      }
  double cmi = 0.0;
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b)
      for (int c = 0; c < nc; ++c) {
        const double v = q[(static_cast<size_t>(a) * nb + b) * nc + c];
        if (v > 0.0)
          cmi += v * std::log2(v * qc[c] /
                               (qac[static_cast<size_t>(a) * nc + c] *
                                qbc[static_cast<size_t>(b) * nc + c]));
      }
  return std::max(cmi, 0.0);
}

double kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size())
    throw usage_error("kl_divergence: support mismatch");
  double d = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(d, 0.0);
}

JointPmf build_cooperative_joint(const JointPmf& px1x2,
                                 const CondPmf& py_given_x2,
                                 const CondPmf& pu1_given_x1,
                                 const CondPmf& pu2_given_u1x2) {
  if (px1x2.rank() != 2)
    throw usage_error("build_cooperative_joint: px1x2 must have two axes");
  const int nx1 = px1x2.axis_sizes()[0];
  const int nx2 = px1x2.axis_sizes()[1];
  const int ny = py_given_x2.output_size();
  const int nu1 = pu1_given_x1.output_size();
  const int nu2 = pu2_given_u1x2.output_size();
  if (py_given_x2.input_size() != nx2)
    throw usage_error("build_cooperative_joint: P(Y|X2) input size mismatch");
  if (pu1_given_x1.input_size() != nx1)
    throw usage_error("build_cooperative_joint: P(U1|X1) input size mismatch");
  if (pu2_given_u1x2.input_size() != nu1 * nx2)
    throw usage_error(
        "build_cooperative_joint: P(U2|U1,X2) input size mismatch");

  Eigen::VectorXd out(static_cast<long>(nu1) * nu2 * nx1 * nx2 * ny);
  int f = 0;
  for (int u1 = 0; u1 < nu1; ++u1)
    for (int u2 = 0; u2 < nu2; ++u2)
      for (int x1 = 0; x1 < nx1; ++x1)
        for (int x2 = 0; x2 < nx2; ++x2) {
          const double base = pu1_given_x1.at(x1, u1) *
                              pu2_given_u1x2.at(u1 * nx2 + x2, u2) *
                              px1x2.probs()(x1 * nx2 + x2);
          for (int y = 0; y < ny; ++y)
            out(f++) = base * py_given_x2.at(x2, y);
        }
  return JointPmf({nu1, nu2, nx1, nx2, ny}, std::move(out));
}

}  // namespace coopht
