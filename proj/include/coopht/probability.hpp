#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace coopht {

// Validation tolerance for probability tables. Rows whose sum deviates from 1
// by more than this are rejected rather than silently renormalized.
inline constexpr double kProbTol = 1e-9;

class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Finite-alphabet probability mass function.
class Pmf {
 public:
  explicit Pmf(Eigen::VectorXd probs);

  static Pmf uniform(int size);
  static Pmf point_mass(int size, int index);
  static Pmf bernoulli(double p);  // P(1) = p

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_(i); }
  const Eigen::VectorXd& probs() const { return p_; }

 private:
  Eigen::VectorXd p_;
};

/// Conditional pmf: one output distribution per input symbol.
/// Stored as an input_size x output_size row-stochastic matrix.
class CondPmf {
 public:
  CondPmf() : t_(Eigen::MatrixXd::Ones(1, 1)) {}  // degenerate placeholder
  CondPmf(Eigen::MatrixXd rows);

  static CondPmf identity(int size);
  static CondPmf uniform(int input_size, int output_size);
  static CondPmf constant(const Pmf& out, int input_size);
  static CondPmf bsc(double crossover);

  int input_size() const { return static_cast<int>(t_.rows()); }
  int output_size() const { return static_cast<int>(t_.cols()); }
  double at(int in, int out) const { return t_(in, out); }
  Pmf row(int in) const { return Pmf(t_.row(in).transpose()); }
  const Eigen::MatrixXd& table() const { return t_; }

 private:
  Eigen::MatrixXd t_;
};

/// Dense joint pmf over several finite random variables. The flat table is
/// row-major: axis 0 varies slowest.
class JointPmf {
 public:
  JointPmf(std::vector<int> axis_sizes, Eigen::VectorXd probs);

  static JointPmf from_pmf(const Pmf& p);
  static JointPmf product(const Pmf& a, const Pmf& b);

  int rank() const { return static_cast<int>(sizes_.size()); }
  const std::vector<int>& axis_sizes() const { return sizes_; }
  int total_size() const { return static_cast<int>(p_.size()); }
  const Eigen::VectorXd& probs() const { return p_; }

  int flat_index(std::span<const int> idx) const;
  void unflatten(int flat, std::span<int> idx) const;
  double at(std::span<const int> idx) const { return p_(flat_index(idx)); }

 private:
  std::vector<int> sizes_;
  Eigen::VectorXd p_;
};

double entropy(const Pmf& p);
double binary_entropy(double p);

JointPmf marginalize(const JointPmf& j, const std::vector<int>& keep_axes);
Pmf axis_marginal(const JointPmf& j, int axis);

double mutual_information(const JointPmf& j, const std::vector<int>& group_a,
                          const std::vector<int>& group_b);
double conditional_mutual_information(const JointPmf& j,
                                      const std::vector<int>& group_a,
                                      const std::vector<int>& group_b,
                                      const std::vector<int>& group_c);

/// D(p || q) in bits; +infinity when p puts mass where q does not.
double kl_divergence(const Pmf& p, const Pmf& q);

/// Joint over (U1, U2, X1, X2, Y) built as
/// P(u1|x1) P(u2|u1,x2) P(x1,x2) P(y|x2).
/// pu2_given_u1x2 rows are indexed by u1 * |X2| + x2.
JointPmf build_cooperative_joint(const JointPmf& px1x2,
                                 const CondPmf& py_given_x2,
                                 const CondPmf& pu1_given_x1,
                                 const CondPmf& pu2_given_u1x2);

}  // namespace coopht
