#pragma once

#include "coopht/exponent.hpp"
#include "coopht/probability.hpp"
#include "coopht/source_model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace coopht {

/// Message on a noiseless bit pipe. "0" is the reserved flag string meaning
/// "declare the alternative hypothesis".
struct BitString {
  std::string bits;  // '0'/'1', nonempty
};

BitString string_of_int(std::uint64_t m);  // m >= 1; shortest representation
std::uint64_t dec(const BitString& b);
int len(const BitString& b);
inline BitString flag_string() { return BitString{"0"}; }
inline bool is_flag(const BitString& b) { return b.bits == "0"; }

enum class SnMode { Coin, Enumerate };

/// Absolute: per-symbol deviation bound mu. Proportional: bound mu * p(v).
enum class SlackMode { Absolute, Proportional };

struct SimConfig {
  int n = 32;
  double mu = 0.0175;
  double epsilon = 0.07;
  AuxiliarySystem aux;
  int trials = 10000;
  std::uint64_t seed = 1;
  SnMode s_n_mode = SnMode::Coin;
  SlackMode slack_mode = SlackMode::Absolute;
};

struct Codebook1 {
  int n = 0;
  std::vector<std::vector<int>> words;  // [m1-1] -> U1 sequence
};

struct Codebook2 {
  int n = 0;
  // [m1-1][m2-1] -> U2 sequence
  std::vector<std::vector<std::vector<int>>> words;
};

/// Strong typicality with per-symbol absolute slack mu and zero-probability
/// exclusion. `probs` is the flattened pmf over the (possibly tuple-encoded)
/// symbol alphabet.
bool is_typical(const std::vector<int>& seq, const Eigen::VectorXd& probs,
                double mu);
bool is_typical(const std::vector<int>& seq, const Eigen::VectorXd& probs,
                double mu, SlackMode mode);

struct PathCounts {
  long sn_hit = 0;
  long enc1_fail = 0;
  long enc2_fail = 0;
  long accept = 0;
  long reject = 0;
};

struct SimReport {
  double alpha_hat = 0.0, alpha_se = 0.0;
  double beta_hat = 0.0, beta_se = 0.0;
  double mean_len1 = 0.0, mean_len2 = 0.0;
  double empirical_exponent = 0.0;  // -log2(beta_hat)/n
  PathCounts h0, h1;
  int trials = 0;
  int n = 0;
};

/// Precomputed scheme state: joint marginals, codebook sizes, S_n machinery.
class Simulator {
 public:
  Simulator(SourceModel s, SimConfig cfg);

  const SimConfig& config() const { return cfg_; }
  double i_u1_x1() const { return i1_; }
  double i_u2_x2_given_u1() const { return i2_; }
  double i_u1u2_y() const { return theta_; }
  std::uint64_t m1_count() const { return m1_count_; }
  std::uint64_t m2_count() const { return m2_count_; }

  std::pair<Codebook1, Codebook2> generate_codebooks(
      std::uint64_t seed) const;

  bool in_s_n(const std::vector<int>& x1_seq, std::mt19937_64& rng) const;

  BitString encode1(const std::vector<int>& x1_seq, const Codebook1& cb1,
                    std::mt19937_64& rng) const;
  BitString encode2(const std::vector<int>& x2_seq, const BitString& m1,
                    const Codebook1& cb1, const Codebook2& cb2,
                    std::mt19937_64& rng) const;
  int decide(const std::vector<int>& y_seq, const BitString& m1,
             const BitString& m2, const Codebook1& cb1,
             const Codebook2& cb2) const;

  SimReport run_monte_carlo() const;
  SimReport run_monte_carlo(const Codebook1& cb1, const Codebook2& cb2) const;

  /// Exhaustive probability computation of (alpha_n, beta_n) for a fixed
  /// codebook pair, averaging over the encoders' uniform index picks.
  /// Requires enumerate-mode S_n and a small |X1|^n |X2|^n |Y|^n product.
  std::pair<double, double> exact_error_probabilities(
      const Codebook1& cb1, const Codebook2& cb2) const;

  /// Measure of the enumerate-mode subset (exact sum of member sequence
  /// probabilities).
  double s_n_probability() const;

 private:
  SourceModel s_;
  SimConfig cfg_;
  double i1_, i2_, theta_;
  std::uint64_t m1_count_, m2_count_;

  Eigen::VectorXd pu1_;                // P(U1)
  Eigen::MatrixXd pu2_given_u1_;      // nu1 x nu2
  Eigen::VectorXd px1_;               // P(X1)
  Eigen::VectorXd p_u1x1_, p_u1u2x2_, p_u1u2y_;  // flattened joints
  int nu1_, nu2_, nx1_, nx2_, ny_;

  // S_n state
  double coin_accept_ratio_ = 0.0;     // (eps-mu)/Pr[typical], clamped to 1
  bool coin_ratio_clamped_ = false;
  std::vector<std::uint8_t> sn_member_;  // enumerate mode, indexed by seq code
  double sn_prob_ = 0.0;

  double typical_set_probability() const;
  void build_enumerated_sn();
  std::uint64_t seq_code(const std::vector<int>& seq, int base) const;
};

}  // namespace coopht
