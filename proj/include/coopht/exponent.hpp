#pragma once

#include "coopht/probability.hpp"
#include "coopht/source_model.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace coopht {

struct RatePair {
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Decision variables of the exponent optimization: the two quantization
/// channels. pu2_given_u1x2 rows are indexed by u1 * |X2| + x2.
struct AuxiliarySystem {
  CondPmf pu1_given_x1;
  CondPmf pu2_given_u1x2;
};

struct ExponentResult {
  double theta = 0.0;
  AuxiliarySystem achieving;
  double i_u1_x1 = 0.0;
  double i_u2_x2_given_u1 = 0.0;
  double i_u1u2_y = 0.0;
  bool feasible = false;
  int restarts_run = 0;
  int best_restart = -1;
  double slack1 = 0.0;  // effective R1 - I(U1;X1)
  double slack2 = 0.0;
  RatePair effective_rates;
};

struct SolverConfig {
  int restarts = 16;
  int max_iters = 400;
  double step = 0.5;
  double penalty_init = 4.0;
  double penalty_growth = 8.0;
  int penalty_stages = 4;
  double tol = 1e-10;
  double grid_resolution = 0.05;  // brute-force oracle only
  std::uint64_t seed = 1;
  int u1_size = 0;  // 0 -> cardinality bound default
  int u2_size = 0;
};

/// Sufficient auxiliary alphabet sizes: (|X1|+2, |U1||X2|+1).
std::pair<int, int> cardinality_bounds(int x1_size, int x2_size);

/// (I(U1;X1), I(U2;X2|U1), I(U1U2;Y)) under the five-variable joint.
struct EvalTriple {
  double i1, i2, theta;
};
EvalTriple evaluate(const AuxiliarySystem& aux, const SourceModel& s);

/// Raw-table evaluation used by the ascent inner loop and the
/// finite-difference checks. A is |X1| x |U1|, B is (|U1||X2|) x |U2|;
/// the tables need not be normalized (the information functionals extend
/// smoothly off the simplex, which is what makes entry-wise finite
/// differences meaningful).
struct GradEval {
  double i1, i2, theta;
  Eigen::MatrixXd d_i1_dA, d_i1_dB;
  Eigen::MatrixXd d_i2_dA, d_i2_dB;
  Eigen::MatrixXd d_theta_dA, d_theta_dB;
};
GradEval evaluate_with_gradients(const Eigen::MatrixXd& A,
                                 const Eigen::MatrixXd& B,
                                 const SourceModel& s);

ExponentResult fixed_length_exponent(const SourceModel& s, RatePair rates,
                                     const SolverConfig& cfg);

/// The variable-length optimum equals the fixed-length optimum at rates
/// scaled by 1/(1-epsilon); implemented exclusively through that rescaling.
ExponentResult variable_length_exponent(const SourceModel& s, RatePair rates,
                                        double epsilon,
                                        const SolverConfig& cfg);

struct EnvelopePoint {
  double r1, r2, theta;
};
struct EnvelopeResult {
  std::vector<EnvelopePoint> points;
  EnvelopePoint best;
};
/// Sweeps splits r1 + r2 = total_rate; epsilon < 0 selects fixed-length.
EnvelopeResult sum_rate_envelope(const SourceModel& s, double total_rate,
                                 double epsilon, int split_grid,
                                 const SolverConfig& cfg);

/// Exhaustive grid search over auxiliary tables with entries on
/// {0, delta, 2 delta, ...}. Independent of the ascent path; small
/// alphabets only (guarded).
ExponentResult brute_force_exponent(const SourceModel& s, RatePair rates,
                                    double grid_resolution, int u1_size,
                                    int u2_size);

}  // namespace coopht
