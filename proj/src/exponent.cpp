#include "coopht/exponent.hpp"

#include "coopht/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coopht {

namespace {

constexpr double kLn2Inv = 1.4426950408889634;  // 1/ln(2)
constexpr double kFeasTol = 1e-9;

double log2_or_zero(double num, double den) {
  if (num <= 0.0 || den <= 0.0) return 0.0;
  return std::log2(num / den);
}

// Euclidean projection of a row onto the probability simplex.
void project_row(Eigen::MatrixXd& m, Eigen::Index r) {
  auto row = m.row(r);
  const int k = static_cast<int>(row.size());
  std::vector<double> u(k);
  for (int i = 0; i < k; ++i) u[i] = row(i);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  int rho = 0;
  for (int i = 0; i < k; ++i) {
    css += u[i];
    const double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      tau = t;
    }
  }
  (void)rho;
  for (int i = 0; i < k; ++i) row(i) = std::max(row(i) - tau, 0.0);
}

Eigen::MatrixXd identity_like(int rows, int cols) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (int i = 0; i < rows; ++i) m(i, std::min(i, cols - 1)) = 1.0;
  return m;
}

struct SourceTables {
  Eigen::MatrixXd w;  // |X1| x |X2|
  Eigen::MatrixXd c;  // |X2| x |Y|
  int nx1, nx2, ny;
};

SourceTables source_tables(const SourceModel& s) {
  SourceTables t;
  t.nx1 = s.x1_size();
  t.nx2 = s.x2_size();
  t.ny = s.y_size();
  t.w.resize(t.nx1, t.nx2);
  for (int x1 = 0; x1 < t.nx1; ++x1)
    for (int x2 = 0; x2 < t.nx2; ++x2)
      t.w(x1, x2) = s.px1x2().probs()(x1 * t.nx2 + x2);
  t.c = s.py_given_x2().table();
  return t;
}

}  // namespace

std::pair<int, int> cardinality_bounds(int x1_size, int x2_size) {
  if (x1_size < 1 || x2_size < 1)
    throw usage_error("cardinality_bounds: sizes must be positive");
  const int u1 = x1_size + 2;
  return {u1, u1 * x2_size + 1};
}

EvalTriple evaluate(const AuxiliarySystem& aux, const SourceModel& s) {
  const JointPmf j = build_cooperative_joint(s.px1x2(), s.py_given_x2(),
                                             aux.pu1_given_x1,
                                             aux.pu2_given_u1x2);
  // Axes: 0 = U1, 1 = U2, 2 = X1, 3 = X2, 4 = Y.
  EvalTriple e;
  e.i1 = mutual_information(j, {0}, {2});
  e.i2 = conditional_mutual_information(j, {1}, {3}, {0});
  e.theta = mutual_information(j, {0, 1}, {4});
  return e;
}

GradEval evaluate_with_gradients(const Eigen::MatrixXd& A,
                                 const Eigen::MatrixXd& B,
                                 const SourceModel& s) {
  const SourceTables t = source_tables(s);
  const int nu1 = static_cast<int>(A.cols());
  const int nu2 = static_cast<int>(B.cols());
  if (A.rows() != t.nx1 || B.rows() != static_cast<long>(nu1) * t.nx2)
    throw usage_error("evaluate_with_gradients: table shape mismatch");

  // Group marginals of the (possibly unnormalized) joint
  // p(u1,u2,x1,x2,y) = A(x1,u1) B(u1*nx2+x2,u2) w(x1,x2) c(x2,y).
  Eigen::MatrixXd q_u1x1 = Eigen::MatrixXd::Zero(nu1, t.nx1);
  Eigen::VectorXd cy = t.c.rowwise().sum();  // sum over y per x2
  for (int u1 = 0; u1 < nu1; ++u1)
    for (int x1 = 0; x1 < t.nx1; ++x1) {
      double acc = 0.0;
      for (int x2 = 0; x2 < t.nx2; ++x2) {
        double bsum = 0.0;
        for (int u2 = 0; u2 < nu2; ++u2) bsum += B(u1 * t.nx2 + x2, u2);
        acc += bsum * t.w(x1, x2) * cy(x2);
      }
      q_u1x1(u1, x1) = A(x1, u1) * acc;
    }

  // p(u1,u2,x2) and p(u1,u2,y).
  std::vector<double> q_u1u2x2(static_cast<size_t>(nu1) * nu2 * t.nx2, 0.0);
  std::vector<double> q_u1u2y(static_cast<size_t>(nu1) * nu2 * t.ny, 0.0);
  Eigen::MatrixXd aw(nu1, t.nx2);  // sum_x1 A(x1,u1) w(x1,x2)
  for (int u1 = 0; u1 < nu1; ++u1)
    for (int x2 = 0; x2 < t.nx2; ++x2) {
      double acc = 0.0;
      for (int x1 = 0; x1 < t.nx1; ++x1) acc += A(x1, u1) * t.w(x1, x2);
      aw(u1, x2) = acc;
    }
  for (int u1 = 0; u1 < nu1; ++u1)
    for (int u2 = 0; u2 < nu2; ++u2)
      for (int x2 = 0; x2 < t.nx2; ++x2) {
        const double m = aw(u1, x2) * B(u1 * t.nx2 + x2, u2);
        q_u1u2x2[(static_cast<size_t>(u1) * nu2 + u2) * t.nx2 + x2] =
            m * cy(x2);
        for (int y = 0; y < t.ny; ++y)
          q_u1u2y[(static_cast<size_t>(u1) * nu2 + u2) * t.ny + y] +=
              m * t.c(x2, y);
      }

  // Marginals feeding the three objectives.
  Eigen::VectorXd q_u1 = q_u1x1.rowwise().sum();
  Eigen::VectorXd q_x1 = q_u1x1.colwise().sum();
  Eigen::MatrixXd q_u1u2 = Eigen::MatrixXd::Zero(nu1, nu2);
  Eigen::VectorXd q_y = Eigen::VectorXd::Zero(t.ny);
  for (int u1 = 0; u1 < nu1; ++u1)
    for (int u2 = 0; u2 < nu2; ++u2)
      for (int y = 0; y < t.ny; ++y) {
        const double v =
            q_u1u2y[(static_cast<size_t>(u1) * nu2 + u2) * t.ny + y];
        q_u1u2(u1, u2) += v;
        q_y(y) += v;
      }
  Eigen::MatrixXd q_u2u1 = Eigen::MatrixXd::Zero(nu2, nu1);  // sum over x2
  Eigen::MatrixXd q_x2u1 = Eigen::MatrixXd::Zero(t.nx2, nu1);
  for (int u1 = 0; u1 < nu1; ++u1)
    for (int u2 = 0; u2 < nu2; ++u2)
      for (int x2 = 0; x2 < t.nx2; ++x2) {
        const double v =
            q_u1u2x2[(static_cast<size_t>(u1) * nu2 + u2) * t.nx2 + x2];
        q_u2u1(u2, u1) += v;
        q_x2u1(x2, u1) += v;
      }
  Eigen::VectorXd q_u1_from_x2 = q_x2u1.colwise().sum();

  GradEval g;
  g.i1 = 0.0;
  for (int u1 = 0; u1 < nu1; ++u1)
    for (int x1 = 0; x1 < t.nx1; ++x1)
      if (q_u1x1(u1, x1) > 0.0)
        g.i1 += q_u1x1(u1, x1) *
                std::log2(q_u1x1(u1, x1) / (q_u1(u1) * q_x1(x1)));
  g.i2 = 0.0;
  for (int u1 = 0; u1 < nu1; ++u1)
    for (int u2 = 0; u2 < nu2; ++u2)
      for (int x2 = 0; x2 < t.nx2; ++x2) {
        const double v =
            q_u1u2x2[(static_cast<size_t>(u1) * nu2 + u2) * t.nx2 + x2];
        if (v > 0.0)
          g.i2 += v * std::log2(v * q_u1_from_x2(u1) /
                                (q_u2u1(u2, u1) * q_x2u1(x2, u1)));
      }
  g.theta = 0.0;
  for (int u1 = 0; u1 < nu1; ++u1)
    for (int u2 = 0; u2 < nu2; ++u2)
      for (int y = 0; y < t.ny; ++y) {
        const double v =
            q_u1u2y[(static_cast<size_t>(u1) * nu2 + u2) * t.ny + y];
        if (v > 0.0)
          g.theta += v * std::log2(v / (q_u1u2(u1, u2) * q_y(y)));
      }

  // Per-cell partials of each objective with respect to the joint entries.
  // For the plain MI functional F = sum q_ab log2(q_ab / (q_a q_b)) with all
  // marginals derived from the table, dF/dq_ab = log2(q_ab/(q_a q_b)) - 1/ln2;
  // for the CMI functional the additive constants cancel exactly.
  g.d_i1_dA = Eigen::MatrixXd::Zero(t.nx1, nu1);
  g.d_i1_dB = Eigen::MatrixXd::Zero(B.rows(), nu2);
  g.d_i2_dA = Eigen::MatrixXd::Zero(t.nx1, nu1);
  g.d_i2_dB = Eigen::MatrixXd::Zero(B.rows(), nu2);
  g.d_theta_dA = Eigen::MatrixXd::Zero(t.nx1, nu1);
  g.d_theta_dB = Eigen::MatrixXd::Zero(B.rows(), nu2);

  for (int u1 = 0; u1 < nu1; ++u1)
    for (int u2 = 0; u2 < nu2; ++u2)
      for (int x1 = 0; x1 < t.nx1; ++x1)
        for (int x2 = 0; x2 < t.nx2; ++x2) {
          const double b = B(u1 * t.nx2 + x2, u2);
          const double a = A(x1, u1);
          const double w = t.w(x1, x2);
          double g1 = log2_or_zero(q_u1x1(u1, x1), q_u1(u1) * q_x1(x1));
          if (q_u1x1(u1, x1) > 0.0) g1 -= kLn2Inv;
          const double v2 =
              q_u1u2x2[(static_cast<size_t>(u1) * nu2 + u2) * t.nx2 + x2];
          double g2 = 0.0;
          if (v2 > 0.0)
            g2 = std::log2(v2 * q_u1_from_x2(u1) /
                           (q_u2u1(u2, u1) * q_x2u1(x2, u1)));
          for (int y = 0; y < t.ny; ++y) {
            const double cxy = t.c(x2, y);
            const double v3 =
                q_u1u2y[(static_cast<size_t>(u1) * nu2 + u2) * t.ny + y];
            double g3 = 0.0;
            if (v3 > 0.0)
              g3 = std::log2(v3 / (q_u1u2(u1, u2) * q_y(y))) - kLn2Inv;
            const double dA = b * w * cxy;
            const double dB = a * w * cxy;
            g.d_i1_dA(x1, u1) += g1 * dA;
            g.d_i1_dB(u1 * t.nx2 + x2, u2) += g1 * dB;
            g.d_i2_dA(x1, u1) += g2 * dA;
            g.d_i2_dB(u1 * t.nx2 + x2, u2) += g2 * dB;
            g.d_theta_dA(x1, u1) += g3 * dA;
            g.d_theta_dB(u1 * t.nx2 + x2, u2) += g3 * dB;
          }
        }
  return g;
}

namespace {

struct Candidate {
  Eigen::MatrixXd A, B;
  double i1 = 0.0, i2 = 0.0, theta = 0.0;
};

void project_all(Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) project_row(m, i);
}

double penalized_objective(const GradEval& g, const RatePair& r, double w) {
  const double v1 = std::max(g.i1 - r.r1, 0.0);
  const double v2 = std::max(g.i2 - r.r2, 0.0);
  return g.theta - w * (v1 * v1 + v2 * v2);
}

Candidate ascend(Eigen::MatrixXd A, Eigen::MatrixXd B, const SourceModel& s,
                 const RatePair& rates, const SolverConfig& cfg,
                 bool skip_penalty = false) {
  GradEval g = evaluate_with_gradients(A, B, s);
  for (int stage = 0; stage < (skip_penalty ? 0 : cfg.penalty_stages);
       ++stage) {
    const double w = cfg.penalty_init * std::pow(cfg.penalty_growth, stage);
    double step = cfg.step;
    double obj = penalized_objective(g, rates, w);
    for (int it = 0; it < cfg.max_iters; ++it) {
      const double v1 = std::max(g.i1 - rates.r1, 0.0);
      const double v2 = std::max(g.i2 - rates.r2, 0.0);
      Eigen::MatrixXd dA =
          g.d_theta_dA - 2.0 * w * (v1 * g.d_i1_dA + v2 * g.d_i2_dA);
      Eigen::MatrixXd dB =
          g.d_theta_dB - 2.0 * w * (v1 * g.d_i1_dB + v2 * g.d_i2_dB);
      Eigen::MatrixXd An = A + step * dA;
      Eigen::MatrixXd Bn = B + step * dB;
      project_all(An);
      project_all(Bn);
      GradEval gn = evaluate_with_gradients(An, Bn, s);
      const double objn = penalized_objective(gn, rates, w);
      if (objn > obj + cfg.tol) {
        A = std::move(An);
        B = std::move(Bn);
        g = std::move(gn);
        obj = objn;
        step = std::min(step * 1.5, 4.0);
      } else {
        step *= 0.5;
        if (step < 1e-8) break;
      }
    }
  }

  // Feasibility restoration: blend toward row-constant (zero-rate) channels
  // until both constraints hold. t = 1 is always strictly feasible.
  const Eigen::MatrixXd A0 =
      Eigen::MatrixXd::Constant(A.rows(), A.cols(), 1.0 / A.cols());
  const Eigen::MatrixXd B0 =
      Eigen::MatrixXd::Constant(B.rows(), B.cols(), 1.0 / B.cols());
  Candidate best;
  bool found = false;
  for (int k = 0; k <= 400; ++k) {
    const double tt = static_cast<double>(k) / 400.0;
    Eigen::MatrixXd At = (1.0 - tt) * A + tt * A0;
    Eigen::MatrixXd Bt = (1.0 - tt) * B + tt * B0;
    GradEval gt = evaluate_with_gradients(At, Bt, s);
    if (gt.i1 <= rates.r1 + kFeasTol && gt.i2 <= rates.r2 + kFeasTol) {
      best.A = std::move(At);
      best.B = std::move(Bt);
      best.i1 = gt.i1;
      best.i2 = gt.i2;
      best.theta = gt.theta;
      found = true;
      break;
    }
  }
  if (!found) {
    // Numerically the t = 1 endpoint can sit at the tolerance edge; force it.
    GradEval gt = evaluate_with_gradients(A0, B0, s);
    best.A = A0;
    best.B = B0;
    best.i1 = gt.i1;
    best.i2 = gt.i2;
    best.theta = gt.theta;
  }

  // Feasible-phase polish: plain ascent on theta, pulling each trial step
  // back toward the current (feasible) iterate until the rate constraints
  // hold again. Monotone in theta, so it can only improve on the blend.
  const double kActive = 1e-5;
  const auto dot = [](const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                      const Eigen::MatrixXd& ya, const Eigen::MatrixXd& yb) {
    return xa.cwiseProduct(ya).sum() + xb.cwiseProduct(yb).sum();
  };
  double pstep = 0.1;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const GradEval gc = evaluate_with_gradients(best.A, best.B, s);
    Eigen::MatrixXd dA = gc.d_theta_dA;
    Eigen::MatrixXd dB = gc.d_theta_dB;
    // Deflect the ascent direction along active constraint gradients so the
    // iterate can slide tangentially instead of ramming the boundary.
    Eigen::MatrixXd g2A = gc.d_i2_dA;
    Eigen::MatrixXd g2B = gc.d_i2_dB;
    if (gc.i1 > rates.r1 - kActive) {
      const double n1 = dot(gc.d_i1_dA, gc.d_i1_dB, gc.d_i1_dA, gc.d_i1_dB);
      if (n1 > 1e-18) {
        const double c = dot(dA, dB, gc.d_i1_dA, gc.d_i1_dB) / n1;
        if (c > 0.0) {
          dA -= c * gc.d_i1_dA;
          dB -= c * gc.d_i1_dB;
        }
        const double c2 = dot(g2A, g2B, gc.d_i1_dA, gc.d_i1_dB) / n1;
        g2A -= c2 * gc.d_i1_dA;
        g2B -= c2 * gc.d_i1_dB;
      }
    }
    if (gc.i2 > rates.r2 - kActive) {
      const double n2 = dot(g2A, g2B, g2A, g2B);
      if (n2 > 1e-18) {
        const double c = dot(dA, dB, g2A, g2B) / n2;
        if (c > 0.0) {
          dA -= c * g2A;
          dB -= c * g2B;
        }
      }
    }
    Eigen::MatrixXd An = best.A + pstep * dA;
    Eigen::MatrixXd Bn = best.B + pstep * dB;
    project_all(An);
    project_all(Bn);
    bool accepted = false;
    double tt = 1.0;
    for (int half = 0; half < 24; ++half, tt *= 0.5) {
      Eigen::MatrixXd At = (1.0 - tt) * best.A + tt * An;
      Eigen::MatrixXd Bt = (1.0 - tt) * best.B + tt * Bn;
      const GradEval gt = evaluate_with_gradients(At, Bt, s);
      if (gt.i1 > rates.r1 + kFeasTol || gt.i2 > rates.r2 + kFeasTol) continue;
      if (gt.theta > best.theta + 1e-12) {
        best.A = std::move(At);
        best.B = std::move(Bt);
        best.i1 = gt.i1;
        best.i2 = gt.i2;
        best.theta = gt.theta;
        accepted = true;
        break;
      }
      // feasible but not improving: keep shrinking the pullback
    }
    if (accepted) {
      pstep = std::min(pstep * 1.3, 1.0);
    } else {
      pstep *= 0.5;
      if (pstep < 1e-7) break;
    }
  }

  // Coordinate polish: shuttle probability mass between two entries of one
  // row at an annealed step size, keeping feasibility. Escapes the ridges
  // where the projected gradient stalls.
  auto try_move = [&](Eigen::MatrixXd& M, Eigen::Index row, Eigen::Index from,
                      Eigen::Index to, double d) {
    if (M(row, from) < d) return false;
    M(row, from) -= d;
    M(row, to) += d;
    const GradEval gt = evaluate_with_gradients(best.A, best.B, s);
    if (gt.i1 <= rates.r1 + kFeasTol && gt.i2 <= rates.r2 + kFeasTol &&
        gt.theta > best.theta + 1e-12) {
      best.i1 = gt.i1;
      best.i2 = gt.i2;
      best.theta = gt.theta;
      return true;
    }
    M(row, from) += d;
    M(row, to) -= d;
    return false;
  };
  for (double d = 0.05; d >= 1e-5; d *= 0.5) {
    for (int sweep = 0; sweep < 60; ++sweep) {
      bool improved = false;
      for (Eigen::Index row = 0; row < best.A.rows(); ++row)
        for (Eigen::Index from = 0; from < best.A.cols(); ++from)
          for (Eigen::Index to = 0; to < best.A.cols(); ++to)
            if (from != to) improved |= try_move(best.A, row, from, to, d);
      for (Eigen::Index row = 0; row < best.B.rows(); ++row)
        for (Eigen::Index from = 0; from < best.B.cols(); ++from)
          for (Eigen::Index to = 0; to < best.B.cols(); ++to)
            if (from != to) improved |= try_move(best.B, row, from, to, d);
      if (!improved) break;
    }
  }
  return best;
}

}  // namespace

ExponentResult fixed_length_exponent(const SourceModel& s, RatePair rates,
                                     const SolverConfig& cfg) {
  if (rates.r1 < 0.0 || rates.r2 < 0.0)
    throw usage_error("fixed_length_exponent: rates must be nonnegative");
  if (cfg.restarts < 1 || cfg.max_iters < 1)
    throw usage_error("fixed_length_exponent: bad solver config");
  auto [nu1_def, nu2_def] = cardinality_bounds(s.x1_size(), s.x2_size());
  const int nu1 = cfg.u1_size > 0 ? cfg.u1_size : nu1_def;
  const int nu2 = cfg.u2_size > 0 ? cfg.u2_size : nu2_def;
  const int nb_rows = nu1 * s.x2_size();

  Candidate best;
  int best_restart = -1;
  for (int r = 0; r < cfg.restarts; ++r) {
    Eigen::MatrixXd A, B;
    bool skip_penalty = false;
    if (r == 0 || r == 2) {
      A = identity_like(s.x1_size(), nu1);
      // identity-like on the X2 part of each (u1, x2) row
      B = Eigen::MatrixXd::Zero(nb_rows, nu2);
      for (int u1 = 0; u1 < nu1; ++u1)
        for (int x2 = 0; x2 < s.x2_size(); ++x2)
          B(u1 * s.x2_size() + x2, std::min(x2, nu2 - 1)) = 1.0;
      // r == 2: no penalty phase; blend the deterministic start straight to
      // feasibility and climb along the boundary from there. The penalty
      // attractor and this one are often different local maxima.
      skip_penalty = r == 2;
    } else if (r == 1) {
      A = Eigen::MatrixXd::Constant(s.x1_size(), nu1, 1.0 / nu1);
      B = Eigen::MatrixXd::Constant(nb_rows, nu2, 1.0 / nu2);
    } else {
      std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(r)));
      A.resize(s.x1_size(), nu1);
      for (int i = 0; i < s.x1_size(); ++i)
        A.row(i) = dirichlet1(rng, nu1).transpose();
      B.resize(nb_rows, nu2);
      for (int i = 0; i < nb_rows; ++i)
        B.row(i) = dirichlet1(rng, nu2).transpose();
    }
    Candidate c = ascend(std::move(A), std::move(B), s, rates, cfg,
                         skip_penalty);
    if (best_restart < 0 || c.theta > best.theta + 1e-12) {
      best = std::move(c);
      best_restart = r;
    }
  }

  ExponentResult res;
  res.achieving = AuxiliarySystem{CondPmf(best.A), CondPmf(best.B)};
  res.i_u1_x1 = best.i1;
  res.i_u2_x2_given_u1 = best.i2;
  res.i_u1u2_y = best.theta;
  res.theta = best.theta;
  res.feasible = best.i1 <= rates.r1 + 1e-6 && best.i2 <= rates.r2 + 1e-6;
  res.restarts_run = cfg.restarts;
  res.best_restart = best_restart;
  res.slack1 = rates.r1 - best.i1;
  res.slack2 = rates.r2 - best.i2;
  res.effective_rates = rates;
  return res;
}

ExponentResult variable_length_exponent(const SourceModel& s, RatePair rates,
                                        double epsilon,
                                        const SolverConfig& cfg) {
  if (epsilon <= 0.0 || epsilon >= 1.0)
    throw usage_error("variable_length_exponent: epsilon outside (0,1)");
  return fixed_length_exponent(
      s, RatePair{rates.r1 / (1.0 - epsilon), rates.r2 / (1.0 - epsilon)},
      cfg);
}

EnvelopeResult sum_rate_envelope(const SourceModel& s, double total_rate,
                                 double epsilon, int split_grid,
                                 const SolverConfig& cfg) {
  if (total_rate < 0.0)
    throw usage_error("sum_rate_envelope: negative total rate");
  if (split_grid < 2) throw usage_error("sum_rate_envelope: split_grid < 2");
  EnvelopeResult out;
  for (int i = 0; i < split_grid; ++i) {
    const double r1 = total_rate * i / (split_grid - 1);
    const RatePair rp{r1, total_rate - r1};
    const ExponentResult res =
        epsilon > 0.0 ? variable_length_exponent(s, rp, epsilon, cfg)
                      : fixed_length_exponent(s, rp, cfg);
    out.points.push_back({rp.r1, rp.r2, res.theta});
    if (i == 0 || res.theta > out.best.theta) out.best = out.points.back();
  }
  return out;
}

namespace {

// All pmfs over k symbols whose entries are multiples of 1/steps.
void grid_rows_rec(int k, int steps, int pos, int left,
                   std::vector<int>& cur,
                   std::vector<Eigen::RowVectorXd>& out) {
  if (pos == k - 1) {
    cur[pos] = left;
    Eigen::RowVectorXd r(k);
    for (int i = 0; i < k; ++i)
      r(i) = static_cast<double>(cur[i]) / steps;
    out.push_back(std::move(r));
    return;
  }
  for (int v = 0; v <= left; ++v) {
    cur[pos] = v;
    grid_rows_rec(k, steps, pos + 1, left - v, cur, out);
  }
}

std::vector<Eigen::RowVectorXd> grid_rows(int k, int steps) {
  std::vector<Eigen::RowVectorXd> out;
  std::vector<int> cur(k);
  grid_rows_rec(k, steps, 0, steps, cur, out);
  return out;
}

}  // namespace

ExponentResult brute_force_exponent(const SourceModel& s, RatePair rates,
                                    double grid_resolution, int u1_size,
                                    int u2_size) {
  if (grid_resolution <= 0.0 || grid_resolution > 0.5)
    throw usage_error("brute_force_exponent: grid_resolution outside (0,0.5]");
  if (u1_size < 1 || u2_size < 1)
    throw usage_error("brute_force_exponent: alphabet sizes must be positive");
  const int steps = static_cast<int>(std::lround(1.0 / grid_resolution));
  const SourceTables t = source_tables(s);
  const int nb_rows = u1_size * t.nx2;

  const auto rows_a = grid_rows(u1_size, steps);
  const auto rows_b = grid_rows(u2_size, steps);
  double count = std::pow(static_cast<double>(rows_a.size()), t.nx1) *
                 std::pow(static_cast<double>(rows_b.size()), nb_rows);
  if (count > 1e8)
    throw usage_error(
        "brute_force_exponent: grid would enumerate > 1e8 points; shrink "
        "alphabets or coarsen the grid");

  const Eigen::VectorXd w1 =
      axis_marginal(s.px1x2(), 0).probs();  // P(X1)
  Eigen::MatrixXd best_a, best_b;
  double best_theta = -1.0, best_i1 = 0.0, best_i2 = 0.0;

  std::vector<int> ia(t.nx1, 0);
  Eigen::MatrixXd A(t.nx1, u1_size), B(nb_rows, u2_size);
  std::vector<int> ib(nb_rows, 0);

  // Work buffers for the inner evaluation.
  std::vector<double> pu1u2x2(static_cast<size_t>(u1_size) * u2_size * t.nx2);
  std::vector<double> pu1u2y(static_cast<size_t>(u1_size) * u2_size * t.ny);

  bool done_a = false;
  while (!done_a) {
    for (int x1 = 0; x1 < t.nx1; ++x1) A.row(x1) = rows_a[ia[x1]];

    // I(U1;X1) depends on A only.
    Eigen::VectorXd pu1 = Eigen::VectorXd::Zero(u1_size);
    for (int x1 = 0; x1 < t.nx1; ++x1) pu1 += w1(x1) * A.row(x1).transpose();
    double i1 = 0.0;
    for (int x1 = 0; x1 < t.nx1; ++x1)
      for (int u1 = 0; u1 < u1_size; ++u1) {
        const double v = w1(x1) * A(x1, u1);
        if (v > 0.0) i1 += v * std::log2(A(x1, u1) / pu1(u1));
      }

    if (i1 <= rates.r1 + kFeasTol) {
      // Precompute sum_x1 A(x1,u1) w(x1,x2) and its composition with c.
      Eigen::MatrixXd aw(u1_size, t.nx2);
      for (int u1 = 0; u1 < u1_size; ++u1)
        for (int x2 = 0; x2 < t.nx2; ++x2) {
          double acc = 0.0;
          for (int x1 = 0; x1 < t.nx1; ++x1) acc += A(x1, u1) * t.w(x1, x2);
          aw(u1, x2) = acc;
        }

      std::fill(ib.begin(), ib.end(), 0);
      bool done_b = false;
      while (!done_b) {
        for (int r = 0; r < nb_rows; ++r) B.row(r) = rows_b[ib[r]];

        // p(u1,u2,x2) and conditional MI I(U2;X2|U1).
        double i2 = 0.0;
        for (int u1 = 0; u1 < u1_size; ++u1) {
          double pu1_m = 0.0;
          for (int x2 = 0; x2 < t.nx2; ++x2) pu1_m += aw(u1, x2);
          for (int u2 = 0; u2 < u2_size; ++u2)
            for (int x2 = 0; x2 < t.nx2; ++x2)
              pu1u2x2[(static_cast<size_t>(u1) * u2_size + u2) * t.nx2 + x2] =
                  aw(u1, x2) * B(u1 * t.nx2 + x2, u2);
          for (int u2 = 0; u2 < u2_size; ++u2) {
            double pu2u1 = 0.0;
            for (int x2 = 0; x2 < t.nx2; ++x2)
              pu2u1 += pu1u2x2[(static_cast<size_t>(u1) * u2_size + u2) *
                                   t.nx2 + x2];
            for (int x2 = 0; x2 < t.nx2; ++x2) {
              const double v =
                  pu1u2x2[(static_cast<size_t>(u1) * u2_size + u2) * t.nx2 +
                          x2];
              if (v > 0.0 && pu1_m > 0.0)
                i2 += v * std::log2(v * pu1_m / (pu2u1 * aw(u1, x2)));
            }
          }
        }

        if (i2 <= rates.r2 + kFeasTol) {
          std::fill(pu1u2y.begin(), pu1u2y.end(), 0.0);
          for (int u1 = 0; u1 < u1_size; ++u1)
            for (int u2 = 0; u2 < u2_size; ++u2)
              for (int x2 = 0; x2 < t.nx2; ++x2) {
                const double m = aw(u1, x2) * B(u1 * t.nx2 + x2, u2);
                for (int y = 0; y < t.ny; ++y)
                  pu1u2y[(static_cast<size_t>(u1) * u2_size + u2) * t.ny +
                         y] += m * t.c(x2, y);
              }
          double theta = 0.0;
          {
            std::vector<double> pu(static_cast<size_t>(u1_size) * u2_size,
                                   0.0);
            std::vector<double> py(t.ny, 0.0);
            for (size_t uu = 0; uu < pu.size(); ++uu)
              for (int y = 0; y < t.ny; ++y) {
                pu[uu] += pu1u2y[uu * t.ny + y];
                py[y] += pu1u2y[uu * t.ny + y];
              }
            for (size_t uu = 0; uu < pu.size(); ++uu)
              for (int y = 0; y < t.ny; ++y) {
                const double v = pu1u2y[uu * t.ny + y];
                if (v > 0.0) theta += v * std::log2(v / (pu[uu] * py[y]));
              }
          }
          if (theta > best_theta) {
            best_theta = theta;
            best_i1 = i1;
            best_i2 = i2;
            best_a = A;
            best_b = B;
          }
        }

        // odometer over B row choices
        int d = nb_rows - 1;
        while (d >= 0) {
          if (++ib[d] < static_cast<int>(rows_b.size())) break;
          ib[d] = 0;
          --d;
        }
        done_b = d < 0;
      }
    }

    int d = t.nx1 - 1;
    while (d >= 0) {
      if (++ia[d] < static_cast<int>(rows_a.size())) break;
      ia[d] = 0;
      --d;
    }
    done_a = d < 0;
  }

  ExponentResult res;
  if (best_theta < 0.0) {
    // The all-uniform grid point is always feasible, so this cannot happen
    // unless the grid excludes it; fall back to the zero point.
    best_a = Eigen::MatrixXd::Constant(t.nx1, u1_size, 1.0 / u1_size);
    best_b = Eigen::MatrixXd::Constant(nb_rows, u2_size, 1.0 / u2_size);
    best_theta = best_i1 = best_i2 = 0.0;
  }
  res.achieving = AuxiliarySystem{CondPmf(best_a), CondPmf(best_b)};
  res.theta = best_theta;
  res.i_u1_x1 = best_i1;
  res.i_u2_x2_given_u1 = best_i2;
  res.i_u1u2_y = best_theta;
  res.feasible = true;
  res.slack1 = rates.r1 - best_i1;
  res.slack2 = rates.r2 - best_i2;
  res.effective_rates = rates;
  return res;
}

}  // namespace coopht
