#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coopht/exponent.hpp"
#include "coopht/rng.hpp"
#include "coopht/source_model.hpp"

#include <random>

using namespace coopht;

namespace {

SourceModel reference_example() { return binary_example({0.5, 0.75, 0.95}); }

SolverConfig quick_cfg(int restarts = 8) {
  SolverConfig cfg;
  cfg.restarts = restarts;
  cfg.max_iters = 200;
  cfg.seed = 17;
  return cfg;
}

AuxiliarySystem identity_aux() {
  Eigen::MatrixXd b(4, 2);
  b << 1, 0, 0, 1, 1, 0, 0, 1;  // U2 copies X2, ignores U1
  return {CondPmf::identity(2), CondPmf(b)};
}

}  // namespace

TEST_CASE("cardinality bounds") {
  CHECK(cardinality_bounds(2, 2) == std::pair<int, int>{4, 9});
  CHECK(cardinality_bounds(1, 1) == std::pair<int, int>{3, 4});
  CHECK(cardinality_bounds(3, 2) == std::pair<int, int>{5, 11});
}

TEST_CASE("evaluate at known corners") {
  const SourceModel s = reference_example();

  SUBCASE("constant auxiliaries") {
    AuxiliarySystem aux{CondPmf::uniform(2, 2), CondPmf::uniform(4, 2)};
    // uniform rows: U independent of everything
    const EvalTriple e = evaluate(aux, s);
    CHECK(e.i1 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.i2 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.theta == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("identity auxiliaries") {
    const EvalTriple e = evaluate(identity_aux(), s);
    CHECK(e.i1 == doctest::Approx(1.0).epsilon(1e-12));          // H(X1)
    CHECK(e.i2 == doctest::Approx(binary_entropy(0.75)).epsilon(1e-9));
    CHECK(e.theta == doctest::Approx(1.0 - binary_entropy(0.05)).epsilon(1e-9));
    CHECK(e.theta == doctest::Approx(0.7136).epsilon(1e-3));
  }

  SUBCASE("U1 copies X1, U2 constant") {
    AuxiliarySystem aux{CondPmf::identity(2), CondPmf::uniform(4, 2)};
    const EvalTriple e = evaluate(aux, s);
    CHECK(e.i1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.i2 == doctest::Approx(0.0).epsilon(1e-12));
    // I(X1;Y) for the BSC composition p(1-q) + (1-p)q
    const double eff = 0.75 * 0.05 + 0.25 * 0.95;
    CHECK(e.theta == doctest::Approx(1.0 - binary_entropy(eff)).epsilon(1e-9));
  }
}

TEST_CASE("gradients match finite differences") {
  const SourceModel s = reference_example();
  std::mt19937_64 rng(2024);
  const double h = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd a(2, 3), b(6, 3);
    for (int i = 0; i < 2; ++i)
      a.row(i) = (dirichlet1(rng, 3) * 0.8).transpose().array() + 0.2 / 3;
    for (int i = 0; i < 6; ++i)
      b.row(i) = (dirichlet1(rng, 3) * 0.8).transpose().array() + 0.2 / 3;
    const GradEval g = evaluate_with_gradients(a, b, s);
    auto fd_check = [&](auto getter, const Eigen::MatrixXd& dA,
                        const Eigen::MatrixXd& dB) {
      for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
          Eigen::MatrixXd ap = a, am = a;
          ap(i, k) += h;
          am(i, k) -= h;
          const double fd = (getter(evaluate_with_gradients(ap, b, s)) -
                             getter(evaluate_with_gradients(am, b, s))) /
                            (2 * h);
          const double an = dA(i, k);
          CHECK(std::abs(fd - an) <=
                1e-4 * std::max({std::abs(fd), std::abs(an), 1e-3}));
          ++checked;
        }
      for (int i = 0; i < b.rows(); ++i)
        for (int k = 0; k < b.cols(); ++k) {
          Eigen::MatrixXd bp = b, bm = b;
          bp(i, k) += h;
          bm(i, k) -= h;
          const double fd = (getter(evaluate_with_gradients(a, bp, s)) -
                             getter(evaluate_with_gradients(a, bm, s))) /
                            (2 * h);
          const double an = dB(i, k);
          CHECK(std::abs(fd - an) <=
                1e-4 * std::max({std::abs(fd), std::abs(an), 1e-3}));
          ++checked;
        }
    };
    fd_check([](const GradEval& e) { return e.i1; }, g.d_i1_dA, g.d_i1_dB);
    fd_check([](const GradEval& e) { return e.i2; }, g.d_i2_dA, g.d_i2_dB);
    fd_check([](const GradEval& e) { return e.theta; }, g.d_theta_dA,
             g.d_theta_dB);
  }
  CHECK(checked > 100);
}

TEST_CASE("fixed-length exponent corners") {
  const SourceModel s = reference_example();
  const SolverConfig cfg = quick_cfg();

  SUBCASE("zero rates force zero exponent") {
    const ExponentResult r = fixed_length_exponent(s, {0.0, 0.0}, cfg);
    CHECK(r.theta == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(r.feasible);
  }

  SUBCASE("saturation at generous rates") {
    const ExponentResult r = fixed_length_exponent(s, {1.0, 0.82}, cfg);
    CHECK(r.theta == doctest::Approx(0.7136).epsilon(2e-3 / 0.7136));
    CHECK(r.feasible);
    CHECK(r.i_u1_x1 <= 1.0 + 1e-6);
    CHECK(r.i_u2_x2_given_u1 <= 0.82 + 1e-6);
  }

  SUBCASE("achieving system reproduces reported values") {
    const ExponentResult r = fixed_length_exponent(s, {0.55, 0.55}, cfg);
    const EvalTriple e = evaluate(r.achieving, s);
    CHECK(e.i1 == doctest::Approx(r.i_u1_x1).epsilon(1e-9));
    CHECK(e.i2 == doctest::Approx(r.i_u2_x2_given_u1).epsilon(1e-9));
    CHECK(e.theta == doctest::Approx(r.theta).epsilon(1e-9));
    CHECK(r.theta <= 0.7136 + 1e-3);
    CHECK(r.theta >= 0.0);
  }
}

TEST_CASE("variable-length equals scaled fixed-length") {
  const SourceModel s = reference_example();
  const SolverConfig cfg = quick_cfg(4);

  const ExponentResult vl = variable_length_exponent(s, {0.93, 0.93}, 0.07, cfg);
  const ExponentResult fl = fixed_length_exponent(s, {1.0, 1.0}, cfg);
  CHECK(vl.theta == fl.theta);
  CHECK(vl.i_u1_x1 == fl.i_u1_x1);
  CHECK(vl.i_u2_x2_given_u1 == fl.i_u2_x2_given_u1);

  CHECK_THROWS_AS(variable_length_exponent(s, {0.5, 0.5}, 0.0, cfg),
                  usage_error);
  CHECK_THROWS_AS(variable_length_exponent(s, {0.5, 0.5}, 1.0, cfg),
                  usage_error);
}

TEST_CASE("monotonicity in rates") {
  const SourceModel s = reference_example();
  const SolverConfig cfg = quick_cfg();
  const double t_small = fixed_length_exponent(s, {0.3, 0.3}, cfg).theta;
  const double t_big = fixed_length_exponent(s, {0.6, 0.6}, cfg).theta;
  CHECK(t_big >= t_small - 1e-3);
}

TEST_CASE("brute force oracle") {
  const SourceModel s = reference_example();

  SUBCASE("zero rates") {
    const ExponentResult r = brute_force_exponent(s, {0.0, 0.0}, 0.25, 2, 2);
    CHECK(r.theta == doctest::Approx(0.0).epsilon(1e-9));
  }

  SUBCASE("saturation window at generous rates") {
    const ExponentResult r = brute_force_exponent(s, {1.0, 0.82}, 0.05, 2, 2);
    CHECK(r.theta >= 0.70);
    CHECK(r.theta <= 1.0 - binary_entropy(0.05) + 1e-9);
  }

  SUBCASE("solver dominates the coarse grid") {
    SolverConfig cfg = quick_cfg();
    cfg.u1_size = 2;
    cfg.u2_size = 2;
    const RatePair rates{0.55, 0.55};
    const ExponentResult grid = brute_force_exponent(s, rates, 0.05, 2, 2);
    const ExponentResult solver = fixed_length_exponent(s, rates, cfg);
    CHECK(solver.theta >= grid.theta - 1e-3);
  }

  SUBCASE("combinatorial guard") {
    CHECK_THROWS_AS(brute_force_exponent(s, {1.0, 1.0}, 0.05, 4, 9),
                    usage_error);
  }
}

TEST_CASE("sum rate envelope") {
  const SourceModel s = reference_example();
  SolverConfig cfg = quick_cfg(6);

  SUBCASE("zero total rate") {
    const EnvelopeResult env = sum_rate_envelope(s, 0.0, 0.07, 3, cfg);
    CHECK(env.best.theta == doctest::Approx(0.0).epsilon(1e-6));
  }

  SUBCASE("large rate saturates") {
    const EnvelopeResult env = sum_rate_envelope(s, 2.0, -1.0, 11, cfg);
    CHECK(env.best.theta == doctest::Approx(0.7136).epsilon(2e-3 / 0.7136));
  }

  SUBCASE("vl dominates fl at equal sum rate") {
    const EnvelopeResult vl = sum_rate_envelope(s, 0.8, 0.07, 9, cfg);
    const EnvelopeResult fl = sum_rate_envelope(s, 0.8, -1.0, 9, cfg);
    CHECK(vl.best.theta >= fl.best.theta - 1e-6);
  }
}

TEST_CASE("determinism of the solver") {
  const SourceModel s = reference_example();
  const SolverConfig cfg = quick_cfg();
  const ExponentResult a = fixed_length_exponent(s, {0.4, 0.7}, cfg);
  const ExponentResult b = fixed_length_exponent(s, {0.4, 0.7}, cfg);
  CHECK(a.theta == b.theta);
  CHECK(a.best_restart == b.best_restart);
  CHECK((a.achieving.pu1_given_x1.table() - b.achieving.pu1_given_x1.table())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}
