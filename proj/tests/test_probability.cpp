#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coopht/probability.hpp"
#include "coopht/rng.hpp"

#include <cmath>
#include <random>

using namespace coopht;

namespace {

JointPmf random_joint(std::mt19937_64& rng, std::vector<int> sizes) {
  int total = 1;
  for (int s : sizes) total *= s;
  Eigen::VectorXd v = dirichlet1(rng, total);
  return JointPmf(std::move(sizes), std::move(v));
}

}  // namespace

TEST_CASE("entropy basics") {
  CHECK(entropy(Pmf::uniform(2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(entropy(Pmf::point_mass(5, 2)) == doctest::Approx(0.0));
  // direct evaluation of -0.05 log2 0.05 - 0.95 log2 0.95
  const double expect = -0.05 * std::log2(0.05) - 0.95 * std::log2(0.95);
  CHECK(entropy(Pmf::bernoulli(0.95)) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(entropy(Pmf::bernoulli(0.95)) == doctest::Approx(0.28640).epsilon(1e-4));
}

TEST_CASE("binary_entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(binary_entropy(0.0) == doctest::Approx(0.0));
  CHECK(binary_entropy(1.0) == doctest::Approx(0.0));
  CHECK(binary_entropy(0.05) == doctest::Approx(0.28640).epsilon(1e-4));
  CHECK_THROWS_AS(binary_entropy(-0.1), usage_error);
  CHECK_THROWS_AS(binary_entropy(1.1), usage_error);
}

TEST_CASE("pmf validation") {
  Eigen::VectorXd bad(2);
  bad << 0.5, 0.4;
  CHECK_THROWS_AS(Pmf{bad}, validation_error);
  bad << 1.2, -0.2;
  CHECK_THROWS_AS(Pmf{bad}, validation_error);
}

TEST_CASE("marginalize") {
  const JointPmf prod = JointPmf::product(Pmf::bernoulli(0.3), Pmf::bernoulli(0.8));
  const Pmf m0 = axis_marginal(prod, 0);
  CHECK(m0[1] == doctest::Approx(0.3).epsilon(1e-12));
  const JointPmf full = marginalize(prod, {0, 1});
  CHECK((full.probs() - prod.probs()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(marginalize(prod, {}), usage_error);
  CHECK_THROWS_AS(marginalize(prod, {2}), usage_error);

  // two-step equals one-step
  std::mt19937_64 rng(42);
  const JointPmf j = random_joint(rng, {2, 3, 2});
  const JointPmf two = marginalize(marginalize(j, {0, 2}), {0});
  const JointPmf one = marginalize(j, {0});
  CHECK((two.probs() - one.probs()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mutual information basics") {
  const JointPmf indep = JointPmf::product(Pmf::bernoulli(0.3), Pmf::bernoulli(0.6));
  CHECK(mutual_information(indep, {0}, {1}) == doctest::Approx(0.0).epsilon(1e-12));

  // BSC(0.05), uniform input
  Eigen::VectorXd bsc(4);
  bsc << 0.5 * 0.95, 0.5 * 0.05, 0.5 * 0.05, 0.5 * 0.95;
  const JointPmf jb({2, 2}, bsc);
  CHECK(mutual_information(jb, {0}, {1}) ==
        doctest::Approx(1.0 - binary_entropy(0.05)).epsilon(1e-12));
  CHECK(mutual_information(jb, {0}, {1}) == doctest::Approx(0.7136).epsilon(1e-3));

  // I(X;X) = H(X)
  Eigen::VectorXd copy(4);
  copy << 0.7, 0.0, 0.0, 0.3;
  const JointPmf jc({2, 2}, copy);
  CHECK(mutual_information(jc, {0}, {1}) ==
        doctest::Approx(binary_entropy(0.3)).epsilon(1e-9));

  CHECK_THROWS_AS(mutual_information(jc, {0}, {0}), usage_error);
}

TEST_CASE("conditional mutual information") {
  // Markov chain A <-> C <-> B via product of channels
  const Pmf pc = Pmf::bernoulli(0.4);
  const CondPmf a_given_c = CondPmf::bsc(0.2);
  const CondPmf b_given_c = CondPmf::bsc(0.3);
  Eigen::VectorXd v(8);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        v((a * 2 + b) * 2 + c) = pc[c] * a_given_c.at(c, a) * b_given_c.at(c, b);
  const JointPmf j({2, 2, 2}, v);
  CHECK(conditional_mutual_information(j, {0}, {1}, {2}) ==
        doctest::Approx(0.0).epsilon(1e-9));

  // degenerate conditioning equals plain MI
  std::mt19937_64 rng(7);
  Eigen::VectorXd w = dirichlet1(rng, 4);
  Eigen::VectorXd w3(4);
  w3 = w;
  const JointPmf j2({2, 2}, w);
  Eigen::VectorXd wj(4 * 1);
  const JointPmf j3({2, 2, 1}, w3);
  CHECK(conditional_mutual_information(j3, {0}, {1}, {2}) ==
        doctest::Approx(mutual_information(j2, {0}, {1})).epsilon(1e-12));

  CHECK_THROWS_AS(conditional_mutual_information(j3, {0}, {1}, {1}), usage_error);
}

TEST_CASE("chain rule property") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const JointPmf j = random_joint(rng, {2, 3, 2});
    const double lhs = mutual_information(j, {0, 1}, {2});
    const double rhs = mutual_information(j, {0}, {2}) +
                       conditional_mutual_information(j, {1}, {2}, {0});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("nonnegativity properties") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const JointPmf j = random_joint(rng, {2, 2, 3});
    CHECK(mutual_information(j, {0}, {1}) >= 0.0);
    CHECK(conditional_mutual_information(j, {0}, {1}, {2}) >= 0.0);
    Eigen::VectorXd p = dirichlet1(rng, 4), q = dirichlet1(rng, 4);
    CHECK(kl_divergence(Pmf(p), Pmf(q)) >= 0.0);
  }
}

TEST_CASE("kl divergence") {
  const Pmf u = Pmf::uniform(2);
  CHECK(kl_divergence(u, u) == doctest::Approx(0.0));
  CHECK(kl_divergence(Pmf::point_mass(2, 0), u) == doctest::Approx(1.0));
  CHECK(std::isinf(kl_divergence(u, Pmf::point_mass(2, 0))));
  CHECK_THROWS_AS(kl_divergence(u, Pmf::uniform(3)), usage_error);
}

TEST_CASE("build_cooperative_joint") {
  // binary example pieces: X1 ~ Bern(0.5), X2 = X1 thru BSC(0.75),
  // Y = X2 thru BSC(0.95)
  Eigen::VectorXd w(4);
  const CondPmf x2x1 = CondPmf::bsc(0.75);
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2) w(x1 * 2 + x2) = 0.5 * x2x1.at(x1, x2);
  const JointPmf px1x2({2, 2}, w);
  const CondPmf pyx2 = CondPmf::bsc(0.95);

  SUBCASE("constant auxiliaries reduce to the source") {
    const CondPmf u1c = CondPmf::uniform(2, 1);
    const CondPmf u2c = CondPmf::uniform(1 * 2, 1);
    const JointPmf j = build_cooperative_joint(px1x2, pyx2, u1c, u2c);
    const JointPmf src = marginalize(j, {2, 3, 4});
    // compare against direct product
    Eigen::VectorXd expect(8);
    for (int x1 = 0; x1 < 2; ++x1)
      for (int x2 = 0; x2 < 2; ++x2)
        for (int y = 0; y < 2; ++y)
          expect((x1 * 2 + x2) * 2 + y) = w(x1 * 2 + x2) * pyx2.at(x2, y);
    CHECK((src.probs() - expect).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("identity auxiliaries copy the sources") {
    const CondPmf u1 = CondPmf::identity(2);
    Eigen::MatrixXd b(4, 2);  // rows (u1,x2): copy x2
    b << 1, 0, 0, 1, 1, 0, 0, 1;
    const JointPmf j = build_cooperative_joint(px1x2, pyx2, u1, CondPmf(b));
    CHECK(mutual_information(j, {0, 1}, {4}) ==
          doctest::Approx(mutual_information(j, {2, 3}, {4})).epsilon(1e-9));
  }

  SUBCASE("forced Markov chains") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd a(2, 2), b(4, 2);
      for (int i = 0; i < 2; ++i) a.row(i) = dirichlet1(rng, 2).transpose();
      for (int i = 0; i < 4; ++i) b.row(i) = dirichlet1(rng, 2).transpose();
      const JointPmf j = build_cooperative_joint(px1x2, pyx2, CondPmf(a), CondPmf(b));
      // U1 <-> X1 <-> (X2,Y)
      CHECK(conditional_mutual_information(j, {0}, {3, 4}, {2}) < 1e-9);
      // U2 <-> (U1,X2) <-> (X1,Y)
      CHECK(conditional_mutual_information(j, {1}, {2, 4}, {0, 3}) < 1e-9);
      // X1 <-> X2 <-> Y
      CHECK(conditional_mutual_information(j, {2}, {4}, {3}) < 1e-9);
      // data processing
      CHECK(mutual_information(j, {0, 1}, {4}) <=
            mutual_information(j, {2, 3}, {4}) + 1e-9);
    }
  }

  SUBCASE("size mismatch") {
    const CondPmf u1 = CondPmf::identity(2);
    const CondPmf u2_bad = CondPmf::uniform(3, 2);
    CHECK_THROWS_AS(build_cooperative_joint(px1x2, pyx2, u1, u2_bad),
                    usage_error);
  }
}
