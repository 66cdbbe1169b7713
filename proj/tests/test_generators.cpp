#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "finita/exact_recovery.hpp"
#include "finita/generators.hpp"
#include "oracles.hpp"

using namespace finita;

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("zipf law") {
  const Eigen::VectorXd two = zipf(2, 1.0);
  CHECK(two[0] == doctest::Approx(2.0 / 3));
  CHECK(two[1] == doctest::Approx(1.0 / 3));
  CHECK(zipf(1, 2.0)[0] == 1.0);
  for (double s : {0.5, 1.0, 1.6, 3.0}) {
    const Eigen::VectorXd z = zipf(16, s);
    CHECK(std::abs(z.sum() - 1.0) <= 1e-15);
    for (int k = 1; k < 16; ++k) CHECK(z[k] < z[k - 1]);
  }
  CHECK_THROWS_AS(zipf(4, 0.0), Error);
}

TEST_CASE("markov joint") {
  const JointDistribution two = markov_joint({2, 0.1});
  CHECK(two[0b00] == doctest::Approx(0.45));
  CHECK(two[0b11] == doctest::Approx(0.45));
  CHECK(two[0b01] == doctest::Approx(0.05));
  CHECK(two[0b10] == doctest::Approx(0.05));

  const JointDistribution flat = markov_joint({5, 0.5});
  for (Word w = 0; w < 32; ++w) CHECK(flat[w] == doctest::Approx(1.0 / 32));

  // Words are written first position first: "0100" has position 1 set.
  const JointDistribution four = markov_joint({4, 0.2});
  CHECK(four[0b0010] == doctest::Approx(four[0b0100]));
  CHECK(four[0b0010] != doctest::Approx(four[0b1000]));

  for (int n = 2; n <= 6; ++n) {
    const JointDistribution j = markov_joint({n, 0.3});
    for (int i = 0; i < n; ++i) CHECK(marginal(j, i)[0] == doctest::Approx(0.5));
  }
  CHECK_THROWS_AS(markov_joint({3, 1.0}), Error);
}

TEST_CASE("markov unique probabilities depend only on the transition count") {
  // With the probability a function of the transition count T in 0..n-1,
  // there are exactly n distinct values, below the n(n-1)+2 bound.
  for (int n = 3; n <= 10; ++n) {
    for (double flip : {0.1, 0.2, 0.3}) {
      const std::size_t count = count_unique_probs(markov_joint({n, flip}));
      CHECK(count == static_cast<std::size_t>(n));
      CHECK(count <= static_cast<std::size_t>(n * (n - 1) + 2));
    }
  }
}

TEST_CASE("count unique probabilities") {
  CHECK(count_unique_probs(JointDistribution::uniform(4, 2)) == 1);
  CHECK(count_unique_probs(JointDistribution(1, 2, Eigen::Vector2d(0.3, 0.7))) == 2);
}

TEST_CASE("block iid joints") {
  const Eigen::Vector4d block(0.4, 0.3, 0.2, 0.1);
  const JointDistribution same = block_iid_joint(2, 2, block);
  for (Word w = 0; w < 4; ++w) CHECK(same[w] == doctest::Approx(block[w]));

  const JointDistribution four = block_iid_joint(4, 2, block);
  for (Word w = 0; w < 16; ++w) CHECK(four[w] == doctest::Approx(block[w & 3] * block[w >> 2]));
  // 0.4 * 0.1 == 0.2 * 0.2 merges two of the ten multisets.
  CHECK(count_unique_probs(four) == 9);

  for (int n = 1; n <= 10; ++n) {
    CHECK(count_unique_probs(block_iid_joint(n, 1, Eigen::Vector2d(0.3, 0.7))) == static_cast<std::size_t>(n + 1));
  }
  CHECK_THROWS_AS(block_iid_joint(5, 2, block), Error);
}

TEST_CASE("block iid bound holds with equality for generic blocks") {
  for (int r = 1; r <= 3; ++r) {
    for (int blocks = 1; blocks * r <= 9; ++blocks) {
      const JointDistribution b = random_joint(r, 2, 40 + static_cast<std::uint64_t>(r * 10 + blocks));
      const std::size_t count = count_unique_probs(block_iid_joint(blocks * r, r, b.probs()));
      CHECK(count == binomial(static_cast<std::uint64_t>(blocks + (1 << r) - 1), static_cast<std::uint64_t>(blocks)));
    }
  }
}

TEST_CASE("scrambled products") {
  const ScrambledProduct a = random_product_scrambled(6, 17);
  const ScrambledProduct b = random_product_scrambled(6, 17);
  CHECK(a.joint.probs() == b.joint.probs());
  CHECK(a.scramble == b.scramble);
  double sum = 0.0;
  for (int i = 0; i < 6; ++i) {
    CHECK(a.pi[i] > 0.05);
    CHECK(a.pi[i] < 0.45);
    sum += oracle::hb(a.pi[i]);
  }
  CHECK(std::abs(entropy(a.joint.probs()) - sum) <= 1e-12);
  std::vector<double> truth = oracle::to_vec(a.pi);
  std::sort(truth.begin(), truth.end(), std::greater<>());
  const Eigen::VectorXd got = recover_product_params(a.joint).params.zero_probs();
  for (int i = 0; i < 6; ++i) CHECK(got[i] == doctest::Approx(truth[static_cast<std::size_t>(i)]).epsilon(1e-9));
}

TEST_CASE("random joints are valid and reproducible") {
  const JointDistribution a = random_joint(3, 4, 9);
  CHECK(a.size() == 64);
  CHECK(a.probs() == random_joint(3, 4, 9).probs());
  CHECK(a.probs().minCoeff() >= 0.0);
}
