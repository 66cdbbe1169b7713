#include <doctest.h>

#include <algorithm>

#include "finita/branch_bound.hpp"
#include "finita/exact_recovery.hpp"
#include "finita/generators.hpp"
#include "oracles.hpp"

using namespace finita;

namespace {

std::vector<double> sorted_probs(const JointDistribution& j) {
  std::vector<double> p = oracle::to_vec(j.probs());
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace

TEST_CASE("minorant relation") {
  for (Word b = 0; b < 8; ++b) CHECK(is_minorant(0b111, b, 3));
  for (Word a = 0; a < 8; ++a) CHECK(is_minorant(a, 0b000, 3));
  CHECK(is_minorant(0b011, 0b010, 3));
  CHECK_FALSE(is_minorant(0b010, 0b011, 3));
  CHECK_FALSE(is_minorant(0b001, 0b010, 3));
}

TEST_CASE("largest minorants") {
  const Word root[] = {0};
  CHECK(largest_minorants(root, 3) == std::vector<Word>{0b001, 0b010, 0b100});
  const Word three[] = {0, 1, 2};
  CHECK(largest_minorants(three, 2) == std::vector<Word>{3});
  const Word two[] = {0, 1};
  CHECK(largest_minorants(two, 3) == std::vector<Word>{0b010, 0b100});

  const Word no_root[] = {1};
  CHECK_THROWS_AS(largest_minorants(no_root, 2), Error);
  const Word gap[] = {0, 3};
  try {
    largest_minorants(gap, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotDownClosed);
  }
}

TEST_CASE("lower bound at the root and at a leaf") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const JointDistribution j = oracle::random_joint(3, 2, seed);
    const auto p = sorted_probs(j);
    const double optimum = oracle::brute_force_binary_min(p, 3);
    CHECK(lower_bound(SearchNode::root(3), p) <= optimum + 1e-12);

    SearchNode leaf = SearchNode::root(3);
    const Word order[] = {0, 1, 2, 4, 3, 5, 6, 7};
    double exact = 0.0;
    std::vector<double> zero(3, 0.0);
    for (std::size_t r = 0; r < 8; ++r) {
      leaf.allocate(order[r], p[r]);
      for (int i = 0; i < 3; ++i) {
        if (((order[r] >> i) & 1u) == 0) zero[static_cast<std::size_t>(i)] += p[r];
      }
    }
    for (double z : zero) exact += oracle::hb(std::min(z, 0.5));
    CHECK(lower_bound(leaf, p) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("two components are allocated in ascending order") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const JointDistribution j = oracle::random_joint(2, 2, seed);
    const BranchBoundResult r = solve_exact(j);
    const JointDistribution out = apply_mapping(j, r.mapping);
    CHECK(out[0] <= out[1]);
    CHECK(out[0] <= out[2]);
    CHECK(out[1] <= out[3]);
    CHECK(out[2] <= out[3]);
    CHECK(r.value == doctest::Approx(oracle::brute_force_binary_min(sorted_probs(j), 2)).epsilon(1e-12));
  }
}

TEST_CASE("three components match the exhaustive oracle") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const JointDistribution j = oracle::random_joint(3, 2, 50 + seed);
    const BranchBoundResult r = solve_exact(j);
    const double optimum = oracle::brute_force_binary_min(sorted_probs(j), 3);
    CHECK(std::abs(r.value - optimum) <= 1e-12);
    CHECK(r.optimal);
    CHECK(r.value <= sum_marginal_entropies(j) + 1e-12);
    CHECK(sum_marginal_entropies(apply_mapping(j, r.mapping)) == doctest::Approx(r.value).epsilon(1e-12));
  }
}

TEST_CASE("pruning and symmetry change node counts, not the optimum") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const JointDistribution j = oracle::random_joint(3, 2, 90 + seed);
    const BranchBoundResult fast = solve_exact(j);
    BranchBoundOptions plain;
    plain.prune = false;
    plain.symmetry = false;
    const BranchBoundResult slow = solve_exact(j, plain);
    CHECK(std::abs(fast.value - slow.value) <= 1e-12);
    CHECK(fast.stats.nodes_expanded < slow.stats.nodes_expanded);
    CHECK(slow.stats.pruned == 0);
  }
}

TEST_CASE("product inputs reach zero total correlation") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const ScrambledProduct s = random_product_scrambled(4, seed);
    const BranchBoundResult r = solve_exact(s.joint);
    CHECK(r.value == doctest::Approx(entropy(s.joint.probs())).epsilon(1e-9));
  }
}

TEST_CASE("outputs respect the minorant order and the canonical half") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int n = 2 + static_cast<int>(seed % 3);
    const JointDistribution j = oracle::random_joint(n, 2, 200 + seed);
    const BranchBoundResult r = solve_exact(j);
    const JointDistribution out = apply_mapping(j, r.mapping);
    for (Word a = 0; a < out.size(); ++a) {
      for (Word b = 0; b < out.size(); ++b) {
        if (is_minorant(a, b, n)) CHECK(out[a] >= out[b]);
      }
    }
    const Eigen::VectorXd pi = zero_probs(out);
    for (int i = 0; i < n; ++i) CHECK(pi[i] <= 0.5 + 1e-12);
  }
}

TEST_CASE("identity optimum still yields an ordered allocation") {
  const JointDistribution j = product_joint(Eigen::Vector3d(0.3, 0.2, 0.1));
  const BranchBoundResult r = solve_exact(j);
  const JointDistribution out = apply_mapping(j, r.mapping);
  for (Word a = 0; a < 8; ++a) {
    for (Word b = 0; b < 8; ++b) {
      if (is_minorant(a, b, 3)) CHECK(out[a] >= out[b] - 1e-15);
    }
  }
}

TEST_CASE("limits and argument checks") {
  const JointDistribution j = oracle::random_joint(4, 2, 3);
  BranchBoundOptions tiny;
  tiny.max_nodes = 5;
  const BranchBoundResult r = solve_exact(j, tiny);
  CHECK_FALSE(r.optimal);
  CHECK(r.value <= sum_marginal_entropies(j) + 1e-12);

  BranchBoundOptions capped;
  capped.max_n = 3;
  CHECK_THROWS_AS(solve_exact(j, capped), Error);
  CHECK_THROWS_AS(solve_exact(JointDistribution::uniform(2, 3)), Error);
}
