#pragma once

#include <cstdint>

#include "finita/core.hpp"

namespace finita {

/// Zipf law over symbols 1..q: entry k-1 is proportional to k^{-s}.
Eigen::VectorXd zipf(int q, double s);

/// Stationary symmetric binary Markov chain over n positions.
struct MarkovSpec {
  int n = 4;
  /// Probability of changing state between adjacent positions.
  double flip = 0.2;
};

/// P(word) = 1/2 * flip^T * (1 - flip)^(n-1-T), T = adjacent transitions.
JointDistribution markov_joint(const MarkovSpec& spec);

/// Number of classes of probs under |a - b| <= tol * max(a, b), grouping
/// neighbours in sorted order.
std::size_t count_unique_probs(const JointDistribution& joint, double tol = 1e-12);

/// Product of n/r independent copies of a distribution over 2^r words.
/// Block j occupies components j*r .. j*r + r - 1.
JointDistribution block_iid_joint(int n, int r, const Eigen::VectorXd& block_dist);

struct ScrambledProduct {
  JointDistribution joint;
  /// Ground-truth pi_i = P(X_i = 0) of the unscrambled source.
  Eigen::VectorXd pi;
  /// The word permutation applied to the product joint.
  WordMapping scramble;
};

/// Draws pi uniformly from (0.05, 0.45)^n, builds the product joint and
/// applies a seeded random word permutation.
ScrambledProduct random_product_scrambled(int n, std::uint64_t seed);

/// Uniformly random word permutation of the given size.
WordMapping random_mapping(std::size_t size, std::uint64_t seed);

/// Dirichlet(1, ..., 1) joint over q^n words; random test fixtures.
JointDistribution random_joint(int n, int q, std::uint64_t seed);

}  // namespace finita
