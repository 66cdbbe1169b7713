#pragma once

// Recovery of independent binary components when the joint is a word
// permutation of a product distribution.
//
// The probabilities are sorted once. The all-zeros output word takes the
// smallest one, p_1 = prod(pi_i). After k parameters are resolved, the
// sorted list of words whose bits k..n-1 are zero is known. The smallest
// probability missing from that list must be p_1 * (1 - pi_k) / pi_k, and a
// binary search over the matching prefix finds it. Merging the list with its
// rescaled copy then yields the next level in linear time.

#include <cstdint>

#include "finita/core.hpp"

namespace finita {

struct RecoveryResult {
  /// pi_0 >= pi_1 >= ... >= pi_{n-1}, all <= 1/2.
  MarginalParams params;
  /// apply_mapping(joint, mapping) equals product_joint(params) within tol.
  WordMapping mapping;
  /// Max absolute entry difference of the final reconstruction.
  double residual = 0.0;
  /// Probability comparisons made by the prefix searches and merges.
  std::uint64_t comparisons = 0;
};

RecoveryResult recover_product_params(const JointDistribution& joint, double tol = 1e-9);

/// probs[w] = prod_i (pi_i if bit i of w is 0 else 1 - pi_i).
JointDistribution product_joint(const MarginalParams& pi);
JointDistribution product_joint(const Eigen::VectorXd& pi);

}  // namespace finita
