#pragma once

// Piecewise-linear relaxation of the binary objective.
//
// h_b is replaced on [0, 1/2] by the lower envelope of k tangents. Fixing
// which linear piece each component uses (a "placement") turns the objective
// into sum_w c_w P(Y = w) + d. By the rearrangement inequality that is
// minimized by pairing the largest probability with the smallest
// coefficient. Enumerating all C(n+k-1, n) placements and keeping the
// solutions whose marginals land in their assumed regions yields an upper
// bound on the optimum, tight as k grows.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "finita/core.hpp"

namespace finita {

enum class TangentSchedule {
  /// t_j = j / (2k), j = 1..k. Tangent sets are nested under k -> 2k and the
  /// last tangent touches h_b at its maximum.
  Nested,
  /// t_j = (j - 1/2) / (2k).
  Midpoint,
};

struct LinearPiece {
  double lo = 0.0;
  double hi = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double tangent = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
};

/// Lower envelope of tangents to h_b, partitioning [0, 1/2] into regions.
class PiecewiseLinearBound {
 public:
  PiecewiseLinearBound(std::vector<LinearPiece> pieces);

  int k() const { return static_cast<int>(pieces_.size()); }
  const std::vector<LinearPiece>& pieces() const { return pieces_; }
  const LinearPiece& piece(int region) const { return pieces_[static_cast<std::size_t>(region)]; }
  std::vector<double> tangent_points() const;

  /// Region containing x in [0, 1/2]. Points within 1e-12 of a breakpoint
  /// belong to the lower-index region.
  int region(double x) const;

  double operator()(double x) const { return piece(region(x))(x); }

 private:
  std::vector<LinearPiece> pieces_;
};

PiecewiseLinearBound build_tangent_bound(int k, TangentSchedule schedule = TangentSchedule::Nested);

/// How many components sit in each region; counts sum to n.
struct Placement {
  std::vector<int> counts;

  /// Region of every component: the first counts[0] components use region
  /// 0, the next counts[1] region 1, and so on.
  std::vector<int> regions() const;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// All C(n+k-1, n) placements, starting at (n, 0, ..., 0) and moving mass to
/// later regions in lexicographically descending order.
std::vector<Placement> enumerate_placements(int n, int k);
void for_each_placement(int n, int k, const std::function<void(const Placement&)>& visit);
std::size_t placement_count(int n, int k);

struct CoefficientVector {
  Eigen::VectorXd c;
  double d = 0.0;
  /// Distinct coefficient values, ascending, with multiplicities.
  std::vector<std::pair<double, std::size_t>> dedup;
};

CoefficientVector coefficients_for_placement(const Placement& placement, const PiecewiseLinearBound& bound, int n);

struct Allocation {
  WordMapping mapping;
  double value = 0.0;
};

/// Minimizes sum_w c_w P(Y = w) + d over bijections: the largest
/// probability takes the smallest coefficient. Ties resolve by word index.
Allocation allocate_min(const CoefficientVector& coeffs, const Eigen::VectorXd& probs);

/// Same minimum from the deduplicated coefficients and descending probs.
double allocate_min_value(std::span<const std::pair<double, std::size_t>> dedup, double d,
                          std::span<const double> probs_descending);

/// Every placement's sorted coefficient row, so that all linear problems
/// are solved by one product with the descending probability vector.
struct CoefficientMatrix {
  std::vector<Placement> placements;
  Eigen::MatrixXd rows;  // placements x 2^n, each row ascending
  Eigen::VectorXd offsets;
  std::vector<std::size_t> distinct_per_row;

  Eigen::VectorXd values(std::span<const double> probs_descending) const;
  /// Largest distinct count over rows, bounded by (n/k + 1)^k.
  std::size_t max_distinct() const;
};

CoefficientMatrix coefficient_matrix(int n, int k, const PiecewiseLinearBound& bound);

/// Outcome of one placement's unconstrained linear problem.
struct PlacementEval {
  double value = 0.0;
  /// Realized P(Y_i = 0), flipped into [0, 1/2].
  Eigen::VectorXd pi;
  Word flips = 0;
  std::vector<int> realized_regions;
  bool feasible = false;
  double true_objective = 0.0;
};

/// Pre-sorted joint plus a bound; evaluates placements independently.
class PlrProblem {
 public:
  PlrProblem(const JointDistribution& joint, PiecewiseLinearBound bound);

  int n() const { return n_; }
  const PiecewiseLinearBound& bound() const { return bound_; }
  std::span<const double> probs_descending() const { return probs_desc_; }

  PlacementEval evaluate(const Placement& placement) const;
  /// Allocation mapping of a placement with flips applied, so every output
  /// marginal satisfies P(Y_i = 0) <= 1/2.
  WordMapping mapping_for(const Placement& placement) const;

  /// Linear value of the identity allocation in its own cell, i.e. the
  /// envelope evaluated at the input marginals.
  double identity_envelope() const;

 private:
  // Words in ascending coefficient order (ties by word index) and the
  // coefficient of each.
  void order_words(const Placement& placement, std::vector<Word>& words, std::vector<double>& coeff) const;

  const JointDistribution* joint_;
  int n_;
  PiecewiseLinearBound bound_;
  std::vector<Word> input_desc_;
  std::vector<double> probs_desc_;
};

struct PlrOptions {
  TangentSchedule schedule = TangentSchedule::Nested;
  /// Evaluate every placement's linear value through coefficient_matrix().
  bool matrix_form = false;
};

struct PlrResult {
  /// Feasible placement with the smallest linear value (the upper bound).
  WordMapping mapping;
  Placement placement;
  double ub_value = 0.0;
  /// sum_i h_b(pi_i) of `mapping`.
  double true_objective = 0.0;
  /// Lowest true objective over the feasible candidates and the identity.
  WordMapping best_true_mapping;
  double best_true_objective = 0.0;
  std::size_t placements = 0;
  std::size_t feasible_placements_visited = 0;
};

PlrResult solve_plr(const JointDistribution& joint, int k, const PlrOptions& options = {});

}  // namespace finita
