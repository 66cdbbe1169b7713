#pragma once

// Relaxation for alphabets of size q.
//
// The marginal entropy of a component is split as
//   H(Y_i) = sum_{s < q-1} phi(x_s) + phi(1 - sum_s x_s),  phi(x) = -x log2 x,
// with x_s the q-1 smallest symbol masses (each <= 1/2) and the largest mass
// as the remainder. Every phi term is bounded by a tangent: the parameters
// by the tangent of their region, the remainder by one tangent per cell.
// A cell is the sorted multiset of the parameters' regions.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "finita/core.hpp"
#include "finita/plr.hpp"

namespace finita {

/// Sorted (q-1)-tuple of region indices.
struct Cell {
  std::vector<int> regions;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct CellEnumeration {
  /// Every canonical cell, in lexicographic order.
  std::vector<Cell> cells;
  /// Parallel to `cells`: false when the parameter ranges cannot sum to at
  /// most one with the remainder being the largest mass.
  std::vector<bool> feasible;

  std::size_t feasible_count() const;
  std::vector<Cell> feasible_cells() const;
};

CellEnumeration enumerate_cells(int q, int k, TangentSchedule schedule = TangentSchedule::Nested);

/// Linear surrogate of the marginal entropy for a single component.
struct ComponentSurrogate {
  /// Coefficient of each output symbol's mass; the last symbol (remainder)
  /// has coefficient zero.
  std::vector<double> coeff;
  double offset = 0.0;
};

class QaryEntropyModel {
 public:
  QaryEntropyModel(int q, int k, TangentSchedule schedule = TangentSchedule::Nested);

  int q() const { return q_; }
  int k() const { return regions_.k(); }
  /// Region partition of [0, 1/2] shared with the binary envelope.
  const PiecewiseLinearBound& regions() const { return regions_; }

  /// Tangent of phi at the tangent point of `region`, evaluated at x.
  double phi_bound(int region, double x) const;
  /// Tangent of phi(1 - t) used by `cell`, evaluated at t.
  double remainder_bound(const Cell& cell, double t) const;
  /// Parameter sum at which the remainder tangent touches.
  double remainder_anchor(const Cell& cell) const;

  ComponentSurrogate surrogate(const Cell& cell) const;

  /// Cell of a realized marginal: regions of its q-1 smallest masses.
  Cell cell_of(const Eigen::VectorXd& marginal) const;

  bool is_feasible(const Cell& cell) const;

 private:
  int q_;
  PiecewiseLinearBound regions_;
};

struct QaryEval {
  double value = 0.0;
  double true_objective = 0.0;
  std::vector<Cell> realized;
  bool feasible = false;
};

/// Linear problems over assignments of cells to components.
class QaryProblem {
 public:
  QaryProblem(const JointDistribution& joint, QaryEntropyModel model);

  const QaryEntropyModel& model() const { return model_; }

  /// `cells[i]` is the assumed cell of component i.
  QaryEval evaluate(const std::vector<Cell>& cells) const;
  /// Allocation mapping of the assignment with symbols relabeled per
  /// component so masses ascend and the remainder is the last symbol.
  WordMapping mapping_for(const std::vector<Cell>& cells) const;

 private:
  void allocate(const std::vector<Cell>& cells, std::vector<Word>& words, std::vector<double>& coeff,
                double& offset) const;

  const JointDistribution* joint_;
  QaryEntropyModel model_;
  std::vector<Word> input_desc_;
  std::vector<double> probs_desc_;
};

struct QaryOptions {
  TangentSchedule schedule = TangentSchedule::Nested;
  /// Upper limit on the number of cell assignments tried by exhaustive search.
  std::uint64_t max_assignments = 20'000'000;
};

struct QaryResult {
  /// Feasible assignment with the smallest surrogate value.
  WordMapping mapping;
  double ub_value = 0.0;
  double true_objective = 0.0;
  /// Lowest true objective over feasible candidates and the identity.
  WordMapping best_true_mapping;
  double best_true_objective = 0.0;
  std::size_t assignments = 0;
  std::size_t feasible_assignments = 0;
};

/// Every nondecreasing sequence of n feasible cells. Throws WorkCapExceeded
/// when their number exceeds options.max_assignments.
QaryResult solve_exhaustive_qary(const JointDistribution& joint, int k, const QaryOptions& options = {});

struct DescentTrace {
  std::size_t init_index = 0;
  std::size_t steps = 0;
  double final_value = 0.0;
  double true_objective = 0.0;
  bool feasible = false;
};

struct DescentResult {
  WordMapping mapping;
  /// Surrogate value of the returned candidate.
  double value = 0.0;
  double true_objective = 0.0;
  std::vector<DescentTrace> trace;
};

/// Cell-hopping heuristic. Each initialization draws random cells, solves,
/// and moves to the realized cells until they match the assumed ones. A walk
/// also ends when the value stops decreasing by more than 1e-10 or a cell
/// assignment repeats; its last solution is kept as a candidate. The
/// candidate with the lowest true objective is returned.
DescentResult objective_descent(const JointDistribution& joint, int k, std::size_t inits, std::uint64_t seed,
                                const QaryOptions& options = {});

}  // namespace finita
