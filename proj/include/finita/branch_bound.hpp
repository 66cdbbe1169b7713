#pragma once

// Exact minimization of sum_i h_b(P(Y_i = 0)) over all word bijections.
//
// Word a is a minorant of word b when every zero bit of a is also zero in b,
// i.e. the ones of b are a subset of the ones of a. An optimal allocation
// gives minorants at least as much mass as their majorants. The search
// therefore assigns the probabilities in ascending order, each one to a word
// whose strict majorants are all allocated already (a "largest minorant"),
// so every leaf is a linear extension of the Boolean lattice.

#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include "finita/core.hpp"

namespace finita {

/// zeros(a) is a subset of zeros(b).
bool is_minorant(Word a, Word b, int n);

/// Unallocated words all of whose strict majorants are allocated, ascending.
/// Throws NotDownClosed unless `allocated` contains the all-zeros word and
/// every majorant of an allocated word.
std::vector<Word> largest_minorants(std::span<const Word> allocated, int n);

/// State of a partial allocation: probabilities sorted_p[0 .. allocated)
/// sit on words, and zero_mass/zero_slots summarize each bit's Pi_i set.
struct SearchNode {
  int n = 0;
  std::size_t allocated = 0;
  Eigen::VectorXd zero_mass;
  std::vector<int> zero_slots_used;

  static SearchNode root(int n);
  void allocate(Word w, double p);
};

/// Admissible bound: each Pi_i is filled with the smallest remaining
/// probabilities, and h_b is clamped at 1/2 where it stops increasing.
double lower_bound(const SearchNode& node, std::span<const double> sorted_p);

struct BranchBoundOptions {
  std::uint64_t max_nodes = 200'000'000;
  std::chrono::milliseconds time_limit{0};  // zero means no limit
  bool prune = true;
  bool symmetry = true;
  int max_n = 12;
};

struct BranchBoundStats {
  std::uint64_t nodes_expanded = 0;
  std::uint64_t pruned = 0;
  std::uint64_t symmetric_skipped = 0;
  std::uint64_t leaves = 0;
};

struct BranchBoundResult {
  WordMapping mapping;
  double value = 0.0;
  /// False when a node or time limit stopped the search early; the result is
  /// then the best incumbent found.
  bool optimal = true;
  BranchBoundStats stats;
};

BranchBoundResult solve_exact(const JointDistribution& joint, const BranchBoundOptions& options = {});

}  // namespace finita
