#pragma once

// Experiment harnesses: blind source separation over a modular group, and
// block-wise coding of words drawn from a large alphabet.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "finita/core.hpp"

namespace finita {

/// N realizations of an n-component vector over alphabet q.
struct SampleSet {
  std::size_t N = 0;
  int n = 0;
  int q = 2;
  std::vector<Word> words;

  /// Throws IndexOutOfRange if a word is not below q^n.
  void validate() const;
};

/// Draws N values from Zipf(s) over 1..2^bits and stores value-1 as a
/// bits-long binary word.
SampleSet sample_zipf(std::size_t N, double s, int bits, std::uint64_t seed);

/// counts / N over the sub-words formed by `block` (block[0] becomes the
/// least-significant digit). Throws EmptyBlock for an empty block.
JointDistribution empirical_joint(const SampleSet& samples, std::span<const int> block);
double empirical_entropy(const SampleSet& samples);

struct BlockPartition {
  int B = 1;
  int b = 1;
  std::vector<std::vector<int>> blocks;

  /// Cuts `order` into B consecutive blocks. Throws DivisibilityError
  /// unless B divides its length.
  static BlockPartition consecutive(std::span<const int> order, int B);
  /// Throws unless the blocks are disjoint, equally sized and cover 0..n-1.
  void validate(int n) const;
};

struct CodingCostModel {
  std::size_t N = 0;
  int q = 2;
  int n = 0;
  int b = 0;
  int B = 0;

  /// N below q^n: single-alphabet coding pays N log(q^n / N) redundancy.
  bool large_alphabet() const;
  /// N above q^b for the blocks.
  bool small_alphabet_blocks() const;
};

struct SingleBlockCost {
  double bits = 0.0;
  /// Set when N >= q^n, where the redundancy approximation does not apply.
  bool regime_warning = false;
};

/// N * H(X) + N * log2(q^n / N).
SingleBlockCost single_block_cost(const SampleSet& samples);

/// N * sum_j H(X^(j)) + B * (q^b - 1) / 2 * log2(N / q^b).
/// Throws RegimeViolation when N <= q^b.
double blockwise_cost(const SampleSet& samples, const BlockPartition& partition);

struct Algorithm2Options {
  int B = 4;
  std::size_t iterations = 100;
  int k = 8;
  std::uint64_t seed = 1;
};

struct Algorithm2Step {
  /// Sum of marginal entropies after the step; unchanged when rejected.
  double H_m = 0.0;
  /// Sum of block entropies under this step's partition.
  double H_b = 0.0;
  /// Sum of marginal entropies before the per-block transforms.
  double H_components = 0.0;
  bool accepted = true;
  BlockPartition partition;
  /// Per-block word mappings applied at this step (empty at step 0).
  std::vector<WordMapping> mappings;
};

struct Algorithm2Trace {
  /// Entropy of the whole empirical distribution; every step's H_b is at
  /// least this.
  double H_whole = 0.0;
  /// steps[0] is the initial random partition without any transform.
  std::vector<Algorithm2Step> steps;
};

/// Repeatedly shuffles component positions into B blocks and applies the
/// relaxed binary solver to every block. A step whose marginal sum exceeds
/// the incumbent is rolled back. Needs q = 2.
Algorithm2Trace algorithm2(const SampleSet& samples, const Algorithm2Options& options);

struct TotalCost {
  std::size_t I0 = 0;
  double bits = 0.0;
};

/// N H_b(I0) + B (q^b - 1)/2 log2(N / q^b) + I0 B b q^b + I0 n log2 n.
double total_cost(const Algorithm2Trace& trace, const CodingCostModel& model, std::size_t I0);
/// Minimizer of total_cost over all recorded steps.
TotalCost best_total_cost(const Algorithm2Trace& trace, const CodingCostModel& model);

struct NaiveSearchResult {
  double best = 0.0;
  BlockPartition partition;
  std::vector<double> values;
};

/// Sum of block entropies over random partitions without any transform.
NaiveSearchResult naive_block_search(const SampleSet& samples, int B, std::size_t trials, std::uint64_t seed);

enum class QarySolver { Exhaustive, Descent };

struct BssReport {
  double joint_entropy = 0.0;
  double sum_marginals_input = 0.0;
  double sum_marginals_found = 0.0;
  double gap = 0.0;
  WordMapping mapping;
};

/// Joint of Y1 = X1, Y2 = sigma((X1 + X2) mod q) with X1, X2 iid Zipf(q, s)
/// and sigma a seeded symbol shuffle. Word index y1 + q * y2.
JointDistribution bss_joint(int q, double s, std::uint64_t seed);

BssReport bss_experiment(int q, double s, QarySolver method, int k, std::size_t inits, std::uint64_t seed);

struct CodebookReport {
  double joint_entropy = 0.0;
  double sum_marginals_input = 0.0;
  double sum_marginals_output = 0.0;
  WordMapping mapping;
};

/// Re-labels a 256-symbol frequency table as 8-bit words to minimize the
/// sum of bit entropies.
CodebookReport codebook(std::span<const double> frequencies, int k = 8);

}  // namespace finita
