#pragma once

// Linear mappings over the binary field with a bound on how many inputs each
// output bit may depend on.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "finita/core.hpp"

namespace finita {

/// n x n binary matrix. Bit j of rows[i] is entry (i, j); output bit i is
/// the parity of rows[i] & x.
class Gf2Matrix {
 public:
  explicit Gf2Matrix(std::vector<Word> rows);

  static Gf2Matrix identity(int n);

  int n() const { return static_cast<int>(rows_.size()); }
  const std::vector<Word>& rows() const { return rows_; }
  Word row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  bool at(int i, int j) const { return ((rows_[static_cast<std::size_t>(i)] >> j) & 1u) != 0; }
  void set(int i, int j, bool value);

  Word operator*(Word x) const;
  Gf2Matrix operator*(const Gf2Matrix& other) const;

  int max_row_weight() const;
  /// Nonzeros only at (i, i) and (i, i+1 mod n).
  bool is_banded() const;

  friend bool operator==(const Gf2Matrix&, const Gf2Matrix&) = default;
  friend auto operator<=>(const Gf2Matrix&, const Gf2Matrix&) = default;

 private:
  std::vector<Word> rows_;
};

bool gf2_invertible(const Gf2Matrix& m);

/// All invertible banded matrices, 2^{n+1} - 2 of them.
std::vector<Gf2Matrix> enumerate_banded_invertible(int n);

/// Word permutation x -> m x.
WordMapping linear_mapping(const Gf2Matrix& m);

/// Moves the mass of word x to word m x. Throws Singular if m is not invertible.
JointDistribution apply_linear_map(const JointDistribution& joint, const Gf2Matrix& m);

struct LinearResult {
  Gf2Matrix matrix;
  double value = 0.0;
};

/// Exhaustive search of the banded family. Throws InvalidArgument above max_n.
LinearResult search_r2(const JointDistribution& joint, int max_n = 16);

struct ImmuneConfig {
  std::size_t population = 20;
  std::size_t clones = 5;
  /// Flips per mutation: ceil(beta * (1 - affinity) * n), at least one.
  double beta = 2.0;
  /// Fresh random individuals replacing the worst each generation.
  std::size_t fresh = 4;
  std::size_t generations = 200;
  int r = 2;
  std::uint64_t seed = 1;
  /// Mutation attempts before a clone is discarded.
  int retries = 20;
  /// Start from identity matrices instead of random individuals.
  bool init_identity = false;
};

struct ImmuneResult {
  Gf2Matrix matrix;
  double value = 0.0;
  /// Best value after each generation.
  std::vector<double> history;
};

/// affinity = 1 - (1/n) sum_i H(Y_i).
double affinity(const JointDistribution& joint, const Gf2Matrix& m);

ImmuneResult immune_search(const JointDistribution& joint, const ImmuneConfig& config);

/// Truth table with 2^m entries, one bit per byte. True iff it holds as many
/// ones as zeros. Throws BadLength unless the length is a power of two.
bool is_balanced(std::span<const std::uint8_t> truth_table);

}  // namespace finita
