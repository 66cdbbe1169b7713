#pragma once

// Distributions over finite-alphabet words, invertible word mappings, and
// the entropy functionals every solver minimizes.
//
// Word layout: a word w over n components with alphabet q encodes the digits
// (x_0, ..., x_{n-1}) in base q, component 0 being the least-significant
// digit. All modules and file formats share this convention.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "finita/error.hpp"

namespace finita {

using Word = std::uint32_t;

inline constexpr double kMassTolerance = 1e-12;
inline constexpr double kNormTolerance = 1e-9;

/// Number of words q^n. Throws InvalidArgument when it does not fit a Word.
std::size_t word_count(int n, int q);

/// Digit of `component` in word `w`.
inline int digit(Word w, int component, int q) {
  if (q == 2) return static_cast<int>((w >> component) & 1u);
  for (int i = 0; i < component; ++i) w /= static_cast<Word>(q);
  return static_cast<int>(w % static_cast<Word>(q));
}

inline int bit(Word w, int component) { return static_cast<int>((w >> component) & 1u); }

namespace detail {

// Pairwise summation keeps the rounding error at O(log N) ulps, which the
// 1e-12 mapping-invariance checks rely on for N up to 2^24.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double plog2p(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

void validate_mass(const double* p, std::size_t n);

}  // namespace detail

/// Shannon entropy in bits. Zero entries contribute nothing.
/// Throws NegativeMass / NotNormalized on invalid input.
template <typename Derived>
double entropy(const Eigen::DenseBase<Derived>& dist) {
  const Eigen::ArrayXd p = dist.derived().template cast<double>().array();
  detail::validate_mass(p.data(), static_cast<std::size_t>(p.size()));
  Eigen::ArrayXd terms = p.unaryExpr([](double x) { return detail::plog2p(x); });
  return detail::pairwise_sum(terms.data(), static_cast<std::size_t>(terms.size()));
}

inline double entropy(std::span<const double> dist) {
  return entropy(Eigen::Map<const Eigen::ArrayXd>(dist.data(), static_cast<Eigen::Index>(dist.size())));
}

/// Binary entropy h_b(x) in bits; x is clamped to [0, 1].
inline double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Probability mass over all q^n words of an n-component vector.
class JointDistribution {
 public:
  /// Validates size and mass. With `renormalize`, any positive total is
  /// rescaled to one instead of rejected, so raw counts are accepted.
  JointDistribution(int n, int q, Eigen::VectorXd probs, bool renormalize = false);

  static JointDistribution uniform(int n, int q);

  int n() const { return n_; }
  int q() const { return q_; }
  std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }
  const Eigen::VectorXd& probs() const { return probs_; }
  double operator[](Word w) const { return probs_[static_cast<Eigen::Index>(w)]; }

 private:
  int n_;
  int q_;
  Eigen::VectorXd probs_;
};

/// A bijection on word indices; the image of word w is perm[w].
class WordMapping {
 public:
  explicit WordMapping(std::vector<Word> perm);

  static WordMapping identity(std::size_t size);

  std::size_t size() const { return perm_.size(); }
  Word operator()(Word w) const { return perm_[w]; }
  const std::vector<Word>& perm() const { return perm_; }

  WordMapping inverse() const;

  /// Mapping that applies *this first, then `next`.
  WordMapping then(const WordMapping& next) const;

  friend bool operator==(const WordMapping&, const WordMapping&) = default;

 private:
  std::vector<Word> perm_;
};

/// True iff `perm` is a permutation of 0..perm.size()-1.
bool is_bijection(std::span<const Word> perm);

/// Per-component marginal distributions of a joint.
struct MarginalParams {
  int q = 2;
  std::vector<Eigen::VectorXd> marginals;

  std::size_t n() const { return marginals.size(); }
  /// pi_i = P(Y_i = 0) for every component.
  Eigen::VectorXd zero_probs() const;

  static MarginalParams binary(const Eigen::VectorXd& pi);
};

Eigen::VectorXd marginal(const JointDistribution& joint, int component);
MarginalParams all_marginals(const JointDistribution& joint);

/// P(Y_i = 0) for every component of a binary joint, in one pass.
Eigen::VectorXd zero_probs(const JointDistribution& joint);

double sum_marginal_entropies(const JointDistribution& joint);
double total_correlation(const JointDistribution& joint);

/// output[m(w)] = input[w].
JointDistribution apply_mapping(const JointDistribution& joint, const WordMapping& m);

/// Binary word mapping that moves old component order[j] to new component j
/// and flips bits whose original component is set in `flip_mask`.
WordMapping bit_transform_mapping(int n, std::span<const int> order, Word flip_mask);

struct Canonical {
  WordMapping mapping;
  MarginalParams params;
};

/// Flips every bit with pi_i > 1/2 and reorders components so that
/// pi_{n-1} <= ... <= pi_0 <= 1/2. Ties keep the original component order.
Canonical canonicalize(const JointDistribution& joint);

}  // namespace finita
