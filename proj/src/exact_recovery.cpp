#include "finita/exact_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace finita {

namespace {

struct Entry {
  double value;
  Word word;
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

// Sorts by value, then orders every run of tolerance-equal values by word so
// that equal probabilities pair up lexicographically.
void sort_with_ties(std::vector<Entry>& entries, double tol) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.value < b.value || (a.value == b.value && a.word < b.word);
  });
  std::size_t start = 0;
  for (std::size_t i = 1; i <= entries.size(); ++i) {
    if (i == entries.size() || !close(entries[i].value, entries[i - 1].value, tol)) {
      std::sort(entries.begin() + static_cast<std::ptrdiff_t>(start), entries.begin() + static_cast<std::ptrdiff_t>(i),
                [](const Entry& a, const Entry& b) { return a.word < b.word; });
      start = i;
    }
  }
}

}  // namespace

JointDistribution product_joint(const Eigen::VectorXd& pi) {
  const int n = static_cast<int>(pi.size());
  for (int i = 0; i < n; ++i) {
    if (!(pi[i] > 0.0 && pi[i] < 1.0)) {
      throw Error(Errc::ParameterOutOfRange, "pi_" + std::to_string(i) + " = " + std::to_string(pi[i]));
    }
  }
  const std::size_t size = word_count(n, 2);
  Eigen::VectorXd probs(static_cast<Eigen::Index>(size));
  probs[0] = 1.0;
  // Doubling construction: words below 2^i are extended by bit i.
  for (int i = 0; i < n; ++i) {
    const Eigen::Index half = Eigen::Index{1} << i;
    probs.segment(half, half) = probs.head(half) * (1.0 - pi[i]);
    probs.head(half) *= pi[i];
  }
  return JointDistribution(n, 2, std::move(probs));
}

JointDistribution product_joint(const MarginalParams& pi) {
  if (pi.q != 2) throw Error(Errc::UnsupportedAlphabet, "product_joint needs binary parameters");
  return product_joint(pi.zero_probs());
}

RecoveryResult recover_product_params(const JointDistribution& joint, double tol) {
  if (joint.q() != 2) throw Error(Errc::UnsupportedAlphabet, "exact recovery needs q = 2");
  const int n = joint.n();
  const std::size_t size = joint.size();

  std::vector<Entry> sorted(size);
  for (std::size_t w = 0; w < size; ++w) sorted[w] = {joint.probs()[static_cast<Eigen::Index>(w)], static_cast<Word>(w)};
  sort_with_ties(sorted, tol);

  const double smallest = sorted.front().value;
  if (!(smallest > 0.0)) {
    throw Error(Errc::DegenerateParameter, "smallest probability is zero, some pi_i would be 0");
  }

  RecoveryResult result{MarginalParams{}, WordMapping::identity(size), 0.0, 0};
  Eigen::VectorXd pi(n);

  // lambda holds the words whose bits k..n-1 are zero, sorted by value.
  std::vector<Entry> lambda{{smallest, 0}};
  lambda.reserve(size);
  std::vector<Entry> scaled;
  std::vector<Entry> merged;
  for (int k = 0; k < n; ++k) {
    // Matching prefixes are monotone, so the first mismatch is found by
    // bisection over [0, |lambda|].
    std::size_t lo = 0;
    std::size_t hi = lambda.size();
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      ++result.comparisons;
      if (close(sorted[mid].value, lambda[mid].value, tol)) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    if (lo >= size) {
      throw Error(Errc::NotDecomposable, "no unresolved probability left for component " + std::to_string(k));
    }
    const double next = sorted[lo].value;
    pi[k] = smallest / (smallest + next);
    const double ratio = next / smallest;

    scaled.resize(lambda.size());
    const Word flag = Word{1} << k;
    for (std::size_t i = 0; i < lambda.size(); ++i) scaled[i] = {lambda[i].value * ratio, lambda[i].word | flag};
    merged.resize(2 * lambda.size());
    std::merge(lambda.begin(), lambda.end(), scaled.begin(), scaled.end(), merged.begin(), [&](const Entry& a, const Entry& b) {
      ++result.comparisons;
      return a.value < b.value;
    });
    lambda.swap(merged);
  }

  sort_with_ties(lambda, tol);
  std::vector<Word> perm(size);
  for (std::size_t i = 0; i < size; ++i) perm[sorted[i].word] = lambda[i].word;
  result.mapping = WordMapping(std::move(perm));
  result.params = MarginalParams::binary(pi);

  for (int k = 0; k < n; ++k) {
    if (!(pi[k] > 0.0 && pi[k] < 1.0)) throw Error(Errc::NotDecomposable, "recovered parameter out of range");
  }
  const JointDistribution expected = product_joint(pi);
  const JointDistribution mapped = apply_mapping(joint, result.mapping);
  result.residual = (mapped.probs() - expected.probs()).cwiseAbs().maxCoeff();
  if (result.residual > tol) {
    throw Error(Errc::NotDecomposable, "reconstruction residual " + std::to_string(result.residual) + " exceeds tolerance");
  }
  return result;
}

}  // namespace finita
