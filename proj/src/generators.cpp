#include "finita/generators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "finita/exact_recovery.hpp"
#include "finita/rng.hpp"

namespace finita {

Eigen::VectorXd zipf(int q, double s) {
  if (q < 1) throw Error(Errc::InvalidArgument, "zipf needs q >= 1");
  if (!(s > 0.0)) throw Error(Errc::InvalidArgument, "zipf needs s > 0");
  Eigen::VectorXd p(q);
  for (int k = 0; k < q; ++k) p[k] = std::pow(static_cast<double>(k + 1), -s);
  return p / p.sum();
}

JointDistribution markov_joint(const MarkovSpec& spec) {
  if (!(spec.flip > 0.0 && spec.flip < 1.0)) throw Error(Errc::ParameterOutOfRange, "flip must lie in (0, 1)");
  const int n = spec.n;
  const std::size_t size = word_count(n, 2);
  Eigen::VectorXd probs(static_cast<Eigen::Index>(size));
  const Word adjacent_mask = n > 1 ? (Word{1} << (n - 1)) - 1 : 0;
  for (std::size_t w = 0; w < size; ++w) {
    const Word word = static_cast<Word>(w);
    const int transitions = std::popcount((word ^ (word >> 1)) & adjacent_mask);
    probs[static_cast<Eigen::Index>(w)] =
        0.5 * std::pow(spec.flip, transitions) * std::pow(1.0 - spec.flip, n - 1 - transitions);
  }
  return JointDistribution(n, 2, std::move(probs));
}

std::size_t count_unique_probs(const JointDistribution& joint, double tol) {
  std::vector<double> values(joint.probs().data(), joint.probs().data() + joint.probs().size());
  std::sort(values.begin(), values.end());
  std::size_t classes = values.empty() ? 0 : 1;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (std::abs(values[i] - values[i - 1]) > tol * std::max(values[i], values[i - 1])) ++classes;
  }
  return classes;
}

JointDistribution block_iid_joint(int n, int r, const Eigen::VectorXd& block_dist) {
  if (r < 1 || n < 1 || n % r != 0) {
    throw Error(Errc::DivisibilityError, "block size " + std::to_string(r) + " does not divide " + std::to_string(n));
  }
  const std::size_t block_size = word_count(r, 2);
  if (static_cast<std::size_t>(block_dist.size()) != block_size) {
    throw Error(Errc::SizeMismatch, "block distribution must have 2^r entries");
  }
  detail::validate_mass(block_dist.data(), block_size);
  const std::size_t size = word_count(n, 2);
  const Word block_mask = static_cast<Word>(block_size - 1);
  Eigen::VectorXd probs(static_cast<Eigen::Index>(size));
  for (std::size_t w = 0; w < size; ++w) {
    double p = 1.0;
    for (int j = 0; j < n / r; ++j) p *= block_dist[static_cast<Eigen::Index>((static_cast<Word>(w) >> (j * r)) & block_mask)];
    probs[static_cast<Eigen::Index>(w)] = p;
  }
  return JointDistribution(n, 2, std::move(probs));
}

WordMapping random_mapping(std::size_t size, std::uint64_t seed) {
  std::vector<Word> perm(size);
  std::iota(perm.begin(), perm.end(), Word{0});
  Rng rng(seed);
  rng.shuffle(std::span<Word>(perm));
  return WordMapping(std::move(perm));
}

ScrambledProduct random_product_scrambled(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd pi(n);
  for (int i = 0; i < n; ++i) pi[i] = rng.uniform(0.05, 0.45);
  JointDistribution product = product_joint(pi);
  WordMapping scramble = random_mapping(product.size(), rng.next());
  JointDistribution joint = apply_mapping(product, scramble);
  return {std::move(joint), std::move(pi), std::move(scramble)};
}

JointDistribution random_joint(int n, int q, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t size = word_count(n, q);
  Eigen::VectorXd probs(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < probs.size(); ++i) probs[i] = -std::log(1.0 - rng.uniform());
  probs /= probs.sum();
  return JointDistribution(n, q, std::move(probs));
}

}  // namespace finita
