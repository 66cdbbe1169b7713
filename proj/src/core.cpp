#include "finita/core.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace finita {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NegativeMass: return "NegativeMass";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::NotBijective: return "NotBijective";
    case Errc::UnsupportedAlphabet: return "UnsupportedAlphabet";
    case Errc::NotDecomposable: return "NotDecomposable";
    case Errc::DegenerateParameter: return "DegenerateParameter";
    case Errc::ParameterOutOfRange: return "ParameterOutOfRange";
    case Errc::NotDownClosed: return "NotDownClosed";
    case Errc::NoFeasiblePlacement: return "NoFeasiblePlacement";
    case Errc::WorkCapExceeded: return "WorkCapExceeded";
    case Errc::Singular: return "Singular";
    case Errc::InfeasibleConfig: return "InfeasibleConfig";
    case Errc::BadLength: return "BadLength";
    case Errc::DivisibilityError: return "DivisibilityError";
    case Errc::EmptyBlock: return "EmptyBlock";
    case Errc::RegimeViolation: return "RegimeViolation";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

std::size_t word_count(int n, int q) {
  if (n < 1) throw Error(Errc::InvalidArgument, "component count must be positive");
  if (q < 2) throw Error(Errc::InvalidArgument, "alphabet size must be at least 2");
  std::uint64_t count = 1;
  for (int i = 0; i < n; ++i) {
    count *= static_cast<std::uint64_t>(q);
    if (count > std::numeric_limits<Word>::max()) {
      throw Error(Errc::InvalidArgument, "q^n does not fit a 32-bit word index");
    }
  }
  return static_cast<std::size_t>(count);
}

namespace detail {

void validate_mass(const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p[i] >= -kMassTolerance)) {
      throw Error(Errc::NegativeMass, "entry " + std::to_string(i) + " is " + std::to_string(p[i]));
    }
  }
  const double total = pairwise_sum(p, n);
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw Error(Errc::NotNormalized, "mass sums to " + std::to_string(total));
  }
}

}  // namespace detail

JointDistribution::JointDistribution(int n, int q, Eigen::VectorXd probs, bool renormalize)
    : n_(n), q_(q), probs_(std::move(probs)) {
  const std::size_t expected = word_count(n, q);
  if (static_cast<std::size_t>(probs_.size()) != expected) {
    throw Error(Errc::SizeMismatch, "expected " + std::to_string(expected) + " probabilities, got " +
                                        std::to_string(probs_.size()));
  }
  for (Eigen::Index i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= -kMassTolerance)) {
      throw Error(Errc::NegativeMass, "entry " + std::to_string(i) + " is " + std::to_string(probs_[i]));
    }
    if (probs_[i] < 0.0) probs_[i] = 0.0;
  }
  const double total = detail::pairwise_sum(probs_.data(), size());
  if (renormalize && total > 0.0) {
    probs_ /= total;
  } else if (std::abs(total - 1.0) > kNormTolerance) {
    throw Error(Errc::NotNormalized, "mass sums to " + std::to_string(total));
  }
}

JointDistribution JointDistribution::uniform(int n, int q) {
  const std::size_t size = word_count(n, q);
  return JointDistribution(n, q, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size), 1.0 / size));
}

bool is_bijection(std::span<const Word> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (Word w : perm) {
    if (w >= perm.size() || seen[w]) return false;
    seen[w] = true;
  }
  return true;
}

WordMapping::WordMapping(std::vector<Word> perm) : perm_(std::move(perm)) {
  if (!is_bijection(perm_)) throw Error(Errc::NotBijective, "word mapping is not a permutation");
}

WordMapping WordMapping::identity(std::size_t size) {
  std::vector<Word> perm(size);
  std::iota(perm.begin(), perm.end(), Word{0});
  return WordMapping(std::move(perm));
}

WordMapping WordMapping::inverse() const {
  std::vector<Word> inv(perm_.size());
  for (std::size_t w = 0; w < perm_.size(); ++w) inv[perm_[w]] = static_cast<Word>(w);
  return WordMapping(std::move(inv));
}

WordMapping WordMapping::then(const WordMapping& next) const {
  if (next.size() != size()) throw Error(Errc::SizeMismatch, "composed mappings differ in size");
  std::vector<Word> out(perm_.size());
  for (std::size_t w = 0; w < perm_.size(); ++w) out[w] = next.perm_[perm_[w]];
  return WordMapping(std::move(out));
}

Eigen::VectorXd MarginalParams::zero_probs() const {
  Eigen::VectorXd pi(static_cast<Eigen::Index>(marginals.size()));
  for (std::size_t i = 0; i < marginals.size(); ++i) pi[static_cast<Eigen::Index>(i)] = marginals[i][0];
  return pi;
}

MarginalParams MarginalParams::binary(const Eigen::VectorXd& pi) {
  MarginalParams out;
  out.q = 2;
  for (Eigen::Index i = 0; i < pi.size(); ++i) out.marginals.push_back(Eigen::Vector2d(pi[i], 1.0 - pi[i]));
  return out;
}

Eigen::VectorXd marginal(const JointDistribution& joint, int component) {
  if (component < 0 || component >= joint.n()) {
    throw Error(Errc::IndexOutOfRange, "component " + std::to_string(component) + " of " +
                                           std::to_string(joint.n()));
  }
  const int q = joint.q();
  std::size_t stride = 1;
  for (int i = 0; i < component; ++i) stride *= static_cast<std::size_t>(q);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(q);
  const auto& p = joint.probs();
  for (std::size_t w = 0; w < joint.size(); ++w) {
    out[static_cast<Eigen::Index>((w / stride) % static_cast<std::size_t>(q))] += p[static_cast<Eigen::Index>(w)];
  }
  return out;
}

MarginalParams all_marginals(const JointDistribution& joint) {
  MarginalParams out;
  out.q = joint.q();
  out.marginals.reserve(static_cast<std::size_t>(joint.n()));
  for (int i = 0; i < joint.n(); ++i) out.marginals.push_back(marginal(joint, i));
  return out;
}

Eigen::VectorXd zero_probs(const JointDistribution& joint) {
  if (joint.q() != 2) throw Error(Errc::UnsupportedAlphabet, "zero_probs needs q = 2");
  const int n = joint.n();
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
  const auto& p = joint.probs();
  for (std::size_t w = 0; w < joint.size(); ++w) {
    const double mass = p[static_cast<Eigen::Index>(w)];
    if (mass == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      if (((w >> i) & 1u) == 0) pi[i] += mass;
    }
  }
  return pi;
}

double sum_marginal_entropies(const JointDistribution& joint) {
  double total = 0.0;
  for (int i = 0; i < joint.n(); ++i) total += entropy(marginal(joint, i));
  return total;
}

double total_correlation(const JointDistribution& joint) {
  return sum_marginal_entropies(joint) - entropy(joint.probs());
}

JointDistribution apply_mapping(const JointDistribution& joint, const WordMapping& m) {
  if (m.size() != joint.size()) {
    throw Error(Errc::SizeMismatch, "mapping covers " + std::to_string(m.size()) + " words, joint has " +
                                        std::to_string(joint.size()));
  }
  Eigen::VectorXd out(joint.probs().size());
  for (std::size_t w = 0; w < joint.size(); ++w) {
    out[static_cast<Eigen::Index>(m(static_cast<Word>(w)))] = joint.probs()[static_cast<Eigen::Index>(w)];
  }
  return JointDistribution(joint.n(), joint.q(), std::move(out));
}

WordMapping bit_transform_mapping(int n, std::span<const int> order, Word flip_mask) {
  if (static_cast<int>(order.size()) != n) throw Error(Errc::SizeMismatch, "bit order length differs from n");
  const std::size_t size = word_count(n, 2);
  std::vector<Word> perm(size);
  for (std::size_t w = 0; w < size; ++w) {
    const Word flipped = static_cast<Word>(w) ^ flip_mask;
    Word out = 0;
    for (int j = 0; j < n; ++j) out |= static_cast<Word>((flipped >> order[static_cast<std::size_t>(j)]) & 1u) << j;
    perm[w] = out;
  }
  return WordMapping(std::move(perm));
}

Canonical canonicalize(const JointDistribution& joint) {
  if (joint.q() != 2) throw Error(Errc::UnsupportedAlphabet, "canonicalize needs q = 2");
  const int n = joint.n();
  Eigen::VectorXd pi = zero_probs(joint);
  Word flips = 0;
  for (int i = 0; i < n; ++i) {
    if (pi[i] > 0.5) {
      flips |= Word{1} << i;
      pi[i] = 1.0 - pi[i];
    }
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pi[a] > pi[b]; });

  Eigen::VectorXd sorted(n);
  for (int j = 0; j < n; ++j) sorted[j] = pi[order[static_cast<std::size_t>(j)]];
  return {bit_transform_mapping(n, order, flips), MarginalParams::binary(sorted)};
}

}  // namespace finita
