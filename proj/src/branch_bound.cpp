#include "finita/branch_bound.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

namespace finita {

bool is_minorant(Word a, Word b, int n) {
  const Word full = n >= 32 ? ~Word{0} : (Word{1} << n) - 1;
  return ((b & ~a) & full) == 0;
}

std::vector<Word> largest_minorants(std::span<const Word> allocated, int n) {
  const std::size_t size = word_count(n, 2);
  std::vector<char> taken(size, 0);
  for (Word w : allocated) {
    if (w >= size) throw Error(Errc::IndexOutOfRange, "word " + std::to_string(w) + " out of range");
    taken[w] = 1;
  }
  if (!taken[0]) throw Error(Errc::NotDownClosed, "allocation must contain the all-zeros word");
  for (Word w : allocated) {
    for (int b = 0; b < n; ++b) {
      if (((w >> b) & 1u) && !taken[w ^ (Word{1} << b)]) {
        throw Error(Errc::NotDownClosed, "word " + std::to_string(w) + " has an unallocated majorant");
      }
    }
  }
  std::vector<Word> out;
  for (std::size_t w = 0; w < size; ++w) {
    if (taken[w]) continue;
    bool ready = true;
    for (int b = 0; b < n && ready; ++b) {
      if ((w >> b) & 1u) ready = taken[w ^ (std::size_t{1} << b)] != 0;
    }
    if (ready) out.push_back(static_cast<Word>(w));
  }
  return out;
}

SearchNode SearchNode::root(int n) {
  SearchNode node;
  node.n = n;
  node.zero_mass = Eigen::VectorXd::Zero(n);
  node.zero_slots_used.assign(static_cast<std::size_t>(n), 0);
  return node;
}

void SearchNode::allocate(Word w, double p) {
  for (int i = 0; i < n; ++i) {
    if (((w >> i) & 1u) == 0) {
      zero_mass[i] += p;
      ++zero_slots_used[static_cast<std::size_t>(i)];
    }
  }
  ++allocated;
}

namespace {

double clamped_binary_entropy(double x) { return binary_entropy(std::min(x, 0.5)); }

// prefix[j] = sum of the j smallest probabilities.
double bound_with_prefix(const SearchNode& node, std::span<const double> prefix) {
  const std::size_t half = std::size_t{1} << (node.n - 1);
  const std::size_t total = prefix.size() - 1;
  double bound = 0.0;
  for (int i = 0; i < node.n; ++i) {
    const std::size_t open = half - static_cast<std::size_t>(node.zero_slots_used[static_cast<std::size_t>(i)]);
    const std::size_t end = std::min(total, node.allocated + open);
    const double fill = prefix[end] - prefix[node.allocated];
    bound += clamped_binary_entropy(node.zero_mass[i] + fill);
  }
  return bound;
}

std::vector<double> prefix_sums(std::span<const double> sorted_p) {
  std::vector<double> prefix(sorted_p.size() + 1, 0.0);
  for (std::size_t i = 0; i < sorted_p.size(); ++i) prefix[i + 1] = prefix[i] + sorted_p[i];
  return prefix;
}

class Search {
 public:
  Search(const JointDistribution& joint, const BranchBoundOptions& options)
      : joint_(joint), n_(joint.n()), size_(joint.size()), options_(options), node_(SearchNode::root(joint.n())) {
    std::vector<Word> order(size_);
    std::iota(order.begin(), order.end(), Word{0});
    const auto& probs = joint.probs();
    std::stable_sort(order.begin(), order.end(), [&](Word a, Word b) { return probs[a] < probs[b]; });
    input_word_ = order;
    sorted_p_.resize(size_);
    for (std::size_t r = 0; r < size_; ++r) sorted_p_[r] = probs[input_word_[r]];
    prefix_ = prefix_sums(sorted_p_);
    output_word_.assign(size_, 0);
    taken_.assign(size_, 0);
    bit_class_.assign(static_cast<std::size_t>(n_), 0);

    // The canonical identity is only a fallback. The slack lets a leaf that
    // ties with it replace it, so a completed search always returns an
    // allocation ordered along the lattice.
    Canonical start = canonicalize(joint);
    best_value_ = leaf_value(start.params.zero_probs()) + 1e-9;
    best_mapping_ = std::move(start.mapping);
    started_ = std::chrono::steady_clock::now();
  }

  BranchBoundResult run() {
    place(0, 0);
    descend(1);
    // The running masses drift under add/subtract; report the exact value.
    const double value = leaf_value(zero_probs(apply_mapping(joint_, best_mapping_)));
    return {best_mapping_, value, !stopped_, stats_};
  }

 private:
  static double leaf_value(const Eigen::VectorXd& pi) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < pi.size(); ++i) v += binary_entropy(pi[i]);
    return v;
  }

  bool out_of_budget() {
    if (stats_.nodes_expanded >= options_.max_nodes) return true;
    if (options_.time_limit.count() > 0 && (stats_.nodes_expanded & 1023u) == 0) {
      return std::chrono::steady_clock::now() - started_ > options_.time_limit;
    }
    return false;
  }

  // Puts sorted_p[rank] on word w and extends the frontier.
  void place(Word w, std::size_t rank) {
    node_.allocate(w, sorted_p_[rank]);
    taken_[w] = 1;
    output_word_[rank] = w;
    for (int j = 0; j < n_; ++j) {
      const Word v = w | (Word{1} << j);
      if (v == w) continue;
      bool ready = true;
      for (int b = 0; b < n_ && ready; ++b) {
        if ((v >> b) & 1u) ready = taken_[v ^ (Word{1} << b)] != 0;
      }
      if (ready) frontier_.push_back(v);
    }
  }

  void unplace(Word w, std::size_t rank) {
    taken_[w] = 0;
    for (int i = 0; i < n_; ++i) {
      if (((w >> i) & 1u) == 0) {
        node_.zero_mass[i] -= sorted_p_[rank];
        --node_.zero_slots_used[static_cast<std::size_t>(i)];
      }
    }
    --node_.allocated;
  }

  // Splits every bit class by membership in w, renumbering by first use.
  void refine_classes(Word w) {
    std::vector<std::pair<int, int>> seen;
    for (int b = 0; b < n_; ++b) {
      const std::pair<int, int> key{bit_class_[static_cast<std::size_t>(b)], static_cast<int>((w >> b) & 1u)};
      auto it = std::find(seen.begin(), seen.end(), key);
      if (it == seen.end()) {
        seen.push_back(key);
        it = seen.end() - 1;
      }
      bit_class_[static_cast<std::size_t>(b)] = static_cast<int>(it - seen.begin());
    }
  }

  std::vector<int> orbit_key(Word w) const {
    std::vector<int> key(static_cast<std::size_t>(n_), 0);
    for (int b = 0; b < n_; ++b) {
      if ((w >> b) & 1u) ++key[static_cast<std::size_t>(bit_class_[static_cast<std::size_t>(b)])];
    }
    return key;
  }

  void descend(std::size_t rank) {
    if (stopped_) return;
    if (rank == size_) {
      ++stats_.leaves;
      const double value = leaf_value(node_.zero_mass);
      if (value < best_value_) {
        best_value_ = value;
        std::vector<Word> perm(size_);
        for (std::size_t r = 0; r < size_; ++r) perm[input_word_[r]] = output_word_[r];
        best_mapping_ = WordMapping(std::move(perm));
      }
      return;
    }
    if (out_of_budget()) {
      stopped_ = true;
      return;
    }
    ++stats_.nodes_expanded;

    struct Child {
      double bound;
      Word word;
    };
    std::vector<Child> children;
    std::vector<std::vector<int>> keys;
    std::vector<Word> candidates = frontier_;
    std::sort(candidates.begin(), candidates.end());
    for (Word u : candidates) {
      if (options_.symmetry) {
        std::vector<int> key = orbit_key(u);
        if (std::find(keys.begin(), keys.end(), key) != keys.end()) {
          ++stats_.symmetric_skipped;
          continue;
        }
        keys.push_back(std::move(key));
      }
      SearchNode child = node_;
      child.allocate(u, sorted_p_[rank]);
      children.push_back({bound_with_prefix(child, prefix_), u});
    }
    std::sort(children.begin(), children.end(), [](const Child& a, const Child& b) {
      return a.bound < b.bound || (a.bound == b.bound && a.word < b.word);
    });

    for (std::size_t c = 0; c < children.size(); ++c) {
      if (options_.prune && children[c].bound >= best_value_ - 1e-13) {
        stats_.pruned += children.size() - c;
        break;
      }
      const Word u = children[c].word;
      const auto saved_frontier = frontier_;
      const auto saved_classes = bit_class_;
      frontier_.erase(std::find(frontier_.begin(), frontier_.end(), u));
      place(u, rank);
      refine_classes(u);
      descend(rank + 1);
      bit_class_ = saved_classes;
      unplace(u, rank);
      frontier_ = saved_frontier;
      if (stopped_) return;
    }
  }

  const JointDistribution& joint_;
  int n_;
  std::size_t size_;
  BranchBoundOptions options_;
  SearchNode node_;
  std::vector<double> sorted_p_;
  std::vector<double> prefix_;
  std::vector<Word> input_word_;
  std::vector<Word> output_word_;
  std::vector<char> taken_;
  std::vector<Word> frontier_;
  std::vector<int> bit_class_;
  double best_value_ = 0.0;
  WordMapping best_mapping_ = WordMapping::identity(1);
  BranchBoundStats stats_;
  bool stopped_ = false;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace

double lower_bound(const SearchNode& node, std::span<const double> sorted_p) {
  if (sorted_p.size() != (std::size_t{1} << node.n)) throw Error(Errc::SizeMismatch, "need 2^n sorted probabilities");
  const std::vector<double> prefix = prefix_sums(sorted_p);
  return bound_with_prefix(node, prefix);
}

BranchBoundResult solve_exact(const JointDistribution& joint, const BranchBoundOptions& options) {
  if (joint.q() != 2) throw Error(Errc::UnsupportedAlphabet, "branch and bound needs q = 2");
  if (joint.n() > options.max_n) {
    throw Error(Errc::InvalidArgument, "n = " + std::to_string(joint.n()) + " exceeds the configured cap " +
                                           std::to_string(options.max_n));
  }
  Search search(joint, options);
  return search.run();
}

}  // namespace finita
