#include "finita/plr.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <string>

#include "finita/parallel.hpp"

namespace finita {

PiecewiseLinearBound::PiecewiseLinearBound(std::vector<LinearPiece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw Error(Errc::InvalidArgument, "a bound needs at least one piece");
}

std::vector<double> PiecewiseLinearBound::tangent_points() const {
  std::vector<double> t;
  t.reserve(pieces_.size());
  for (const auto& p : pieces_) t.push_back(p.tangent);
  return t;
}

int PiecewiseLinearBound::region(double x) const {
  const int last = k() - 1;
  for (int r = 0; r < last; ++r) {
    if (x <= pieces_[static_cast<std::size_t>(r)].hi + 1e-12) return r;
  }
  return last;
}

PiecewiseLinearBound build_tangent_bound(int k, TangentSchedule schedule) {
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be at least 1");
  std::vector<LinearPiece> pieces(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const double t = schedule == TangentSchedule::Nested ? (j + 1.0) / (2.0 * k) : (j + 0.5) / (2.0 * k);
    auto& piece = pieces[static_cast<std::size_t>(j)];
    piece.tangent = t;
    piece.slope = std::log2((1.0 - t) / t);
    piece.intercept = binary_entropy(t) - piece.slope * t;
  }
  pieces.front().lo = 0.0;
  for (std::size_t j = 0; j + 1 < pieces.size(); ++j) {
    const double x = (pieces[j + 1].intercept - pieces[j].intercept) / (pieces[j].slope - pieces[j + 1].slope);
    pieces[j].hi = x;
    pieces[j + 1].lo = x;
  }
  pieces.back().hi = 0.5;
  return PiecewiseLinearBound(std::move(pieces));
}

std::vector<int> Placement::regions() const {
  std::vector<int> out;
  for (std::size_t r = 0; r < counts.size(); ++r) out.insert(out.end(), static_cast<std::size_t>(counts[r]), static_cast<int>(r));
  return out;
}

namespace {

void placements_rec(int remaining, std::size_t slot, Placement& current,
                    const std::function<void(const Placement&)>& visit) {
  if (slot + 1 == current.counts.size()) {
    current.counts[slot] = remaining;
    visit(current);
    return;
  }
  for (int c = remaining; c >= 0; --c) {
    current.counts[slot] = c;
    placements_rec(remaining - c, slot + 1, current, visit);
  }
}

// Words are grouped by how many zero digits they carry in each region; all
// words of a group share one coefficient.
struct GroupLayout {
  std::vector<Word> masks;
  std::vector<int> sizes;
  std::vector<std::size_t> strides;
  std::size_t groups = 1;
  std::vector<double> values;
  std::vector<std::size_t> bit_stride;
  std::size_t zero_group = 0;
  double d = 0.0;

  GroupLayout(const Placement& placement, const PiecewiseLinearBound& bound, int n) {
    const int k = bound.k();
    if (static_cast<int>(placement.counts.size()) != k) throw Error(Errc::SizeMismatch, "placement has the wrong number of regions");
    int start = 0;
    for (int r = 0; r < k; ++r) {
      const int l = placement.counts[static_cast<std::size_t>(r)];
      if (l < 0) throw Error(Errc::InvalidArgument, "negative placement count");
      Word mask = 0;
      for (int j = start; j < start + l; ++j) mask |= Word{1} << j;
      masks.push_back(mask);
      sizes.push_back(l);
      strides.push_back(groups);
      groups *= static_cast<std::size_t>(l + 1);
      for (int j = 0; j < l; ++j) d += bound.piece(r).intercept;
      start += l;
    }
    if (start != n) throw Error(Errc::SizeMismatch, "placement counts must sum to n");
    // Mixed-radix counter over the per-region zero counts.
    values.resize(groups);
    std::vector<int> digits(static_cast<std::size_t>(k), 0);
    for (std::size_t g = 0; g < groups; ++g) {
      double v = 0.0;
      for (int r = 0; r < k; ++r) v += static_cast<double>(digits[static_cast<std::size_t>(r)]) * bound.piece(r).slope;
      values[g] = v;
      for (int r = 0; r < k; ++r) {
        const auto ru = static_cast<std::size_t>(r);
        if (digits[ru] < sizes[ru]) {
          ++digits[ru];
          break;
        }
        digits[ru] = 0;
      }
    }
    bit_stride.resize(static_cast<std::size_t>(n));
    std::size_t all_zero = 0;
    for (int r = 0, bit = 0; r < k; ++r) {
      all_zero += static_cast<std::size_t>(sizes[static_cast<std::size_t>(r)]) * strides[static_cast<std::size_t>(r)];
      for (int j = 0; j < sizes[static_cast<std::size_t>(r)]; ++j) bit_stride[static_cast<std::size_t>(bit++)] = strides[static_cast<std::size_t>(r)];
    }
    zero_group = all_zero;
  }

  // Group of every word: each one digit removes a zero from its region.
  void word_groups(std::vector<std::size_t>& out) const {
    const std::size_t size = std::size_t{1} << bit_stride.size();
    out.resize(size);
    out[0] = zero_group;
    for (std::size_t w = 1; w < size; ++w) {
      out[w] = out[w & (w - 1)] - bit_stride[static_cast<std::size_t>(std::countr_zero(w))];
    }
  }

  std::size_t group_of(Word w) const {
    std::size_t g = 0;
    for (std::size_t r = 0; r < masks.size(); ++r) {
      const int zeros = sizes[r] - std::popcount(w & masks[r]);
      g += static_cast<std::size_t>(zeros) * strides[r];
    }
    return g;
  }

  std::size_t multiplicity(std::size_t g) const {
    std::size_t m = 1;
    for (std::size_t r = 0; r < masks.size(); ++r) {
      const auto z = (g / strides[r]) % static_cast<std::size_t>(sizes[r] + 1);
      m *= binomial(static_cast<std::size_t>(sizes[r]), z);
    }
    return m;
  }

  // Ranks of groups after sorting by value and merging equal values.
  std::vector<std::size_t> value_ranks(std::vector<double>& distinct) const {
    std::vector<std::pair<double, std::size_t>> order(groups);
    for (std::size_t g = 0; g < groups; ++g) order[g] = {values[g], g};
    std::sort(order.begin(), order.end());
    std::vector<std::size_t> rank(groups);
    distinct.clear();
    for (const auto& [v, g] : order) {
      if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
      rank[g] = distinct.size() - 1;
    }
    return rank;
  }

  static std::size_t binomial(std::size_t n, std::size_t k) {
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  }
};

}  // namespace

void for_each_placement(int n, int k, const std::function<void(const Placement&)>& visit) {
  if (n < 1 || k < 1) throw Error(Errc::InvalidArgument, "placements need n >= 1 and k >= 1");
  Placement current{std::vector<int>(static_cast<std::size_t>(k), 0)};
  placements_rec(n, 0, current, visit);
}

std::vector<Placement> enumerate_placements(int n, int k) {
  std::vector<Placement> out;
  out.reserve(placement_count(n, k));
  for_each_placement(n, k, [&](const Placement& p) { out.push_back(p); });
  return out;
}

std::size_t placement_count(int n, int k) {
  if (n < 0 || k < 1) throw Error(Errc::InvalidArgument, "placements need n >= 0 and k >= 1");
  // C(n + k - 1, k - 1), built incrementally so every step stays integral.
  std::size_t r = 1;
  for (int i = 1; i < k; ++i) r = r * static_cast<std::size_t>(n + i) / static_cast<std::size_t>(i);
  return r;
}

CoefficientVector coefficients_for_placement(const Placement& placement, const PiecewiseLinearBound& bound, int n) {
  const GroupLayout layout(placement, bound, n);
  const std::size_t size = word_count(n, 2);
  CoefficientVector out;
  out.d = layout.d;
  out.c.resize(static_cast<Eigen::Index>(size));
  for (std::size_t w = 0; w < size; ++w) out.c[static_cast<Eigen::Index>(w)] = layout.values[layout.group_of(static_cast<Word>(w))];

  std::vector<double> distinct;
  const auto rank = layout.value_ranks(distinct);
  std::vector<std::size_t> mult(distinct.size(), 0);
  for (std::size_t g = 0; g < layout.groups; ++g) mult[rank[g]] += layout.multiplicity(g);
  for (std::size_t i = 0; i < distinct.size(); ++i) out.dedup.emplace_back(distinct[i], mult[i]);
  return out;
}

namespace {

std::vector<Word> descending_order(const Eigen::VectorXd& probs) {
  std::vector<Word> order(static_cast<std::size_t>(probs.size()));
  std::iota(order.begin(), order.end(), Word{0});
  std::stable_sort(order.begin(), order.end(), [&](Word a, Word b) { return probs[a] > probs[b]; });
  return order;
}

}  // namespace

Allocation allocate_min(const CoefficientVector& coeffs, const Eigen::VectorXd& probs) {
  if (coeffs.c.size() != probs.size()) throw Error(Errc::SizeMismatch, "coefficients and probabilities differ in length");
  const std::vector<Word> in = descending_order(probs);
  std::vector<Word> out(in.size());
  std::iota(out.begin(), out.end(), Word{0});
  std::stable_sort(out.begin(), out.end(), [&](Word a, Word b) { return coeffs.c[a] < coeffs.c[b]; });

  std::vector<Word> perm(in.size());
  double value = 0.0;
  for (std::size_t r = 0; r < in.size(); ++r) {
    perm[in[r]] = out[r];
    value += coeffs.c[out[r]] * probs[in[r]];
  }
  return {WordMapping(std::move(perm)), value + coeffs.d};
}

double allocate_min_value(std::span<const std::pair<double, std::size_t>> dedup, double d,
                          std::span<const double> probs_descending) {
  std::size_t pos = 0;
  double value = 0.0;
  for (const auto& [c, m] : dedup) {
    if (pos + m > probs_descending.size()) throw Error(Errc::SizeMismatch, "multiplicities exceed the number of words");
    double mass = 0.0;
    for (std::size_t i = pos; i < pos + m; ++i) mass += probs_descending[i];
    value += c * mass;
    pos += m;
  }
  if (pos != probs_descending.size()) throw Error(Errc::SizeMismatch, "multiplicities do not cover every word");
  return value + d;
}

Eigen::VectorXd CoefficientMatrix::values(std::span<const double> probs_descending) const {
  if (static_cast<Eigen::Index>(probs_descending.size()) != rows.cols()) {
    throw Error(Errc::SizeMismatch, "probability vector does not match the matrix width");
  }
  const Eigen::Map<const Eigen::VectorXd> p(probs_descending.data(), static_cast<Eigen::Index>(probs_descending.size()));
  return rows * p + offsets;
}

std::size_t CoefficientMatrix::max_distinct() const {
  return distinct_per_row.empty() ? 0 : *std::max_element(distinct_per_row.begin(), distinct_per_row.end());
}

CoefficientMatrix coefficient_matrix(int n, int k, const PiecewiseLinearBound& bound) {
  constexpr std::size_t kMaxEntries = std::size_t{1} << 25;
  const std::size_t size = word_count(n, 2);
  const std::size_t count = placement_count(n, k);
  if (count * size > kMaxEntries) {
    throw Error(Errc::WorkCapExceeded, "coefficient matrix would hold " + std::to_string(count * size) + " entries");
  }
  CoefficientMatrix m;
  m.placements = enumerate_placements(n, k);
  m.rows.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(size));
  m.offsets.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    CoefficientVector cv = coefficients_for_placement(m.placements[i], bound, n);
    std::sort(cv.c.begin(), cv.c.end());
    m.rows.row(static_cast<Eigen::Index>(i)) = cv.c.transpose();
    m.offsets[static_cast<Eigen::Index>(i)] = cv.d;
    m.distinct_per_row.push_back(cv.dedup.size());
  }
  return m;
}

PlrProblem::PlrProblem(const JointDistribution& joint, PiecewiseLinearBound bound)
    : joint_(&joint), n_(joint.n()), bound_(std::move(bound)) {
  if (joint.q() != 2) throw Error(Errc::UnsupportedAlphabet, "the piecewise-linear relaxation needs q = 2");
  input_desc_ = descending_order(joint.probs());
  probs_desc_.reserve(input_desc_.size());
  for (Word w : input_desc_) probs_desc_.push_back(joint[w]);
}

void PlrProblem::order_words(const Placement& placement, std::vector<Word>& words, std::vector<double>& coeff) const {
  const GroupLayout layout(placement, bound_, n_);
  std::vector<double> distinct;
  const auto rank = layout.value_ranks(distinct);

  // Counting sort by coefficient rank; scanning words in ascending order
  // breaks ties by word index.
  const std::size_t size = probs_desc_.size();
  std::vector<std::size_t> word_rank(size);
  std::vector<std::size_t> start(distinct.size() + 1, 0);
  for (std::size_t w = 0; w < size; ++w) {
    word_rank[w] = rank[layout.group_of(static_cast<Word>(w))];
    ++start[word_rank[w] + 1];
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  words.assign(size, 0);
  coeff.assign(size, 0.0);
  for (std::size_t w = 0; w < size; ++w) {
    const std::size_t slot = start[word_rank[w]]++;
    words[slot] = static_cast<Word>(w);
    coeff[slot] = distinct[word_rank[w]];
  }
}

PlacementEval PlrProblem::evaluate(const Placement& placement) const {
  const GroupLayout layout(placement, bound_, n_);
  std::vector<double> distinct;
  const auto rank = layout.value_ranks(distinct);

  // Same (coefficient, word) order as order_words, without materializing it:
  // mass[w] is the probability the allocation puts on output word w.
  const std::size_t size = probs_desc_.size();
  thread_local std::vector<std::size_t> word_rank;
  thread_local std::vector<std::size_t> start;
  thread_local std::vector<double> mass;
  layout.word_groups(word_rank);
  mass.resize(size);
  start.assign(distinct.size() + 1, 0);
  for (std::size_t w = 0; w < size; ++w) {
    word_rank[w] = rank[word_rank[w]];
    ++start[word_rank[w] + 1];
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  double value = 0.0;
  for (std::size_t w = 0; w < size; ++w) {
    const double p = probs_desc_[start[word_rank[w]]++];
    mass[w] = p;
    value += distinct[word_rank[w]] * p;
  }

  PlacementEval e;
  e.value = value + layout.d;
  e.pi = Eigen::VectorXd::Zero(n_);
  // Sum out the top bit repeatedly; the lower half holds P(bit j = 0).
  for (int j = n_ - 1; j >= 0; --j) {
    const std::size_t half = std::size_t{1} << j;
    double zero = 0.0;
    for (std::size_t w = 0; w < half; ++w) {
      zero += mass[w];
      mass[w] += mass[w + half];
    }
    e.pi[j] = zero;
  }

  const std::vector<int> assumed = placement.regions();
  e.feasible = true;
  for (int j = 0; j < n_; ++j) {
    if (e.pi[j] > 0.5) {
      e.pi[j] = 1.0 - e.pi[j];
      e.flips |= Word{1} << j;
    }
    const int r = bound_.region(e.pi[j]);
    e.realized_regions.push_back(r);
    if (r != assumed[static_cast<std::size_t>(j)]) e.feasible = false;
    e.true_objective += binary_entropy(e.pi[j]);
  }
  return e;
}

WordMapping PlrProblem::mapping_for(const Placement& placement) const {
  std::vector<Word> words;
  std::vector<double> coeff;
  order_words(placement, words, coeff);
  Word flips = 0;
  {
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(n_);
    for (std::size_t r = 0; r < words.size(); ++r) {
      for (int j = 0; j < n_; ++j) {
        if (((words[r] >> j) & 1u) == 0) pi[j] += probs_desc_[r];
      }
    }
    for (int j = 0; j < n_; ++j) {
      if (pi[j] > 0.5) flips |= Word{1} << j;
    }
  }
  std::vector<Word> perm(words.size());
  for (std::size_t r = 0; r < words.size(); ++r) perm[input_desc_[r]] = words[r] ^ flips;
  return WordMapping(std::move(perm));
}

double PlrProblem::identity_envelope() const {
  const Eigen::VectorXd pi = zero_probs(*joint_);
  double v = 0.0;
  for (int j = 0; j < n_; ++j) v += bound_(std::min(pi[j], 1.0 - pi[j]));
  return v;
}

PlrResult solve_plr(const JointDistribution& joint, int k, const PlrOptions& options) {
  if (joint.q() != 2) throw Error(Errc::UnsupportedAlphabet, "the piecewise-linear relaxation needs q = 2");
  const int n = joint.n();
  PlrProblem problem(joint, build_tangent_bound(k, options.schedule));
  const std::vector<Placement> placements = enumerate_placements(n, k);

  struct Summary {
    double value = 0.0;
    double true_objective = 0.0;
    bool feasible = false;
  };
  std::vector<Summary> summaries(placements.size());
  parallel_for(placements.size(), [&](std::size_t i) {
    const PlacementEval e = problem.evaluate(placements[i]);
    summaries[i] = {e.value, e.true_objective, e.feasible};
  });
  if (options.matrix_form) {
    const CoefficientMatrix m = coefficient_matrix(n, k, problem.bound());
    const Eigen::VectorXd values = m.values(problem.probs_descending());
    for (std::size_t i = 0; i < placements.size(); ++i) summaries[i].value = values[static_cast<Eigen::Index>(i)];
  }

  PlrResult result{WordMapping::identity(joint.size()), {}, 0.0, 0.0, WordMapping::identity(joint.size()), 0.0,
                   placements.size(), 0};
  std::size_t winner = placements.size();
  std::size_t best_true = placements.size();
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const Summary& s = summaries[i];
    if (!s.feasible) continue;
    ++result.feasible_placements_visited;
    if (winner == placements.size() || s.value < summaries[winner].value) winner = i;
    if (best_true == placements.size() || s.true_objective < summaries[best_true].true_objective) best_true = i;
  }
  if (winner == placements.size()) {
    throw Error(Errc::NoFeasiblePlacement, "no placement realizes its own regions for k = " + std::to_string(k));
  }
  result.placement = placements[winner];
  result.mapping = problem.mapping_for(placements[winner]);
  result.ub_value = summaries[winner].value;
  result.true_objective = summaries[winner].true_objective;

  const double identity_objective = sum_marginal_entropies(joint);
  if (identity_objective < summaries[best_true].true_objective) {
    result.best_true_objective = identity_objective;
  } else {
    result.best_true_mapping = best_true == winner ? result.mapping : problem.mapping_for(placements[best_true]);
    result.best_true_objective = summaries[best_true].true_objective;
  }
  return result;
}

}  // namespace finita
