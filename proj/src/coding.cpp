#include "finita/coding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "finita/generators.hpp"
#include "finita/parallel.hpp"
#include "finita/plr.hpp"
#include "finita/qary.hpp"
#include "finita/rng.hpp"

namespace finita {

void SampleSet::validate() const {
  if (words.size() != N) throw Error(Errc::SizeMismatch, "sample count does not match N");
  const std::size_t size = word_count(n, q);
  for (Word w : words) {
    if (w >= size) throw Error(Errc::IndexOutOfRange, "sample word " + std::to_string(w) + " out of range");
  }
}

namespace {

// Rejection-inversion sampling for a Zipf law over 1..count
// (Hormann and Derflinger, 1996).
class ZipfSampler {
 public:
  ZipfSampler(double exponent, double count) : e_(exponent), count_(count) {
    h_x1_ = h_integral(1.5) - 1.0;
    h_n_ = h_integral(count_ + 0.5);
    s_ = 2.0 - h_integral_inverse(h_integral(2.5) - h(2.0));
  }

  std::uint64_t operator()(Rng& rng) const {
    while (true) {
      const double u = h_n_ + rng.uniform() * (h_x1_ - h_n_);
      const double x = h_integral_inverse(u);
      double k = std::floor(x + 0.5);
      k = std::clamp(k, 1.0, count_);
      if (k - x <= s_ || u >= h_integral(k + 0.5) - h(k)) return static_cast<std::uint64_t>(k);
    }
  }

 private:
  static double helper1(double x) {
    return std::abs(x) > 1e-8 ? std::log1p(x) / x : 1.0 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x));
  }
  static double helper2(double x) {
    return std::abs(x) > 1e-8 ? std::expm1(x) / x : 1.0 + x * 0.5 * (1.0 + x / 3.0 * (1.0 + 0.25 * x));
  }
  double h(double x) const { return std::exp(-e_ * std::log(x)); }
  double h_integral(double x) const {
    const double lx = std::log(x);
    return helper2((1.0 - e_) * lx) * lx;
  }
  double h_integral_inverse(double x) const {
    double t = x * (1.0 - e_);
    if (t < -1.0) t = -1.0;
    return std::exp(helper1(t) * x);
  }

  double e_;
  double count_;
  double h_x1_ = 0.0;
  double h_n_ = 0.0;
  double s_ = 0.0;
};

double entropy_from_counts(std::span<const std::uint64_t> counts, std::size_t N) {
  std::vector<double> terms;
  terms.reserve(counts.size());
  const double total = static_cast<double>(N);
  for (std::uint64_t c : counts) {
    if (c > 0) terms.push_back(detail::plog2p(static_cast<double>(c) / total));
  }
  return detail::pairwise_sum(terms.data(), terms.size());
}

// Distinct binary words with their multiplicities.
struct Histogram {
  std::size_t N = 0;
  int n = 0;
  std::vector<Word> words;
  std::vector<std::uint64_t> counts;

  explicit Histogram(const SampleSet& s) : N(s.N), n(s.n) {
    std::vector<Word> sorted = s.words;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i == 0 || sorted[i] != sorted[i - 1]) {
        words.push_back(sorted[i]);
        counts.push_back(0);
      }
      ++counts.back();
    }
  }

  double entropy() const { return entropy_from_counts(counts, N); }

  double marginal_sum() const {
    std::vector<std::uint64_t> ones(static_cast<std::size_t>(n), 0);
    for (std::size_t u = 0; u < words.size(); ++u) {
      for (int i = 0; i < n; ++i) {
        if ((words[u] >> i) & 1u) ones[static_cast<std::size_t>(i)] += counts[u];
      }
    }
    double sum = 0.0;
    for (std::uint64_t c : ones) sum += binary_entropy(static_cast<double>(c) / static_cast<double>(N));
    return sum;
  }

  std::vector<std::uint64_t> block_counts(std::span<const int> block) const {
    std::vector<std::uint64_t> out(std::size_t{1} << block.size(), 0);
    for (std::size_t u = 0; u < words.size(); ++u) out[gather(words[u], block)] += counts[u];
    return out;
  }

  static Word gather(Word w, std::span<const int> block) {
    Word sub = 0;
    for (std::size_t t = 0; t < block.size(); ++t) sub |= ((w >> block[t]) & 1u) << t;
    return sub;
  }

  static Word scatter(Word w, Word sub, std::span<const int> block) {
    for (std::size_t t = 0; t < block.size(); ++t) {
      const Word bitmask = Word{1} << block[t];
      w = ((sub >> t) & 1u) ? (w | bitmask) : (w & ~bitmask);
    }
    return w;
  }
};

double block_entropy_sum(const Histogram& h, const BlockPartition& p) {
  double sum = 0.0;
  for (const auto& block : p.blocks) sum += entropy_from_counts(h.block_counts(block), h.N);
  return sum;
}

JointDistribution joint_from_counts(int n, std::span<const std::uint64_t> counts, std::size_t N) {
  Eigen::VectorXd probs(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) probs[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]) / static_cast<double>(N);
  return JointDistribution(n, 2, std::move(probs), true);
}

BlockPartition random_partition(int n, int B, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  return BlockPartition::consecutive(order, B);
}

void require_binary(const SampleSet& s) {
  if (s.q != 2) throw Error(Errc::UnsupportedAlphabet, "block coding operates on binary components");
}

}  // namespace

SampleSet sample_zipf(std::size_t N, double s, int bits, std::uint64_t seed) {
  if (bits < 1 || bits > 31) throw Error(Errc::InvalidArgument, "bits must lie in 1..31");
  if (!(s > 0.0)) throw Error(Errc::InvalidArgument, "zipf needs s > 0");
  const ZipfSampler sampler(s, std::ldexp(1.0, bits));
  Rng rng(seed);
  SampleSet out{N, bits, 2, {}};
  out.words.reserve(N);
  for (std::size_t i = 0; i < N; ++i) out.words.push_back(static_cast<Word>(sampler(rng) - 1));
  return out;
}

JointDistribution empirical_joint(const SampleSet& samples, std::span<const int> block) {
  if (block.empty()) throw Error(Errc::EmptyBlock, "block must hold at least one component");
  if (samples.N == 0) throw Error(Errc::InvalidArgument, "no samples");
  for (int c : block) {
    if (c < 0 || c >= samples.n) throw Error(Errc::IndexOutOfRange, "block component out of range");
  }
  const int m = static_cast<int>(block.size());
  const std::size_t size = word_count(m, samples.q);
  std::vector<std::uint64_t> counts(size, 0);
  for (Word w : samples.words) {
    Word sub = 0;
    Word scale = 1;
    for (int c : block) {
      sub += static_cast<Word>(digit(w, c, samples.q)) * scale;
      scale *= static_cast<Word>(samples.q);
    }
    ++counts[sub];
  }
  Eigen::VectorXd probs(static_cast<Eigen::Index>(size));
  for (std::size_t i = 0; i < size; ++i) probs[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]) / static_cast<double>(samples.N);
  return JointDistribution(m, samples.q, std::move(probs), true);
}

double empirical_entropy(const SampleSet& samples) {
  if (samples.N == 0) throw Error(Errc::InvalidArgument, "no samples");
  std::unordered_map<Word, std::uint64_t> counts;
  for (Word w : samples.words) ++counts[w];
  std::vector<std::uint64_t> values;
  values.reserve(counts.size());
  for (const auto& [w, c] : counts) values.push_back(c);
  std::sort(values.begin(), values.end());
  return entropy_from_counts(values, samples.N);
}

BlockPartition BlockPartition::consecutive(std::span<const int> order, int B) {
  const int n = static_cast<int>(order.size());
  if (B < 1 || n % B != 0) {
    throw Error(Errc::DivisibilityError, std::to_string(B) + " blocks do not divide " + std::to_string(n) + " components");
  }
  BlockPartition p{B, n / B, {}};
  for (int j = 0; j < B; ++j) p.blocks.emplace_back(order.begin() + j * p.b, order.begin() + (j + 1) * p.b);
  p.validate(n);
  return p;
}

void BlockPartition::validate(int n) const {
  if (B < 1 || static_cast<int>(blocks.size()) != B || B * b != n) {
    throw Error(Errc::DivisibilityError, "partition sizes do not multiply to n");
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto& block : blocks) {
    if (block.empty()) throw Error(Errc::EmptyBlock, "partition holds an empty block");
    if (static_cast<int>(block.size()) != b) throw Error(Errc::SizeMismatch, "blocks differ in size");
    for (int c : block) {
      if (c < 0 || c >= n) throw Error(Errc::IndexOutOfRange, "component out of range");
      if (seen[static_cast<std::size_t>(c)]++) throw Error(Errc::InvalidArgument, "component in two blocks");
    }
  }
}

bool CodingCostModel::large_alphabet() const {
  return static_cast<double>(N) < std::pow(static_cast<double>(q), n);
}

bool CodingCostModel::small_alphabet_blocks() const {
  return static_cast<double>(N) > std::pow(static_cast<double>(q), b);
}

SingleBlockCost single_block_cost(const SampleSet& samples) {
  const double N = static_cast<double>(samples.N);
  const double log_alphabet = samples.n * std::log2(static_cast<double>(samples.q));
  const double bits = N * empirical_entropy(samples) + N * (log_alphabet - std::log2(N));
  return {bits, !(log_alphabet > std::log2(N))};
}

double blockwise_cost(const SampleSet& samples, const BlockPartition& partition) {
  partition.validate(samples.n);
  const double N = static_cast<double>(samples.N);
  const double alphabet = std::pow(static_cast<double>(samples.q), partition.b);
  if (N <= alphabet) throw Error(Errc::RegimeViolation, "blocks need N > q^b");
  double entropies = 0.0;
  for (const auto& block : partition.blocks) entropies += entropy(empirical_joint(samples, block).probs());
  return N * entropies + partition.B * (alphabet - 1.0) / 2.0 * std::log2(N / alphabet);
}

Algorithm2Trace algorithm2(const SampleSet& samples, const Algorithm2Options& options) {
  require_binary(samples);
  if (samples.N == 0) throw Error(Errc::InvalidArgument, "no samples");
  Histogram state(samples);
  Rng rng(options.seed);

  Algorithm2Trace trace;
  trace.H_whole = state.entropy();
  double incumbent = state.marginal_sum();
  {
    Algorithm2Step step;
    step.partition = random_partition(samples.n, options.B, rng);
    step.H_b = block_entropy_sum(state, step.partition);
    step.H_m = incumbent;
    step.H_components = incumbent;
    trace.steps.push_back(std::move(step));
  }

  for (std::size_t it = 1; it <= options.iterations; ++it) {
    Algorithm2Step step;
    step.partition = random_partition(samples.n, options.B, rng);
    step.H_components = incumbent;
    const auto& blocks = step.partition.blocks;
    std::vector<double> block_h(blocks.size());
    std::vector<double> block_m(blocks.size());
    std::vector<WordMapping> maps(blocks.size(), WordMapping::identity(1));
    parallel_for(blocks.size(), [&](std::size_t j) {
      const auto counts = state.block_counts(blocks[j]);
      const JointDistribution joint = joint_from_counts(static_cast<int>(blocks[j].size()), counts, state.N);
      block_h[j] = entropy_from_counts(counts, state.N);
      const PlrResult r = solve_plr(joint, options.k);
      maps[j] = r.best_true_mapping;
      block_m[j] = r.best_true_objective;
    });
    step.H_b = std::accumulate(block_h.begin(), block_h.end(), 0.0);
    step.H_m = std::accumulate(block_m.begin(), block_m.end(), 0.0);
    step.accepted = step.H_m <= incumbent + 1e-12;
    if (step.accepted) {
      for (Word& w : state.words) {
        for (std::size_t j = 0; j < blocks.size(); ++j) {
          w = Histogram::scatter(w, maps[j](Histogram::gather(w, blocks[j])), blocks[j]);
        }
      }
      incumbent = state.marginal_sum();
      step.H_m = incumbent;
      step.mappings = std::move(maps);
    } else {
      step.H_m = incumbent;
    }
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

double total_cost(const Algorithm2Trace& trace, const CodingCostModel& model, std::size_t I0) {
  if (I0 >= trace.steps.size()) throw Error(Errc::IndexOutOfRange, "I0 beyond the recorded trace");
  const double N = static_cast<double>(model.N);
  const double alphabet = std::pow(static_cast<double>(model.q), model.b);
  const double i0 = static_cast<double>(I0);
  return N * trace.steps[I0].H_b + model.B * (alphabet - 1.0) / 2.0 * std::log2(N / alphabet) +
         i0 * model.B * model.b * alphabet + i0 * model.n * std::log2(static_cast<double>(model.n));
}

TotalCost best_total_cost(const Algorithm2Trace& trace, const CodingCostModel& model) {
  TotalCost best{0, total_cost(trace, model, 0)};
  for (std::size_t i = 1; i < trace.steps.size(); ++i) {
    const double c = total_cost(trace, model, i);
    if (c < best.bits) best = {i, c};
  }
  return best;
}

NaiveSearchResult naive_block_search(const SampleSet& samples, int B, std::size_t trials, std::uint64_t seed) {
  require_binary(samples);
  if (trials < 1) throw Error(Errc::InvalidArgument, "naive search needs at least one trial");
  const Histogram h(samples);
  Rng rng(seed);
  std::vector<BlockPartition> partitions;
  for (std::size_t t = 0; t < trials; ++t) partitions.push_back(random_partition(samples.n, B, rng));
  NaiveSearchResult out;
  out.values.resize(trials);
  parallel_for(trials, [&](std::size_t t) { out.values[t] = block_entropy_sum(h, partitions[t]); });
  const auto best = static_cast<std::size_t>(std::min_element(out.values.begin(), out.values.end()) - out.values.begin());
  out.best = out.values[best];
  out.partition = partitions[best];
  return out;
}

JointDistribution bss_joint(int q, double s, std::uint64_t seed) {
  if (q < 2) throw Error(Errc::InvalidArgument, "alphabet size must be at least 2");
  const Eigen::VectorXd p = zipf(q, s);
  std::vector<int> sigma(static_cast<std::size_t>(q));
  std::iota(sigma.begin(), sigma.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<int>(sigma));
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(q * q);
  for (int x1 = 0; x1 < q; ++x1) {
    for (int x2 = 0; x2 < q; ++x2) {
      const int y2 = sigma[static_cast<std::size_t>((x1 + x2) % q)];
      probs[x1 + q * y2] += p[x1] * p[x2];
    }
  }
  return JointDistribution(2, q, std::move(probs), true);
}

BssReport bss_experiment(int q, double s, QarySolver method, int k, std::size_t inits, std::uint64_t seed) {
  const JointDistribution joint = bss_joint(q, s, seed);
  BssReport report{entropy(joint.probs()), sum_marginal_entropies(joint), 0.0, 0.0, WordMapping::identity(joint.size())};
  if (method == QarySolver::Exhaustive) {
    QaryResult r = solve_exhaustive_qary(joint, k);
    report.mapping = std::move(r.best_true_mapping);
  } else {
    DescentResult r = objective_descent(joint, k, inits, seed);
    report.mapping = std::move(r.mapping);
  }
  report.sum_marginals_found = sum_marginal_entropies(apply_mapping(joint, report.mapping));
  if (report.sum_marginals_found > report.sum_marginals_input) {
    report.mapping = WordMapping::identity(joint.size());
    report.sum_marginals_found = report.sum_marginals_input;
  }
  report.gap = report.sum_marginals_found - report.joint_entropy;
  return report;
}

CodebookReport codebook(std::span<const double> frequencies, int k) {
  if (frequencies.size() != 256) throw Error(Errc::SizeMismatch, "codebook tables hold 256 frequencies");
  Eigen::VectorXd probs(256);
  for (std::size_t i = 0; i < 256; ++i) {
    if (frequencies[i] < 0.0) throw Error(Errc::NegativeMass, "negative frequency");
    probs[static_cast<Eigen::Index>(i)] = frequencies[i];
  }
  const double total = probs.sum();
  if (!(total > 0.0)) throw Error(Errc::NotNormalized, "frequency table is empty");
  const JointDistribution joint(8, 2, probs / total, true);
  PlrResult r = solve_plr(joint, k);
  return {entropy(joint.probs()), sum_marginal_entropies(joint), r.best_true_objective, std::move(r.best_true_mapping)};
}

}  // namespace finita
