#include "finita/constrained.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "finita/parallel.hpp"
#include "finita/rng.hpp"

namespace finita {

namespace {

Word full_mask(int n) { return n >= 32 ? ~Word{0} : (Word{1} << n) - 1; }

bool parity(Word x) { return (std::popcount(x) & 1) != 0; }

void require_binary(const JointDistribution& joint) {
  if (joint.q() != 2) throw Error(Errc::UnsupportedAlphabet, "linear mappings need q = 2");
}

}  // namespace

Gf2Matrix::Gf2Matrix(std::vector<Word> rows) : rows_(std::move(rows)) {
  if (rows_.empty() || rows_.size() > 31) throw Error(Errc::InvalidArgument, "matrix dimension must be in 1..31");
  const Word mask = full_mask(n());
  for (Word r : rows_) {
    if (r & ~mask) throw Error(Errc::IndexOutOfRange, "row has bits beyond the matrix width");
  }
}

Gf2Matrix Gf2Matrix::identity(int n) {
  std::vector<Word> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = Word{1} << i;
  return Gf2Matrix(std::move(rows));
}

void Gf2Matrix::set(int i, int j, bool value) {
  Word& r = rows_[static_cast<std::size_t>(i)];
  r = value ? (r | (Word{1} << j)) : (r & ~(Word{1} << j));
}

Word Gf2Matrix::operator*(Word x) const {
  Word y = 0;
  for (int i = 0; i < n(); ++i) {
    if (parity(rows_[static_cast<std::size_t>(i)] & x)) y |= Word{1} << i;
  }
  return y;
}

Gf2Matrix Gf2Matrix::operator*(const Gf2Matrix& other) const {
  if (other.n() != n()) throw Error(Errc::SizeMismatch, "matrix dimensions differ");
  // Row i of the product is the XOR of the rows of `other` selected by row i.
  std::vector<Word> rows(rows_.size(), 0);
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < n(); ++j) {
      if (at(i, j)) rows[static_cast<std::size_t>(i)] ^= other.row(j);
    }
  }
  return Gf2Matrix(std::move(rows));
}

int Gf2Matrix::max_row_weight() const {
  int w = 0;
  for (Word r : rows_) w = std::max(w, std::popcount(r));
  return w;
}

bool Gf2Matrix::is_banded() const {
  for (int i = 0; i < n(); ++i) {
    const Word allowed = (Word{1} << i) | (Word{1} << ((i + 1) % n()));
    if (rows_[static_cast<std::size_t>(i)] & ~allowed) return false;
  }
  return true;
}

bool gf2_invertible(const Gf2Matrix& m) {
  std::vector<Word> rows = m.rows();
  const int n = m.n();
  for (int col = 0; col < n; ++col) {
    const Word bit = Word{1} << col;
    auto pivot = std::find_if(rows.begin() + col, rows.end(), [&](Word r) { return (r & bit) != 0; });
    if (pivot == rows.end()) return false;
    std::iter_swap(rows.begin() + col, pivot);
    for (int i = 0; i < n; ++i) {
      if (i != col && (rows[static_cast<std::size_t>(i)] & bit)) rows[static_cast<std::size_t>(i)] ^= rows[static_cast<std::size_t>(col)];
    }
  }
  return true;
}

std::vector<Gf2Matrix> enumerate_banded_invertible(int n) {
  if (n < 2 || n > 20) throw Error(Errc::InvalidArgument, "banded enumeration needs 2 <= n <= 20");
  // The determinant is prod(diagonal) + prod(superdiagonal), so exactly one
  // of the two bands must be all ones.
  auto build = [n](Word diag, Word super) {
    std::vector<Word> rows(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      if ((diag >> i) & 1u) rows[static_cast<std::size_t>(i)] |= Word{1} << i;
      if ((super >> i) & 1u) rows[static_cast<std::size_t>(i)] |= Word{1} << ((i + 1) % n);
    }
    return Gf2Matrix(std::move(rows));
  };
  const Word ones = full_mask(n);
  std::vector<Gf2Matrix> out;
  out.reserve((std::size_t{1} << (n + 1)) - 2);
  for (Word v = 0; v < ones; ++v) out.push_back(build(ones, v));
  for (Word v = 0; v < ones; ++v) out.push_back(build(v, ones));
  return out;
}

WordMapping linear_mapping(const Gf2Matrix& m) {
  if (!gf2_invertible(m)) throw Error(Errc::Singular, "matrix is singular over the binary field");
  const std::size_t size = word_count(m.n(), 2);
  std::vector<Word> perm(size);
  for (std::size_t x = 0; x < size; ++x) perm[x] = m * static_cast<Word>(x);
  return WordMapping(std::move(perm));
}

JointDistribution apply_linear_map(const JointDistribution& joint, const Gf2Matrix& m) {
  require_binary(joint);
  if (m.n() != joint.n()) throw Error(Errc::SizeMismatch, "matrix and joint dimensions differ");
  return apply_mapping(joint, linear_mapping(m));
}

namespace {

// sum_i h_b(P(Y_i = 0)) for Y = m X, without materializing the mapping.
double linear_objective(const JointDistribution& joint, const Gf2Matrix& m) {
  double total = 0.0;
  const auto& p = joint.probs();
  for (int i = 0; i < m.n(); ++i) {
    const Word row = m.row(i);
    double zero = 0.0;
    for (Eigen::Index x = 0; x < p.size(); ++x) {
      if (!parity(row & static_cast<Word>(x))) zero += p[x];
    }
    total += binary_entropy(zero);
  }
  return total;
}

}  // namespace

LinearResult search_r2(const JointDistribution& joint, int max_n) {
  require_binary(joint);
  if (joint.n() > max_n) throw Error(Errc::InvalidArgument, "n exceeds the banded search cap");
  if (joint.n() == 1) return {Gf2Matrix::identity(1), sum_marginal_entropies(joint)};
  const auto candidates = enumerate_banded_invertible(joint.n());
  std::vector<double> values(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) { values[i] = linear_objective(joint, candidates[i]); });
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  return {candidates[best], values[best]};
}

double affinity(const JointDistribution& joint, const Gf2Matrix& m) {
  require_binary(joint);
  return 1.0 - linear_objective(joint, m) / joint.n();
}

namespace {

Gf2Matrix random_individual(int n, int r, Rng& rng) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    std::vector<Word> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Word row = Word{1} << perm[static_cast<std::size_t>(i)];
      const auto extra = rng.below(static_cast<std::uint64_t>(r));
      for (std::uint64_t e = 0; e < extra; ++e) row |= Word{1} << rng.below(static_cast<std::uint64_t>(n));
      rows[static_cast<std::size_t>(i)] = row;
    }
    Gf2Matrix m(std::move(rows));
    if (gf2_invertible(m)) return m;
  }
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<int>(perm));
  std::vector<Word> rows(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = Word{1} << perm[static_cast<std::size_t>(i)];
  return Gf2Matrix(std::move(rows));
}

// Flips random entries, clears random bits of rows heavier than r, and
// keeps the result only if it is invertible.
bool mutate(const Gf2Matrix& parent, int flips, int r, int retries, Rng& rng, Gf2Matrix& out) {
  const int n = parent.n();
  for (int attempt = 0; attempt < retries; ++attempt) {
    std::vector<Word> rows = parent.rows();
    for (int f = 0; f < flips; ++f) {
      const auto i = rng.below(static_cast<std::uint64_t>(n));
      rows[i] ^= Word{1} << rng.below(static_cast<std::uint64_t>(n));
    }
    for (Word& row : rows) {
      while (std::popcount(row) > r) {
        int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::popcount(row))));
        Word bits = row;
        while (pick-- > 0) bits &= bits - 1;
        row &= ~(bits & (~bits + 1));
      }
    }
    Gf2Matrix candidate(std::move(rows));
    if (gf2_invertible(candidate)) {
      out = std::move(candidate);
      return true;
    }
  }
  return false;
}

}  // namespace

ImmuneResult immune_search(const JointDistribution& joint, const ImmuneConfig& config) {
  require_binary(joint);
  const int n = joint.n();
  if (config.r < 1) throw Error(Errc::InfeasibleConfig, "no invertible matrix has row weight below 1");
  if (config.population < 1) throw Error(Errc::InvalidArgument, "population must be at least 1");
  const int r = std::min(config.r, n);

  Rng rng(config.seed);
  struct Individual {
    Gf2Matrix m;
    double value;
  };
  std::vector<Individual> population;
  for (std::size_t i = 0; i < config.population; ++i) {
    Gf2Matrix m = config.init_identity ? Gf2Matrix::identity(n) : random_individual(n, r, rng);
    population.push_back({m, linear_objective(joint, m)});
  }
  auto by_value = [](const Individual& a, const Individual& b) { return a.value < b.value; };
  Individual best = *std::min_element(population.begin(), population.end(), by_value);

  ImmuneResult result{best.m, best.value, {}};
  for (std::size_t g = 0; g < config.generations; ++g) {
    std::vector<std::uint64_t> seeds(population.size());
    for (auto& s : seeds) s = rng.next();
    parallel_for(population.size(), [&](std::size_t p) {
      Rng local(seeds[p]);
      Individual& parent = population[p];
      const double aff = 1.0 - parent.value / n;
      const int flips = std::max(1, static_cast<int>(std::ceil(config.beta * (1.0 - aff) * n)));
      for (std::size_t c = 0; c < config.clones; ++c) {
        Gf2Matrix child = parent.m;
        if (!mutate(parent.m, flips, r, config.retries, local, child)) continue;
        const double v = linear_objective(joint, child);
        if (v < parent.value) parent = {std::move(child), v};
      }
    });
    std::stable_sort(population.begin(), population.end(), by_value);
    const std::size_t fresh = std::min(config.fresh, population.size() - 1);
    for (std::size_t i = population.size() - fresh; i < population.size(); ++i) {
      Gf2Matrix m = random_individual(n, r, rng);
      population[i] = {m, linear_objective(joint, m)};
    }
    const Individual& gen_best = *std::min_element(population.begin(), population.end(), by_value);
    if (gen_best.value < best.value) best = gen_best;
    result.history.push_back(best.value);
  }
  result.matrix = best.m;
  result.value = best.value;
  return result;
}

bool is_balanced(std::span<const std::uint8_t> truth_table) {
  if (truth_table.empty() || !std::has_single_bit(truth_table.size())) {
    throw Error(Errc::BadLength, "truth table length must be a power of two");
  }
  const auto ones = std::count_if(truth_table.begin(), truth_table.end(), [](std::uint8_t b) { return b != 0; });
  return static_cast<std::size_t>(ones) * 2 == truth_table.size();
}

}  // namespace finita
