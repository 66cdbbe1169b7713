#include "finita/qary.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include "finita/parallel.hpp"
#include "finita/rng.hpp"

namespace finita {

std::size_t CellEnumeration::feasible_count() const {
  return static_cast<std::size_t>(std::count(feasible.begin(), feasible.end(), true));
}

std::vector<Cell> CellEnumeration::feasible_cells() const {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (feasible[i]) out.push_back(cells[i]);
  }
  return out;
}

namespace {

constexpr double kLog2e = std::numbers::log2e;

double phi(double x) { return detail::plog2p(x); }
double phi_slope(double x) { return -std::log2(x) - kLog2e; }

void cells_rec(int slots, int k, int start, std::vector<int>& current, std::vector<Cell>& out) {
  if (static_cast<int>(current.size()) == slots) {
    out.push_back(Cell{current});
    return;
  }
  for (int r = start; r < k; ++r) {
    current.push_back(r);
    cells_rec(slots, k, r, current, out);
    current.pop_back();
  }
}

std::vector<Word> descending_order(const Eigen::VectorXd& probs) {
  std::vector<Word> order(static_cast<std::size_t>(probs.size()));
  std::iota(order.begin(), order.end(), Word{0});
  std::stable_sort(order.begin(), order.end(), [&](Word a, Word b) { return probs[a] > probs[b]; });
  return order;
}

// Marginals of the output when probs_desc[r] sits on words[r].
std::vector<Eigen::VectorXd> allocated_marginals(std::span<const Word> words, std::span<const double> probs_desc, int n,
                                                 int q) {
  std::vector<Eigen::VectorXd> marg(static_cast<std::size_t>(n), Eigen::VectorXd::Zero(q));
  for (std::size_t r = 0; r < words.size(); ++r) {
    Word w = words[r];
    for (int i = 0; i < n; ++i) {
      marg[static_cast<std::size_t>(i)][static_cast<Eigen::Index>(w % static_cast<Word>(q))] += probs_desc[r];
      w /= static_cast<Word>(q);
    }
  }
  return marg;
}

}  // namespace

QaryEntropyModel::QaryEntropyModel(int q, int k, TangentSchedule schedule)
    : q_(q), regions_(build_tangent_bound(k, schedule)) {
  if (q < 2) throw Error(Errc::InvalidArgument, "alphabet size must be at least 2");
}

double QaryEntropyModel::phi_bound(int region, double x) const {
  const double t = regions_.piece(region).tangent;
  return phi(t) + phi_slope(t) * (x - t);
}

double QaryEntropyModel::remainder_anchor(const Cell& cell) const {
  double sum = 0.0;
  for (int r : cell.regions) sum += regions_.piece(r).tangent;
  return std::min(sum, 1.0 - 1.0 / q_);
}

double QaryEntropyModel::remainder_bound(const Cell& cell, double t) const {
  const double m0 = 1.0 - remainder_anchor(cell);
  return phi(m0) + phi_slope(m0) * ((1.0 - t) - m0);
}

ComponentSurrogate QaryEntropyModel::surrogate(const Cell& cell) const {
  if (static_cast<int>(cell.regions.size()) != q_ - 1) throw Error(Errc::SizeMismatch, "cell must hold q-1 regions");
  const double m0 = 1.0 - remainder_anchor(cell);
  const double gamma = -phi_slope(m0);
  ComponentSurrogate s;
  s.coeff.assign(static_cast<std::size_t>(q_), 0.0);
  s.offset = phi(m0) + phi_slope(m0) * (1.0 - m0);
  for (int j = 0; j < q_ - 1; ++j) {
    const double t = regions_.piece(cell.regions[static_cast<std::size_t>(j)]).tangent;
    s.coeff[static_cast<std::size_t>(j)] = phi_slope(t) + gamma;
    s.offset += t * kLog2e;
  }
  return s;
}

Cell QaryEntropyModel::cell_of(const Eigen::VectorXd& marginal) const {
  std::vector<double> m(marginal.data(), marginal.data() + marginal.size());
  std::sort(m.begin(), m.end());
  Cell cell;
  for (int j = 0; j < q_ - 1; ++j) cell.regions.push_back(regions_.region(m[static_cast<std::size_t>(j)]));
  std::sort(cell.regions.begin(), cell.regions.end());
  return cell;
}

bool QaryEntropyModel::is_feasible(const Cell& cell) const {
  double sum = 0.0;
  double largest = 0.0;
  for (int r : cell.regions) {
    const double lo = regions_.piece(r).lo;
    sum += lo;
    largest = std::max(largest, lo);
  }
  return sum + largest <= 1.0 + 1e-12;
}

CellEnumeration enumerate_cells(int q, int k, TangentSchedule schedule) {
  const QaryEntropyModel model(q, k, schedule);
  CellEnumeration out;
  std::vector<int> current;
  cells_rec(q - 1, k, 0, current, out.cells);
  for (const Cell& c : out.cells) out.feasible.push_back(model.is_feasible(c));
  return out;
}

QaryProblem::QaryProblem(const JointDistribution& joint, QaryEntropyModel model)
    : joint_(&joint), model_(std::move(model)) {
  if (joint.q() != model_.q()) throw Error(Errc::SizeMismatch, "model and joint disagree on the alphabet size");
  input_desc_ = descending_order(joint.probs());
  for (Word w : input_desc_) probs_desc_.push_back(joint[w]);
}

void QaryProblem::allocate(const std::vector<Cell>& cells, std::vector<Word>& words, std::vector<double>& coeff,
                           double& offset) const {
  const int n = joint_->n();
  const int q = joint_->q();
  if (static_cast<int>(cells.size()) != n) throw Error(Errc::SizeMismatch, "need one cell per component");
  std::vector<double> c{0.0};
  c.reserve(joint_->size());
  offset = 0.0;
  for (int i = 0; i < n; ++i) {
    const ComponentSurrogate s = model_.surrogate(cells[static_cast<std::size_t>(i)]);
    offset += s.offset;
    const std::size_t block = c.size();
    c.resize(block * static_cast<std::size_t>(q));
    for (int d = q - 1; d >= 0; --d) {
      for (std::size_t w = 0; w < block; ++w) c[static_cast<std::size_t>(d) * block + w] = c[w] + s.coeff[static_cast<std::size_t>(d)];
    }
  }
  words.resize(c.size());
  std::iota(words.begin(), words.end(), Word{0});
  std::sort(words.begin(), words.end(), [&](Word a, Word b) { return c[a] < c[b] || (c[a] == c[b] && a < b); });
  coeff.resize(c.size());
  for (std::size_t r = 0; r < c.size(); ++r) coeff[r] = c[words[r]];
}

QaryEval QaryProblem::evaluate(const std::vector<Cell>& cells) const {
  std::vector<Word> words;
  std::vector<double> coeff;
  double offset = 0.0;
  allocate(cells, words, coeff, offset);
  QaryEval e;
  for (std::size_t r = 0; r < words.size(); ++r) e.value += coeff[r] * probs_desc_[r];
  e.value += offset;
  const auto marg = allocated_marginals(words, probs_desc_, joint_->n(), joint_->q());
  e.feasible = true;
  for (std::size_t i = 0; i < marg.size(); ++i) {
    for (Eigen::Index s = 0; s < marg[i].size(); ++s) e.true_objective += phi(marg[i][s]);
    e.realized.push_back(model_.cell_of(marg[i]));
    if (!(e.realized.back() == cells[i])) e.feasible = false;
  }
  return e;
}

WordMapping QaryProblem::mapping_for(const std::vector<Cell>& cells) const {
  std::vector<Word> words;
  std::vector<double> coeff;
  double offset = 0.0;
  allocate(cells, words, coeff, offset);
  const int n = joint_->n();
  const int q = joint_->q();
  const auto marg = allocated_marginals(words, probs_desc_, n, q);
  std::vector<std::vector<Word>> relabel(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& m = marg[static_cast<std::size_t>(i)];
    std::vector<Word> order(static_cast<std::size_t>(q));
    std::iota(order.begin(), order.end(), Word{0});
    std::stable_sort(order.begin(), order.end(), [&](Word a, Word b) { return m[a] < m[b]; });
    auto& rl = relabel[static_cast<std::size_t>(i)];
    rl.resize(static_cast<std::size_t>(q));
    for (int s = 0; s < q; ++s) rl[order[static_cast<std::size_t>(s)]] = static_cast<Word>(s);
  }
  std::vector<Word> perm(words.size());
  for (std::size_t r = 0; r < words.size(); ++r) {
    Word w = words[r];
    Word out = 0;
    Word scale = 1;
    for (int i = 0; i < n; ++i) {
      out += relabel[static_cast<std::size_t>(i)][w % static_cast<Word>(q)] * scale;
      w /= static_cast<Word>(q);
      scale *= static_cast<Word>(q);
    }
    perm[input_desc_[r]] = out;
  }
  return WordMapping(std::move(perm));
}

namespace {

std::uint64_t multiset_count(std::uint64_t items, std::uint64_t kinds, std::uint64_t cap) {
  // C(items + kinds - 1, items), saturating above cap.
  if (kinds == 0) return 0;
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= items; ++i) {
    r = r * (kinds - 1 + i) / i;
    if (r > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(r);
}

void sequences_rec(int n, std::size_t kinds, std::size_t start, std::vector<std::uint32_t>& current,
                   std::vector<std::vector<std::uint32_t>>& out) {
  if (static_cast<int>(current.size()) == n) {
    out.push_back(current);
    return;
  }
  for (std::size_t c = start; c < kinds; ++c) {
    current.push_back(static_cast<std::uint32_t>(c));
    sequences_rec(n, kinds, c, current, out);
    current.pop_back();
  }
}

}  // namespace

QaryResult solve_exhaustive_qary(const JointDistribution& joint, int k, const QaryOptions& options) {
  const int n = joint.n();
  const std::vector<Cell> cells = enumerate_cells(joint.q(), k, options.schedule).feasible_cells();
  const std::uint64_t count = multiset_count(static_cast<std::uint64_t>(n), cells.size(), options.max_assignments);
  if (count > options.max_assignments) {
    throw Error(Errc::WorkCapExceeded, "exhaustive search needs more than " + std::to_string(options.max_assignments) +
                                           " cell assignments; use objective descent");
  }
  std::vector<std::vector<std::uint32_t>> sequences;
  sequences.reserve(count);
  std::vector<std::uint32_t> current;
  sequences_rec(n, cells.size(), 0, current, sequences);

  const QaryProblem problem(joint, QaryEntropyModel(joint.q(), k, options.schedule));
  auto assignment = [&](std::size_t idx) {
    std::vector<Cell> a;
    for (std::uint32_t c : sequences[idx]) a.push_back(cells[c]);
    return a;
  };
  struct Summary {
    double value = 0.0;
    double true_objective = 0.0;
    bool feasible = false;
  };
  std::vector<Summary> summaries(sequences.size());
  parallel_for(sequences.size(), [&](std::size_t i) {
    const QaryEval e = problem.evaluate(assignment(i));
    summaries[i] = {e.value, e.true_objective, e.feasible};
  });

  const std::size_t none = sequences.size();
  std::size_t winner = none;
  std::size_t best_true = none;
  QaryResult result{WordMapping::identity(joint.size()), 0.0, 0.0, WordMapping::identity(joint.size()), 0.0,
                    sequences.size(), 0};
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (!summaries[i].feasible) continue;
    ++result.feasible_assignments;
    if (winner == none || summaries[i].value < summaries[winner].value) winner = i;
    if (best_true == none || summaries[i].true_objective < summaries[best_true].true_objective) best_true = i;
  }
  if (winner == none) throw Error(Errc::NoFeasiblePlacement, "no cell assignment realizes its own cells");
  result.mapping = problem.mapping_for(assignment(winner));
  result.ub_value = summaries[winner].value;
  result.true_objective = summaries[winner].true_objective;
  const double identity_objective = sum_marginal_entropies(joint);
  if (identity_objective < summaries[best_true].true_objective) {
    result.best_true_objective = identity_objective;
  } else {
    result.best_true_mapping = best_true == winner ? result.mapping : problem.mapping_for(assignment(best_true));
    result.best_true_objective = summaries[best_true].true_objective;
  }
  return result;
}

DescentResult objective_descent(const JointDistribution& joint, int k, std::size_t inits, std::uint64_t seed,
                                const QaryOptions& options) {
  if (inits < 1) throw Error(Errc::InvalidArgument, "objective descent needs at least one initialization");
  constexpr double kEps = 1e-10;
  const int n = joint.n();
  const std::vector<Cell> cells = enumerate_cells(joint.q(), k, options.schedule).feasible_cells();
  const QaryProblem problem(joint, QaryEntropyModel(joint.q(), k, options.schedule));

  Rng seeder(seed);
  std::vector<std::uint64_t> seeds(inits);
  for (auto& s : seeds) s = seeder.next();

  struct Walk {
    DescentTrace trace;
    std::vector<Cell> cells;
    double value = 0.0;
  };
  std::vector<Walk> walks(inits);
  parallel_for(inits, [&](std::size_t init) {
    Rng rng(seeds[init]);
    std::vector<Cell> current;
    for (int i = 0; i < n; ++i) current.push_back(cells[rng.below(cells.size())]);
    std::sort(current.begin(), current.end());
    std::set<std::vector<Cell>> visited{current};
    double previous = std::numeric_limits<double>::infinity();
    Walk& walk = walks[init];
    walk.trace.init_index = init;
    while (true) {
      const QaryEval e = problem.evaluate(current);
      ++walk.trace.steps;
      walk.cells = current;
      walk.value = e.value;
      walk.trace.final_value = e.value;
      walk.trace.true_objective = e.true_objective;
      walk.trace.feasible = e.feasible;
      if (e.feasible) break;
      std::vector<Cell> next = e.realized;
      std::sort(next.begin(), next.end());
      if (!(e.value < previous - kEps) || !visited.insert(next).second) break;
      previous = e.value;
      current = std::move(next);
    }
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < inits; ++i) {
    if (walks[i].trace.true_objective < walks[best].trace.true_objective) best = i;
  }
  DescentResult result{problem.mapping_for(walks[best].cells), walks[best].value, walks[best].trace.true_objective, {}};
  for (const Walk& w : walks) result.trace.push_back(w.trace);
  return result;
}

}  // namespace finita
