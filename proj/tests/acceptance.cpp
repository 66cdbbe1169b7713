// Acceptance runs. Each criterion prints one PASS or FAIL line with timing
// and the measured quantities. `acceptance --only N` runs a single one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "finita/branch_bound.hpp"
#include "finita/coding.hpp"
#include "finita/constrained.hpp"
#include "finita/exact_recovery.hpp"
#include "finita/generators.hpp"
#include "finita/plr.hpp"
#include "finita/qary.hpp"
#include "oracles.hpp"

using namespace finita;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

std::vector<double> sorted_probs(const JointDistribution& j) {
  std::vector<double> p = oracle::to_vec(j.probs());
  std::sort(p.begin(), p.end());
  return p;
}

bool pi_canonical(const JointDistribution& out) {
  const Canonical c = canonicalize(out);
  const Eigen::VectorXd pi = c.params.zero_probs();
  return pi.maxCoeff() <= 0.5 + 1e-12;
}

void exact_recovery(Outcome& o) {
  std::size_t cases = 0;
  double worst_pi = 0.0;
  double worst_joint = 0.0;
  for (int n = 2; n <= 16; ++n) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const ScrambledProduct s = random_product_scrambled(n, 1000 * static_cast<std::uint64_t>(n) + seed);
      const RecoveryResult r = recover_product_params(s.joint);
      Eigen::VectorXd truth = s.pi;
      std::sort(truth.data(), truth.data() + truth.size(), std::greater<>());
      worst_pi = std::max(worst_pi, max_abs_diff(r.params.zero_probs(), truth));
      const JointDistribution image = apply_mapping(s.joint, r.mapping);
      worst_joint = std::max(worst_joint, max_abs_diff(image.probs(), product_joint(r.params).probs()));
      ++cases;
    }
  }
  o.detail << cases << " cases, max |pi error| " << worst_pi << ", max |joint error| " << worst_joint;
  o.require(worst_pi <= 1e-9, "pi within 1e-9");
  o.require(worst_joint <= 1e-9, "joint within 1e-9");
}

void branch_bound(Outcome& o) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const JointDistribution j = oracle::random_joint(3, 2, 7000 + seed);
    const double optimum = oracle::brute_force_binary_min(sorted_probs(j), 3);
    worst = std::max(worst, std::abs(solve_exact(j).value - optimum));
  }
  std::size_t ascending = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const JointDistribution j = oracle::random_joint(2, 2, 7100 + seed);
    const JointDistribution out = apply_mapping(j, solve_exact(j).mapping);
    if (out[0] <= out[1] && out[1] <= out[2] && out[2] <= out[3]) ++ascending;
  }
  o.detail << "n=3 max |bb - 8! oracle| " << worst << ", n=2 ascending " << ascending << "/20";
  o.require(worst <= 1e-12, "n=3 optimum within 1e-12");
  o.require(ascending == 20, "n=2 ascending allocation");
}

void relaxation(Outcome& o) {
  double worst_gap = 0.0;
  bool sound = true;
  bool nested = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = seed < 10 ? 2 : 3;
    const JointDistribution j = oracle::random_joint(n, 2, 7200 + seed);
    const double h = entropy(j.probs());
    const double optimum = solve_exact(j).value;
    sound = sound && optimum >= h - 1e-12;
    double previous = 1e300;
    for (int k = 1; k <= 32; k *= 2) {
      const PlrResult r = solve_plr(j, k);
      sound = sound && r.ub_value >= optimum - 1e-12;
      nested = nested && r.ub_value <= previous + 1e-12;
      previous = r.ub_value;
      if (k == 32) worst_gap = std::max(worst_gap, r.ub_value - optimum);
    }
  }
  o.detail << "max gap at k=32 " << worst_gap << " bits";
  o.require(sound, "ub >= optimum >= joint entropy");
  o.require(nested, "ub non-increasing under k -> 2k");
  o.require(worst_gap <= 0.01, "gap at k=32 <= 0.01");
}

void fig3(Outcome& o) {
  const int ks[] = {2, 4, 6, 8, 10};
  const int seeds = 20;
  std::vector<double> mean_ub(5, 0.0);
  std::vector<double> mean_gap(5, 0.0);
  int recovered = 0;
  int recovered_best = 0;
  bool above = true;
  for (int s = 0; s < seeds; ++s) {
    const ScrambledProduct p = random_product_scrambled(10, 3000 + static_cast<std::uint64_t>(s));
    const double h = entropy(p.joint.probs());
    for (std::size_t i = 0; i < 5; ++i) {
      const PlrResult r = solve_plr(p.joint, ks[i]);
      above = above && r.ub_value >= h - 1e-12;
      mean_ub[i] += (r.ub_value - h) / seeds;
      mean_gap[i] += (r.true_objective - h) / seeds;
      if (ks[i] == 8) {
        if (r.true_objective - h <= 1e-6) ++recovered;
        if (r.best_true_objective - h <= 1e-6) ++recovered_best;
      }
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < 5; ++i) monotone = monotone && mean_ub[i] <= mean_ub[i - 1] + 1e-12;
  o.detail << "k=8 within 1e-6: " << recovered << "/" << seeds << " (best candidate " << recovered_best
           << "); mean ub - H over k=2..10:";
  for (double v : mean_ub) o.detail << " " << v;
  o.detail << "; mean true gap:";
  for (double v : mean_gap) o.detail << " " << v;
  o.require(recovered * 5 >= seeds * 4, ">= 80% within 1e-6 at k=8");
  o.require(monotone && above, "ub curve decreasing toward joint entropy");
}

void counting(Outcome& o) {
  bool banded = true;
  for (int n = 2; n <= 10; ++n) {
    const std::size_t expected = (std::size_t{1} << (n + 1)) - 2;
    const std::vector<Gf2Matrix> all = enumerate_banded_invertible(n);
    banded = banded && all.size() == expected;
    for (const Gf2Matrix& m : all) banded = banded && m.is_banded() && gf2_invertible(m);
    if (n <= 6) {
      // Every matrix supported on the diagonal and cyclic superdiagonal.
      std::vector<std::pair<int, int>> support;
      for (int i = 0; i < n; ++i) {
        support.emplace_back(i, i);
        support.emplace_back(i, (i + 1) % n);
      }
      std::sort(support.begin(), support.end());
      support.erase(std::unique(support.begin(), support.end()), support.end());
      std::size_t count = 0;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << support.size()); ++mask) {
        Gf2Matrix m = Gf2Matrix::identity(n);
        for (int i = 0; i < n; ++i) m.set(i, i, false);
        for (std::size_t b = 0; b < support.size(); ++b) {
          if ((mask >> b) & 1u) m.set(support[b].first, support[b].second, true);
        }
        if (gf2_invertible(m)) ++count;
      }
      banded = banded && count == expected;
    }
  }
  o.detail << "banded counts " << (banded ? "match" : "differ");
  o.require(banded, "banded count 2^{n+1} - 2");

  std::ostringstream markov;
  bool markov_ok = true;
  for (int n = 3; n <= 10; ++n) {
    for (double flip : {0.1, 0.2, 0.3}) {
      const std::size_t got = count_unique_probs(markov_joint(MarkovSpec{n, flip}));
      const std::size_t expected = static_cast<std::size_t>(n * (n - 1) + 2);
      if (got != expected) {
        markov_ok = false;
        if (flip == 0.2) markov << " n=" << n << ":" << got << "/" << expected;
      }
    }
  }
  o.detail << "; markov counts (got/expected, flip 0.2)" << (markov_ok ? " match" : markov.str());
  o.require(markov_ok, "markov count n(n-1)+2");

  bool block_ok = true;
  for (int r = 1; r <= 3; ++r) {
    for (int blocks = 1; blocks <= 4; ++blocks) {
      const JointDistribution base = random_joint(r, 2, 50 + static_cast<std::uint64_t>(r * 10 + blocks));
      const JointDistribution j = block_iid_joint(r * blocks, r, base.probs());
      const double m = static_cast<double>(blocks);
      const double bound = std::round(std::tgamma(m + std::pow(2.0, r)) / (std::tgamma(m + 1) * std::tgamma(std::pow(2.0, r))));
      block_ok = block_ok && static_cast<double>(count_unique_probs(j)) <= bound;
    }
  }
  o.detail << "; block-iid bound " << (block_ok ? "respected" : "violated");
  o.require(block_ok, "block-iid count bound");
}

void bss(Outcome& o) {
  bool ok = true;
  for (int q = 2; q <= 8; ++q) {
    const BssReport ex = bss_experiment(q, 1.6, QarySolver::Exhaustive, 8, 0, 1);
    const BssReport de = bss_experiment(q, 1.6, QarySolver::Descent, 8, 100, 1);
    o.detail << "q=" << q << " gap " << ex.gap << " descent-exhaustive "
             << de.sum_marginals_found - ex.sum_marginals_found << "; ";
    ok = ok && ex.gap <= 0.05 && ex.gap >= -1e-12;
    ok = ok && de.sum_marginals_found - ex.sum_marginals_found <= 0.1;
  }
  o.require(ok, "exhaustive gap <= 0.05 and descent within 0.1");
}

void table1(Outcome& o) {
  const std::size_t N = 1'000'000;
  const int n = 24;
  const SampleSet s = sample_zipf(N, 1.4, n, 1);
  const SingleBlockCost single = single_block_cost(s);
  o.detail << "H " << empirical_entropy(s) << ", single " << single.bits;
  o.require(std::abs(single.bits - 9.62e6) <= 0.02 * 9.62e6, "single block within 2% of 9.62e6");

  for (int B : {3, 4, 6}) {
    Algorithm2Options opts;
    opts.B = B;
    opts.k = 8;
    opts.iterations = 100;
    opts.seed = 1;
    const Algorithm2Trace t = algorithm2(s, opts);
    double min_hb = 1e300;
    for (const Algorithm2Step& st : t.steps) min_hb = std::min(min_hb, st.H_b);
    const CodingCostModel model{N, 2, n, n / B, B};
    const TotalCost total = best_total_cost(t, model);
    const NaiveSearchResult naive = naive_block_search(s, B, 1000, 1);
    o.detail << "; B=" << B << " min Hb " << min_hb << " total " << total.bits << " (I0 " << total.I0
             << ") naive " << naive.best;
    o.require(min_hb <= naive.best + 1e-12, "algorithm2 <= naive for B=" + std::to_string(B));
    if (B == 4) {
      o.require(std::abs(min_hb - 5.85) <= 0.15, "B=4 min Hb within 0.15 of 5.85");
      o.require(std::abs(total.bits - 5.93e6) <= 0.03 * 5.93e6, "B=4 total within 3% of 5.93e6");
    }
  }
}

void invariants(Outcome& o) {
  bool tc = true;
  bool invariance = true;
  bool bijective = true;
  bool canonical = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 2 + static_cast<int>(seed % 3);
    const JointDistribution j = random_joint(n, 2, 8000 + seed);
    tc = tc && total_correlation(j) >= -1e-12;
    const ScrambledProduct p = random_product_scrambled(n, 8100 + seed);
    const JointDistribution prod = product_joint(p.pi);
    tc = tc && std::abs(total_correlation(prod)) <= 1e-12;
    const WordMapping m = random_mapping(j.size(), seed);
    invariance = invariance && std::abs(entropy(apply_mapping(j, m).probs()) - entropy(j.probs())) <= 1e-12;

    const PlrResult r = solve_plr(j, 4);
    const std::vector<std::pair<const JointDistribution*, WordMapping>> outputs = {
        {&j, solve_exact(j).mapping},
        {&j, r.mapping},
        {&j, r.best_true_mapping},
        {&j, linear_mapping(search_r2(j).matrix)},
        {&p.joint, recover_product_params(p.joint).mapping},
    };
    for (const auto& [input, out] : outputs) {
      bijective = bijective && is_bijection(out.perm());
      canonical = canonical && pi_canonical(apply_mapping(*input, out));
    }
    const JointDistribution q3 = random_joint(2, 3, 8200 + seed);
    const WordMapping qm = solve_exhaustive_qary(q3, 4).mapping;
    bijective = bijective && is_bijection(qm.perm());
  }

  bool chain = true;
  const SampleSet s = sample_zipf(100'000, 1.4, 24, 3);
  for (int B : {3, 4, 6}) {
    Algorithm2Options opts;
    opts.B = B;
    opts.iterations = 20;
    const Algorithm2Trace t = algorithm2(s, opts);
    for (const Algorithm2Step& st : t.steps) {
      chain = chain && t.H_whole <= st.H_b + 1e-9 && st.H_b <= st.H_components + 1e-9 && st.H_b <= st.H_m + 1e-9;
      for (const WordMapping& m : st.mappings) bijective = bijective && is_bijection(m.perm());
    }
    const NaiveSearchResult naive = naive_block_search(s, B, 100, 3);
    double min_hb = 1e300;
    for (const Algorithm2Step& st : t.steps) min_hb = std::min(min_hb, st.H_b);
    chain = chain && min_hb <= naive.best + 1e-12;
  }

  bool codebook_ok = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    std::vector<double> freq(256);
    for (double& f : freq) f = rng.uniform() * rng.uniform();
    const CodebookReport c = codebook(freq);
    codebook_ok = codebook_ok && c.sum_marginals_output <= c.sum_marginals_input + 1e-12 &&
                  c.sum_marginals_output >= c.joint_entropy - 1e-12 && is_bijection(c.mapping.perm());
  }

  o.detail << "total correlation " << tc << ", entropy invariance " << invariance << ", block chain " << chain
           << ", bijections " << bijective << ", canonical pi " << canonical << ", codebook " << codebook_ok;
  o.require(tc, "total correlation");
  o.require(invariance, "mapping invariance");
  o.require(chain, "block entropy chain");
  o.require(bijective, "bijections");
  o.require(canonical, "canonical pi <= 1/2");
  o.require(codebook_ok, "codebook bounds");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N]\n");
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "exact recovery", 5, exact_recovery},
      {2, "branch and bound optimality", 30, branch_bound},
      {3, "relaxation soundness and convergence", 60, relaxation},
      {4, "scrambled products, n=10", 300, fig3},
      {5, "counting theorems", 30, counting},
      {6, "modular source separation", 600, bss},
      {7, "block coding at full scale", 1800, table1},
      {8, "universal invariants", 120, invariants},
  };

  bool all = true;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.budget_s, "runtime under " + std::to_string(static_cast<int>(c.budget_s)) + " s");
    std::printf("criterion %d %s: %s (%.1f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.str().c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
