#include <doctest.h>

#include <algorithm>
#include <set>

#include "finita/branch_bound.hpp"
#include "finita/generators.hpp"
#include "finita/plr.hpp"
#include "oracles.hpp"

using namespace finita;

namespace {

double max_gap(const PiecewiseLinearBound& b) {
  double gap = 0.0;
  for (int i = 0; i <= 5000; ++i) {
    const double x = 0.5 * i / 5000;
    gap = std::max(gap, b(x) - oracle::hb(x));
  }
  return gap;
}

}  // namespace

TEST_CASE("tangent bounds") {
  for (TangentSchedule s : {TangentSchedule::Nested, TangentSchedule::Midpoint}) {
    for (int k = 1; k <= 16; ++k) {
      const PiecewiseLinearBound b = build_tangent_bound(k, s);
      CHECK(b.k() == k);
      CHECK(b.pieces().front().lo == 0.0);
      CHECK(b.pieces().back().hi == 0.5);
      for (int r = 0; r + 1 < k; ++r) {
        CHECK(b.piece(r).hi == b.piece(r + 1).lo);
        CHECK(b.piece(r).lo < b.piece(r).hi);
      }
      for (const LinearPiece& p : b.pieces()) {
        CHECK(std::abs(p(p.tangent) - oracle::hb(p.tangent)) <= 1e-12);
        CHECK(p.lo <= p.tangent + 1e-15);
        CHECK(p.tangent <= p.hi + 1e-15);
        for (int i = 0; i <= 200; ++i) {
          const double x = p.lo + (p.hi - p.lo) * i / 200;
          CHECK(p(x) - oracle::hb(x) >= -1e-12);
        }
      }
    }
  }
}

TEST_CASE("single tangent is the line y = 1") {
  const PiecewiseLinearBound b = build_tangent_bound(1);
  CHECK(b.piece(0).slope == doctest::Approx(0.0));
  CHECK(b.piece(0).intercept == doctest::Approx(1.0));
  CHECK(max_gap(build_tangent_bound(2)) < max_gap(b));
}

TEST_CASE("nested tangent sets refine the envelope") {
  for (int k = 1; k <= 16; k *= 2) {
    const PiecewiseLinearBound coarse = build_tangent_bound(k);
    const PiecewiseLinearBound fine = build_tangent_bound(2 * k);
    for (int i = 0; i <= 1000; ++i) {
      const double x = 0.5 * i / 1000;
      CHECK(fine(x) <= coarse(x) + 1e-12);
    }
    CHECK(max_gap(fine) < max_gap(coarse));
  }
}

TEST_CASE("region lookup assigns breakpoints to the lower region") {
  const PiecewiseLinearBound b = build_tangent_bound(4);
  CHECK(b.region(0.0) == 0);
  CHECK(b.region(0.5) == 3);
  for (int r = 0; r < 3; ++r) {
    CHECK(b.region(b.piece(r).hi) == r);
    CHECK(b.region(b.piece(r).hi + 5e-13) == r);
    CHECK(b.region(b.piece(r).hi + 1e-9) == r + 1);
  }
}

TEST_CASE("placements") {
  const auto three = enumerate_placements(3, 2);
  REQUIRE(three.size() == 4);
  CHECK(three[0].counts == std::vector<int>{3, 0});
  CHECK(three[1].counts == std::vector<int>{2, 1});
  CHECK(three[2].counts == std::vector<int>{1, 2});
  CHECK(three[3].counts == std::vector<int>{0, 3});
  CHECK(enumerate_placements(10, 4).size() == 286);
  CHECK(placement_count(10, 4) == 286);
  for (int k = 1; k <= 6; ++k) CHECK(enumerate_placements(1, k).size() == static_cast<std::size_t>(k));
  for (int n = 1; n <= 8; ++n) {
    for (int k = 1; k <= 5; ++k) {
      const auto all = enumerate_placements(n, k);
      CHECK(all.size() == placement_count(n, k));
      std::set<std::vector<int>> distinct;
      for (const auto& p : all) {
        CHECK(std::accumulate(p.counts.begin(), p.counts.end(), 0) == n);
        CHECK(*std::min_element(p.counts.begin(), p.counts.end()) >= 0);
        distinct.insert(p.counts);
      }
      CHECK(distinct.size() == all.size());
    }
  }
}

TEST_CASE("coefficients of the three-component example") {
  const PiecewiseLinearBound b = build_tangent_bound(2);
  const double a1 = b.piece(0).slope;
  const double a2 = b.piece(1).slope;
  const CoefficientVector cv = coefficients_for_placement(Placement{{2, 1}}, b, 3);
  CHECK(cv.c[0b000] == doctest::Approx(2 * a1 + a2));
  CHECK(cv.c[0b111] == doctest::Approx(0.0));
  CHECK(cv.c[0b011] == doctest::Approx(a2));
  CHECK(cv.c[0b001] == doctest::Approx(a1 + a2));
  CHECK(cv.c[0b100] == doctest::Approx(2 * a1));
  CHECK(cv.d == doctest::Approx(2 * b.piece(0).intercept + b.piece(1).intercept));

  // Direct oracle over every word.
  for (Word w = 0; w < 8; ++w) {
    double c = 0.0;
    for (int j = 0; j < 3; ++j) {
      if (((w >> j) & 1u) == 0) c += j < 2 ? a1 : a2;
    }
    CHECK(cv.c[w] == doctest::Approx(c).epsilon(1e-14));
  }
}

TEST_CASE("distinct coefficient counts") {
  const PiecewiseLinearBound b = build_tangent_bound(4);
  for (int n = 1; n <= 6; ++n) {
    const CoefficientVector one = coefficients_for_placement(Placement{{n, 0, 0, 0}}, b, n);
    CHECK(one.dedup.size() == static_cast<std::size_t>(n + 1));
  }
  // The nested schedule puts a zero-slope tangent at 1/2, which merges
  // values; the midpoint schedule keeps all four apart.
  const PiecewiseLinearBound b2 = build_tangent_bound(2, TangentSchedule::Midpoint);
  const CoefficientVector pair = coefficients_for_placement(Placement{{1, 1}}, b2, 2);
  CHECK(pair.dedup.size() == 4);

  for (const auto& pl : enumerate_placements(8, 4)) {
    const CoefficientVector cv = coefficients_for_placement(pl, b, 8);
    std::size_t bound = 1;
    for (int l : pl.counts) bound *= static_cast<std::size_t>(l + 1);
    CHECK(cv.dedup.size() <= bound);
    std::size_t total = 0;
    for (const auto& [v, m] : cv.dedup) total += m;
    CHECK(total == 256);
    for (std::size_t i = 1; i < cv.dedup.size(); ++i) CHECK(cv.dedup[i - 1].first < cv.dedup[i].first);
  }
}

TEST_CASE("rearrangement allocation") {
  CoefficientVector cv;
  cv.c = Eigen::Vector4d(2, 1, 1, 0);
  cv.d = 0.25;
  const Allocation a = allocate_min(cv, Eigen::Vector4d(0.1, 0.2, 0.3, 0.4));
  CHECK(a.value == doctest::Approx(0.7 + 0.25));
  CHECK(a.mapping(3) == 3);
  CHECK(a.mapping(0) == 0);

  CoefficientVector flat;
  flat.c = Eigen::Vector4d::Constant(1.5);
  CHECK(allocate_min(flat, Eigen::Vector4d(0.1, 0.2, 0.3, 0.4)).value == doctest::Approx(1.5));
  CHECK_THROWS_AS(allocate_min(flat, Eigen::Vector3d(0.2, 0.3, 0.5)), Error);

  // Brute force over all 24 bijections.
  const Eigen::Vector4d p(0.15, 0.4, 0.3, 0.15);
  std::vector<Word> perm{0, 1, 2, 3};
  double best = 1e9;
  do {
    double v = 0.0;
    for (Word w = 0; w < 4; ++w) v += cv.c[perm[w]] * p[w];
    best = std::min(best, v);
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(allocate_min(cv, p).value == doctest::Approx(best + cv.d));
}

TEST_CASE("deduplicated and dense allocation agree") {
  const PiecewiseLinearBound b = build_tangent_bound(3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const JointDistribution j = random_joint(6, 2, seed);
    std::vector<double> desc = oracle::to_vec(j.probs());
    std::sort(desc.begin(), desc.end(), std::greater<>());
    for (const auto& pl : enumerate_placements(6, 3)) {
      const CoefficientVector cv = coefficients_for_placement(pl, b, 6);
      CHECK(allocate_min_value(cv.dedup, cv.d, desc) == doctest::Approx(allocate_min(cv, j.probs()).value).epsilon(1e-12));
    }
  }
}

TEST_CASE("coefficient matrix") {
  const PiecewiseLinearBound b = build_tangent_bound(2);
  const CoefficientMatrix m = coefficient_matrix(3, 2, b);
  CHECK(m.rows.rows() == 4);
  CHECK(m.rows.cols() == 8);
  for (Eigen::Index r = 0; r < 4; ++r) {
    for (Eigen::Index c = 1; c < 8; ++c) CHECK(m.rows(r, c - 1) <= m.rows(r, c));
  }
  const double a1 = b.piece(0).slope;
  const double a2 = b.piece(1).slope;
  // Row (2,1): sorted {0, a2, a1, a1, a1+a2, a1+a2, 2a1, 2a1+a2}.
  CHECK(m.rows(1, 0) == doctest::Approx(0.0));
  CHECK(m.rows(1, 7) == doctest::Approx(2 * a1 + a2));

  const CoefficientMatrix big = coefficient_matrix(8, 4, build_tangent_bound(4));
  CHECK(big.max_distinct() <= static_cast<std::size_t>(std::pow(8.0 / 4 + 1, 4)));

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const JointDistribution j = random_joint(3, 2, seed);
    std::vector<double> desc = oracle::to_vec(j.probs());
    std::sort(desc.begin(), desc.end(), std::greater<>());
    const Eigen::VectorXd values = m.values(desc);
    double loop_min = 1e9;
    for (std::size_t i = 0; i < m.placements.size(); ++i) {
      const double v = allocate_min(coefficients_for_placement(m.placements[i], b, 3), j.probs()).value;
      CHECK(values[static_cast<Eigen::Index>(i)] == doctest::Approx(v).epsilon(1e-12));
      loop_min = std::min(loop_min, v);
    }
    CHECK(values.minCoeff() == doctest::Approx(loop_min).epsilon(1e-12));
  }
  CHECK_THROWS_AS(coefficient_matrix(20, 8, build_tangent_bound(8)), Error);
}

TEST_CASE("solver soundness against the exact optimum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int n = 2 + static_cast<int>(seed % 2);
    const JointDistribution j = oracle::random_joint(n, 2, 300 + seed);
    const double optimum = solve_exact(j).value;
    const double h = entropy(j.probs());
    double previous = 1e9;
    for (int k : {1, 2, 4, 8, 16, 32}) {
      const PlrResult r = solve_plr(j, k);
      CHECK(r.ub_value >= optimum - 1e-12);
      CHECK(r.true_objective >= optimum - 1e-12);
      CHECK(r.best_true_objective >= optimum - 1e-12);
      CHECK(optimum >= h - 1e-12);
      CHECK(r.ub_value >= r.true_objective - 1e-12);
      CHECK(r.ub_value <= previous + 1e-12);
      CHECK(r.best_true_objective <= sum_marginal_entropies(j) + 1e-12);
      previous = r.ub_value;
      if (k == 1) CHECK(r.ub_value == doctest::Approx(n));
      if (k == 32) CHECK(r.ub_value - optimum <= 0.01);
    }
  }
}

TEST_CASE("two scrambled components are separated exactly") {
  // With the two components in their own regions the coefficient order
  // {0, a_2, a_1, a_1 + a_2} matches the product order, so the allocation is
  // the product itself.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ScrambledProduct s = random_product_scrambled(2, seed);
    const PlrResult r = solve_plr(s.joint, 8);
    CHECK(std::abs(r.best_true_objective - entropy(s.joint.probs())) <= 1e-9);
  }
}

TEST_CASE("ten scrambled components come close") {
  const ScrambledProduct s = random_product_scrambled(10, 4);
  const PlrResult r = solve_plr(s.joint, 8);
  const double h = entropy(s.joint.probs());
  CHECK(r.true_objective - h <= 0.01);
  CHECK(r.best_true_objective <= r.true_objective);
  CHECK(r.true_objective >= h - 1e-12);
  const Eigen::VectorXd pi = zero_probs(apply_mapping(s.joint, r.mapping));
  for (int i = 0; i < 10; ++i) CHECK(pi[i] <= 0.5 + 1e-12);
  CHECK(sum_marginal_entropies(apply_mapping(s.joint, r.mapping)) == doctest::Approx(r.true_objective).epsilon(1e-12));
}

TEST_CASE("matrix form matches the loop form") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const JointDistribution j = oracle::random_joint(5, 2, 500 + seed);
    PlrOptions mat;
    mat.matrix_form = true;
    const PlrResult a = solve_plr(j, 6);
    const PlrResult b = solve_plr(j, 6, mat);
    CHECK(std::abs(a.ub_value - b.ub_value) <= 1e-12);
  }
}

TEST_CASE("an infeasible placement is dominated by its realized placement") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int n = 3 + static_cast<int>(seed % 3);
    const int k = 2 + static_cast<int>(seed % 4);
    const JointDistribution j = oracle::random_joint(n, 2, 700 + seed);
    const PlrProblem problem(j, build_tangent_bound(k));
    std::size_t infeasible = 0;
    for (const auto& pl : enumerate_placements(n, k)) {
      const PlacementEval e = problem.evaluate(pl);
      if (e.feasible) continue;
      ++infeasible;
      Placement realized{std::vector<int>(static_cast<std::size_t>(k), 0)};
      for (int r : e.realized_regions) ++realized.counts[static_cast<std::size_t>(r)];
      CHECK(problem.evaluate(realized).value <= e.value + 1e-12);
    }
    CHECK(infeasible > 0);
  }
}

TEST_CASE("placement evaluation agrees with the returned mapping") {
  const JointDistribution j = oracle::random_joint(4, 2, 11);
  const PlrProblem problem(j, build_tangent_bound(3));
  for (const auto& pl : enumerate_placements(4, 3)) {
    const PlacementEval e = problem.evaluate(pl);
    const JointDistribution out = apply_mapping(j, problem.mapping_for(pl));
    const Eigen::VectorXd pi = zero_probs(out);
    for (int i = 0; i < 4; ++i) {
      CHECK(pi[i] <= 0.5 + 1e-12);
      CHECK(pi[i] == doctest::Approx(e.pi[i]).epsilon(1e-12));
    }
    CHECK(sum_marginal_entropies(out) == doctest::Approx(e.true_objective).epsilon(1e-12));
  }
  CHECK(problem.identity_envelope() >= sum_marginal_entropies(j) - 1e-12);
}

TEST_CASE("plr rejects q-ary input") {
  CHECK_THROWS_AS(solve_plr(JointDistribution::uniform(2, 3), 4), Error);
}
