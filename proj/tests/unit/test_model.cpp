#include <cmath>

#include "doctest.h"
#include "support/instances.hpp"
#include "wgm/errors.hpp"
#include "wgm/model.hpp"
#include "wgm/oracle.hpp"
#include "wgm/random.hpp"

using namespace wgm;

TEST_CASE("validate_classifier accepts the one-bin identity case") {
  const BinnedClassifier c(GroupSet({"g"}), {0.5}, {1.0}, Matrix(1, 1, 1.0), Matrix(1, 1, 0.5));
  CHECK(validate_classifier(c).ok());
}

TEST_CASE("validate_classifier accepts the pav counterexample") {
  CHECK(validate_classifier(testing::pav_counterexample(0.2)).ok());
}

TEST_CASE("validate_classifier names a non-increasing score") {
  const auto base = testing::pav_counterexample(0.2);
  const BinnedClassifier c(base.groups(), {0.3, 0.3, 0.5}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, base.shares(),
                           base.group_scores());
  const auto result = validate_classifier(c);
  REQUIRE_FALSE(result.ok());
  bool found = false;
  for (const auto& issue : result.issues) {
    if (issue.message == "a not strictly increasing at index 2") found = true;
  }
  CHECK(found);
}

TEST_CASE("validate_classifier reports every broken invariant") {
  // masses do not sum to one, shares of bin 2 do not sum to one, mixture off in bin 1
  const BinnedClassifier c(GroupSet({"a", "b"}), {0.2, 0.6}, {0.5, 0.6},
                           Matrix::from_rows({{0.5, 0.5}, {0.5, 0.4}}),
                           Matrix::from_rows({{0.1, 0.1}, {0.6, 0.6}}));
  const auto result = validate_classifier(c);
  std::vector<std::string> names;
  for (const auto& issue : result.issues) names.push_back(issue.invariant);
  CHECK(std::count(names.begin(), names.end(), "mass_sum") == 1);
  CHECK(std::count(names.begin(), names.end(), "share_sum") == 1);
  CHECK(std::count(names.begin(), names.end(), "mixture_consistency") >= 1);
}

TEST_CASE("dimension mismatches are structural errors") {
  CHECK_THROWS_AS(BinnedClassifier(GroupSet({"a"}), {0.2, 0.4}, {0.5}, Matrix(2, 1, 1.0), Matrix(2, 1, 0.3)),
                  StructuralError);
  CHECK_THROWS_AS(BinnedClassifier(GroupSet({"a"}), {0.2, 0.4}, {0.5, 0.5}, Matrix(2, 2, 0.5), Matrix(2, 1, 0.3)),
                  StructuralError);
  CHECK_THROWS_AS(GroupSet({"a", "a"}), StructuralError);
  CHECK_THROWS_AS(GroupSet({}), StructuralError);
}

TEST_CASE("partition construction and queries") {
  const Partition p(5, {2, 3});
  CHECK(p.size() == 3);
  CHECK(p.cell(0) == Cell{0, 2});
  CHECK(p.cell(2) == Cell{3, 5});
  CHECK(p.cell_of(1) == 0);
  CHECK(p.cell_of(2) == 1);
  CHECK(p.cell_of(4) == 2);
  CHECK(p.cell_map() == std::vector<std::size_t>{0, 0, 1, 2, 2});
  CHECK(p.to_string() == "{{1,2},{3},{4,5}}");
  const std::vector<Cell> cells{{0, 2}, {2, 3}, {3, 5}};
  CHECK(Partition::from_cells(5, cells) == p);

  CHECK_THROWS_AS(Partition(3, {0}), StructuralError);
  CHECK_THROWS_AS(Partition(3, {2, 1}), StructuralError);
  CHECK_THROWS_AS(Partition(3, {3}), StructuralError);
  const std::vector<Cell> gap{{0, 1}, {2, 3}};
  CHECK_THROWS_AS(Partition::from_cells(3, gap), StructuralError);
}

TEST_CASE("merged scores on singleton cells reproduce the classifier") {
  const auto c = testing::pav_counterexample(0.2);
  const auto stats = merged_scores(c, Partition::identity(3));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(stats[i].score == doctest::Approx(c.score(i)).epsilon(1e-15));
    for (std::size_t z = 0; z < 2; ++z) CHECK(*stats[i].group_score[z] == doctest::Approx(c.group_score(i, z)));
  }
}

TEST_CASE("merged scores of cell {2,3} in the pav counterexample") {
  const auto c = testing::pav_counterexample(0.2);
  const auto stats = merged_scores(c, Partition(3, {1}));
  CHECK(*stats[1].group_score[0] == doctest::Approx(0.5));
  CHECK(*stats[1].group_score[1] == doctest::Approx(0.4));
  CHECK(stats[1].score == doctest::Approx(0.45));
}

TEST_CASE("merged scores match a direct weighted mean and stay inside the cell range") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto c = oracle::random_instance({6, 3, 0.7, 0.2}, seed);
    const PrefixSums sums(c);
    for (const auto& p : oracle::all_contiguous(6)) {
      const auto stats = merged_scores(c, p);
      double total_mass = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        const Cell cell = p.cell(k);
        double num = 0.0, den = 0.0, lo = 1.0, hi = 0.0;
        for (std::size_t j = cell.begin; j < cell.end; ++j) {
          num += c.score(j) * c.mass(j);
          den += c.mass(j);
          lo = std::min(lo, c.score(j));
          hi = std::max(hi, c.score(j));
        }
        CHECK(stats[k].score == doctest::Approx(num / den).epsilon(1e-12));
        CHECK(stats[k].score >= lo - 1e-12);
        CHECK(stats[k].score <= hi + 1e-12);
        CHECK(sums.score(cell) == doctest::Approx(stats[k].score).epsilon(1e-12));

        // Calibration identity: the cell score is the group-mass weighted mix of group scores.
        double mix = 0.0;
        for (std::size_t z = 0; z < 3; ++z) {
          if (stats[k].group_score[z]) mix += stats[k].group_mass[z] * *stats[k].group_score[z];
          CHECK(sums.present(cell, z) == stats[k].group_score[z].has_value());
        }
        CHECK(mix / stats[k].mass == doctest::Approx(stats[k].score).epsilon(1e-12));
        total_mass += stats[k].mass;
        if (k > 0) CHECK(stats[k - 1].score < stats[k].score);
      }
      CHECK(total_mass == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("monotonicity checker on the pav counterexample") {
  const auto c = testing::pav_counterexample(0.2);
  const auto identity = is_within_group_monotone(c, Partition::identity(3));
  CHECK_FALSE(identity.monotone());
  CHECK(std::find(identity.violations.begin(), identity.violations.end(), MonotonicityViolation{0, 1, 0}) !=
        identity.violations.end());
  CHECK(is_within_group_monotone(c, Partition(3, {1})).monotone());
  CHECK(is_within_group_monotone(c, Partition::single(3)).monotone());
}

TEST_CASE("checker on the identity partition agrees with the direct pair scan") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto c = oracle::random_instance({8, 2, 0.4, seed % 3 == 0 ? 0.25 : 0.0}, seed);
    bool direct_violation = false;
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        for (std::size_t z = 0; z < 2; ++z) {
          if (c.present(i, z) && c.present(j, z) && c.group_score(i, z) > c.group_score(j, z)) {
            direct_violation = true;
          }
        }
      }
    }
    CHECK(is_within_group_monotone(c, Partition::identity(c.size())).monotone() == !direct_violation);
  }
}

TEST_CASE("slack relaxes the checker per group") {
  const auto c = testing::pav_counterexample(0.2);
  // Identity violations: z1 0.4 > 0.2 (gap 0.2), z2 0.6 > 0.2 (gap 0.4).
  CHECK_FALSE(is_within_group_monotone(c, Partition::identity(3), {0.2, 0.3}).monotone());
  CHECK(is_within_group_monotone(c, Partition::identity(3), {0.2, 0.4}).monotone());
  CHECK_THROWS_AS(is_within_group_monotone(c, Partition::identity(3), {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(is_within_group_monotone(c, Partition::identity(3), {-0.1, 0.0}), std::invalid_argument);
}

TEST_CASE("dominance examples") {
  const Partition a(3, {1});
  CHECK(dominates(a, a));
  CHECK(dominates(a, Partition::single(3)));
  CHECK_FALSE(dominates(Partition::single(3), a));
  const Partition b(3, {2});
  CHECK_FALSE(dominates(a, b));
  CHECK_FALSE(dominates(b, a));
  CHECK_THROWS_AS(dominates(a, Partition::single(4)), StructuralError);
}

TEST_CASE("dominance is a partial order") {
  const auto all = oracle::all_contiguous(6);
  Rng rng(7);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto& p = all[rng.index(all.size())];
    const auto& q = all[rng.index(all.size())];
    const auto& r = all[rng.index(all.size())];
    CHECK(dominates(p, p));
    if (dominates(p, q) && dominates(q, p)) CHECK(p == q);
    if (dominates(p, q) && dominates(q, r)) CHECK(dominates(p, r));
    if (dominates(p, q)) CHECK(p.size() >= q.size());
  }
}

TEST_CASE("induce builds a valid merged classifier") {
  const auto c = oracle::random_instance({9, 3, 0.5, 0.2}, 11);
  const Partition p(9, {2, 5, 6});
  const auto merged = induce(c, p);
  CHECK(merged.size() == 4);
  CHECK(validate_classifier(merged).ok());
  const auto view = ScoreView::of(c, p);
  CHECK(view.levels() == 4);
  CHECK(view.score(3) == doctest::Approx(merged.score(1)));
}

TEST_CASE("absent entries are skipped by the checker") {
  // Group b is absent from bin 2; a violation only through bin 2 cannot exist.
  const BinnedClassifier c(GroupSet({"a", "b"}), {0.2, 0.5, 0.6}, {0.3, 0.3, 0.4},
                           Matrix::from_rows({{0.5, 0.5}, {1.0, 0.0}, {0.5, 0.5}}),
                           Matrix::from_rows({{0.2, 0.2}, {0.5, 0.99}, {0.5, 0.7}}));
  CHECK(validate_classifier(c).ok());
  CHECK(is_within_group_monotone(c, Partition::identity(3)).monotone());
}
