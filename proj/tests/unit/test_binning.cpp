#include <sstream>

#include "doctest.h"
#include "support/instances.hpp"
#include "wgm/binning.hpp"
#include "wgm/csv.hpp"
#include "wgm/errors.hpp"

using namespace wgm;

namespace {

std::vector<RawRecord> from_scores(const std::vector<double>& scores) {
  std::vector<RawRecord> out;
  for (double s : scores) out.push_back({s, "g", false});
  return out;
}

std::vector<std::size_t> counts(std::span<const RawRecord> records, const BinEdges& edges) {
  std::vector<std::size_t> n(edges.bins(), 0);
  for (auto b : assign_bins(records, edges)) ++n[b];
  return n;
}

}  // namespace

TEST_CASE("uniform mass bins split records evenly") {
  const auto two = from_scores({0.1, 0.9});
  CHECK(counts(two, uniform_mass_bins(two, 2)) == std::vector<std::size_t>{1, 1});

  std::vector<double> hundred;
  for (int i = 1; i <= 100; ++i) hundred.push_back(i / 100.0);
  const auto records = from_scores(hundred);
  CHECK(counts(records, uniform_mass_bins(records, 4)) == std::vector<std::size_t>{25, 25, 25, 25});

  Rng rng(11);
  std::vector<double> uniform;
  for (int i = 0; i < 10000; ++i) uniform.push_back(rng.uniform());
  const auto many = from_scores(uniform);
  for (auto n : counts(many, uniform_mass_bins(many, 15))) CHECK((n == 666 || n == 667));

  CHECK_THROWS_AS(uniform_mass_bins(two, 3), InsufficientDataError);
}

TEST_CASE("estimation recovers the counterexample from counts") {
  std::vector<RawRecord> records;
  const double scores[3] = {0.1, 0.5, 0.9};
  const int qualified[3][2] = {{4, 2}, {2, 6}, {8, 2}};
  for (int i = 0; i < 3; ++i)
    for (int z = 0; z < 2; ++z)
      for (int r = 0; r < 10; ++r) records.push_back({scores[i], z ? "z2" : "z1", r < qualified[i][z]});
  const auto est = estimate_classifier(records, uniform_mass_bins(records, 3), groups_of(records));
  const auto expected = testing::pav_counterexample(0.2);
  const auto& c = est.classifier;
  REQUIRE(c.size() == 3);
  CHECK(est.warnings.empty());
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(c.score(i) == doctest::Approx(expected.score(i)));
    CHECK(c.mass(i) == doctest::Approx(1.0 / 3));
    for (std::size_t z = 0; z < 2; ++z) {
      CHECK(c.share(i, z) == doctest::Approx(0.5));
      CHECK(c.group_score(i, z) == doctest::Approx(expected.group_score(i, z)));
    }
  }
  CHECK(validate_classifier(c).ok());
}

TEST_CASE("tied bin rates are merged") {
  std::vector<RawRecord> records{{0.1, "g", true}, {0.2, "g", true}, {0.7, "g", true}, {0.8, "g", true}};
  const auto est = estimate_classifier(records, uniform_mass_bins(records, 2), groups_of(records));
  CHECK(est.classifier.size() == 1);
  CHECK(est.classifier.score(0) == 1.0);
  CHECK(est.bin_map == std::vector<std::size_t>{0, 0});
  CHECK_FALSE(est.warnings.empty());
}

TEST_CASE("one bin holds the overall rate") {
  std::vector<RawRecord> records{{0.1, "a", true}, {0.4, "b", false}, {0.9, "a", false}, {0.3, "b", true}};
  const auto est = estimate_classifier(records, uniform_mass_bins(records, 1), groups_of(records));
  CHECK(est.classifier.size() == 1);
  CHECK(est.classifier.mass(0) == 1.0);
  CHECK(est.classifier.score(0) == 0.5);
}

TEST_CASE("estimation errors and warnings") {
  std::vector<RawRecord> records{{0.1, "a", true}, {0.9, "a", false}};
  CHECK_THROWS_AS(estimate_classifier(records, BinEdges{{0.3, 0.5}}, groups_of(records)), EstimationError);
  CHECK_THROWS_AS(estimate_classifier(records, BinEdges{}, GroupSet({"b"})), EstimationError);
  const auto est = estimate_classifier(records, BinEdges{}, GroupSet({"a", "ghost"}));
  CHECK(est.classifier.group_count() == 1);
  CHECK_FALSE(est.warnings.empty());
}

TEST_CASE("small cells are suppressed") {
  std::vector<RawRecord> records;
  for (int r = 0; r < 10; ++r) records.push_back({0.1 + r * 0.01, "big", r < 3});
  records.push_back({0.15, "small", true});
  for (int r = 0; r < 10; ++r) records.push_back({0.6 + r * 0.01, "big", r < 7});
  for (int r = 0; r < 5; ++r) records.push_back({0.65, "small", r < 3});
  const auto est = estimate_classifier(records, BinEdges{{0.5}}, groups_of(records), {3, {}});
  CHECK_FALSE(est.classifier.present(0, 1));
  CHECK(est.classifier.present(1, 1));
  CHECK(est.classifier.share(0, 1) > 0.0);
}

TEST_CASE("mixture check") {
  MixtureConfig config{{"z1", "z2"},
                       {0.5, 0.5},
                       Matrix::from_rows({{0.2, 0.8}, {0.9, 0.1}}),
                       Matrix::from_rows({{0.6, 0.3}, {0.5, 0.2}})};
  const auto check = check_mixture(config);
  CHECK(check.feasible());
  CHECK(check.mixture[0] == doctest::Approx(0.36));
  CHECK(check.mixture[1] == doctest::Approx(0.47));
  CHECK(check.reversed == std::vector<bool>{true, true});

  MixtureConfig single{{"g"}, {0.5, 0.5}, Matrix(2, 1, 1.0), Matrix::from_rows({{0.6}, {0.5}})};
  const auto bad = check_mixture(single);
  CHECK_FALSE(bad.feasible());
  CHECK(*bad.failing_bin == 0);
  CHECK_FALSE(bad.certificate.empty());
  CHECK_THROWS_AS(synthesize_simpson(single, 100, 1), ConfigError);

  MixtureConfig shapes{{"g"}, {0.5, 0.5}, Matrix(3, 1, 1.0), Matrix(2, 1, 0.5)};
  CHECK_THROWS_AS(check_mixture(shapes), ConfigError);
}

TEST_CASE("synthesis is deterministic") {
  MixtureConfig config{{"z1", "z2"},
                       {0.5, 0.5},
                       Matrix::from_rows({{0.2, 0.8}, {0.9, 0.1}}),
                       Matrix::from_rows({{0.6, 0.3}, {0.5, 0.2}})};
  const auto a = synthesize_simpson(config, 2000, 9);
  CHECK(a == synthesize_simpson(config, 2000, 9));
  CHECK(a != synthesize_simpson(config, 2000, 10));
  std::ostringstream first, second;
  write_records(first, a);
  write_records(second, synthesize_simpson(config, 2000, 9));
  CHECK(first.str() == second.str());

  const auto model = LatentModel::simpson_family();
  CHECK(synthesize_latent(model, 1000, 4) == synthesize_latent(model, 1000, 4));
}

TEST_CASE("estimates converge to the configured mixture") {
  MixtureConfig config{{"z1", "z2", "z3"},
                       {0.2, 0.3, 0.5},
                       Matrix::from_rows({{0.5, 0.3, 0.2}, {0.3, 0.4, 0.3}, {0.2, 0.2, 0.6}}),
                       Matrix::from_rows({{0.2, 0.3, 0.4}, {0.3, 0.35, 0.5}, {0.4, 0.5, 0.6}})};
  REQUIRE(check_mixture(config).feasible());
  const auto edges = mixture_edges(config);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto records = synthesize_simpson(config, 100000, seed);
    const auto est = estimate_classifier(records, edges, GroupSet(config.groups));
    REQUIRE(est.classifier.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t z = 0; z < 3; ++z)
        CHECK(std::abs(est.classifier.group_score(i, z) - config.group_scores(i, z)) < 0.02);
  }
}

TEST_CASE("latent family shares are a distribution") {
  const auto model = LatentModel::simpson_family();
  for (double s : {0.0, 0.3, 0.77, 1.0}) {
    double total = 0.0;
    for (std::size_t z = 0; z < model.groups.size(); ++z) {
      total += model.share(z, s);
      CHECK(model.qualification(z, s) > 0.0);
      CHECK(model.qualification(z, s) < 1.0);
    }
    CHECK(total == doctest::Approx(1.0));
  }
}
