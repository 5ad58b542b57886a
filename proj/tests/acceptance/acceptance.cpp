// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "support/instances.hpp"
#include "wgm/metrics.hpp"
#include "wgm/oracle.hpp"
#include "wgm/partition.hpp"
#include "wgm/pipeline.hpp"

using namespace wgm;
using json = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t mismatches = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const std::size_t n = 4 + t % 9;
    const std::size_t groups = 2 + t % 2;
    const auto c = oracle::random_instance({n, groups, 0.3 + 0.1 * static_cast<double>(t % 7)}, 10000 + t);
    if (optimal_partition(c).size() != oracle::brute_force_optimal(c).size()) ++mismatches;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream os;
  os << "200 instances, " << mismatches << " size mismatches, " << secs << " s";
  return {mismatches == 0 && secs < 60.0, os.str()};
}

Outcome pav_counterexample() {
  const auto c = testing::pav_counterexample(0.2);
  const auto p = pav(c);
  const auto best = optimal_partition(c);
  const bool ok = p.to_string() == "{{1,2,3}}" && best.to_string() == "{{1},{2,3}}" && dominates(best, p);
  return {ok, "pav " + p.to_string() + ", optimal " + best.to_string() +
                  (dominates(best, p) ? ", optimal dominates pav" : ", no dominance")};
}

Outcome monotonicity_guarantee() {
  std::size_t failures = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const oracle::RandomInstanceOptions options{3 + t % 28, 2 + t % 3, 0.2 + 0.2 * static_cast<double>(t % 5),
                                                t % 4 == 0 ? 0.25 : 0.0};
    const auto c = oracle::random_instance(options, 20000 + t);
    if (!is_within_group_monotone(c, pav(c)).monotone()) ++failures;
    if (!is_within_group_monotone(c, optimal_partition(c)).monotone()) ++failures;
  }
  return {failures == 0, "500 instances, " + std::to_string(failures) + " violating outputs"};
}

Outcome calibration_infeasibility() {
  bool ok = true;
  std::ostringstream os;
  double worst = 0.0;
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto c = testing::offset_instance(n, 0.1);
    if (calibration_partition(c, 0.0)) ok = false;
    const auto found = smallest_epsilon(c);
    worst = std::max(worst, std::abs(found.epsilon - 0.1));
    if (std::abs(found.epsilon - 0.1) > 1e-3) ok = false;
    if (optimal_partition(c).size() != n) ok = false;
  }
  os << "n=2..12: epsilon=0 infeasible, |eps* - 0.1| <= " << worst << ", optimal size n";
  return {ok, os.str()};
}

Outcome implication() {
  std::size_t found = 0;
  std::size_t failures = 0;
  std::uint64_t attempts = 0;
  while (found < 300 && attempts < 200000) {
    const std::uint64_t t = attempts++;
    const oracle::RandomInstanceOptions options{3 + t % 10, 2 + t % 2, 0.5, 0.5 + 0.1 * static_cast<double>(t % 4)};
    const auto c = oracle::random_instance(options, 30000 + t);
    const auto p = calibration_partition(c, 0.0);
    if (!p) continue;
    ++found;
    if (!is_within_group_monotone(c, *p).monotone()) ++failures;
  }
  std::ostringstream os;
  os << found << " feasible instances (of " << attempts << " drawn), " << failures << " non-monotone";
  return {found == 300 && failures == 0, os.str()};
}

Outcome metrics_consistency() {
  double worst_identity = 0.0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto c = oracle::random_instance({3 + t % 20, 2 + t % 3, 0.8, t % 3 == 0 ? 0.3 : 0.0}, 40000 + t);
    const auto r = unfairness_probabilities(c);
    double sum = 0.0;
    for (std::size_t z = 0; z < c.group_count(); ++z)
      if (r.p_given_group[z]) sum += r.group_mass[z] * *r.p_given_group[z];
    worst_identity = std::max(worst_identity, std::abs(sum - r.p_d));
  }

  std::vector<BinnedClassifier> cases{testing::pav_counterexample(0.2), testing::full_simpson(10)};
  for (std::uint64_t t = 0; t < 3; ++t) cases.push_back(oracle::random_instance({15, 3, 0.8}, 50000 + t));
  double worst_gap = 0.0;
  Rng rng(derive_seed(6, 1));
  for (const auto& c : cases) {
    double total = 0.0;
    for (int pool = 0; pool < 50; ++pool) total += pool_unfairness(c, testing::population_pool(c, 10000, rng));
    worst_gap = std::max(worst_gap, std::abs(total / 50.0 - unfairness_probabilities(c).p_d));
  }
  std::ostringstream os;
  os << "max |p_d - sum| = " << worst_identity << "; max |mean pool - p_d| = " << worst_gap << " over "
     << cases.size() << " classifiers";
  return {worst_identity <= 1e-12 && worst_gap < 0.01, os.str()};
}

const json& entry(const json& report, const std::string& name) {
  for (const auto& e : report["classifiers"])
    if (e["name"] == name) return e;
  throw std::runtime_error("no classifier " + name);
}

Outcome trend_reproduction() {
  const std::vector<std::size_t> bin_counts{5, 10, 20, 40};
  std::size_t trend_seeds = 0;
  std::size_t order_pairs = 0;
  std::size_t order_holds = 0;
  std::size_t cal_runs = 0;
  std::size_t cal_holds = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RunConfig base;
    base.seed = seed;
    base.k = 5;
    base.pool_size = 100;
    base.pools = 100;
    const auto records = load_records(base);
    double previous = -1.0;
    bool non_decreasing = true;
    for (std::size_t n : bin_counts) {
      RunConfig config = base;
      config.bins = n;
      const json report = run_pipeline(config, records);
      const double p_d = entry(report, "original")["unfairness"]["p_d"].get<double>();
      if (p_d < previous) non_decreasing = false;
      previous = p_d;

      const auto& results = report["pools"]["results"];
      for (std::size_t t = 0; t < config.pools; ++t) {
        const auto f = results["original"]["shortlist_sizes"][t].get<std::size_t>();
        const auto f_opt = results["optimal"]["shortlist_sizes"][t].get<std::size_t>();
        const auto f_pav = results["pav"]["shortlist_sizes"][t].get<std::size_t>();
        ++order_pairs;
        if (f <= f_opt && f_opt <= f_pav) ++order_holds;
      }

      const auto& cal = entry(report, "calibration");
      if (!cal["partition"].is_null() && cal["violations"].get<std::size_t>() == 0) {
        ++cal_runs;
        const auto opt = entry(report, "optimal")["size"].get<std::size_t>();
        const auto pv = entry(report, "pav")["size"].get<std::size_t>();
        if (opt >= pv && pv >= cal["size"].get<std::size_t>()) ++cal_holds;
      }
    }
    if (non_decreasing) ++trend_seeds;
  }
  const double share = static_cast<double>(order_holds) / static_cast<double>(order_pairs);
  std::ostringstream os;
  os << "(a) p_d non-decreasing in " << trend_seeds << "/10 seeds; (b) f <= f_opt <= f_pav in " << order_holds << "/"
     << order_pairs << " (seed, pool) pairs; (c) size ordering in " << cal_holds << "/" << cal_runs << " runs";
  return {trend_seeds >= 9 && share >= 0.9 && cal_holds == cal_runs, os.str()};
}

Outcome slack_monotonicity() {
  std::size_t exceptions = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto c = oracle::random_instance({6 + t % 15, 2 + t % 2, 0.6, t % 5 == 0 ? 0.3 : 0.0}, 60000 + t);
    std::size_t previous = 0;
    for (double tau : {0.0, 0.01, 0.05, 0.1}) {
      const std::size_t size = optimal_partition(c, uniform_slack(c.group_count(), tau)).size();
      if (size < previous) ++exceptions;
      previous = size;
    }
  }
  return {exceptions == 0, "100 instances, " + std::to_string(exceptions) + " decreases"};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "wgm_acceptance_determinism";
  std::filesystem::remove_all(root);
  const std::vector<std::string> commands{
      "run --seed 11 -n 15 --records 40000",
      "run --seed 12 -n 40 --tau 0.01 --epsilon 0.05 --records 40000",
      "sweep --seed 3 -n 5,20 --repeats 2 --records 20000 --pools 20 --jobs 4",
  };
  std::size_t compared = 0;
  std::size_t differing = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::vector<std::filesystem::path> dirs;
    for (int attempt = 0; attempt < 2; ++attempt) {
      const auto dir = root / ("cmd" + std::to_string(i) + "_" + std::to_string(attempt));
      const std::string line = std::string("\"") + WGM_CLI_PATH + "\" " + commands[i] + " --out \"" + dir.string() +
                               "\" > /dev/null";
      if (std::system(line.c_str()) != 0) return {false, "command failed: " + commands[i]};
      dirs.push_back(dir);
    }
    for (const auto& file : std::filesystem::recursive_directory_iterator(dirs[0])) {
      if (file.path().extension() != ".json") continue;
      const auto other = dirs[1] / std::filesystem::relative(file.path(), dirs[0]);
      ++compared;
      if (slurp(file.path()) != slurp(other)) ++differing;
    }
  }
  std::filesystem::remove_all(root);
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " report pairs compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"PAV counterexample", pav_counterexample},
      {"within-group monotonicity guarantee", monotonicity_guarantee},
      {"calibration infeasibility", calibration_infeasibility},
      {"calibration implies monotonicity", implication},
      {"metrics consistency", metrics_consistency},
      {"qualitative trends", trend_reproduction},
      {"slack monotonicity", slack_monotonicity},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome{false, ""};
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << outcome.detail << std::endl;
    failed += outcome.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
