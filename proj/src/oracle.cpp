#include "wgm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wgm/errors.hpp"
#include "wgm/partition.hpp"
#include "wgm/random.hpp"

namespace wgm::oracle {

namespace {

Partition from_mask(std::size_t n, std::uint32_t mask) {
  std::vector<std::size_t> cuts;
  for (std::size_t b = 0; b + 1 < n; ++b) {
    if (mask & (1u << b)) cuts.push_back(b + 1);
  }
  return Partition(n, std::move(cuts));
}

void guard(std::size_t n, std::size_t limit, const char* what) {
  if (n == 0 || n > limit) {
    throw GuardError(std::string(what) + ": n=" + std::to_string(n) + " outside [1, " +
                     std::to_string(limit) + "]");
  }
}

}  // namespace

void enumerate_contiguous(std::size_t n, const std::function<void(const Partition&)>& visit) {
  guard(n, kMaxContiguousBins, "enumerate_contiguous");
  const std::uint32_t count = 1u << (n - 1);
  for (std::uint32_t mask = 0; mask < count; ++mask) visit(from_mask(n, mask));
}

std::vector<Partition> all_contiguous(std::size_t n) {
  std::vector<Partition> out;
  enumerate_contiguous(n, [&](const Partition& p) { out.push_back(p); });
  return out;
}

Partition brute_force_optimal(const BinnedClassifier& c, const Slack& slack, const Tolerances& tol) {
  guard(c.size(), kMaxOptimalBins, "brute_force_optimal");
  std::optional<Partition> best;
  enumerate_contiguous(c.size(), [&](const Partition& p) {
    if (best && p.size() <= best->size()) return;
    if (is_within_group_monotone(c, p, slack, tol).monotone()) best = p;
  });
  return *best;  // the single cell is vacuously monotone
}

std::optional<Partition> brute_force_calibration(const BinnedClassifier& c, double epsilon,
                                                 const Tolerances& tol) {
  guard(c.size(), kMaxOptimalBins, "brute_force_calibration");
  std::optional<Partition> best;
  enumerate_contiguous(c.size(), [&](const Partition& p) {
    if (best && p.size() <= best->size()) return;
    if (is_within_group_calibrated(c, p, epsilon, tol)) best = p;
  });
  return best;
}

std::size_t brute_force_general(const BinnedClassifier& c, const Tolerances& tol) {
  const std::size_t n = c.size();
  guard(n, kMaxGeneralBins, "brute_force_general");
  const Slack zero(c.group_count(), 0.0);

  // Restricted growth string: label[0] = 0, label[i] <= 1 + max(label[0..i-1]).
  std::vector<std::size_t> label(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  std::size_t best = 1;
  std::vector<std::vector<std::size_t>> members;
  std::vector<CellStats> cells;

  while (true) {
    const std::size_t blocks = prefix_max[n - 1] + 1;
    if (blocks > best) {
      members.assign(blocks, {});
      for (std::size_t i = 0; i < n; ++i) members[label[i]].push_back(i);
      cells.clear();
      for (const auto& m : members) cells.push_back(merge_bins(c, m));
      if (check_within_group_monotone(cells, zero, tol).monotone()) best = blocks;
    }
    // Advance to the next restricted growth string.
    std::size_t i = n - 1;
    while (i > 0 && label[i] == prefix_max[i - 1] + 1) --i;
    if (i == 0) break;
    ++label[i];
    prefix_max[i] = std::max(prefix_max[i - 1], label[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      label[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
  return best;
}

BinnedClassifier random_instance(const RandomInstanceOptions& options, std::uint64_t seed) {
  const std::size_t n = options.bins;
  const std::size_t g = options.groups;
  if (n == 0 || g == 0) throw ConfigError("random_instance needs bins and groups");
  Rng rng(seed);
  std::vector<std::string> labels;
  for (std::size_t z = 0; z < g; ++z) labels.push_back("g" + std::to_string(z + 1));

  while (true) {
    std::vector<double> base(n);
    for (auto& b : base) b = rng.uniform(0.05, 0.95);
    std::sort(base.begin(), base.end());

    struct Row {
      double mass;
      std::vector<double> share;
      std::vector<double> group_score;
      double score;
    };
    std::vector<Row> rows(n);
    double mass_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Row& row = rows[i];
      row.mass = rng.uniform(0.2, 1.0);
      mass_total += row.mass;
      row.share.assign(g, 0.0);
      row.group_score.assign(g, std::nan(""));
      double share_total = 0.0;
      const std::size_t keep = rng.index(g);
      for (std::size_t z = 0; z < g; ++z) {
        if (z != keep && rng.bernoulli(options.absent_probability)) continue;
        row.share[z] = rng.uniform(0.1, 1.0);
        share_total += row.share[z];
        const double jitter = rng.uniform(-0.5, 0.5);
        const double independent = rng.uniform();
        const double s = (1.0 - options.noise) * (base[i] + 0.1 * jitter) + options.noise * independent;
        row.group_score[z] = std::clamp(s, 0.0, 1.0);
      }
      row.score = 0.0;
      for (std::size_t z = 0; z < g; ++z) {
        row.share[z] /= share_total;
        if (row.share[z] > 0.0) row.score += row.share[z] * row.group_score[z];
      }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.score < b.score; });

    bool strictly = true;
    for (std::size_t i = 1; i < n; ++i) strictly = strictly && rows[i].score - rows[i - 1].score > 1e-9;
    if (!strictly) continue;

    std::vector<double> scores;
    std::vector<double> masses;
    Matrix shares(n, g);
    Matrix group_scores(n, g);
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(rows[i].score);
      masses.push_back(rows[i].mass / mass_total);
      for (std::size_t z = 0; z < g; ++z) {
        shares(i, z) = rows[i].share[z];
        group_scores(i, z) = rows[i].group_score[z];
      }
    }
    return BinnedClassifier(GroupSet(labels), std::move(scores), std::move(masses), std::move(shares),
                            std::move(group_scores));
  }
}

}  // namespace wgm::oracle
