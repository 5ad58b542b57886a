#include "wgm/binning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "wgm/errors.hpp"
#include "wgm/random.hpp"

namespace wgm {

std::size_t BinEdges::bin_of(double score) const {
  return static_cast<std::size_t>(std::lower_bound(upper.begin(), upper.end(), score) - upper.begin());
}

BinEdges uniform_mass_bins(std::span<const RawRecord> records, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_mass_bins: n must be positive");
  const std::size_t m = records.size();
  if (m < n) {
    throw InsufficientDataError("uniform mass binning needs at least " + std::to_string(n) +
                                " records, got " + std::to_string(m));
  }
  std::vector<double> sorted;
  sorted.reserve(m);
  for (const auto& r : records) sorted.push_back(r.score);
  std::sort(sorted.begin(), sorted.end());

  BinEdges edges;
  for (std::size_t k = 1; k < n; ++k) {
    // Bin k-1 ends after floor(k m / n) records.
    const std::size_t count = k * m / n;
    edges.upper.push_back(sorted[count - 1]);
  }
  return edges;
}

std::vector<std::size_t> assign_bins(std::span<const RawRecord> records, const BinEdges& edges) {
  std::vector<std::size_t> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(edges.bin_of(r.score));
  return out;
}

GroupSet groups_of(std::span<const RawRecord> records) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& r : records) {
    if (seen.emplace(r.group, labels.size()).second) labels.push_back(r.group);
  }
  return GroupSet(std::move(labels));
}

namespace {

struct Block {
  std::size_t first_bin;
  std::size_t last_bin;
  std::size_t count = 0;
  std::size_t positives = 0;

  double rate() const { return static_cast<double>(positives) / static_cast<double>(count); }
};

}  // namespace

Estimate estimate_classifier(std::span<const RawRecord> records, const BinEdges& edges,
                             const GroupSet& groups, const EstimateOptions& options) {
  options.tol.check();
  const std::size_t bins = edges.bins();
  const std::size_t g = groups.size();
  const auto assignment = assign_bins(records, edges);

  std::vector<std::size_t> group_index(records.size());
  std::vector<std::size_t> count(bins, 0);
  std::vector<std::size_t> positives(bins, 0);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto z = groups.index_of(records[r].group);
    if (!z) throw EstimationError("record " + std::to_string(r) + " has unknown group '" + records[r].group + "'");
    group_index[r] = *z;
    ++count[assignment[r]];
    positives[assignment[r]] += records[r].qualified ? 1 : 0;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] == 0) throw EstimationError("bin " + std::to_string(b + 1) + " is empty");
  }

  // Merge adjacent bins until the empirical scores strictly increase.
  std::vector<Block> blocks;
  for (std::size_t b = 0; b < bins; ++b) {
    blocks.push_back({b, b, count[b], positives[b]});
    while (blocks.size() >= 2 &&
           !definitely_less(blocks[blocks.size() - 2].rate(), blocks.back().rate(), options.tol)) {
      Block top = blocks.back();
      blocks.pop_back();
      blocks.back().last_bin = top.last_bin;
      blocks.back().count += top.count;
      blocks.back().positives += top.positives;
    }
  }

  std::vector<std::string> warnings;
  BinEdges merged_edges;
  std::vector<std::size_t> bin_map(bins);
  if (blocks.size() < bins) {
    std::ostringstream os;
    os << "merged " << bins - blocks.size() << " bin(s) with non-increasing empirical scores";
    warnings.push_back(os.str());
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (std::size_t b = blocks[k].first_bin; b <= blocks[k].last_bin; ++b) bin_map[b] = k;
    if (k + 1 < blocks.size()) merged_edges.upper.push_back(edges.upper[blocks[k].last_bin]);
  }

  const std::size_t n = blocks.size();
  std::vector<std::size_t> joint(n * g, 0);
  std::vector<std::size_t> joint_pos(n * g, 0);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const std::size_t k = bin_map[assignment[r]];
    ++joint[k * g + group_index[r]];
    joint_pos[k * g + group_index[r]] += records[r].qualified ? 1 : 0;
  }

  // Drop groups that never occur.
  std::vector<std::size_t> kept;
  std::vector<std::string> kept_labels;
  for (std::size_t z = 0; z < g; ++z) {
    std::size_t total = 0;
    for (std::size_t k = 0; k < n; ++k) total += joint[k * g + z];
    if (total == 0) {
      warnings.push_back("group '" + groups.label(z) + "' has no records and was dropped");
    } else {
      kept.push_back(z);
      kept_labels.push_back(groups.label(z));
    }
  }
  if (kept.empty()) throw EstimationError("no records to estimate from");

  const double m = static_cast<double>(records.size());
  std::vector<double> scores(n);
  std::vector<double> masses(n);
  Matrix shares(n, kept.size());
  Matrix group_scores(n, kept.size(), std::nan(""));
  for (std::size_t k = 0; k < n; ++k) {
    const double bin_count = static_cast<double>(blocks[k].count);
    scores[k] = blocks[k].rate();
    masses[k] = bin_count / m;
    for (std::size_t col = 0; col < kept.size(); ++col) {
      const std::size_t cz = joint[k * g + kept[col]];
      shares(k, col) = static_cast<double>(cz) / bin_count;
      if (cz > 0 && cz >= options.min_group_count) {
        group_scores(k, col) = static_cast<double>(joint_pos[k * g + kept[col]]) / static_cast<double>(cz);
      }
    }
  }
  return Estimate{BinnedClassifier(GroupSet(std::move(kept_labels)), std::move(scores), std::move(masses),
                                   std::move(shares), std::move(group_scores)),
                  std::move(merged_edges), std::move(bin_map), std::move(warnings)};
}

MixtureCheck check_mixture(const MixtureConfig& config, const Tolerances& tol) {
  const std::size_t n = config.masses.size();
  const std::size_t g = config.groups.size();
  if (n == 0 || g == 0) throw ConfigError("mixture needs at least one bin and one group");
  if (config.shares.rows() != n || config.shares.cols() != g || config.group_scores.rows() != n ||
      config.group_scores.cols() != g) {
    throw ConfigError("mixture matrices must be n x |groups|");
  }
  (void)GroupSet(config.groups);  // rejects empty or duplicate labels

  double total = 0.0;
  for (double m : config.masses) {
    if (!(m > 0.0)) throw ConfigError("bin masses must be positive");
    total += m;
  }
  if (std::abs(total - 1.0) > tol.mass_eps) throw ConfigError("bin masses must sum to 1");

  MixtureCheck out;
  out.mixture.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double share_total = 0.0;
    for (std::size_t z = 0; z < g; ++z) {
      const double s = config.shares(i, z);
      const double a = config.group_scores(i, z);
      if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("group shares must lie in [0,1]");
      if (s > 0.0 && !(a >= 0.0 && a <= 1.0)) throw ConfigError("group scores must lie in [0,1]");
      share_total += s;
      if (s > 0.0) out.mixture[i] += s * a;
    }
    if (std::abs(share_total - 1.0) > tol.mass_eps) {
      throw ConfigError("group shares of bin " + std::to_string(i + 1) + " must sum to 1");
    }
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!definitely_less(out.mixture[i], out.mixture[i + 1], tol)) {
      out.failing_bin = i;
      std::ostringstream os;
      os << "mixture scores are not strictly increasing: a_" << i + 1 << " = " << out.mixture[i]
         << " >= a_" << i + 2 << " = " << out.mixture[i + 1];
      out.certificate = os.str();
      break;
    }
  }

  out.reversed.assign(g, true);
  for (std::size_t z = 0; z < g; ++z) {
    std::optional<double> prev;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(config.shares(i, z) > 0.0)) continue;
      const double a = config.group_scores(i, z);
      if (prev && !definitely_less(a, *prev, tol)) out.reversed[z] = false;
      prev = a;
      ++seen;
    }
    if (seen < 2) out.reversed[z] = false;
  }
  return out;
}

BinEdges mixture_edges(const MixtureConfig& config) {
  BinEdges edges;
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < config.masses.size(); ++i) {
    cumulative += config.masses[i];
    edges.upper.push_back(cumulative);
  }
  return edges;
}

std::vector<RawRecord> synthesize_simpson(const MixtureConfig& config, std::size_t records,
                                          std::uint64_t seed) {
  const MixtureCheck check = check_mixture(config);
  if (!check.feasible()) throw ConfigError(check.certificate);

  const std::size_t n = config.masses.size();
  std::vector<double> lower(n, 0.0);
  std::vector<double> upper(n, 0.0);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lower[i] = cumulative;
    cumulative += config.masses[i];
    upper[i] = i + 1 == n ? 1.0 : cumulative;
  }

  Rng rng(seed);
  std::vector<RawRecord> out;
  out.reserve(records);
  for (std::size_t r = 0; r < records; ++r) {
    const std::size_t i = rng.categorical(config.masses);
    const std::size_t z = rng.categorical(config.shares.row(i));
    const bool qualified = rng.bernoulli(config.group_scores(i, z));
    // (lower, upper], so that scores never sit on the previous bin's closed edge.
    const double score = upper[i] - rng.uniform() * (upper[i] - lower[i]);
    out.push_back({score, config.groups[z], qualified});
  }
  return out;
}

double LatentModel::share(std::size_t z, double s) const {
  double total = 0.0;
  double mine = 0.0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const double w = std::max(0.0, groups[k].share_base + groups[k].share_slope * (s - 0.5));
    total += w;
    if (k == z) mine = w;
  }
  return total > 0.0 ? mine / total : 0.0;
}

double LatentModel::qualification(std::size_t z, double s) const {
  const LatentGroup& g = groups[z];
  const double q = g.intercept + g.slope * s +
                   g.amplitude * std::sin(2.0 * std::numbers::pi * g.frequency * s + g.phase);
  return std::clamp(q, 0.01, 0.99);
}

LatentModel LatentModel::simpson_family() {
  LatentModel model;
  // A large group whose qualification rises steadily, and two smaller groups
  // whose own trends wobble against the pooled trend. Their weights move with
  // the score, which is what lets the pooled trend hide the reversals.
  model.groups.push_back({"majority", 1.0, 0.6, 0.15, 0.75, 0.02, 2.0, 0.0});
  model.groups.push_back({"minority_a", 0.25, -0.2, 0.30, 0.45, 0.09, 3.0, 1.0});
  model.groups.push_back({"minority_b", 0.12, 0.1, 0.25, 0.55, 0.08, 4.0, 2.5});
  return model;
}

std::vector<RawRecord> synthesize_latent(const LatentModel& model, std::size_t records,
                                         std::uint64_t seed) {
  if (model.groups.empty()) throw ConfigError("latent model needs at least one group");
  Rng rng(seed);
  std::vector<double> weights(model.groups.size());
  std::vector<RawRecord> out;
  out.reserve(records);
  for (std::size_t r = 0; r < records; ++r) {
    const double s = rng.uniform();
    for (std::size_t z = 0; z < weights.size(); ++z) weights[z] = model.share(z, s);
    const std::size_t z = rng.categorical(weights);
    const bool qualified = rng.bernoulli(model.qualification(z, s));
    out.push_back({s, model.groups[z].label, qualified});
  }
  return out;
}

}  // namespace wgm
