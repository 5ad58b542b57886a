#pragma once

// Building a BinnedClassifier from raw (score, group, label) records with
// uniform-mass binning, plus synthetic record generators.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wgm/model.hpp"

namespace wgm {

struct RawRecord {
  double score = 0.0;
  std::string group;
  bool qualified = false;

  bool operator==(const RawRecord&) const = default;
};

/// Interior bin edges; bin k holds scores in (upper[k-1], upper[k]] (closed on the right),
/// with -inf / +inf at the ends.
struct BinEdges {
  std::vector<double> upper;

  std::size_t bins() const noexcept { return upper.size() + 1; }
  std::size_t bin_of(double score) const;
};

/// Edges at the empirical k/n score quantiles. Throws InsufficientDataError when there are
/// fewer records than bins.
BinEdges uniform_mass_bins(std::span<const RawRecord> records, std::size_t n);

std::vector<std::size_t> assign_bins(std::span<const RawRecord> records, const BinEdges& edges);

/// Groups in order of first appearance.
GroupSet groups_of(std::span<const RawRecord> records);

struct EstimateOptions {
  /// Below this many records a (bin, group) score is suppressed (absent).
  std::size_t min_group_count = 1;
  Tolerances tol;
};

struct Estimate {
  BinnedClassifier classifier;
  /// Edges after merging bins whose empirical scores were not strictly increasing.
  BinEdges edges;
  /// Input bin -> output bin.
  std::vector<std::size_t> bin_map;
  std::vector<std::string> warnings;
};

/// Empirical rho_i, a_i, rho_z|i and a_i,z. Adjacent bins are merged left to right until
/// the scores are strictly increasing. Throws EstimationError for empty bins or records
/// whose group is not in `groups`; groups with no records are dropped with a warning.
Estimate estimate_classifier(std::span<const RawRecord> records, const BinEdges& edges,
                             const GroupSet& groups, const EstimateOptions& options = {});

// Bin-level mixture description used to generate records.
struct MixtureConfig {
  std::vector<std::string> groups;
  std::vector<double> masses;  // rho_i
  Matrix shares;               // rho_z|i
  Matrix group_scores;         // a_i,z
};

struct MixtureCheck {
  std::vector<double> mixture;  // a_i = sum_z rho_z|i a_i,z
  /// First bin i (0-based) with a_i >= a_{i+1}, when the mixture is not increasing.
  std::optional<std::size_t> failing_bin;
  /// reversed[z]: a_i,z strictly decreases across every bin where z is present.
  std::vector<bool> reversed;
  std::string certificate;

  bool feasible() const noexcept { return !failing_bin; }
};

/// Validates shapes and ranges (ConfigError) and evaluates mixture monotonicity.
MixtureCheck check_mixture(const MixtureConfig& config, const Tolerances& tol = {});

/// Edges at the cumulative bin masses, matching the scores emitted by synthesize_simpson.
BinEdges mixture_edges(const MixtureConfig& config);

/// Records drawn bin ~ rho, group ~ rho_z|i, label ~ Bernoulli(a_i,z), score uniform in the
/// bin's cumulative-mass interval. Throws ConfigError (with the certificate) when the mixture
/// scores are not strictly increasing.
std::vector<RawRecord> synthesize_simpson(const MixtureConfig& config, std::size_t records,
                                          std::uint64_t seed);

// Continuous latent-score generator, independent of any bin count. Scores are
// uniform on [0,1]; group weights and qualification probabilities vary with
// the score so that group trends can run against the pooled trend.
struct LatentGroup {
  std::string label;
  double share_base = 1.0;   // weight at s = 0.5
  double share_slope = 0.0;  // weight change per unit score
  double intercept = 0.5;
  double slope = 0.0;
  double amplitude = 0.0;
  double frequency = 1.0;
  double phase = 0.0;
};

struct LatentModel {
  std::vector<LatentGroup> groups;

  /// Pr(Z=z | s).
  double share(std::size_t z, double s) const;
  /// Pr(Y=1 | s, Z=z).
  double qualification(std::size_t z, double s) const;

  /// Default family used by the sweeps and acceptance trend checks.
  static LatentModel simpson_family();
};

std::vector<RawRecord> synthesize_latent(const LatentModel& model, std::size_t records,
                                         std::uint64_t seed);

}  // namespace wgm
