#pragma once

// Threshold decisions and expected-count shortlists over candidate pools.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wgm/model.hpp"

namespace wgm {

/// Shortlist when the score exceeds the threshold; at the threshold, with probability theta.
struct ThresholdRule {
  double threshold = 0.5;
  double theta = 0.0;

  void check() const;
};

/// Decisions s_i in {0,1}. Ties are resolved by Bernoulli(theta) draws from `seed`, consumed
/// in input order.
std::vector<int> apply_rule(const ThresholdRule& rule, std::span<const double> scores,
                            std::uint64_t seed, const Tolerances& tol = {});

struct Shortlist {
  /// Pool indices in selection order (score descending, input order on ties).
  std::vector<std::size_t> selected;
  /// Sum of the selected quality scores.
  double achieved = 0.0;
  /// The whole pool could not reach k.
  bool shortfall = false;
};

/// Shortest score-descending prefix of the pool whose score sum reaches k.
Shortlist shortlist(const CandidatePool& pool, const ScoreView& view, double k,
                    const Tolerances& tol = {});

struct ViolatingPair {
  std::size_t shortlisted = 0;  // pool index
  std::size_t rejected = 0;     // pool index
  std::size_t group = 0;
};

/// A rejected candidate whose group-conditional score strictly exceeds that of a shortlisted
/// candidate of the same group; the first such pair in pool order.
std::optional<ViolatingPair> violating_pair(const CandidatePool& pool, const ThresholdRule& rule,
                                            const ScoreView& view, std::uint64_t seed,
                                            const Tolerances& tol = {});
/// Same, for explicit decisions (one per pool member).
std::optional<ViolatingPair> violating_pair(const CandidatePool& pool, std::span<const int> decisions,
                                            const ScoreView& view, const Tolerances& tol = {});

}  // namespace wgm
