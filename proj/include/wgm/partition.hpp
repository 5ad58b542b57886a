#pragma once

// Partitioning algorithms that turn a calibrated classifier into a
// within-group monotone (or within-group calibrated) one by merging
// contiguous bins.

#include <optional>

#include "wgm/model.hpp"

namespace wgm {

// Pool adjacent violators across all groups.
//
// Cells are scanned left to right; at the first cell j that violates the
// constraint against an earlier cell, the cells from the latest violating
// predecessor through j are merged and the scan restarts. With zero slack and
// every group present in every bin this is exactly the leftmost adjacent
// pair merge.
Partition pav(const BinnedClassifier& c, const Slack& slack = {}, const Tolerances& tol = {});

// Maximum-size contiguous partition whose induced classifier is within-group
// monotone with per-group slack.
//
// Dynamic program over the last cell [l..r]. Each (l, r) keeps the Pareto set
// of (size, per-group running maximum of cell scores) labels reachable from a
// predecessor (k, l-1). With zero slack and all groups present the running
// maximum equals the last cell's scores, every set holds a single label and
// this is the classical O(n^3 |Z|) recurrence. Ties keep the smallest k.
Partition optimal_partition(const BinnedClassifier& c, const Slack& slack = {},
                            const Tolerances& tol = {});

/// True when every present group score of the cell is within epsilon of the cell score.
bool is_cell_calibrated(const CellStats& cell, double epsilon, const Tolerances& tol = {});
/// Every cell of p is epsilon-calibrated within groups.
bool is_within_group_calibrated(const BinnedClassifier& c, const Partition& p, double epsilon,
                                const Tolerances& tol = {});

/// Maximum-size contiguous partition whose induced classifier is within-group
/// epsilon-calibrated, or nullopt when none exists. O(n^2 |Z|).
std::optional<Partition> calibration_partition(const BinnedClassifier& c, double epsilon,
                                               const Tolerances& tol = {});

struct EpsilonSearch {
  double epsilon = 0.0;
  Partition partition;
};

/// Bisection for the smallest epsilon at which calibration_partition succeeds. The result
/// is feasible and within bisect_tol of the infimum.
EpsilonSearch smallest_epsilon(const BinnedClassifier& c, const Tolerances& tol = {},
                               double bisect_tol = 1e-4);

}  // namespace wgm
