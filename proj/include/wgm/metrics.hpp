#pragma once

// Within-group unfairness probabilities for a classifier and for concrete
// candidate pools.

#include <optional>
#include <vector>

#include "wgm/model.hpp"

namespace wgm {

struct UnfairnessReport {
  /// Pr(Z=z) = sum_i rho_i rho_z|i.
  std::vector<double> group_mass;
  /// p_d|z; nullopt for groups with zero mass.
  std::vector<std::optional<double>> p_given_group;
  /// p_d = sum_z Pr(Z=z) p_d|z.
  double p_d = 0.0;
  /// exposed[i][z]: some bin j has a_i < a_j and a_i,z > a_j,z.
  std::vector<std::vector<bool>> exposed;
};

UnfairnessReport unfairness_probabilities(const BinnedClassifier& c, const Tolerances& tol = {});

enum class PoolMethod { automatic, pairwise, bin_table };

/// Fraction of pool members exposed to a within-group monotonicity violation by
/// another member of the same pool. Returns 0 for an empty pool.
double pool_unfairness(const ScoreView& view, const CandidatePool& pool, const Tolerances& tol = {},
                       PoolMethod method = PoolMethod::automatic);
double pool_unfairness(const BinnedClassifier& c, const CandidatePool& pool, const Tolerances& tol = {});

}  // namespace wgm
