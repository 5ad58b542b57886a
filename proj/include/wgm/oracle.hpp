#pragma once

// Exhaustive reference searches and random instance generation for
// cross-checking the partition algorithms. Merged statistics here are always
// recomputed by direct summation, never through PrefixSums.

#include <cstdint>
#include <functional>
#include <optional>

#include "wgm/model.hpp"

namespace wgm::oracle {

inline constexpr std::size_t kMaxContiguousBins = 20;
inline constexpr std::size_t kMaxOptimalBins = 16;
inline constexpr std::size_t kMaxGeneralBins = 10;

/// Visits all 2^(n-1) contiguous partitions; bit b of the mask cuts before bin b+1.
/// Throws GuardError for n == 0 or n > kMaxContiguousBins.
void enumerate_contiguous(std::size_t n, const std::function<void(const Partition&)>& visit);
std::vector<Partition> all_contiguous(std::size_t n);

/// Largest contiguous partition passing the monotonicity checker; ties go to the
/// smallest cut mask.
Partition brute_force_optimal(const BinnedClassifier& c, const Slack& slack = {},
                              const Tolerances& tol = {});

/// Largest contiguous epsilon-calibrated partition, if any.
std::optional<Partition> brute_force_calibration(const BinnedClassifier& c, double epsilon,
                                                 const Tolerances& tol = {});

/// Size of the largest set partition (contiguous or not) whose induced classifier is
/// within-group monotone. Enumerates restricted growth strings; n <= kMaxGeneralBins.
std::size_t brute_force_general(const BinnedClassifier& c, const Tolerances& tol = {});

struct RandomInstanceOptions {
  std::size_t bins = 6;
  std::size_t groups = 2;
  /// 0 gives nearly monotone group scores, 1 gives independent uniform group scores.
  double noise = 1.0;
  /// Probability that an entry (i, z) gets zero share. Bins always keep one group.
  double absent_probability = 0.0;
};

/// Random valid classifier: bins are sorted by mixture score, which must end up strictly
/// increasing (resampled otherwise).
BinnedClassifier random_instance(const RandomInstanceOptions& options, std::uint64_t seed);

}  // namespace wgm::oracle
