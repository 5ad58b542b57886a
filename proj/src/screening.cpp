#include "wgm/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wgm/errors.hpp"
#include "wgm/random.hpp"

namespace wgm {

void ThresholdRule::check() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in [0,1]");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [0,1]");
}

std::vector<int> apply_rule(const ThresholdRule& rule, std::span<const double> scores,
                            std::uint64_t seed, const Tolerances& tol) {
  rule.check();
  Rng rng(seed);
  std::vector<int> out;
  out.reserve(scores.size());
  for (double s : scores) {
    if (definitely_less(rule.threshold, s, tol)) {
      out.push_back(1);
    } else if (std::abs(s - rule.threshold) <= tol.cmp_eps) {
      out.push_back(rng.bernoulli(rule.theta) ? 1 : 0);
    } else {
      out.push_back(0);
    }
  }
  return out;
}

Shortlist shortlist(const CandidatePool& pool, const ScoreView& view, double k, const Tolerances& tol) {
  if (!(k >= 0.0) || !std::isfinite(k)) throw std::invalid_argument("k must be finite and >= 0");
  pool.check(view.bins(), view.group_count());
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return view.score(pool[a].bin) > view.score(pool[b].bin);
  });

  Shortlist out;
  for (std::size_t idx : order) {
    if (out.achieved + tol.cmp_eps >= k) return out;
    out.selected.push_back(idx);
    out.achieved += view.score(pool[idx].bin);
  }
  out.shortfall = out.achieved + tol.cmp_eps < k;
  return out;
}

std::optional<ViolatingPair> violating_pair(const CandidatePool& pool, std::span<const int> decisions,
                                            const ScoreView& view, const Tolerances& tol) {
  if (decisions.size() != pool.size()) throw StructuralError("one decision per pool member required");
  pool.check(view.bins(), view.group_count());
  for (std::size_t x = 0; x < pool.size(); ++x) {
    if (!decisions[x]) continue;
    const std::size_t z = pool[x].group;
    const auto kept = view.group_score(pool[x].bin, z);
    if (!kept) continue;
    for (std::size_t y = 0; y < pool.size(); ++y) {
      if (decisions[y] || pool[y].group != z) continue;
      const auto dropped = view.group_score(pool[y].bin, z);
      if (dropped && exceeds(*dropped, *kept, 0.0, tol)) return ViolatingPair{x, y, z};
    }
  }
  return std::nullopt;
}

std::optional<ViolatingPair> violating_pair(const CandidatePool& pool, const ThresholdRule& rule,
                                            const ScoreView& view, std::uint64_t seed,
                                            const Tolerances& tol) {
  pool.check(view.bins(), view.group_count());
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const Candidate& x : pool.members()) scores.push_back(view.score(x.bin));
  const auto decisions = apply_rule(rule, scores, seed, tol);
  return violating_pair(pool, decisions, view, tol);
}

}  // namespace wgm
