#include "wgm/metrics.hpp"

namespace wgm {

UnfairnessReport unfairness_probabilities(const BinnedClassifier& c, const Tolerances& tol) {
  tol.check();
  const std::size_t n = c.size();
  const std::size_t g = c.group_count();
  UnfairnessReport out;
  out.exposed.assign(n, std::vector<bool>(g, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t z = 0; z < g; ++z) {
      if (!c.present(i, z)) continue;
      for (std::size_t j = 0; j < n && !out.exposed[i][z]; ++j) {
        if (c.present(j, z) && definitely_less(c.score(i), c.score(j), tol) &&
            exceeds(c.group_score(i, z), c.group_score(j, z), 0.0, tol)) {
          out.exposed[i][z] = true;
        }
      }
    }
  }

  out.group_mass.assign(g, 0.0);
  out.p_given_group.assign(g, std::nullopt);
  for (std::size_t z = 0; z < g; ++z) {
    double mass = 0.0;
    double exposed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mass += c.joint_mass(i, z);
      if (out.exposed[i][z]) exposed += c.joint_mass(i, z);
    }
    out.group_mass[z] = mass;
    if (mass > 0.0) {
      out.p_given_group[z] = exposed / mass;
      out.p_d += mass * *out.p_given_group[z];
    }
  }
  return out;
}

namespace {

bool violates(const ScoreView& view, std::size_t lower_bin, std::size_t upper_bin, std::size_t z,
              const Tolerances& tol) {
  if (!definitely_less(view.score(lower_bin), view.score(upper_bin), tol)) return false;
  const auto lo = view.group_score(lower_bin, z);
  const auto hi = view.group_score(upper_bin, z);
  return lo && hi && exceeds(*lo, *hi, 0.0, tol);
}

double pairwise(const ScoreView& view, const CandidatePool& pool, const Tolerances& tol) {
  std::size_t exposed = 0;
  for (const Candidate& x : pool.members()) {
    for (const Candidate& other : pool.members()) {
      if (violates(view, x.bin, other.bin, x.group, tol)) {
        ++exposed;
        break;
      }
    }
  }
  return static_cast<double>(exposed) / static_cast<double>(pool.size());
}

double bin_table(const ScoreView& view, const CandidatePool& pool, const Tolerances& tol) {
  const std::size_t n = view.bins();
  const std::size_t g = view.group_count();
  std::vector<bool> occupied(n, false);
  for (const Candidate& x : pool.members()) occupied[x.bin] = true;

  std::vector<std::vector<bool>> table(n, std::vector<bool>(g, false));
  for (std::size_t i = 0; i < n; ++i) {
    if (!occupied[i]) continue;
    for (std::size_t z = 0; z < g; ++z) {
      for (std::size_t j = 0; j < n && !table[i][z]; ++j) {
        if (occupied[j] && violates(view, i, j, z, tol)) table[i][z] = true;
      }
    }
  }
  std::size_t exposed = 0;
  for (const Candidate& x : pool.members()) exposed += table[x.bin][x.group] ? 1 : 0;
  return static_cast<double>(exposed) / static_cast<double>(pool.size());
}

}  // namespace

double pool_unfairness(const ScoreView& view, const CandidatePool& pool, const Tolerances& tol,
                       PoolMethod method) {
  tol.check();
  pool.check(view.bins(), view.group_count());
  if (pool.empty()) return 0.0;
  if (method == PoolMethod::automatic) {
    const std::size_t m = pool.size();
    const std::size_t n = view.bins();
    method = m * m > n * n * view.group_count() ? PoolMethod::bin_table : PoolMethod::pairwise;
  }
  return method == PoolMethod::pairwise ? pairwise(view, pool, tol) : bin_table(view, pool, tol);
}

double pool_unfairness(const BinnedClassifier& c, const CandidatePool& pool, const Tolerances& tol) {
  return pool_unfairness(ScoreView::of(c), pool, tol);
}

}  // namespace wgm
