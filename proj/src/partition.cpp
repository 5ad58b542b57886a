#include "wgm/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace wgm {

namespace {

constexpr double kNone = -std::numeric_limits<double>::infinity();

struct CellView {
  Cell cell;
  double score;
  std::vector<std::optional<double>> group_score;
};

CellView view(const PrefixSums& sums, Cell cell) {
  CellView v{cell, sums.score(cell), {}};
  v.group_score.reserve(sums.group_count());
  for (std::size_t z = 0; z < sums.group_count(); ++z) v.group_score.push_back(sums.group_score(cell, z));
  return v;
}

// Latest cell before j that violates the slack constraint against j, if any.
std::optional<std::size_t> latest_violator(const std::vector<CellView>& cells, std::size_t j,
                                           const Slack& tau, const Tolerances& tol) {
  std::optional<std::size_t> latest;
  for (std::size_t z = 0; z < tau.size(); ++z) {
    const auto& hi = cells[j].group_score[z];
    if (!hi) continue;
    for (std::size_t i = j; i-- > 0;) {
      if (latest && i <= *latest) break;
      const auto& lo = cells[i].group_score[z];
      if (lo && definitely_less(cells[i].score, cells[j].score, tol) && exceeds(*lo, *hi, tau[z], tol)) {
        latest = i;
        break;
      }
    }
  }
  return latest;
}

}  // namespace

Partition pav(const BinnedClassifier& c, const Slack& slack, const Tolerances& tol) {
  tol.check();
  const Slack tau = resolve_slack(slack, c.group_count());
  const PrefixSums sums(c);

  std::vector<CellView> cells;
  for (std::size_t i = 0; i < c.size(); ++i) cells.push_back(view(sums, {i, i + 1}));

  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const auto from = latest_violator(cells, j, tau, tol);
      if (!from) continue;
      const Cell joined{cells[*from].cell.begin, cells[j].cell.end};
      cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(*from) + 1,
                  cells.begin() + static_cast<std::ptrdiff_t>(j) + 1);
      cells[*from] = view(sums, joined);
      merged = true;
      break;
    }
  }

  std::vector<Cell> out;
  for (const auto& v : cells) out.push_back(v.cell);
  return Partition::from_cells(c.size(), out);
}

namespace {

struct Label {
  std::size_t size;
  std::vector<double> running_max;  // kNone while the group has no present cell yet
  std::int64_t pred;
  Cell cell;
};

bool label_dominates(const Label& a, const Label& b) {
  if (a.size < b.size) return false;
  for (std::size_t z = 0; z < a.running_max.size(); ++z) {
    if (a.running_max[z] > b.running_max[z]) return false;
  }
  return true;
}

}  // namespace

Partition optimal_partition(const BinnedClassifier& c, const Slack& slack, const Tolerances& tol) {
  tol.check();
  const std::size_t n = c.size();
  const std::size_t g = c.group_count();
  const Slack tau = resolve_slack(slack, g);
  const PrefixSums sums(c);

  std::vector<Label> arena;
  // frontier[l * n + r]: label indices for partitions of {0..r} whose last cell is [l..r].
  std::vector<std::vector<std::size_t>> frontier(n * n);

  // The single cell {0..r} is always feasible.
  for (std::size_t r = 0; r < n; ++r) {
    const Cell cell{0, r + 1};
    Label label{1, std::vector<double>(g, kNone), -1, cell};
    for (std::size_t z = 0; z < g; ++z) {
      if (auto s = sums.group_score(cell, z)) label.running_max[z] = *s;
    }
    frontier[r].push_back(arena.size());
    arena.push_back(std::move(label));
  }

  std::vector<std::optional<double>> scores(g);
  for (std::size_t l = 1; l < n; ++l) {
    for (std::size_t r = l; r < n; ++r) {
      const Cell cell{l, r + 1};
      for (std::size_t z = 0; z < g; ++z) scores[z] = sums.group_score(cell, z);
      auto& here = frontier[l * n + r];

      for (std::size_t k = 0; k < l; ++k) {
        for (std::size_t idx : frontier[k * n + (l - 1)]) {
          const Label& prev = arena[idx];
          bool feasible = true;
          for (std::size_t z = 0; z < g && feasible; ++z) {
            if (scores[z] && exceeds(prev.running_max[z], *scores[z], tau[z], tol)) feasible = false;
          }
          if (!feasible) continue;

          Label next{prev.size + 1, prev.running_max, static_cast<std::int64_t>(idx), cell};
          for (std::size_t z = 0; z < g; ++z) {
            if (scores[z]) next.running_max[z] = std::max(next.running_max[z], *scores[z]);
          }
          const bool dominated = std::any_of(here.begin(), here.end(), [&](std::size_t e) {
            return label_dominates(arena[e], next);
          });
          if (dominated) continue;
          std::erase_if(here, [&](std::size_t e) { return label_dominates(next, arena[e]); });
          here.push_back(arena.size());
          arena.push_back(std::move(next));
        }
      }
    }
  }

  // Among equally large answers prefer the shortest last cell, which keeps the
  // top scores as fine as possible.
  std::optional<std::size_t> best;
  for (std::size_t l = n; l-- > 0;) {
    for (std::size_t idx : frontier[l * n + (n - 1)]) {
      if (!best || arena[idx].size > arena[*best].size) best = idx;
    }
  }

  std::vector<Cell> cells;
  for (std::int64_t idx = static_cast<std::int64_t>(*best); idx >= 0; idx = arena[idx].pred) {
    cells.push_back(arena[idx].cell);
  }
  std::reverse(cells.begin(), cells.end());
  return Partition::from_cells(n, cells);
}

bool is_cell_calibrated(const CellStats& cell, double epsilon, const Tolerances& tol) {
  for (const auto& s : cell.group_score) {
    if (s && std::abs(*s - cell.score) > epsilon + tol.cmp_eps) return false;
  }
  return true;
}

bool is_within_group_calibrated(const BinnedClassifier& c, const Partition& p, double epsilon,
                                const Tolerances& tol) {
  for (const auto& cell : merged_scores(c, p)) {
    if (!is_cell_calibrated(cell, epsilon, tol)) return false;
  }
  return true;
}

namespace {

bool range_calibrated(const PrefixSums& sums, Cell cell, double epsilon, const Tolerances& tol) {
  const double score = sums.score(cell);
  for (std::size_t z = 0; z < sums.group_count(); ++z) {
    const auto s = sums.group_score(cell, z);
    if (s && std::abs(*s - score) > epsilon + tol.cmp_eps) return false;
  }
  return true;
}

struct Prefix {
  std::size_t size;
  std::size_t last_begin;
};

}  // namespace

std::optional<Partition> calibration_partition(const BinnedClassifier& c, double epsilon,
                                               const Tolerances& tol) {
  tol.check();
  if (!std::isfinite(epsilon) || epsilon < 0.0) throw std::invalid_argument("epsilon must be finite and >= 0");
  const std::size_t n = c.size();
  const PrefixSums sums(c);

  // best[r]: optimal calibrated partition of {0..r}, if any.
  std::vector<std::optional<Prefix>> best(n);
  if (range_calibrated(sums, {0, 1}, epsilon, tol)) best[0] = Prefix{1, 0};

  for (std::size_t r = 1; r < n; ++r) {
    std::optional<std::size_t> chosen;
    for (std::size_t k = 1; k <= r; ++k) {
      if (!best[k - 1]) continue;
      if (chosen && best[k - 1]->size <= best[*chosen - 1]->size) continue;
      if (range_calibrated(sums, {k, r + 1}, epsilon, tol)) chosen = k;
    }
    if (chosen) {
      best[r] = Prefix{best[*chosen - 1]->size + 1, *chosen};
    } else if (range_calibrated(sums, {0, r + 1}, epsilon, tol)) {
      best[r] = Prefix{1, 0};
    }
  }

  if (!best[n - 1]) return std::nullopt;
  std::vector<Cell> cells;
  std::size_t end = n;
  while (end > 0) {
    const Prefix& p = *best[end - 1];
    cells.push_back({p.last_begin, end});
    end = p.last_begin;
  }
  std::reverse(cells.begin(), cells.end());
  return Partition::from_cells(n, cells);
}

EpsilonSearch smallest_epsilon(const BinnedClassifier& c, const Tolerances& tol, double bisect_tol) {
  if (!(bisect_tol > 0.0)) throw std::invalid_argument("bisect_tol must be positive");
  if (auto p = calibration_partition(c, 0.0, tol)) return {0.0, std::move(*p)};

  // The identity partition is feasible at the largest per-bin deviation.
  double hi = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t z = 0; z < c.group_count(); ++z) {
      if (c.present(i, z)) hi = std::max(hi, std::abs(c.group_score(i, z) - c.score(i)));
    }
  }
  double lo = 0.0;
  while (hi - lo > bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    if (calibration_partition(c, mid, tol)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  auto p = calibration_partition(c, hi, tol);
  return {hi, std::move(*p)};
}

}  // namespace wgm
