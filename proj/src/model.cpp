#include "wgm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "wgm/errors.hpp"

namespace wgm {

IngestError::IngestError(std::vector<RowError> rows)
    : Error([&] {
        std::ostringstream os;
        os << rows.size() << " malformed row(s)";
        if (!rows.empty()) os << "; first at line " << rows.front().line << ": " << rows.front().message;
        return os.str();
      }()),
      rows_(std::move(rows)) {}

void Tolerances::check() const {
  if (!std::isfinite(cmp_eps) || cmp_eps < 0.0 || !std::isfinite(mass_eps) || mass_eps < 0.0) {
    throw std::invalid_argument("tolerances must be finite and non-negative");
  }
}

GroupSet::GroupSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw StructuralError("group set must not be empty");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) throw StructuralError("duplicate group label '" + l + "'");
  }
}

std::optional<std::size_t> GroupSet::index_of(std::string_view label) const {
  for (std::size_t z = 0; z < labels_.size(); ++z) {
    if (labels_[z] == label) return z;
  }
  return std::nullopt;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw StructuralError("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

BinnedClassifier::BinnedClassifier(GroupSet groups, std::vector<double> scores,
                                   std::vector<double> masses, Matrix shares, Matrix group_scores)
    : groups_(std::move(groups)),
      scores_(std::move(scores)),
      masses_(std::move(masses)),
      shares_(std::move(shares)),
      group_scores_(std::move(group_scores)) {
  const std::size_t n = scores_.size();
  const std::size_t g = groups_.size();
  if (n == 0) throw StructuralError("classifier needs at least one bin");
  if (masses_.size() != n) throw StructuralError("mass vector length differs from score count");
  if (shares_.rows() != n || shares_.cols() != g) {
    throw StructuralError("share matrix must be n x |groups|");
  }
  if (group_scores_.rows() != n || group_scores_.cols() != g) {
    throw StructuralError("group score matrix must be n x |groups|");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(scores_[i]) || !std::isfinite(masses_[i])) {
      throw StructuralError("non-finite score or mass at bin " + std::to_string(i + 1));
    }
    for (std::size_t z = 0; z < g; ++z) {
      if (!std::isfinite(shares_(i, z))) {
        throw StructuralError("non-finite group share at bin " + std::to_string(i + 1));
      }
    }
  }
}

bool BinnedClassifier::present(std::size_t i, std::size_t z) const {
  return shares_(i, z) > 0.0 && std::isfinite(group_scores_(i, z));
}

double BinnedClassifier::group_mass(std::size_t z) const {
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i) total += joint_mass(i, z);
  return total;
}

namespace {

void add_issue(ValidationResult& out, std::string invariant, std::optional<std::size_t> bin,
               std::optional<std::size_t> group, std::string message) {
  out.issues.push_back({std::move(invariant), bin, group, std::move(message)});
}

std::string bin_label(std::size_t i) { return std::to_string(i + 1); }

}  // namespace

ValidationResult validate_classifier(const BinnedClassifier& c, const Tolerances& tol) {
  tol.check();
  ValidationResult out;
  const std::size_t n = c.size();
  const std::size_t g = c.group_count();

  double mass_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = c.score(i);
    if (a < 0.0 || a > 1.0) {
      add_issue(out, "score_range", i, std::nullopt, "a outside [0,1] at index " + bin_label(i));
    }
    if (i > 0 && !definitely_less(c.score(i - 1), a, tol)) {
      add_issue(out, "score_increasing", i, std::nullopt,
                "a not strictly increasing at index " + bin_label(i));
    }
    const double rho = c.mass(i);
    if (!(rho > 0.0) || rho > 1.0) {
      add_issue(out, "mass_range", i, std::nullopt, "rho outside (0,1] at index " + bin_label(i));
    }
    mass_total += rho;

    double share_total = 0.0;
    double mixture = 0.0;
    bool all_present = true;
    for (std::size_t z = 0; z < g; ++z) {
      const double share = c.share(i, z);
      if (share < 0.0 || share > 1.0) {
        add_issue(out, "share_range", i, z,
                  "group share outside [0,1] at index " + bin_label(i) + ", group " + c.groups().label(z));
      }
      share_total += share;
      if (share > 0.0) {
        const double az = c.group_score(i, z);
        if (!std::isfinite(az)) {
          all_present = false;
          continue;
        }
        if (az < 0.0 || az > 1.0) {
          add_issue(out, "group_score_range", i, z,
                    "group score outside [0,1] at index " + bin_label(i) + ", group " +
                        c.groups().label(z));
        }
        mixture += share * az;
      }
    }
    if (std::abs(share_total - 1.0) > tol.mass_eps) {
      add_issue(out, "share_sum", i, std::nullopt,
                "group shares do not sum to 1 at index " + bin_label(i));
    }
    // The mixture identity cannot be checked when an estimate was suppressed.
    if (all_present && std::abs(mixture - a) > tol.mass_eps) {
      add_issue(out, "mixture_consistency", i, std::nullopt,
                "a differs from sum_z rho_z|i a_i,z at index " + bin_label(i));
    }
  }
  if (std::abs(mass_total - 1.0) > tol.mass_eps) {
    add_issue(out, "mass_sum", std::nullopt, std::nullopt, "bin masses do not sum to 1");
  }
  return out;
}

Partition::Partition(std::size_t bins, std::vector<std::size_t> cuts)
    : bins_(bins), cuts_(std::move(cuts)) {
  if (bins_ == 0) throw StructuralError("partition needs at least one bin");
  std::size_t prev = 0;
  for (std::size_t cut : cuts_) {
    if (cut <= prev || cut >= bins_) {
      throw StructuralError("partition cut points must be strictly increasing inside (0, n)");
    }
    prev = cut;
  }
}

Partition Partition::from_cells(std::size_t bins, std::span<const Cell> cells) {
  std::vector<std::size_t> cuts;
  std::size_t expected = 0;
  for (const Cell& cell : cells) {
    if (cell.begin != expected || cell.end <= cell.begin) {
      throw StructuralError("cells must be non-empty and listed in increasing contiguous order");
    }
    if (expected != 0) cuts.push_back(cell.begin);
    expected = cell.end;
  }
  if (expected != bins) throw StructuralError("cells do not cover every bin");
  return Partition(bins, std::move(cuts));
}

Partition Partition::identity(std::size_t bins) {
  std::vector<std::size_t> cuts;
  for (std::size_t i = 1; i < bins; ++i) cuts.push_back(i);
  return Partition(bins, std::move(cuts));
}

Partition Partition::single(std::size_t bins) { return Partition(bins, {}); }

Cell Partition::cell(std::size_t k) const {
  if (k >= size()) throw std::out_of_range("partition cell index");
  const std::size_t begin = k == 0 ? 0 : cuts_[k - 1];
  const std::size_t end = k == cuts_.size() ? bins_ : cuts_[k];
  return {begin, end};
}

std::vector<Cell> Partition::cells() const {
  std::vector<Cell> out;
  out.reserve(size());
  for (std::size_t k = 0; k < size(); ++k) out.push_back(cell(k));
  return out;
}

std::size_t Partition::cell_of(std::size_t bin) const {
  if (bin >= bins_) throw std::out_of_range("bin index outside partition");
  return static_cast<std::size_t>(std::upper_bound(cuts_.begin(), cuts_.end(), bin) - cuts_.begin());
}

std::vector<std::size_t> Partition::cell_map() const {
  std::vector<std::size_t> map(bins_);
  std::size_t k = 0;
  for (std::size_t i = 0; i < bins_; ++i) {
    if (k < cuts_.size() && cuts_[k] == i) ++k;
    map[i] = k;
  }
  return map;
}

std::string Partition::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < size(); ++k) {
    const Cell c = cell(k);
    if (k) os << ',';
    os << '{';
    for (std::size_t i = c.begin; i < c.end; ++i) {
      if (i != c.begin) os << ',';
      os << i + 1;
    }
    os << '}';
  }
  os << '}';
  return os.str();
}

CellStats merge_bins(const BinnedClassifier& c, std::span<const std::size_t> bins) {
  const std::size_t g = c.group_count();
  CellStats out;
  out.group_mass.assign(g, 0.0);
  out.group_score.assign(g, std::nullopt);
  std::vector<double> weighted(g, 0.0);
  std::vector<bool> any(g, false);
  double weighted_score = 0.0;
  for (std::size_t j : bins) {
    out.mass += c.mass(j);
    weighted_score += c.mass(j) * c.score(j);
    for (std::size_t z = 0; z < g; ++z) {
      if (!c.present(j, z)) continue;
      const double w = c.joint_mass(j, z);
      out.group_mass[z] += w;
      weighted[z] += w * c.group_score(j, z);
      any[z] = true;
    }
  }
  out.score = out.mass > 0.0 ? weighted_score / out.mass : 0.0;
  for (std::size_t z = 0; z < g; ++z) {
    if (any[z] && out.group_mass[z] > 0.0) out.group_score[z] = weighted[z] / out.group_mass[z];
  }
  return out;
}

CellStats merge_cell(const BinnedClassifier& c, Cell cell) {
  std::vector<std::size_t> bins;
  for (std::size_t i = cell.begin; i < cell.end; ++i) bins.push_back(i);
  return merge_bins(c, bins);
}

std::vector<CellStats> merged_scores(const BinnedClassifier& c, const Partition& p) {
  if (p.bins() != c.size()) throw StructuralError("partition and classifier bin counts differ");
  std::vector<CellStats> out;
  out.reserve(p.size());
  for (const Cell& cell : p.cells()) out.push_back(merge_cell(c, cell));
  return out;
}

PrefixSums::PrefixSums(const BinnedClassifier& c)
    : bins_(c.size()),
      groups_(c.group_count()),
      mass_(bins_ + 1, 0.0),
      weighted_score_(bins_ + 1, 0.0),
      group_mass_(bins_ + 1, groups_, 0.0),
      group_weighted_(bins_ + 1, groups_, 0.0),
      present_count_(groups_, std::vector<std::size_t>(bins_ + 1, 0)) {
  for (std::size_t i = 0; i < bins_; ++i) {
    mass_[i + 1] = mass_[i] + c.mass(i);
    weighted_score_[i + 1] = weighted_score_[i] + c.mass(i) * c.score(i);
    for (std::size_t z = 0; z < groups_; ++z) {
      const bool here = c.present(i, z);
      const double w = here ? c.joint_mass(i, z) : 0.0;
      group_mass_(i + 1, z) = group_mass_(i, z) + w;
      group_weighted_(i + 1, z) = group_weighted_(i, z) + (here ? w * c.group_score(i, z) : 0.0);
      present_count_[z][i + 1] = present_count_[z][i] + (here ? 1 : 0);
    }
  }
}

double PrefixSums::mass(Cell cell) const { return mass_[cell.end] - mass_[cell.begin]; }

double PrefixSums::score(Cell cell) const {
  return (weighted_score_[cell.end] - weighted_score_[cell.begin]) / mass(cell);
}

bool PrefixSums::present(Cell cell, std::size_t z) const {
  return present_count_[z][cell.end] > present_count_[z][cell.begin];
}

std::optional<double> PrefixSums::group_score(Cell cell, std::size_t z) const {
  if (!present(cell, z)) return std::nullopt;
  const double m = group_mass_(cell.end, z) - group_mass_(cell.begin, z);
  return (group_weighted_(cell.end, z) - group_weighted_(cell.begin, z)) / m;
}

BinnedClassifier induce(const BinnedClassifier& c, const Partition& p) {
  const auto stats = merged_scores(c, p);
  const std::size_t g = c.group_count();
  std::vector<double> scores;
  std::vector<double> masses;
  Matrix shares(stats.size(), g);
  Matrix group_scores(stats.size(), g, std::nan(""));
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const Cell cell = p.cell(k);
    scores.push_back(stats[k].score);
    masses.push_back(stats[k].mass);
    for (std::size_t z = 0; z < g; ++z) {
      // The share counts every bin with positive share, including suppressed estimates.
      double joint = 0.0;
      for (std::size_t i = cell.begin; i < cell.end; ++i) joint += c.joint_mass(i, z);
      shares(k, z) = joint / stats[k].mass;
      if (stats[k].group_score[z]) group_scores(k, z) = *stats[k].group_score[z];
    }
  }
  return BinnedClassifier(c.groups(), std::move(scores), std::move(masses), std::move(shares),
                          std::move(group_scores));
}

Slack uniform_slack(std::size_t groups, double tau) { return Slack(groups, tau); }

Slack resolve_slack(const Slack& slack, std::size_t groups) {
  if (slack.empty()) return Slack(groups, 0.0);
  if (slack.size() != groups) throw std::invalid_argument("slack vector length must equal group count");
  for (double t : slack) {
    if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("slack values must be finite and >= 0");
  }
  return slack;
}

MonotonicityReport check_within_group_monotone(std::span<const CellStats> cells, const Slack& slack,
                                               const Tolerances& tol) {
  MonotonicityReport out;
  if (cells.empty()) return out;
  const std::size_t g = cells.front().group_score.size();
  const Slack tau = resolve_slack(slack, g);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!definitely_less(cells[i].score, cells[j].score, tol)) continue;
      for (std::size_t z = 0; z < g; ++z) {
        const auto& lo = cells[i].group_score[z];
        const auto& hi = cells[j].group_score[z];
        if (lo && hi && exceeds(*lo, *hi, tau[z], tol)) out.violations.push_back({i, j, z});
      }
    }
  }
  return out;
}

MonotonicityReport is_within_group_monotone(const BinnedClassifier& c, const Partition& p,
                                            const Slack& slack, const Tolerances& tol) {
  const auto stats = merged_scores(c, p);
  return check_within_group_monotone(stats, resolve_slack(slack, c.group_count()), tol);
}

bool dominates(const Partition& finer, const Partition& coarser) {
  if (finer.bins() != coarser.bins()) throw StructuralError("partitions cover different bin counts");
  const auto f = finer.cuts();
  const auto c = coarser.cuts();
  return std::includes(f.begin(), f.end(), c.begin(), c.end());
}

void CandidatePool::check(std::size_t bins, std::size_t groups) const {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i].bin >= bins || members_[i].group >= groups) {
      throw StructuralError("candidate " + std::to_string(i) + " has bin or group out of range");
    }
  }
}

ScoreView ScoreView::of(const BinnedClassifier& c) {
  return of(c, Partition::identity(c.size()));
}

ScoreView ScoreView::of(const BinnedClassifier& c, const Partition& p) {
  const auto stats = merged_scores(c, p);
  ScoreView v;
  v.level_ = p.cell_map();
  v.levels_ = p.size();
  v.score_.resize(c.size());
  v.group_score_ = Matrix(c.size(), c.group_count(), std::nan(""));
  for (std::size_t i = 0; i < c.size(); ++i) {
    const CellStats& cell = stats[v.level_[i]];
    v.score_[i] = cell.score;
    for (std::size_t z = 0; z < c.group_count(); ++z) {
      if (cell.group_score[z]) v.group_score_(i, z) = *cell.group_score[z];
    }
  }
  return v;
}

std::optional<double> ScoreView::group_score(std::size_t bin, std::size_t z) const {
  const double s = group_score_(bin, z);
  if (std::isnan(s)) return std::nullopt;
  return s;
}

}  // namespace wgm
