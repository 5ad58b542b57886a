#pragma once

// Core domain types: groups, the finite-range calibrated classifier, contiguous
// partitions of its bins and the merged (induced) classifier statistics.
//
// Bins and cells are 0-based everywhere in the API. Human-readable output
// (Partition::to_string, reports) uses 1-based bin numbers.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wgm {

struct Tolerances {
  /// Symmetric tolerance for every score comparison; "a < b" means b - a > cmp_eps.
  double cmp_eps = 1e-12;
  /// Tolerance for probability-sum checks.
  double mass_eps = 1e-9;

  /// Throws std::invalid_argument unless both fields are finite and non-negative.
  void check() const;
};

inline bool definitely_less(double a, double b, const Tolerances& tol) {
  return b - a > tol.cmp_eps;
}

/// True when lhs > rhs + slack beyond tolerance, i.e. a monotonicity violation.
inline bool exceeds(double lhs, double rhs, double slack, const Tolerances& tol) {
  return lhs > rhs + slack + tol.cmp_eps;
}

class GroupSet {
 public:
  explicit GroupSet(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t z) const { return labels_.at(z); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const;

  bool operator==(const GroupSet&) const = default;

 private:
  std::vector<std::string> labels_;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A calibrated classifier with finite range {a_1 < ... < a_n}.
//
// For bin i and group z:
//   score(i)          a_i       Pr(Y=1 | f(X)=a_i)
//   mass(i)           rho_i     Pr(f(X)=a_i)
//   share(i, z)       rho_z|i   Pr(Z=z | f(X)=a_i)
//   group_score(i, z) a_i,z     Pr(Y=1 | f(X)=a_i, Z=z)
//
// An entry (i, z) is present when share(i, z) > 0 and group_score(i, z) is
// finite. Absent entries take part in no monotonicity or calibration
// constraint. A NaN group score with a positive share marks an entry whose
// estimate was suppressed (e.g. below a minimum count).
class BinnedClassifier {
 public:
  /// Throws StructuralError on dimension mismatches or non-finite masses/scores.
  BinnedClassifier(GroupSet groups, std::vector<double> scores, std::vector<double> masses,
                   Matrix shares, Matrix group_scores);

  std::size_t size() const noexcept { return scores_.size(); }
  std::size_t group_count() const noexcept { return groups_.size(); }
  const GroupSet& groups() const noexcept { return groups_; }

  double score(std::size_t i) const { return scores_[i]; }
  double mass(std::size_t i) const { return masses_[i]; }
  double share(std::size_t i, std::size_t z) const { return shares_(i, z); }
  double group_score(std::size_t i, std::size_t z) const { return group_scores_(i, z); }
  bool present(std::size_t i, std::size_t z) const;
  /// rho_i * rho_z|i, the joint probability of bin i and group z.
  double joint_mass(std::size_t i, std::size_t z) const { return masses_[i] * shares_(i, z); }

  std::span<const double> scores() const noexcept { return scores_; }
  std::span<const double> masses() const noexcept { return masses_; }
  const Matrix& shares() const noexcept { return shares_; }
  const Matrix& group_scores() const noexcept { return group_scores_; }

  /// Pr(Z=z) = sum_i rho_i rho_z|i.
  double group_mass(std::size_t z) const;

 private:
  GroupSet groups_;
  std::vector<double> scores_;
  std::vector<double> masses_;
  Matrix shares_;
  Matrix group_scores_;
};

struct ValidationIssue {
  std::string invariant;
  std::optional<std::size_t> bin;
  std::optional<std::size_t> group;
  std::string message;
};

struct ValidationResult {
  std::vector<ValidationIssue> issues;
  bool ok() const noexcept { return issues.empty(); }
};

/// Checks every classifier invariant; all violations are reported, not just the first.
ValidationResult validate_classifier(const BinnedClassifier& c, const Tolerances& tol = {});

/// Half-open bin range [begin, end).
struct Cell {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - begin; }
  bool contains(std::size_t bin) const noexcept { return begin <= bin && bin < end; }
  bool operator==(const Cell&) const = default;
};

// Contiguous partition of {0..n-1}, stored as the start index of every cell
// after the first. Contiguity and coverage hold by construction.
class Partition {
 public:
  /// cuts: strictly increasing values in (0, n). Throws StructuralError otherwise.
  Partition(std::size_t bins, std::vector<std::size_t> cuts);
  /// Builds from consecutive cells; they must tile {0..n-1} in order.
  static Partition from_cells(std::size_t bins, std::span<const Cell> cells);
  static Partition identity(std::size_t bins);
  static Partition single(std::size_t bins);

  std::size_t bins() const noexcept { return bins_; }
  std::size_t size() const noexcept { return cuts_.size() + 1; }
  std::span<const std::size_t> cuts() const noexcept { return cuts_; }
  Cell cell(std::size_t k) const;
  std::vector<Cell> cells() const;
  /// Index of the cell holding `bin`.
  std::size_t cell_of(std::size_t bin) const;
  /// Bin -> cell index for every bin.
  std::vector<std::size_t> cell_map() const;

  /// e.g. "{{1},{2,3}}" with 1-based bins.
  std::string to_string() const;

  bool operator==(const Partition&) const = default;

 private:
  std::size_t bins_;
  std::vector<std::size_t> cuts_;
};

/// Statistics of the merged classifier on one cell.
struct CellStats {
  double mass = 0.0;   // sum_j rho_j
  double score = 0.0;  // a_A
  std::vector<double> group_mass;                  // sum over present j of rho_j rho_z|j
  std::vector<std::optional<double>> group_score;  // a_A,z; empty when no present entry
};

/// Merged statistics for an arbitrary (not necessarily contiguous) set of bins.
CellStats merge_bins(const BinnedClassifier& c, std::span<const std::size_t> bins);
CellStats merge_cell(const BinnedClassifier& c, Cell cell);
std::vector<CellStats> merged_scores(const BinnedClassifier& c, const Partition& p);

// O(1) merged-score queries over contiguous ranges via prefix sums of
// rho_j a_j, rho_j, rho_j rho_z|j and rho_j rho_z|j a_j,z.
class PrefixSums {
 public:
  explicit PrefixSums(const BinnedClassifier& c);

  std::size_t bins() const noexcept { return bins_; }
  std::size_t group_count() const noexcept { return groups_; }
  double mass(Cell cell) const;
  double score(Cell cell) const;
  bool present(Cell cell, std::size_t z) const;
  std::optional<double> group_score(Cell cell, std::size_t z) const;

 private:
  std::size_t bins_;
  std::size_t groups_;
  std::vector<double> mass_;
  std::vector<double> weighted_score_;
  Matrix group_mass_;
  Matrix group_weighted_;
  std::vector<std::vector<std::size_t>> present_count_;
};

/// The classifier f_B induced by a partition: one bin per cell.
BinnedClassifier induce(const BinnedClassifier& c, const Partition& p);

/// Per-group slack tau_z >= 0. An empty vector means zero slack for every group.
using Slack = std::vector<double>;
Slack uniform_slack(std::size_t groups, double tau);
/// Expands an empty slack to zeros and validates length and sign; throws std::invalid_argument.
Slack resolve_slack(const Slack& slack, std::size_t groups);

struct MonotonicityViolation {
  std::size_t lower_cell = 0;  // cell with the smaller merged score
  std::size_t upper_cell = 0;
  std::size_t group = 0;
  bool operator==(const MonotonicityViolation&) const = default;
};

struct MonotonicityReport {
  std::vector<MonotonicityViolation> violations;
  bool monotone() const noexcept { return violations.empty(); }
};

/// Exhaustive pairwise check over cells in any order: for a_Ai < a_Aj and z present in
/// both, a_Ai,z <= a_Aj,z + tau_z must hold.
MonotonicityReport check_within_group_monotone(std::span<const CellStats> cells, const Slack& slack,
                                               const Tolerances& tol = {});
MonotonicityReport is_within_group_monotone(const BinnedClassifier& c, const Partition& p,
                                            const Slack& slack = {}, const Tolerances& tol = {});

/// True when `finer` dominates `coarser`: every cell of `coarser` is a union of cells of
/// `finer` (the cut points of `coarser` are a subset of those of `finer`).
/// Throws StructuralError when the partitions cover different bin counts.
bool dominates(const Partition& finer, const Partition& coarser);

struct Candidate {
  std::size_t bin = 0;
  std::size_t group = 0;
  std::optional<bool> qualified;
};

class CandidatePool {
 public:
  CandidatePool() = default;
  explicit CandidatePool(std::vector<Candidate> members) : members_(std::move(members)) {}

  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const Candidate& operator[](std::size_t i) const { return members_[i]; }
  std::span<const Candidate> members() const noexcept { return members_; }

  /// Throws StructuralError when a bin or group index is out of range.
  void check(std::size_t bins, std::size_t groups) const;

 private:
  std::vector<Candidate> members_;
};

// Scores seen by a candidate in each original bin, either from the classifier
// itself or from the classifier induced by a partition.
class ScoreView {
 public:
  static ScoreView of(const BinnedClassifier& c);
  static ScoreView of(const BinnedClassifier& c, const Partition& p);

  std::size_t bins() const noexcept { return score_.size(); }
  std::size_t group_count() const noexcept { return group_score_.cols(); }
  /// Index of the level set (cell) holding the bin.
  std::size_t level(std::size_t bin) const { return level_[bin]; }
  std::size_t levels() const noexcept { return levels_; }
  double score(std::size_t bin) const { return score_[bin]; }
  std::optional<double> group_score(std::size_t bin, std::size_t z) const;

 private:
  std::vector<std::size_t> level_;
  std::size_t levels_ = 0;
  std::vector<double> score_;
  Matrix group_score_;  // NaN when absent
};

}  // namespace wgm
