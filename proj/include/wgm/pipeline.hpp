#pragma once

// End-to-end analysis: records -> uniform-mass binned classifier -> partitions
// -> unfairness metrics and shortlist simulations, emitted as a versioned JSON
// report and tidy plot-data rows.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wgm/binning.hpp"
#include "wgm/csv.hpp"
#include "wgm/model.hpp"

namespace wgm {

inline constexpr int kReportSchemaVersion = 1;

enum class Algorithm { pav, optimal, calibration };

std::string to_string(Algorithm a);
/// Accepts "pav", "optimal", "calibration" and "all" (comma separated).
std::vector<Algorithm> parse_algorithms(const std::string& text);

// Seed stages derived from the master seed with derive_seed().
enum class SeedStage : std::uint64_t { split = 1, generator = 2, pools = 3 };

struct RunConfig {
  /// CSV input; the latent synthetic family is used when absent.
  std::optional<std::filesystem::path> input;
  CsvSchema schema;
  std::size_t generator_records = 100000;

  std::size_t bins = 15;
  std::vector<Algorithm> algorithms{Algorithm::pav, Algorithm::optimal, Algorithm::calibration};
  /// Empty: zero slack. One value: the same slack for every group. Otherwise one per group.
  std::vector<double> tau;
  /// Fixed epsilon for the calibration partition; nullopt searches for the smallest one.
  std::optional<double> epsilon;
  double bisect_tol = 1e-4;

  /// Share of records used to estimate the classifier; the rest feeds the pools.
  double calibration_fraction = 0.5;
  std::size_t pools = 100;
  std::size_t pool_size = 100;
  double k = 5.0;
  std::size_t min_group_count = 1;
  std::uint64_t seed = 0;
  Tolerances tol;

  /// Throws ConfigError for out-of-range parameters.
  void check() const;
};

/// Records for the configured source: the CSV file or the synthetic family.
std::vector<RawRecord> load_records(const RunConfig& config);

/// Runs the full analysis on the given records. Errors carry the failing stage.
nlohmann::ordered_json run_pipeline(const RunConfig& config, const std::vector<RawRecord>& records);
nlohmann::ordered_json run_pipeline(const RunConfig& config);

/// Tidy rows (quantity, algorithm, n, seed, group, pool, value) derived solely from a report.
void write_plot_csv(std::ostream& out, const std::vector<nlohmann::ordered_json>& reports);

/// Writes `report.json` and `plot_data.csv` under `dir`. Throws IoError.
void write_run_outputs(const std::filesystem::path& dir, const nlohmann::ordered_json& report);

std::string dump_report(const nlohmann::ordered_json& report);

}  // namespace wgm
