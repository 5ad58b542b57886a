#pragma once

// CSV ingestion of (score, group, label) records.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wgm/binning.hpp"

namespace wgm {

struct CsvSchema {
  std::string score_column = "score";
  std::string group_column = "group";
  std::string label_column = "label";
};

/// Splits one CSV line; double quotes may wrap fields and "" escapes a quote.
std::vector<std::string> split_csv_line(const std::string& line);

/// Parses a headed CSV. Every malformed row is collected and reported together in an
/// IngestError (line numbers are 1-based and count the header). Row order is preserved.
std::vector<RawRecord> ingest(std::istream& in, const CsvSchema& schema = {});
/// Throws IoError when the file cannot be opened.
std::vector<RawRecord> ingest(const std::filesystem::path& path, const CsvSchema& schema = {});

void write_records(std::ostream& out, std::span<const RawRecord> records, const CsvSchema& schema = {});

}  // namespace wgm
