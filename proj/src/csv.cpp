#include "wgm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>

#include "wgm/errors.hpp"

namespace wgm {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

}  // namespace

std::vector<RawRecord> ingest(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError({{1, "missing header row"}});
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  const auto score_col = column(schema.score_column);
  const auto group_col = column(schema.group_column);
  const auto label_col = column(schema.label_column);
  std::vector<RowError> errors;
  for (const auto& [col, name] : {std::pair{score_col, schema.score_column},
                                  std::pair{group_col, schema.group_column},
                                  std::pair{label_col, schema.label_column}}) {
    if (!col) errors.push_back({1, "missing column '" + name + "'"});
  }
  if (!errors.empty()) throw IngestError(std::move(errors));

  std::vector<RawRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const std::size_t needed = std::max({*score_col, *group_col, *label_col}) + 1;
    if (fields.size() < needed) {
      errors.push_back({line_no, "expected at least " + std::to_string(needed) + " fields"});
      continue;
    }
    const std::string score_text = trim(fields[*score_col]);
    const auto score = parse_double(score_text);
    if (!score || !std::isfinite(*score)) {
      errors.push_back({line_no, "non-numeric score '" + score_text + "'"});
      continue;
    }
    if (*score < 0.0 || *score > 1.0) {
      errors.push_back({line_no, "score " + score_text + " outside [0,1]"});
      continue;
    }
    const std::string label = trim(fields[*label_col]);
    if (label != "0" && label != "1") {
      errors.push_back({line_no, "label '" + label + "' is not 0 or 1"});
      continue;
    }
    const std::string group = trim(fields[*group_col]);
    if (group.empty()) {
      errors.push_back({line_no, "empty group"});
      continue;
    }
    records.push_back({*score, group, label == "1"});
  }
  if (!errors.empty()) throw IngestError(std::move(errors));
  return records;
}

std::vector<RawRecord> ingest(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return ingest(in, schema);
}

void write_records(std::ostream& out, std::span<const RawRecord> records, const CsvSchema& schema) {
  out << schema.score_column << ',' << schema.group_column << ',' << schema.label_column << '\n';
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.score << ',';
    if (r.group.find_first_of(",\"") != std::string::npos) {
      out << '"';
      for (char ch : r.group) out << (ch == '"' ? "\"\"" : std::string(1, ch));
      out << '"';
    } else {
      out << r.group;
    }
    out << ',' << (r.qualified ? 1 : 0) << '\n';
  }
}

}  // namespace wgm
