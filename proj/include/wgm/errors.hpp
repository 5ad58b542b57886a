#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs whose shapes do not line up (matrix sizes, index sets).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Generator or run configuration that cannot be honoured.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive oracles refuse instances above their size guard.
class GuardError : public Error {
 public:
  using Error::Error;
};

/// Files that cannot be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An error raised inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

class IngestError : public Error {
 public:
  explicit IngestError(std::vector<RowError> rows);

  const std::vector<RowError>& rows() const noexcept { return rows_; }

 private:
  std::vector<RowError> rows_;
};

}  // namespace wgm
