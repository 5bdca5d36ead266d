#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cexdex {

enum class LoadErrorKind {
  MissingColumn,
  MalformedRow,
  NonMonotonicSlotTime,
  CrossedQuote,
  DuplicateTimestamp,
  DuplicateBlock,
  DuplicateAddress,
  InvalidConfig,
};

std::string_view to_string(LoadErrorKind kind);

/// Validation failure while ingesting an input file. `row` is the 1-based
/// data row (header excluded); 0 when the error is not tied to a row.
class LoadError : public std::runtime_error {
 public:
  LoadError(LoadErrorKind kind, std::string source, std::size_t row, const std::string& detail);

  LoadErrorKind kind() const noexcept { return kind_; }
  const std::string& source() const noexcept { return source_; }
  std::size_t row() const noexcept { return row_; }

 private:
  LoadErrorKind kind_;
  std::string source_;
  std::size_t row_;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  IoError(std::filesystem::path path, const std::string& detail);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace cexdex
