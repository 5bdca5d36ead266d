#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cexdex {

/// Row-major string table read from CSV (header row required) or JSONL
/// (one object per line, keys become columns in first-seen order).
class Table {
 public:
  static Table read(const std::filesystem::path& path);
  static Table parse_csv(std::string_view text, std::string source);
  static Table parse_jsonl(std::string_view text, std::string source);

  const std::string& source() const noexcept { return source_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  std::optional<std::size_t> find(std::string_view column) const;
  /// Throws LoadError(MissingColumn).
  std::size_t require(std::string_view column) const;

  const std::string& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }

 private:
  std::string source_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Reads an entire file; throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Minimal RFC 4180 writer. Fields containing separators, quotes or line
/// breaks are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(std::initializer_list<std::string_view> fields);
  void row(const std::vector<std::string>& fields);
  std::size_t rows_written() const noexcept { return rows_; }

 private:
  void field(std::string_view f, bool first);
  std::ostream& out_;
  std::size_t rows_ = 0;
};

}  // namespace cexdex
