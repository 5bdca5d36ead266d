#include "cexdex/table.hpp"

#include "cexdex/decimal.hpp"
#include "cexdex/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace cexdex {

std::string_view to_string(LoadErrorKind kind) {
  switch (kind) {
    case LoadErrorKind::MissingColumn: return "MissingColumn";
    case LoadErrorKind::MalformedRow: return "MalformedRow";
    case LoadErrorKind::NonMonotonicSlotTime: return "NonMonotonicSlotTime";
    case LoadErrorKind::CrossedQuote: return "CrossedQuote";
    case LoadErrorKind::DuplicateTimestamp: return "DuplicateTimestamp";
    case LoadErrorKind::DuplicateBlock: return "DuplicateBlock";
    case LoadErrorKind::DuplicateAddress: return "DuplicateAddress";
    case LoadErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

namespace {

std::string describe(LoadErrorKind kind, const std::string& source, std::size_t row,
                     const std::string& detail) {
  std::string msg(to_string(kind));
  if (row > 0) msg += "(" + std::to_string(row) + ")";
  if (!source.empty()) msg += " in " + source;
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

LoadError::LoadError(LoadErrorKind kind, std::string source, std::size_t row,
                     const std::string& detail)
    : std::runtime_error(describe(kind, source, row, detail)),
      kind_(kind),
      source_(std::move(source)),
      row_(row) {}

IoError::IoError(std::filesystem::path path, const std::string& detail)
    : std::runtime_error(path.string() + ": " + detail), path_(std::move(path)) {}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return ss.str();
}

Table Table::read(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::string source = path.filename().string();
  if (path.extension() == ".jsonl") return parse_jsonl(text, std::move(source));
  return parse_csv(text, std::move(source));
}

namespace {

// Splits CSV text into records. Quoted fields may contain separators,
// doubled quotes and line breaks.
std::vector<std::vector<std::string>> split_csv(std::string_view text, const std::string& source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw LoadError(LoadErrorKind::MalformedRow, source, 0,
                          "stray quote on line " + std::to_string(line));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw LoadError(LoadErrorKind::MalformedRow, source, 0, "unterminated quote");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

}  // namespace

Table Table::parse_csv(std::string_view text, std::string source) {
  Table t;
  t.source_ = std::move(source);
  auto records = split_csv(text, t.source_);
  if (records.empty()) {
    throw LoadError(LoadErrorKind::MissingColumn, t.source_, 0, "file has no header row");
  }
  t.columns_ = std::move(records.front());
  for (auto& c : t.columns_) {
    auto b = c.find_first_not_of(" \t");
    auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  t.rows_.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.columns_.size()) {
      throw LoadError(LoadErrorKind::MalformedRow, t.source_, r,
                      "expected " + std::to_string(t.columns_.size()) + " fields, got " +
                          std::to_string(records[r].size()));
    }
    t.rows_.push_back(std::move(records[r]));
  }
  return t;
}

Table Table::parse_jsonl(std::string_view text, std::string source) {
  Table t;
  t.source_ = std::move(source);
  std::vector<nlohmann::ordered_json> objects;
  std::size_t start = 0;
  std::size_t row = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    ++row;
    auto obj = nlohmann::ordered_json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw LoadError(LoadErrorKind::MalformedRow, t.source_, row, "not a JSON object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!t.find(it.key())) t.columns_.push_back(it.key());
    }
    objects.push_back(std::move(obj));
  }
  for (std::size_t r = 0; r < objects.size(); ++r) {
    std::vector<std::string> cells(t.columns_.size());
    for (std::size_t c = 0; c < t.columns_.size(); ++c) {
      auto it = objects[r].find(t.columns_[c]);
      if (it == objects[r].end() || it->is_null()) continue;
      if (it->is_string()) {
        cells[c] = it->get<std::string>();
      } else if (it->is_boolean()) {
        cells[c] = it->get<bool>() ? "true" : "false";
      } else if (it->is_number_float()) {
        cells[c] = format_double(it->get<double>());
      } else if (it->is_number()) {
        cells[c] = it->dump();
      } else {
        throw LoadError(LoadErrorKind::MalformedRow, t.source_, r + 1,
                        "field '" + t.columns_[c] + "' is not a scalar");
      }
    }
    t.rows_.push_back(std::move(cells));
  }
  return t;
}

std::optional<std::size_t> Table::find(std::string_view column) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == column) return i;
  }
  return std::nullopt;
}

std::size_t Table::require(std::string_view column) const {
  if (auto idx = find(column)) return *idx;
  throw LoadError(LoadErrorKind::MissingColumn, source_, 0, std::string(column));
}

void CsvWriter::field(std::string_view f, bool first) {
  if (!first) out_ << ',';
  if (f.find_first_of(",\"\n\r") == std::string_view::npos) {
    out_ << f;
    return;
  }
  out_ << '"';
  for (char c : f) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
}

void CsvWriter::row(std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    field(f, first);
    first = false;
  }
  out_ << '\n';
  ++rows_;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  bool first = true;
  for (const auto& f : fields) {
    field(f, first);
    first = false;
  }
  out_ << '\n';
  ++rows_;
}

}  // namespace cexdex
