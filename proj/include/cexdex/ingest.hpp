#pragma once

#include "cexdex/quotes.hpp"
#include "cexdex/table.hpp"
#include "cexdex/types.hpp"

#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

// Loaders for the input datasets. Every loader validates per-type invariants
// and throws LoadError on the first violation; files that cannot be opened
// raise IoError. Loading is single-threaded and deterministic.
namespace cexdex::ingest {

TokenRegistry parse_tokens(const Table& table);
TokenRegistry load_tokens(const std::filesystem::path& path);

/// One row per swap; transaction-level columns repeat and must agree.
/// Result is sorted by (block_number, tx_hash), swaps by log_index.
std::vector<RawTransaction> parse_transactions(const Table& table);
std::vector<RawTransaction> load_transactions(const std::filesystem::path& path);

QuoteStore parse_quotes(const Table& table);
QuoteStore load_quotes(const std::filesystem::path& path);

std::map<std::int64_t, BlockRecord> parse_block_records(const Table& table);
std::map<std::int64_t, BlockRecord> load_block_records(const std::filesystem::path& path);

SearcherLabels parse_searcher_labels(std::string_view json_text, const std::string& source);
SearcherLabels load_searcher_labels(const std::filesystem::path& path);

/// Keys must be PipelineConfig field names; absent keys keep defaults.
PipelineConfig parse_config(std::string_view json_text, const std::string& source);
PipelineConfig load_config(const std::filesystem::path& path);

/// Accepts true/false/1/0 (case-insensitive); throws std::invalid_argument.
bool parse_bool(std::string_view text);

/// Lowercases and checks for a 0x-prefixed hex string.
Address normalize_address(std::string_view text);

}  // namespace cexdex::ingest
