#pragma once

#include "cexdex/quotes.hpp"
#include "cexdex/types.hpp"

#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

// Writers for the input file formats, the inverse of the loaders in
// ingest.hpp. Numbers use the shortest round-trip rendering, so a
// write/load cycle reproduces every value bit for bit.
namespace cexdex::ingest {

void write_tokens(std::ostream& out, const TokenRegistry& registry);
void write_transactions(std::ostream& out, std::span<const RawTransaction> txs);
void write_quotes(std::ostream& out, std::span<const Quote> quotes);
void write_block_records(std::ostream& out, const std::map<std::int64_t, BlockRecord>& blocks);

std::string searcher_labels_json(const SearcherLabels& labels);
std::string config_json(const PipelineConfig& cfg);

/// Writes `text` to `path`, replacing any existing file. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cexdex::ingest
