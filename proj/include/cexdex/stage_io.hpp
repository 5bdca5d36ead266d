#pragma once

#include "cexdex/builder.hpp"
#include "cexdex/detect.hpp"
#include "cexdex/estimate.hpp"
#include "cexdex/horizon.hpp"
#include "cexdex/markout.hpp"
#include "cexdex/table.hpp"

#include <ostream>
#include <span>
#include <vector>

// CSV formats of the stage outputs. Writers render doubles in shortest
// round-trip form and decimals without trailing zeros, so output bytes are a
// pure function of the values and a reader recovers every value exactly.
// Readers throw LoadError on schema or value problems.
namespace cexdex::io {

void write_detections(std::ostream& out, std::span<const ArbTrade> trades);
std::vector<ArbTrade> parse_detections(const Table& table);

void write_verdicts(std::ostream& out, std::span<const detect::DetectionVerdict> verdicts);

/// Long format: one row per (trade, offset). Excluded curves keep their rows
/// with whatever samples were priced.
void write_markouts(std::ostream& out, std::span<const markout::MarkoutCurve> curves,
                    const markout::MarkoutGrid& grid);
/// Curves in file order; the grid offsets of every curve must match `grid`.
std::vector<markout::MarkoutCurve> parse_markouts(const Table& table, const markout::MarkoutGrid& grid);

void write_profiles(std::ostream& out, std::span<const horizon::SearcherProfile> profiles);
std::vector<horizon::SearcherProfile> parse_profiles(const Table& table);

void write_median_curves(std::ostream& out, std::span<const horizon::MedianCurve> curves,
                         const markout::MarkoutGrid& grid);

void write_economics(std::ostream& out, std::span<const estimate::TradeEconomics> economics);
std::vector<estimate::TradeEconomics> parse_economics(const Table& table);

void write_summary(std::ostream& out, std::span<const estimate::SearcherSummary> summaries);

void write_ev_series(std::ostream& out, const std::map<std::string, std::vector<estimate::EvBucket>>& daily,
                     const std::map<std::string, std::vector<estimate::EvBucket>>& weekly);

void write_builder_blocks(std::ostream& out, std::span<const builder::BuilderBlockEconomics> blocks);
std::vector<builder::BuilderBlockEconomics> parse_builder_blocks(const Table& table);

struct BuilderSummaryRow {
  builder::BuilderSummary summary;
  std::size_t unpriced_blocks = 0;
};

void write_builder_summary(std::ostream& out, std::span<const BuilderSummaryRow> rows);

/// Empty string for an absent value.
std::string opt_str(const std::optional<double>& v);

}  // namespace cexdex::io
