#include "cexdex/input_writer.hpp"

#include "cexdex/errors.hpp"
#include "cexdex/table.hpp"

#include "json.hpp"

#include <fstream>

namespace cexdex::ingest {

namespace {

std::string b(bool v) { return v ? "true" : "false"; }

}  // namespace

void write_tokens(std::ostream& out, const TokenRegistry& registry) {
  CsvWriter w(out);
  w.row({"address", "symbol", "cex_listed", "is_major", "decimals", "cex_symbol"});
  for (const auto& [addr, info] : registry.entries()) {
    w.row({addr, info.symbol, b(info.cex_listed), b(info.is_major), std::to_string(info.decimals),
           info.cex_symbol});
  }
}

void write_transactions(std::ostream& out, std::span<const RawTransaction> txs) {
  CsvWriter w(out);
  w.row({"tx_hash", "block_number", "slot_time_ms", "searcher_contract", "pool_id", "dex", "token_in",
         "amount_in", "token_out", "amount_out", "log_index", "first_in_direction", "seen_in_mempool",
         "atomic_mev_flag", "liquidation_flag", "ofa_backrun_flag", "router_or_bot_flag",
         "erc721_transfer_count", "base_fee_eth", "priority_fee_eth", "coinbase_transfer_eth", "builder_label",
         "volume_usd"});
  for (const auto& tx : txs) {
    for (const auto& s : tx.swaps) {
      w.row({tx.tx_hash, std::to_string(tx.block_number), std::to_string(tx.slot_time_ms), tx.searcher_contract,
             s.pool_id, s.dex, s.token_in, format_decimal(s.amount_in), s.token_out, format_decimal(s.amount_out),
             std::to_string(s.log_index), b(s.first_in_direction), b(tx.seen_in_mempool), b(tx.atomic_mev_flag),
             b(tx.liquidation_flag), b(tx.ofa_backrun_flag), b(tx.router_or_bot_flag),
             std::to_string(tx.erc721_transfer_count), format_double(tx.base_fee_eth),
             format_double(tx.priority_fee_eth), format_double(tx.coinbase_transfer_eth), tx.builder_label,
             format_double(tx.volume_usd)});
    }
  }
}

void write_quotes(std::ostream& out, std::span<const Quote> quotes) {
  CsvWriter w(out);
  w.row({"symbol", "ts_ms", "bid", "ask"});
  for (const auto& q : quotes) {
    w.row({q.symbol, std::to_string(q.ts_ms), format_double(q.bid), format_double(q.ask)});
  }
}

void write_block_records(std::ostream& out, const std::map<std::int64_t, BlockRecord>& blocks) {
  CsvWriter w(out);
  w.row({"block_number", "builder_label", "coinbase_delta_eth", "bid_eth", "used_bid_adjustment",
         "adjustment_delta_eth", "slot_time_ms"});
  for (const auto& [number, r] : blocks) {
    w.row({std::to_string(number), r.builder_label, format_double(r.coinbase_delta_eth), format_double(r.bid_eth),
           b(r.used_bid_adjustment), format_double(r.adjustment_delta_eth), std::to_string(r.slot_time_ms)});
  }
}

std::string searcher_labels_json(const SearcherLabels& labels) {
  nlohmann::ordered_json doc;
  doc["labels"] = nlohmann::ordered_json::object();
  for (const auto& [label, addrs] : labels.labels) doc["labels"][label] = addrs;
  doc["integrated_with"] = nlohmann::ordered_json::object();
  for (const auto& [label, builder] : labels.integrated_with) doc["integrated_with"][label] = builder;
  return doc.dump(2) + "\n";
}

std::string config_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["grid_start_s"] = cfg.grid_start_s;
  doc["grid_end_s"] = cfg.grid_end_s;
  doc["grid_step_s"] = cfg.grid_step_s;
  doc["taker_fee_rate"] = cfg.taker_fee_rate;
  doc["exclusivity_threshold"] = cfg.exclusivity_threshold;
  doc["quote_staleness_ms"] = cfg.quote_staleness_ms;
  doc["pattern_flat_epsilon_bps"] = cfg.pattern_flat_epsilon_bps;
  doc["pattern_abrupt_drop_fraction"] = cfg.pattern_abrupt_drop_fraction;
  doc["rolling_window_days"] = cfg.rolling_window_days;
  doc["min_trades_for_confidence"] = cfg.min_trades_for_confidence;
  doc["refund_cutoff_ts_ms"] = cfg.refund_cutoff_ts_ms;
  doc["refund_rate_before"] = cfg.refund_rate_before;
  doc["refund_rate_after"] = cfg.refund_rate_after;
  return doc.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

}  // namespace cexdex::ingest
