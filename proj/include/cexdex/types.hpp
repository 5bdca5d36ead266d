#pragma once

#include "cexdex/decimal.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cexdex {

/// Lowercase 0x-prefixed hex contract address.
using Address = std::string;

/// Milliseconds since the Unix epoch, UTC.
using TimestampMs = std::int64_t;

struct TokenInfo {
  std::string symbol;
  bool cex_listed = false;
  bool is_major = false;
  int decimals = 18;
  /// Symbol the token trades under on the CEX (WETH quotes as ETH).
  std::string cex_symbol;
};

/// Large-cap assets and major stablecoins.
const std::set<std::string>& default_major_symbols();

/// Wrapped tokens quote under their unwrapped symbol.
std::string default_cex_symbol(const std::string& symbol);

class TokenRegistry {
 public:
  /// Throws std::invalid_argument when `info.is_major && !info.cex_listed` or the
  /// address is already present.
  void add(Address address, TokenInfo info);

  const TokenInfo* find(const Address& address) const;
  bool contains(const Address& address) const { return find(address) != nullptr; }
  const std::map<Address, TokenInfo>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<Address, TokenInfo> entries_;
};

struct SwapEvent {
  std::string pool_id;
  std::string dex;
  Address token_in;
  Decimal amount_in;
  Address token_out;
  Decimal amount_out;
  std::int64_t log_index = 0;
  bool first_in_direction = false;
};

/// One on-chain transaction candidate. Heuristic inputs that depend on
/// third-party datasets (mempool visibility, MEV classification, router
/// labels) arrive precomputed as flags.
struct RawTransaction {
  std::string tx_hash;
  std::int64_t block_number = 0;
  TimestampMs slot_time_ms = 0;
  Address searcher_contract;
  std::vector<SwapEvent> swaps;
  bool seen_in_mempool = false;
  bool atomic_mev_flag = false;
  bool liquidation_flag = false;
  bool ofa_backrun_flag = false;
  bool router_or_bot_flag = false;
  std::int64_t erc721_transfer_count = 0;
  double base_fee_eth = 0.0;
  double priority_fee_eth = 0.0;
  double coinbase_transfer_eth = 0.0;
  std::string builder_label;
  double volume_usd = 0.0;
};

struct Quote {
  std::string symbol;
  TimestampMs ts_ms = 0;
  double bid = 0.0;
  double ask = 0.0;
};

struct BlockRecord {
  std::int64_t block_number = 0;
  std::string builder_label;
  double coinbase_delta_eth = 0.0;
  double bid_eth = 0.0;
  bool used_bid_adjustment = false;
  double adjustment_delta_eth = 0.0;
  TimestampMs slot_time_ms = 0;
};

/// Searcher label -> contract addresses, plus the optional vertical
/// integration map (searcher label -> builder label).
struct SearcherLabels {
  std::map<std::string, std::vector<Address>> labels;
  std::map<std::string, std::string> integrated_with;

  /// Reverse index; empty optional for unlabeled contracts.
  std::optional<std::string> label_of(const Address& address) const;
  /// Searcher labels integrated with `builder`, in label order.
  std::vector<std::string> integrated_searchers_of(const std::string& builder) const;

  void build_index();

 private:
  std::map<Address, std::string> by_address_;
};

struct PipelineConfig {
  double grid_start_s = -1.0;
  double grid_end_s = 10.0;
  double grid_step_s = 0.5;
  double taker_fee_rate = 0.0001725;
  double exclusivity_threshold = 0.5;
  std::int64_t quote_staleness_ms = 5000;
  double pattern_flat_epsilon_bps = 1.0;
  double pattern_abrupt_drop_fraction = 0.5;
  int rolling_window_days = 30;
  int min_trades_for_confidence = 100;
  TimestampMs refund_cutoff_ts_ms = 1709614800000;  // 2024-03-05T05:00:00Z
  double refund_rate_before = 1.0;
  double refund_rate_after = 0.5;

  /// Throws LoadError(InvalidConfig).
  void validate() const;
};

/// A detected CEX-DEX arbitrage: the DEX leg bought `amount_bought` of
/// `token_bought` and sold `amount_sold` of `token_sold`.
struct ArbTrade {
  std::string tx_hash;
  std::int64_t block_number = 0;
  std::string searcher_label;
  Address searcher_contract;
  std::string builder_label;
  TimestampMs slot_time_ms = 0;
  Address token_bought;
  Decimal amount_bought;
  Address token_sold;
  Decimal amount_sold;
  double volume_usd = 0.0;
  double base_fee_eth = 0.0;
  /// Priority fee plus direct coinbase transfer.
  double builder_tip_eth = 0.0;
};

}  // namespace cexdex
