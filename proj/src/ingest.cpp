#include "cexdex/ingest.hpp"

#include "cexdex/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <set>
#include <unordered_map>

namespace cexdex::ingest {

namespace {

using json = nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::int64_t parse_int(std::string_view text) {
  std::string_view s = text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  return v;
}

// Row-scoped accessor that turns parse failures into MalformedRow(row).
class RowReader {
 public:
  RowReader(const Table& t, std::size_t row) : t_(t), row_(row) {}

  std::size_t index() const { return row_ + 1; }

  [[noreturn]] void fail(const std::string& detail) const {
    throw LoadError(LoadErrorKind::MalformedRow, t_.source(), index(), detail);
  }

  const std::string& str(std::size_t col) const { return t_.at(row_, col); }

  template <typename F>
  auto parse(std::size_t col, F&& f) const {
    try {
      return f(t_.at(row_, col));
    } catch (const std::invalid_argument& e) {
      fail(t_.columns()[col] + ": " + e.what());
    }
  }

  std::int64_t integer(std::size_t col) const {
    return parse(col, [](const std::string& s) { return parse_int(s); });
  }
  double number(std::size_t col) const {
    return parse(col, [](const std::string& s) { return parse_double(s); });
  }
  Decimal decimal(std::size_t col) const {
    return parse(col, [](const std::string& s) { return parse_decimal(s); });
  }
  bool boolean(std::size_t col) const {
    return parse(col, [](const std::string& s) { return parse_bool(s); });
  }
  Address address(std::size_t col) const {
    return parse(col, [](const std::string& s) { return normalize_address(s); });
  }

 private:
  const Table& t_;
  std::size_t row_;
};

}  // namespace

bool parse_bool(std::string_view text) {
  std::string s = lower(text);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("not a boolean: '" + std::string(text) + "'");
}

Address normalize_address(std::string_view text) {
  std::string s = lower(text);
  bool ok = s.size() > 2 && s[0] == '0' && s[1] == 'x' &&
            std::all_of(s.begin() + 2, s.end(), [](unsigned char c) { return std::isxdigit(c); });
  if (!ok) throw std::invalid_argument("not a hex address: '" + std::string(text) + "'");
  return s;
}

TokenRegistry parse_tokens(const Table& t) {
  const auto c_addr = t.require("address");
  const auto c_sym = t.require("symbol");
  const auto c_listed = t.require("cex_listed");
  const auto c_major = t.find("is_major");
  const auto c_dec = t.require("decimals");
  const auto c_cex = t.find("cex_symbol");

  TokenRegistry reg;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    RowReader row(t, r);
    Address addr = row.address(c_addr);
    TokenInfo info;
    info.symbol = row.str(c_sym);
    if (info.symbol.empty()) row.fail("empty symbol");
    info.cex_listed = row.boolean(c_listed);
    info.is_major = c_major ? row.boolean(*c_major)
                            : info.cex_listed && default_major_symbols().count(info.symbol) > 0;
    info.decimals = static_cast<int>(row.integer(c_dec));
    if (info.decimals < 0 || info.decimals > 77) row.fail("decimals out of range");
    if (c_cex && !row.str(*c_cex).empty()) info.cex_symbol = row.str(*c_cex);
    if (info.is_major && !info.cex_listed) row.fail("is_major requires cex_listed");
    if (reg.contains(addr)) {
      throw LoadError(LoadErrorKind::DuplicateAddress, t.source(), row.index(), addr);
    }
    reg.add(std::move(addr), std::move(info));
  }
  return reg;
}

TokenRegistry load_tokens(const std::filesystem::path& path) {
  return parse_tokens(Table::read(path));
}

std::vector<RawTransaction> parse_transactions(const Table& t) {
  const auto c_hash = t.require("tx_hash");
  const auto c_block = t.require("block_number");
  const auto c_slot = t.require("slot_time_ms");
  const auto c_searcher = t.require("searcher_contract");
  const auto c_pool = t.require("pool_id");
  const auto c_dex = t.require("dex");
  const auto c_tin = t.require("token_in");
  const auto c_ain = t.require("amount_in");
  const auto c_tout = t.require("token_out");
  const auto c_aout = t.require("amount_out");
  const auto c_log = t.require("log_index");
  const auto c_first = t.require("first_in_direction");
  const auto c_mempool = t.require("seen_in_mempool");
  const auto c_atomic = t.require("atomic_mev_flag");
  const auto c_liq = t.require("liquidation_flag");
  const auto c_ofa = t.require("ofa_backrun_flag");
  const auto c_router = t.require("router_or_bot_flag");
  const auto c_nft = t.require("erc721_transfer_count");
  const auto c_base = t.require("base_fee_eth");
  const auto c_prio = t.require("priority_fee_eth");
  const auto c_coinbase = t.require("coinbase_transfer_eth");
  const auto c_builder = t.require("builder_label");
  const auto c_volume = t.require("volume_usd");

  struct Pending {
    RawTransaction tx;
    std::size_t first_row = 0;
    std::set<std::int64_t> log_indices;
  };
  std::vector<Pending> txs;
  std::unordered_map<std::string, std::size_t> by_hash;

  for (std::size_t r = 0; r < t.rows(); ++r) {
    RowReader row(t, r);
    const std::string& hash = row.str(c_hash);
    if (hash.empty()) row.fail("empty tx_hash");

    RawTransaction head;
    head.tx_hash = hash;
    head.block_number = row.integer(c_block);
    head.slot_time_ms = row.integer(c_slot);
    head.searcher_contract = row.address(c_searcher);
    head.seen_in_mempool = row.boolean(c_mempool);
    head.atomic_mev_flag = row.boolean(c_atomic);
    head.liquidation_flag = row.boolean(c_liq);
    head.ofa_backrun_flag = row.boolean(c_ofa);
    head.router_or_bot_flag = row.boolean(c_router);
    head.erc721_transfer_count = row.integer(c_nft);
    head.base_fee_eth = row.number(c_base);
    head.priority_fee_eth = row.number(c_prio);
    head.coinbase_transfer_eth = row.number(c_coinbase);
    head.builder_label = row.str(c_builder);
    head.volume_usd = row.number(c_volume);

    if (head.erc721_transfer_count < 0) row.fail("erc721_transfer_count must be >= 0");
    if (head.base_fee_eth < 0 || head.priority_fee_eth < 0 || head.coinbase_transfer_eth < 0) {
      row.fail("fee fields must be >= 0");
    }
    if (head.volume_usd < 0) row.fail("volume_usd must be >= 0");

    SwapEvent swap;
    swap.pool_id = row.str(c_pool);
    swap.dex = row.str(c_dex);
    swap.token_in = row.address(c_tin);
    swap.amount_in = row.decimal(c_ain);
    swap.token_out = row.address(c_tout);
    swap.amount_out = row.decimal(c_aout);
    swap.log_index = row.integer(c_log);
    swap.first_in_direction = row.boolean(c_first);
    if (!(swap.amount_in > 0)) row.fail("amount_in must be positive");
    if (!(swap.amount_out > 0)) row.fail("amount_out must be positive");
    if (swap.token_in == swap.token_out) row.fail("token_in equals token_out");

    auto [it, inserted] = by_hash.emplace(hash, txs.size());
    if (inserted) {
      txs.push_back(Pending{std::move(head), row.index(), {}});
    } else {
      const RawTransaction& tx = txs[it->second].tx;
      bool same = tx.block_number == head.block_number && tx.slot_time_ms == head.slot_time_ms &&
                  tx.searcher_contract == head.searcher_contract &&
                  tx.seen_in_mempool == head.seen_in_mempool &&
                  tx.atomic_mev_flag == head.atomic_mev_flag &&
                  tx.liquidation_flag == head.liquidation_flag &&
                  tx.ofa_backrun_flag == head.ofa_backrun_flag &&
                  tx.router_or_bot_flag == head.router_or_bot_flag &&
                  tx.erc721_transfer_count == head.erc721_transfer_count &&
                  tx.base_fee_eth == head.base_fee_eth &&
                  tx.priority_fee_eth == head.priority_fee_eth &&
                  tx.coinbase_transfer_eth == head.coinbase_transfer_eth &&
                  tx.builder_label == head.builder_label && tx.volume_usd == head.volume_usd;
      if (!same) row.fail("transaction-level fields differ from earlier rows of " + hash);
    }
    Pending& p = txs[it->second];
    if (!p.log_indices.insert(swap.log_index).second) {
      row.fail("duplicate log_index " + std::to_string(swap.log_index) + " in " + hash);
    }
    p.tx.swaps.push_back(std::move(swap));
  }

  std::sort(txs.begin(), txs.end(), [](const Pending& a, const Pending& b) {
    if (a.tx.block_number != b.tx.block_number) return a.tx.block_number < b.tx.block_number;
    return a.tx.tx_hash < b.tx.tx_hash;
  });

  for (std::size_t i = 1; i < txs.size(); ++i) {
    const auto& prev = txs[i - 1].tx;
    const auto& cur = txs[i].tx;
    bool ok = cur.block_number == prev.block_number ? cur.slot_time_ms == prev.slot_time_ms
                                                    : cur.slot_time_ms > prev.slot_time_ms;
    if (!ok) {
      throw LoadError(LoadErrorKind::NonMonotonicSlotTime, t.source(), txs[i].first_row,
                      "block " + std::to_string(cur.block_number) + " slot_time_ms " +
                          std::to_string(cur.slot_time_ms));
    }
  }

  std::vector<RawTransaction> out;
  out.reserve(txs.size());
  for (auto& p : txs) {
    std::sort(p.tx.swaps.begin(), p.tx.swaps.end(),
              [](const SwapEvent& a, const SwapEvent& b) { return a.log_index < b.log_index; });
    out.push_back(std::move(p.tx));
  }
  return out;
}

std::vector<RawTransaction> load_transactions(const std::filesystem::path& path) {
  return parse_transactions(Table::read(path));
}

QuoteStore parse_quotes(const Table& t) {
  const auto c_sym = t.require("symbol");
  const auto c_ts = t.require("ts_ms");
  const auto c_bid = t.require("bid");
  const auto c_ask = t.require("ask");

  struct Row {
    TimestampMs ts;
    double bid;
    double ask;
    std::size_t index;
  };
  std::map<std::string, std::vector<Row>> grouped;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    RowReader row(t, r);
    const std::string& sym = row.str(c_sym);
    if (sym.empty()) row.fail("empty symbol");
    Row q{row.integer(c_ts), row.number(c_bid), row.number(c_ask), row.index()};
    if (!(q.bid > 0.0)) row.fail("bid must be positive");
    if (q.ask < q.bid) {
      throw LoadError(LoadErrorKind::CrossedQuote, t.source(), row.index(),
                      sym + " bid " + row.str(c_bid) + " > ask " + row.str(c_ask));
    }
    grouped[sym].push_back(q);
  }

  QuoteStore store;
  for (auto& [sym, rows] : grouped) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ts < b.ts; });
    std::vector<TimestampMs> ts;
    std::vector<double> bid, ask;
    ts.reserve(rows.size());
    bid.reserve(rows.size());
    ask.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0 && rows[i].ts == rows[i - 1].ts) {
        std::size_t later = std::max(rows[i].index, rows[i - 1].index);
        throw LoadError(LoadErrorKind::DuplicateTimestamp, t.source(), later,
                        sym + " at " + std::to_string(rows[i].ts));
      }
      ts.push_back(rows[i].ts);
      bid.push_back(rows[i].bid);
      ask.push_back(rows[i].ask);
    }
    store.emplace(sym, QuoteSeries(sym, std::move(ts), std::move(bid), std::move(ask)));
  }
  return store;
}

QuoteStore load_quotes(const std::filesystem::path& path) { return parse_quotes(Table::read(path)); }

std::map<std::int64_t, BlockRecord> parse_block_records(const Table& t) {
  const auto c_block = t.require("block_number");
  const auto c_builder = t.require("builder_label");
  const auto c_delta = t.require("coinbase_delta_eth");
  const auto c_bid = t.require("bid_eth");
  const auto c_used = t.require("used_bid_adjustment");
  const auto c_adj = t.require("adjustment_delta_eth");
  const auto c_slot = t.require("slot_time_ms");

  std::map<std::int64_t, BlockRecord> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    RowReader row(t, r);
    BlockRecord b;
    b.block_number = row.integer(c_block);
    b.builder_label = row.str(c_builder);
    b.coinbase_delta_eth = row.number(c_delta);
    b.bid_eth = row.number(c_bid);
    b.used_bid_adjustment = row.boolean(c_used);
    b.adjustment_delta_eth = row.number(c_adj);
    b.slot_time_ms = row.integer(c_slot);
    if (b.bid_eth < 0) row.fail("bid_eth must be >= 0");
    if (b.adjustment_delta_eth < 0) row.fail("adjustment_delta_eth must be >= 0");
    if (!b.used_bid_adjustment) {
      if (b.adjustment_delta_eth != 0.0) row.fail("adjustment delta without bid adjustment");
      b.adjustment_delta_eth = 0.0;
    }
    if (out.count(b.block_number) > 0) {
      throw LoadError(LoadErrorKind::DuplicateBlock, t.source(), row.index(),
                      std::to_string(b.block_number));
    }
    out.emplace(b.block_number, std::move(b));
  }
  return out;
}

std::map<std::int64_t, BlockRecord> load_block_records(const std::filesystem::path& path) {
  return parse_block_records(Table::read(path));
}

SearcherLabels parse_searcher_labels(std::string_view json_text, const std::string& source) {
  auto bad = [&](const std::string& detail) -> LoadError {
    return LoadError(LoadErrorKind::InvalidConfig, source, 0, detail);
  };
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw bad("not a JSON object");

  SearcherLabels out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "labels" && it.key() != "integrated_with") throw bad("unknown key '" + it.key() + "'");
  }
  if (auto it = doc.find("labels"); it != doc.end()) {
    if (!it->is_object()) throw bad("'labels' must be an object");
    std::map<Address, std::string> seen;
    for (auto l = it->begin(); l != it->end(); ++l) {
      if (!l->is_array()) throw bad("label '" + l.key() + "' must map to an array");
      auto& list = out.labels[l.key()];
      for (const auto& a : *l) {
        if (!a.is_string()) throw bad("address under '" + l.key() + "' is not a string");
        Address addr;
        try {
          addr = normalize_address(a.get<std::string>());
        } catch (const std::invalid_argument& e) {
          throw bad(e.what());
        }
        auto [s, inserted] = seen.emplace(addr, l.key());
        if (!inserted) {
          throw LoadError(LoadErrorKind::DuplicateAddress, source, 0,
                          addr + " under '" + s->second + "' and '" + l.key() + "'");
        }
        list.push_back(std::move(addr));
      }
    }
  }
  if (auto it = doc.find("integrated_with"); it != doc.end()) {
    if (!it->is_object()) throw bad("'integrated_with' must be an object");
    for (auto l = it->begin(); l != it->end(); ++l) {
      if (!l->is_string()) throw bad("integrated_with['" + l.key() + "'] must be a string");
      out.integrated_with[l.key()] = l->get<std::string>();
    }
  }
  out.build_index();
  return out;
}

SearcherLabels load_searcher_labels(const std::filesystem::path& path) {
  return parse_searcher_labels(read_file(path), path.filename().string());
}

PipelineConfig parse_config(std::string_view json_text, const std::string& source) {
  auto bad = [&](const std::string& detail) -> LoadError {
    return LoadError(LoadErrorKind::InvalidConfig, source, 0, detail);
  };
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw bad("not a JSON object");

  PipelineConfig cfg;
  using Setter = std::function<void(const json&)>;
  auto number = [&](double& field) -> Setter {
    return [&field, &bad](const json& v) {
      if (!v.is_number()) throw bad("expected a number");
      field = v.get<double>();
    };
  };
  auto integer = [&](auto& field) -> Setter {
    return [&field, &bad](const json& v) {
      if (!v.is_number_integer()) throw bad("expected an integer");
      field = v.get<std::remove_reference_t<decltype(field)>>();
    };
  };
  const std::map<std::string, Setter> setters{
      {"grid_start_s", number(cfg.grid_start_s)},
      {"grid_end_s", number(cfg.grid_end_s)},
      {"grid_step_s", number(cfg.grid_step_s)},
      {"taker_fee_rate", number(cfg.taker_fee_rate)},
      {"exclusivity_threshold", number(cfg.exclusivity_threshold)},
      {"quote_staleness_ms", integer(cfg.quote_staleness_ms)},
      {"pattern_flat_epsilon_bps", number(cfg.pattern_flat_epsilon_bps)},
      {"pattern_abrupt_drop_fraction", number(cfg.pattern_abrupt_drop_fraction)},
      {"rolling_window_days", integer(cfg.rolling_window_days)},
      {"min_trades_for_confidence", integer(cfg.min_trades_for_confidence)},
      {"refund_cutoff_ts_ms", integer(cfg.refund_cutoff_ts_ms)},
      {"refund_rate_before", number(cfg.refund_rate_before)},
      {"refund_rate_after", number(cfg.refund_rate_after)},
  };
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    auto s = setters.find(it.key());
    if (s == setters.end()) throw bad("unknown key '" + it.key() + "'");
    try {
      s->second(*it);
    } catch (const LoadError& e) {
      throw bad(it.key() + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const LoadError& e) {
    throw LoadError(LoadErrorKind::InvalidConfig, source, 0, e.what());
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.filename().string());
}

}  // namespace cexdex::ingest
