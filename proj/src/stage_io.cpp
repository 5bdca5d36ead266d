#include "cexdex/stage_io.hpp"

#include "cexdex/calendar.hpp"
#include "cexdex/errors.hpp"
#include "cexdex/ingest.hpp"

#include <charconv>
#include <cmath>
#include <map>

namespace cexdex::io {

namespace {

std::string b(bool v) { return v ? "true" : "false"; }

std::string num(double v) { return format_double(v); }

class Reader {
 public:
  Reader(const Table& t, std::size_t row) : t_(t), row_(row) {}

  [[noreturn]] void fail(const std::string& detail) const {
    throw LoadError(LoadErrorKind::MalformedRow, t_.source(), row_ + 1, detail);
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
    return parse(col, [](const std::string& s) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
        throw std::invalid_argument("not an integer: '" + s + "'");
      }
      return v;
    });
  }
  double number(std::size_t col) const {
    return parse(col, [](const std::string& s) { return parse_double(s); });
  }
  /// Empty cell reads as NaN.
  double number_or_nan(std::size_t col) const {
    return str(col).empty() ? std::nan("") : number(col);
  }
  std::optional<double> optional(std::size_t col) const {
    if (str(col).empty()) return std::nullopt;
    return number(col);
  }
  Decimal decimal(std::size_t col) const {
    return parse(col, [](const std::string& s) { return parse_decimal(s); });
  }
  bool boolean(std::size_t col) const {
    return parse(col, [](const std::string& s) { return ingest::parse_bool(s); });
  }

 private:
  const Table& t_;
  std::size_t row_;
};

}  // namespace

std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_detections(std::ostream& out, std::span<const ArbTrade> trades) {
  CsvWriter w(out);
  w.row({"tx_hash", "block_number", "slot_time_ms", "searcher_label", "searcher_contract", "builder_label",
         "token_bought", "amount_bought", "token_sold", "amount_sold", "volume_usd", "base_fee_eth",
         "builder_tip_eth"});
  for (const auto& t : trades) {
    w.row({t.tx_hash, std::to_string(t.block_number), std::to_string(t.slot_time_ms), t.searcher_label,
           t.searcher_contract, t.builder_label, t.token_bought, format_decimal(t.amount_bought), t.token_sold,
           format_decimal(t.amount_sold), num(t.volume_usd), num(t.base_fee_eth), num(t.builder_tip_eth)});
  }
}

std::vector<ArbTrade> parse_detections(const Table& t) {
  const auto c_hash = t.require("tx_hash");
  const auto c_block = t.require("block_number");
  const auto c_slot = t.require("slot_time_ms");
  const auto c_label = t.require("searcher_label");
  const auto c_contract = t.require("searcher_contract");
  const auto c_builder = t.require("builder_label");
  const auto c_tb = t.require("token_bought");
  const auto c_ab = t.require("amount_bought");
  const auto c_ts = t.require("token_sold");
  const auto c_as = t.require("amount_sold");
  const auto c_vol = t.require("volume_usd");
  const auto c_base = t.require("base_fee_eth");
  const auto c_tip = t.require("builder_tip_eth");
  std::vector<ArbTrade> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    Reader row(t, r);
    ArbTrade a;
    a.tx_hash = row.str(c_hash);
    a.block_number = row.integer(c_block);
    a.slot_time_ms = row.integer(c_slot);
    a.searcher_label = row.str(c_label);
    a.searcher_contract = row.str(c_contract);
    a.builder_label = row.str(c_builder);
    a.token_bought = row.str(c_tb);
    a.amount_bought = row.decimal(c_ab);
    a.token_sold = row.str(c_ts);
    a.amount_sold = row.decimal(c_as);
    a.volume_usd = row.number(c_vol);
    a.base_fee_eth = row.number(c_base);
    a.builder_tip_eth = row.number(c_tip);
    out.push_back(std::move(a));
  }
  return out;
}

void write_verdicts(std::ostream& out, std::span<const detect::DetectionVerdict> verdicts) {
  CsvWriter w(out);
  std::vector<std::string> header{"tx_hash", "passed"};
  for (std::size_t h = 0; h < detect::kHeuristicCount; ++h) {
    header.emplace_back(detect::heuristic_name(static_cast<detect::Heuristic>(h)));
  }
  header.emplace_back("failure_reasons");
  w.row(header);
  for (const auto& v : verdicts) {
    std::vector<std::string> row{v.tx_hash, b(v.passed)};
    for (bool ok : v.per_heuristic) row.push_back(b(ok));
    std::string reasons;
    for (const auto& r : v.failure_reasons) reasons += (reasons.empty() ? "" : "; ") + r;
    row.push_back(reasons);
    w.row(row);
  }
}

void write_markouts(std::ostream& out, std::span<const markout::MarkoutCurve> curves,
                    const markout::MarkoutGrid& grid) {
  CsvWriter w(out);
  w.row({"tx_hash", "offset_s", "mr_usd", "gr", "excluded", "exclusion_reason"});
  for (const auto& c : curves) {
    const std::string excluded = b(c.excluded());
    const std::string reason = c.excluded() ? std::string(markout::to_string(c.exclusion)) : std::string();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      w.row({c.tx_hash, num(grid[i]), num(c.mr_usd[i]), num(c.gr[i]), excluded, reason});
    }
  }
}

std::vector<markout::MarkoutCurve> parse_markouts(const Table& t, const markout::MarkoutGrid& grid) {
  const auto c_hash = t.require("tx_hash");
  const auto c_off = t.require("offset_s");
  const auto c_mr = t.require("mr_usd");
  const auto c_gr = t.require("gr");
  const auto c_ex = t.require("excluded");
  const auto c_reason = t.require("exclusion_reason");
  std::vector<markout::MarkoutCurve> out;
  const std::size_t n = grid.size();
  if (t.rows() % n != 0) {
    throw LoadError(LoadErrorKind::MalformedRow, t.source(), t.rows(),
                    "row count is not a multiple of the grid size " + std::to_string(n));
  }
  out.reserve(t.rows() / n);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    Reader row(t, r);
    const std::size_t i = r % n;
    if (i == 0) {
      markout::MarkoutCurve c;
      c.tx_hash = row.str(c_hash);
      c.mr_usd.assign(n, 0.0);
      c.gr.assign(n, 0.0);
      const bool excluded = row.boolean(c_ex);
      if (excluded) {
        try {
          c.exclusion = markout::parse_exclusion(row.str(c_reason));
        } catch (const std::invalid_argument& e) {
          row.fail(e.what());
        }
        if (c.exclusion == markout::Exclusion::None) row.fail("excluded row without a reason");
      }
      out.push_back(std::move(c));
    }
    markout::MarkoutCurve& c = out.back();
    if (row.str(c_hash) != c.tx_hash) row.fail("curve for " + c.tx_hash + " is incomplete");
    if (row.number(c_off) != grid[i]) row.fail("offset does not match the markout grid");
    c.mr_usd[i] = row.number_or_nan(c_mr);
    c.gr[i] = row.number_or_nan(c_gr);
  }
  return out;
}

void write_profiles(std::ostream& out, std::span<const horizon::SearcherProfile> profiles) {
  CsvWriter w(out);
  w.row({"searcher_label", "t_star_s", "pattern", "decline_3s_fraction", "n_arb_trades", "low_confidence"});
  for (const auto& p : profiles) {
    w.row({p.searcher_label, opt_str(p.t_star_s), horizon::to_string(p.pattern), opt_str(p.decline_3s_fraction),
           std::to_string(p.n_arb_trades), b(p.low_confidence)});
  }
}

std::vector<horizon::SearcherProfile> parse_profiles(const Table& t) {
  const auto c_label = t.require("searcher_label");
  const auto c_t = t.require("t_star_s");
  const auto c_pattern = t.require("pattern");
  const auto c_decline = t.require("decline_3s_fraction");
  const auto c_n = t.require("n_arb_trades");
  const auto c_low = t.require("low_confidence");
  std::vector<horizon::SearcherProfile> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    Reader row(t, r);
    horizon::SearcherProfile p;
    p.searcher_label = row.str(c_label);
    p.t_star_s = row.optional(c_t);
    try {
      p.pattern = horizon::parse_pattern(row.str(c_pattern));
    } catch (const std::invalid_argument& e) {
      row.fail(e.what());
    }
    p.decline_3s_fraction = row.optional(c_decline);
    p.n_arb_trades = static_cast<std::size_t>(row.integer(c_n));
    p.low_confidence = row.boolean(c_low);
    if ((p.pattern == horizon::Pattern::P3) == p.t_star_s.has_value()) row.fail("t_star_s must be empty exactly for P3");
    out.push_back(std::move(p));
  }
  return out;
}

void write_median_curves(std::ostream& out, std::span<const horizon::MedianCurve> curves,
                         const markout::MarkoutGrid& grid) {
  CsvWriter w(out);
  w.row({"searcher_label", "offset_s", "median_gr", "q25_gr", "q75_gr", "n_trades"});
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      w.row({c.searcher_label, num(grid[i]), num(c.median[i]), num(c.q25[i]), num(c.q75[i]),
             std::to_string(c.n_trades)});
    }
  }
}

void write_economics(std::ostream& out, std::span<const estimate::TradeEconomics> economics) {
  CsvWriter w(out);
  w.row({"tx_hash", "searcher_label", "block_number", "slot_time_ms", "volume_usd", "mr_at_t_star_usd",
         "base_fee_usd", "builder_tip_usd", "ev_usd", "pnl_usd", "margin"});
  for (const auto& e : economics) {
    w.row({e.tx_hash, e.searcher_label, std::to_string(e.block_number), std::to_string(e.slot_time_ms),
           num(e.volume_usd), num(e.mr_at_t_star_usd), num(e.base_fee_usd), num(e.builder_tip_usd), num(e.ev_usd),
           num(e.pnl_usd), opt_str(e.margin)});
  }
}

std::vector<estimate::TradeEconomics> parse_economics(const Table& t) {
  const auto c_hash = t.require("tx_hash");
  const auto c_label = t.require("searcher_label");
  const auto c_block = t.require("block_number");
  const auto c_slot = t.require("slot_time_ms");
  const auto c_vol = t.require("volume_usd");
  const auto c_mr = t.require("mr_at_t_star_usd");
  const auto c_base = t.require("base_fee_usd");
  const auto c_tip = t.require("builder_tip_usd");
  const auto c_ev = t.require("ev_usd");
  const auto c_pnl = t.require("pnl_usd");
  const auto c_margin = t.require("margin");
  std::vector<estimate::TradeEconomics> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    Reader row(t, r);
    estimate::TradeEconomics e;
    e.tx_hash = row.str(c_hash);
    e.searcher_label = row.str(c_label);
    e.block_number = row.integer(c_block);
    e.slot_time_ms = row.integer(c_slot);
    e.volume_usd = row.number(c_vol);
    e.mr_at_t_star_usd = row.number(c_mr);
    e.base_fee_usd = row.number(c_base);
    e.builder_tip_usd = row.number(c_tip);
    e.ev_usd = row.number(c_ev);
    e.pnl_usd = row.number(c_pnl);
    e.margin = row.optional(c_margin);
    out.push_back(std::move(e));
  }
  return out;
}

void write_summary(std::ostream& out, std::span<const estimate::SearcherSummary> summaries) {
  CsvWriter w(out);
  w.row({"searcher_label", "total_volume_usd", "total_ev_usd", "total_tips_usd", "total_pnl_usd",
         "median_trade_ev_usd", "median_trade_pnl_usd", "median_margin", "total_trades", "quote_gap_trades",
         "inventory_adj_trades", "arbitrage_trades", "profitable_trades", "unprofitable_trades"});
  for (const auto& s : summaries) {
    w.row({s.label, num(s.total_volume_usd), num(s.total_ev_usd), num(s.total_tips_usd), num(s.total_pnl_usd),
           opt_str(s.median_trade_ev), opt_str(s.median_trade_pnl), opt_str(s.median_margin),
           std::to_string(s.counts.total), std::to_string(s.counts.quote_gap),
           std::to_string(s.counts.inventory_adj), std::to_string(s.counts.arbitrage),
           std::to_string(s.counts.profitable), std::to_string(s.counts.unprofitable)});
  }
}

void write_ev_series(std::ostream& out, const std::map<std::string, std::vector<estimate::EvBucket>>& daily,
                     const std::map<std::string, std::vector<estimate::EvBucket>>& weekly) {
  CsvWriter w(out);
  w.row({"bucketing", "searcher_label", "start_date", "ev_usd", "cumulative_ev_usd"});
  auto emit = [&](const char* kind, const std::map<std::string, std::vector<estimate::EvBucket>>& series) {
    for (const auto& [label, buckets] : series) {
      for (const auto& bkt : buckets) {
        w.row({kind, label, iso_date(bkt.start_day), num(bkt.ev_usd), num(bkt.cumulative_ev_usd)});
      }
    }
  };
  emit("daily", daily);
  emit("weekly", weekly);
}

void write_builder_blocks(std::ostream& out, std::span<const builder::BuilderBlockEconomics> blocks) {
  CsvWriter w(out);
  w.row({"block_number", "builder_label", "slot_time_ms", "eth_usd", "bid_value_usd", "builder_profit_usd",
         "searcher_pnl_usd", "aggregated_profit_usd", "builder_margin", "aggregated_profit_margin",
         "subsidized_before", "subsidized_after"});
  for (const auto& k : blocks) {
    w.row({std::to_string(k.block_number), k.builder_label, std::to_string(k.slot_time_ms), num(k.eth_usd),
           num(k.bid_usd), num(k.bp_usd), k.sp_applicable ? num(k.sp_usd) : std::string(), num(k.p_usd),
           opt_str(k.builder_margin), opt_str(k.aggregated_margin), b(k.subsidized_before),
           b(k.subsidized_after)});
  }
}

std::vector<builder::BuilderBlockEconomics> parse_builder_blocks(const Table& t) {
  const auto c_block = t.require("block_number");
  const auto c_builder = t.require("builder_label");
  const auto c_slot = t.require("slot_time_ms");
  const auto c_eth = t.require("eth_usd");
  const auto c_bid = t.require("bid_value_usd");
  const auto c_bp = t.require("builder_profit_usd");
  const auto c_sp = t.require("searcher_pnl_usd");
  const auto c_p = t.require("aggregated_profit_usd");
  const auto c_bm = t.require("builder_margin");
  const auto c_am = t.require("aggregated_profit_margin");
  const auto c_before = t.require("subsidized_before");
  const auto c_after = t.require("subsidized_after");
  std::vector<builder::BuilderBlockEconomics> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    Reader row(t, r);
    builder::BuilderBlockEconomics k;
    k.block_number = row.integer(c_block);
    k.builder_label = row.str(c_builder);
    k.slot_time_ms = row.integer(c_slot);
    k.eth_usd = row.number(c_eth);
    k.bid_usd = row.number(c_bid);
    k.bp_usd = row.number(c_bp);
    auto sp = row.optional(c_sp);
    k.sp_applicable = sp.has_value();
    k.sp_usd = sp.value_or(0.0);
    k.p_usd = row.number(c_p);
    k.builder_margin = row.optional(c_bm);
    k.aggregated_margin = row.optional(c_am);
    k.subsidized_before = row.boolean(c_before);
    k.subsidized_after = row.boolean(c_after);
    out.push_back(std::move(k));
  }
  return out;
}

void write_builder_summary(std::ostream& out, std::span<const BuilderSummaryRow> rows) {
  CsvWriter w(out);
  w.row({"builder_label", "integrated_searchers", "total_blocks", "total_bid_value_usd", "builder_profit_usd",
         "builder_margin", "searcher_pnl_usd", "aggregated_profit_usd", "aggregated_profit_margin",
         "subsidized_blocks_before", "subsidized_blocks_after", "subsidy_before_usd", "subsidy_after_bp_usd",
         "subsidy_after_p_usd", "zero_denominator_blocks", "unpriced_blocks"});
  for (const auto& row : rows) {
    const auto& s = row.summary;
    std::string integrated;
    for (const auto& l : s.integrated_searchers) integrated += (integrated.empty() ? "" : ";") + l;
    w.row({s.builder_label, integrated, std::to_string(s.total_blocks), num(s.total_bid_value_usd),
           num(s.total_builder_profit_usd), opt_str(s.builder_margin), opt_str(s.total_searcher_pnl_usd),
           num(s.aggregated_profit_usd), opt_str(s.aggregated_margin), std::to_string(s.subsidized_blocks_before),
           std::to_string(s.subsidized_blocks_after), num(s.subsidy_before_usd), num(s.subsidy_after_bp_usd),
           num(s.subsidy_after_p_usd), std::to_string(s.zero_denominator_blocks),
           std::to_string(row.unpriced_blocks)});
  }
}

}  // namespace cexdex::io
