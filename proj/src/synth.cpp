#include "cexdex/synth.hpp"

#include "cexdex/calendar.hpp"
#include "cexdex/errors.hpp"
#include "cexdex/input_writer.hpp"
#include "cexdex/rng.hpp"
#include "cexdex/table.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cexdex::synth {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr std::int64_t kSlotMs = 12'000;
constexpr std::int64_t kSlotsPerDay = 7'200;
constexpr std::int64_t kGenesisBlock = 19'300'000;
constexpr double kMajorSpread = 25e-4;
constexpr double kAltSpread = 60e-4;
constexpr double kQuoteHalfSpread = 1e-5;
// Unshaped symbols only need to stay fresh across the window.
constexpr std::array<std::int64_t, 3> kFlatQuoteOffsetsMs{-1000, 4000, 9000};

LoadError invalid(const std::string& source, const std::string& detail) {
  return LoadError(LoadErrorKind::InvalidConfig, source, 0, detail);
}

}  // namespace

std::string_view to_string(ImpactDecay d) {
  switch (d) {
    case ImpactDecay::Gentle: return "gentle";
    case ImpactDecay::Abrupt: return "abrupt";
    case ImpactDecay::None: return "none";
  }
  return "none";
}

ImpactDecay parse_impact_decay(std::string_view s) {
  if (s == "gentle") return ImpactDecay::Gentle;
  if (s == "abrupt") return ImpactDecay::Abrupt;
  if (s == "none") return ImpactDecay::None;
  throw std::invalid_argument("unknown impact_decay '" + std::string(s) + "'");
}

markout::MarkoutGrid synth_grid() { return markout::MarkoutGrid::from_config(PipelineConfig{}); }

void SynthConfig::validate() const {
  const std::string src = "synth config";
  auto fraction = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw invalid(src, std::string(name) + " must lie in [0, 1]");
  };
  if (n_days < 1 || n_days > 3660) throw invalid(src, "n_days must lie in [1, 3660]");
  try {
    parse_iso_date(start_date);
  } catch (const std::invalid_argument& e) {
    throw invalid(src, e.what());
  }
  if (!(base_volatility >= 0.0 && std::isfinite(base_volatility))) {
    throw invalid(src, "base_volatility must be finite and >= 0");
  }
  if (!(taker_fee_rate >= 0.0 && taker_fee_rate < 0.01)) throw invalid(src, "taker_fee_rate must lie in [0, 0.01)");
  fraction(inventory_fraction, "inventory_fraction");
  fraction(multihop_fraction, "multihop_fraction");
  fraction(decoy_fraction, "decoy_fraction");
  fraction(bid_adjustment_share, "bid_adjustment_share");
  fraction(integrated_routing, "integrated_routing");
  if (builders.empty()) throw invalid(src, "at least one builder is required");
  std::set<std::string> seen_builders;
  for (const auto& b : builders) {
    if (b.empty() || !seen_builders.insert(b).second) throw invalid(src, "builder labels must be unique and non-empty");
  }
  if (searchers.empty()) throw invalid(src, "at least one searcher is required");
  const auto grid = synth_grid();
  std::set<std::string> seen;
  for (const auto& s : searchers) {
    if (s.label.empty() || !seen.insert(s.label).second) {
      throw invalid(src, "searcher labels must be unique and non-empty");
    }
    if (!grid.index_of(s.true_hedge_delay_s)) {
      throw invalid(src, s.label + ": true_hedge_delay_s is not on the markout grid");
    }
    if (!(s.trades_per_day >= 0.0 && s.trades_per_day <= 7200.0)) {
      throw invalid(src, s.label + ": trades_per_day must lie in [0, 7200]");
    }
    fraction(s.major_share, "major_share");
    fraction(s.tip_fraction, "tip_fraction");
    if (s.integrated_with && !seen_builders.count(*s.integrated_with)) {
      throw invalid(src, s.label + ": integrated_with names an unknown builder");
    }
  }
}

SynthConfig parse_synth_config(std::string_view json_text, const std::string& source) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw invalid(source, "not a JSON object");
  static const std::set<std::string> keys{"seed", "n_days", "start_date", "base_volatility", "taker_fee_rate",
                                          "builders", "searchers", "inventory_fraction", "multihop_fraction",
                                          "decoy_fraction", "bid_adjustment_share", "integrated_routing"};
  static const std::set<std::string> searcher_keys{"label", "true_hedge_delay_s", "impact_decay",
                                                   "trades_per_day", "major_share", "tip_fraction",
                                                   "integrated_with"};
  SynthConfig cfg;
  try {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (!keys.count(it.key())) throw invalid(source, "unknown key '" + it.key() + "'");
    }
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("n_days")) cfg.n_days = doc["n_days"].get<int>();
    if (doc.contains("start_date")) cfg.start_date = doc["start_date"].get<std::string>();
    if (doc.contains("base_volatility")) cfg.base_volatility = doc["base_volatility"].get<double>();
    if (doc.contains("taker_fee_rate")) cfg.taker_fee_rate = doc["taker_fee_rate"].get<double>();
    if (doc.contains("builders")) cfg.builders = doc["builders"].get<std::vector<std::string>>();
    if (doc.contains("inventory_fraction")) cfg.inventory_fraction = doc["inventory_fraction"].get<double>();
    if (doc.contains("multihop_fraction")) cfg.multihop_fraction = doc["multihop_fraction"].get<double>();
    if (doc.contains("decoy_fraction")) cfg.decoy_fraction = doc["decoy_fraction"].get<double>();
    if (doc.contains("bid_adjustment_share")) cfg.bid_adjustment_share = doc["bid_adjustment_share"].get<double>();
    if (doc.contains("integrated_routing")) cfg.integrated_routing = doc["integrated_routing"].get<double>();
    if (doc.contains("searchers")) {
      for (const auto& s : doc["searchers"]) {
        if (!s.is_object()) throw invalid(source, "searchers entries must be objects");
        for (auto it = s.begin(); it != s.end(); ++it) {
          if (!searcher_keys.count(it.key())) throw invalid(source, "unknown searcher key '" + it.key() + "'");
        }
        SynthSearcher ss;
        ss.label = s.at("label").get<std::string>();
        if (s.contains("true_hedge_delay_s")) ss.true_hedge_delay_s = s["true_hedge_delay_s"].get<double>();
        if (s.contains("impact_decay")) ss.impact_decay = parse_impact_decay(s["impact_decay"].get<std::string>());
        if (s.contains("trades_per_day")) ss.trades_per_day = s["trades_per_day"].get<double>();
        if (s.contains("major_share")) ss.major_share = s["major_share"].get<double>();
        if (s.contains("tip_fraction")) ss.tip_fraction = s["tip_fraction"].get<double>();
        if (s.contains("integrated_with") && !s["integrated_with"].is_null()) {
          ss.integrated_with = s["integrated_with"].get<std::string>();
        }
        cfg.searchers.push_back(std::move(ss));
      }
    }
  } catch (const json::exception& e) {
    throw invalid(source, e.what());
  } catch (const std::invalid_argument& e) {
    throw invalid(source, e.what());
  }
  try {
    cfg.validate();
  } catch (const LoadError& e) {
    throw invalid(source, e.what());
  }
  return cfg;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  return parse_synth_config(read_file(path), path.filename().string());
}

std::string synth_config_json(const SynthConfig& cfg) {
  ojson doc;
  doc["seed"] = cfg.seed;
  doc["n_days"] = cfg.n_days;
  doc["start_date"] = cfg.start_date;
  doc["base_volatility"] = cfg.base_volatility;
  doc["taker_fee_rate"] = cfg.taker_fee_rate;
  doc["builders"] = cfg.builders;
  doc["inventory_fraction"] = cfg.inventory_fraction;
  doc["multihop_fraction"] = cfg.multihop_fraction;
  doc["decoy_fraction"] = cfg.decoy_fraction;
  doc["bid_adjustment_share"] = cfg.bid_adjustment_share;
  doc["integrated_routing"] = cfg.integrated_routing;
  doc["searchers"] = ojson::array();
  for (const auto& s : cfg.searchers) {
    ojson e;
    e["label"] = s.label;
    e["true_hedge_delay_s"] = s.true_hedge_delay_s;
    e["impact_decay"] = to_string(s.impact_decay);
    e["trades_per_day"] = s.trades_per_day;
    e["major_share"] = s.major_share;
    e["tip_fraction"] = s.tip_fraction;
    e["integrated_with"] = s.integrated_with ? ojson(*s.integrated_with) : ojson(nullptr);
    doc["searchers"].push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

double spread_shape(double offset_s, double delay_s, ImpactDecay decay) {
  if (decay == ImpactDecay::None) return 1.0;
  const double dt = offset_s - delay_s;
  if (dt == 0.0) return 1.0;
  if (dt < 0.0) return std::max(0.1, 1.0 + 0.2 * dt);
  if (decay == ImpactDecay::Gentle) return std::max(0.05, 1.0 - 0.1 * dt);
  return dt >= 0.5 ? 0.5 : 1.0 - dt;
}

namespace {

struct TokenSpec {
  std::string symbol;
  std::string cex_symbol;
  bool listed = true;
  bool major = false;
  double base_price = 1.0;
  Address address;
};

// Indices into the token table.
constexpr std::size_t kUsdt = 0, kUsdc = 1, kWeth = 2, kWbtc = 3, kFirstAlt = 4, kAltCount = 4;
constexpr std::size_t kHop = kFirstAlt + kAltCount;

std::string hex(SplitMix64& rng, std::size_t n_chars) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s = "0x";
  while (s.size() < n_chars + 2) {
    std::uint64_t v = rng.next();
    for (int i = 0; i < 16 && s.size() < n_chars + 2; ++i, v >>= 4) s.push_back(digits[v & 0xf]);
  }
  return s;
}

// Renders a double exactly as it will be read back.
Decimal amount(double v) { return parse_decimal(format_double(v)); }

struct PlannedTrade {
  std::size_t searcher = 0;
  std::int64_t slot = 0;
  std::size_t token = 0;   // volatile leg
  std::size_t stable = 0;  // USDT or USDC
  bool buys_volatile = true;
  bool multihop = false;
  bool inventory = false;
  double spread = 0.0;
  double volume = 0.0;
  double base_fee_eth = 0.0;
  std::size_t order = 0;
};

class PriceWalk {
 public:
  PriceWalk(double start, double vol) : price_(start), vol_(vol) {}

  double at(TimestampMs t, SplitMix64& rng) {
    if (started_ && vol_ > 0.0 && t > last_) {
      const double dt_s = static_cast<double>(t - last_) / 1000.0;
      price_ *= std::exp(vol_ * std::sqrt(dt_s) * rng.normal());
    }
    started_ = true;
    last_ = t;
    return price_;
  }

 private:
  double price_;
  double vol_;
  TimestampMs last_ = 0;
  bool started_ = false;
};

Quote make_quote(const std::string& symbol, TimestampMs ts, double mid, double half_spread) {
  return Quote{symbol, ts, mid * (1.0 - half_spread), mid * (1.0 + half_spread)};
}

double quoted_mid(const Quote& q) { return (q.bid + q.ask) / 2.0; }

}  // namespace

Scenario generate(const SynthConfig& cfg) {
  cfg.validate();
  SplitMix64 addr_rng = SplitMix64::stream(cfg.seed, 0);
  SplitMix64 trade_rng = SplitMix64::stream(cfg.seed, 1);
  SplitMix64 noise_rng = SplitMix64::stream(cfg.seed, 2);
  SplitMix64 block_rng = SplitMix64::stream(cfg.seed, 3);
  SplitMix64 decoy_rng = SplitMix64::stream(cfg.seed, 4);

  Scenario sc;
  PipelineConfig& pcfg = sc.pipeline_config;
  pcfg.taker_fee_rate = cfg.taker_fee_rate;
  const auto grid = synth_grid();
  const builder::RefundSchedule refunds = builder::RefundSchedule::from_config(pcfg);

  std::vector<TokenSpec> tokens{{"USDT", "USDT", true, true, 1.0, {}},
                                {"USDC", "USDC", true, true, 1.0, {}},
                                {"WETH", "ETH", true, true, 3500.0, {}},
                                {"WBTC", "BTC", true, true, 65000.0, {}}};
  for (std::size_t i = 0; i < kAltCount; ++i) {
    std::string sym = "ALT" + std::to_string(i);
    tokens.push_back({sym, sym, true, false, addr_rng.uniform(0.5, 20.0), {}});
  }
  tokens.push_back({"HOP", "", false, false, 1.0, {}});
  for (auto& t : tokens) {
    t.address = hex(addr_rng, 40);
    TokenInfo info;
    info.symbol = t.symbol;
    info.cex_listed = t.listed;
    info.is_major = t.major;
    info.decimals = t.symbol == "USDT" || t.symbol == "USDC" ? 6 : 18;
    info.cex_symbol = t.cex_symbol;
    sc.tokens.add(t.address, info);
  }
  auto quote_symbol = [&](std::size_t token) { return tokens[token].cex_symbol + "USDT"; };

  std::vector<Address> contracts;
  for (const auto& s : cfg.searchers) {
    contracts.push_back(hex(addr_rng, 40));
    sc.labels.labels[s.label] = {contracts.back()};
    if (s.integrated_with) sc.labels.integrated_with[s.label] = *s.integrated_with;
  }
  sc.labels.build_index();

  // Plan every trade before rendering anything.
  const std::int64_t first_day = parse_iso_date(cfg.start_date);
  const TimestampMs start_ms = first_day * kMsPerDay;
  std::vector<PlannedTrade> plan;
  std::set<std::pair<std::int64_t, std::size_t>> occupied;
  for (int day = 0; day < cfg.n_days; ++day) {
    for (std::size_t si = 0; si < cfg.searchers.size(); ++si) {
      const SynthSearcher& s = cfg.searchers[si];
      const auto n = static_cast<std::int64_t>(std::llround(s.trades_per_day));
      for (std::int64_t j = 0; j < n; ++j) {
        PlannedTrade p;
        p.searcher = si;
        p.order = plan.size();
        if (trade_rng.bernoulli(s.major_share)) {
          p.token = trade_rng.bernoulli(0.5) ? kWeth : kWbtc;
        } else {
          p.token = kFirstAlt + trade_rng.below(kAltCount);
        }
        p.stable = trade_rng.bernoulli(0.7) ? kUsdt : kUsdc;
        p.buys_volatile = trade_rng.bernoulli(0.5);
        p.multihop = trade_rng.bernoulli(cfg.multihop_fraction);
        p.inventory = trade_rng.bernoulli(cfg.inventory_fraction);
        const double scale = trade_rng.uniform(0.8, 1.2);
        p.spread = p.inventory ? -trade_rng.uniform(5e-4, 15e-4)
                               : (tokens[p.token].major ? kMajorSpread : kAltSpread) * scale;
        p.volume = std::exp(trade_rng.uniform(std::log(2e4), std::log(2e5)));
        p.base_fee_eth = trade_rng.uniform(0.001, 0.004);
        int attempts = 0;
        do {
          if (++attempts > 10000) {
            throw invalid("synth config", "cannot place trade: too many trades per day");
          }
          p.slot = day * kSlotsPerDay + static_cast<std::int64_t>(trade_rng.below(kSlotsPerDay));
        } while (!occupied.emplace(p.slot, p.token).second);
        plan.push_back(p);
      }
    }
  }
  std::sort(plan.begin(), plan.end(), [](const PlannedTrade& a, const PlannedTrade& b) {
    return a.slot != b.slot ? a.slot < b.slot : a.order < b.order;
  });

  std::map<std::int64_t, std::vector<std::size_t>> by_slot;
  for (std::size_t i = 0; i < plan.size(); ++i) by_slot[plan[i].slot].push_back(i);

  std::vector<PriceWalk> walks;
  for (const auto& t : tokens) walks.emplace_back(t.base_price, cfg.base_volatility);

  for (const auto& s : cfg.searchers) {
    SearcherTruth st;
    st.label = s.label;
    st.impact_decay = s.impact_decay;
    if (s.impact_decay != ImpactDecay::None) st.true_hedge_delay_s = s.true_hedge_delay_s;
    st.true_pattern = s.impact_decay == ImpactDecay::Gentle   ? horizon::Pattern::P1
                      : s.impact_decay == ImpactDecay::Abrupt ? horizon::Pattern::P2
                                                              : horizon::Pattern::P3;
    sc.truth.searchers.push_back(std::move(st));
  }
  sc.truth.seed = cfg.seed;
  sc.truth.taker_fee_rate = cfg.taker_fee_rate;

  const double rate = cfg.taker_fee_rate;
  const std::size_t n_grid = grid.size();
  const auto d_step = std::sqrt(grid[1] - grid[0]);

  for (const auto& [slot, members] : by_slot) {
    const std::int64_t block_number = kGenesisBlock + slot;
    const TimestampMs slot_ms = start_ms + slot * kSlotMs;

    // The first trade planned into a block decides who builds it.
    const SynthSearcher& opener = cfg.searchers[plan[members.front()].searcher];
    std::string builder_label = cfg.builders[block_rng.below(cfg.builders.size())];
    if (opener.integrated_with && block_rng.bernoulli(cfg.integrated_routing)) {
      builder_label = *opener.integrated_with;
    }

    std::map<std::size_t, std::vector<Quote>> block_quotes;  // token -> window quotes
    std::optional<double> eth_at_slot;
    const std::size_t first_trade = sc.truth.trades.size();

    for (std::size_t idx : members) {
      const PlannedTrade& p = plan[idx];
      const SynthSearcher& s = cfg.searchers[p.searcher];
      const double p0 = walks[p.token].at(slot_ms, noise_rng);
      const ImpactDecay decay = p.inventory ? ImpactDecay::None : s.impact_decay;

      // Window noise: a random walk on the grid, zero at the first offset.
      std::vector<double> log_noise(n_grid, 0.0);
      for (std::size_t i = 1; i < n_grid; ++i) {
        log_noise[i] = log_noise[i - 1] + cfg.base_volatility * d_step * noise_rng.normal();
      }

      std::vector<Quote> window;
      std::size_t delay_index = *grid.index_of(s.true_hedge_delay_s);
      for (std::size_t i = 0; i < n_grid; ++i) {
        const double f = spread_shape(grid[i], s.true_hedge_delay_s, decay);
        // Moves the CEX price so the captured spread is spread * f; the DEX
        // amounts below lock in the full spread.
        const double shape = p.buys_volatile ? 1.0 - p.spread * (1.0 - f) / (1.0 + p.spread)
                                             : 1.0 + p.spread * (1.0 - f);
        const double mid = p0 * shape * std::exp(log_noise[i]);
        window.push_back(make_quote(quote_symbol(p.token), slot_ms + markout::MarkoutGrid::to_ms(grid[i]), mid,
                                    kQuoteHalfSpread));
      }
      if (p.token == kWeth) {
        eth_at_slot = quoted_mid(window[*grid.index_of(0.0)]);
      }

      RawTransaction tx;
      tx.tx_hash = hex(trade_rng, 64);
      tx.block_number = block_number;
      tx.slot_time_ms = slot_ms;
      tx.searcher_contract = contracts[p.searcher];
      tx.builder_label = builder_label;
      tx.volume_usd = p.volume;
      tx.base_fee_eth = p.base_fee_eth;

      const Address& vol_addr = tokens[p.token].address;
      const Address& stable_addr = tokens[p.stable].address;
      double bought = 0.0, sold = 0.0;
      Address bought_addr, sold_addr;
      if (p.buys_volatile) {
        bought = p.volume * (1.0 + p.spread) / p0;
        sold = p.volume;
        bought_addr = vol_addr;
        sold_addr = stable_addr;
      } else {
        bought = p.volume * (1.0 + p.spread);
        sold = p.volume / p0;
        bought_addr = stable_addr;
        sold_addr = vol_addr;
      }
      const std::string pool = "pool-" + tokens[p.token].symbol + "-" + tokens[p.stable].symbol;
      if (p.multihop) {
        const Decimal hop = amount(p.volume * 3.0);
        const Address& hop_addr = tokens[kHop].address;
        tx.swaps.push_back({pool + "-hop-a", "uniswap_v3", sold_addr, amount(sold), hop_addr, hop, 0, true});
        tx.swaps.push_back({pool + "-hop-b", "uniswap_v2", hop_addr, hop, bought_addr, amount(bought), 1, true});
      } else {
        tx.swaps.push_back({pool, "uniswap_v3", sold_addr, amount(sold), bought_addr, amount(bought), 0, true});
      }

      TradeTruth tt;
      tt.tx_hash = tx.tx_hash;
      tt.searcher_label = s.label;
      tt.block_number = block_number;
      tt.inventory = p.inventory;
      tt.buys_volatile = p.buys_volatile;
      tt.spread = p.spread;
      tt.volume_usd = p.volume;
      tt.base_fee_eth = p.base_fee_eth;
      // Realized value of the hedge at the true delay.
      const double p_true = p0 * std::exp(log_noise[delay_index]);
      const double bought_usd = p.buys_volatile ? bought * p_true : bought;
      const double sold_usd = p.buys_volatile ? sold : sold * p_true;
      tt.true_ev_usd = bought_usd - sold_usd - rate * (bought_usd + sold_usd);  // base fee applied below

      sc.transactions.push_back(std::move(tx));
      sc.truth.trades.push_back(std::move(tt));
      block_quotes[p.token] = std::move(window);
    }

    for (auto& [token, quotes] : block_quotes) {
      for (auto& q : quotes) sc.quotes.push_back(std::move(q));
    }
    std::set<std::size_t> flat{kUsdc};
    if (!block_quotes.count(kWeth)) flat.insert(kWeth);
    for (std::size_t token : flat) {
      const double mid = walks[token].at(slot_ms, noise_rng);
      const double hs = token == kUsdc ? 0.0 : kQuoteHalfSpread;
      for (std::int64_t off : kFlatQuoteOffsetsMs) {
        sc.quotes.push_back(make_quote(quote_symbol(token), slot_ms + off, mid, hs));
      }
      if (token == kWeth) eth_at_slot = quoted_mid(sc.quotes[sc.quotes.size() - kFlatQuoteOffsetsMs.size()]);
    }
    const double eth = *eth_at_slot;

    // Fees and tips depend on the slot-time ETH price.
    for (std::size_t m = 0; m < members.size(); ++m) {
      TradeTruth& tt = sc.truth.trades[first_trade + m];
      RawTransaction& tx = sc.transactions[first_trade + m];
      const SynthSearcher& s = cfg.searchers[plan[members[m]].searcher];
      tt.eth_usd_at_slot = eth;
      if (tt.inventory) {
        tt.true_ev_usd.reset();
        continue;
      }
      const double ev = *tt.true_ev_usd - tt.base_fee_eth * eth;
      tt.tip_eth = s.tip_fraction * std::max(0.0, ev) / eth;
      tx.priority_fee_eth = tt.tip_eth * 0.25;
      tx.coinbase_transfer_eth = tt.tip_eth - tx.priority_fee_eth;
      tt.true_ev_usd = ev;
      tt.true_pnl_usd = ev - tt.tip_eth * eth;
    }

    BlockRecord br;
    br.block_number = block_number;
    br.builder_label = builder_label;
    br.slot_time_ms = slot_ms;
    br.bid_eth = block_rng.uniform(0.01, 0.15);
    br.coinbase_delta_eth = br.bid_eth + block_rng.uniform(-0.02, 0.04);
    br.used_bid_adjustment = block_rng.bernoulli(cfg.bid_adjustment_share);
    br.adjustment_delta_eth = br.used_bid_adjustment ? block_rng.uniform(0.0, 0.02) : 0.0;
    BlockTruth bt;
    bt.block_number = block_number;
    bt.true_bp_eth = br.used_bid_adjustment
                         ? br.coinbase_delta_eth - br.bid_eth + refunds.rate_at(slot_ms) * br.adjustment_delta_eth
                         : br.coinbase_delta_eth;
    bt.true_bp_usd = bt.true_bp_eth * eth;
    sc.truth.blocks.push_back(bt);
    sc.blocks.emplace(block_number, br);
  }

  // Decoys ride along in existing blocks and each fail exactly one heuristic.
  const auto n_decoys = static_cast<std::size_t>(std::llround(cfg.decoy_fraction * static_cast<double>(plan.size())));
  if (!sc.blocks.empty()) {
    std::vector<std::int64_t> block_numbers;
    for (const auto& kv : sc.blocks) block_numbers.push_back(kv.first);
    for (std::size_t i = 0; i < n_decoys; ++i) {
      const BlockRecord& br = sc.blocks.at(block_numbers[decoy_rng.below(block_numbers.size())]);
      RawTransaction tx;
      tx.tx_hash = hex(decoy_rng, 64);
      tx.block_number = br.block_number;
      tx.slot_time_ms = br.slot_time_ms;
      tx.searcher_contract = contracts[decoy_rng.below(contracts.size())];
      tx.builder_label = br.builder_label;
      tx.volume_usd = decoy_rng.uniform(1e3, 1e4);
      tx.base_fee_eth = decoy_rng.uniform(0.001, 0.004);
      bool first = true;
      switch (i % 6) {
        case 0: tx.seen_in_mempool = true; break;
        case 1: tx.atomic_mev_flag = true; break;
        case 2: tx.ofa_backrun_flag = true; break;
        case 3: tx.router_or_bot_flag = true; break;
        case 4: tx.erc721_transfer_count = 1; break;
        default: first = false; break;
      }
      tx.swaps.push_back({"pool-decoy", "uniswap_v2", tokens[kUsdt].address, amount(tx.volume_usd),
                          tokens[kWeth].address, amount(tx.volume_usd / 3500.0), 0, first});
      sc.truth.decoys.push_back(tx.tx_hash);
      sc.transactions.push_back(std::move(tx));
    }
  }

  std::sort(sc.quotes.begin(), sc.quotes.end(), [](const Quote& a, const Quote& b) {
    return a.symbol != b.symbol ? a.symbol < b.symbol : a.ts_ms < b.ts_ms;
  });
  std::sort(sc.transactions.begin(), sc.transactions.end(), [](const RawTransaction& a, const RawTransaction& b) {
    return a.block_number != b.block_number ? a.block_number < b.block_number : a.tx_hash < b.tx_hash;
  });
  return sc;
}

namespace {

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> opt_double(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

std::string ground_truth_json(const GroundTruth& truth) {
  ojson doc;
  doc["seed"] = truth.seed;
  doc["taker_fee_rate"] = truth.taker_fee_rate;
  doc["searchers"] = ojson::array();
  for (const auto& s : truth.searchers) {
    ojson e;
    e["label"] = s.label;
    e["true_hedge_delay_s"] = opt(s.true_hedge_delay_s);
    e["true_pattern"] = horizon::to_string(s.true_pattern);
    e["impact_decay"] = to_string(s.impact_decay);
    doc["searchers"].push_back(std::move(e));
  }
  doc["trades"] = ojson::array();
  for (const auto& t : truth.trades) {
    ojson e;
    e["tx_hash"] = t.tx_hash;
    e["searcher_label"] = t.searcher_label;
    e["block_number"] = t.block_number;
    e["inventory"] = t.inventory;
    e["buys_volatile"] = t.buys_volatile;
    e["spread"] = t.spread;
    e["volume_usd"] = t.volume_usd;
    e["eth_usd_at_slot"] = t.eth_usd_at_slot;
    e["base_fee_eth"] = t.base_fee_eth;
    e["tip_eth"] = t.tip_eth;
    e["true_ev_usd"] = opt(t.true_ev_usd);
    e["true_pnl_usd"] = opt(t.true_pnl_usd);
    doc["trades"].push_back(std::move(e));
  }
  doc["blocks"] = ojson::array();
  for (const auto& b : truth.blocks) {
    ojson e;
    e["block_number"] = b.block_number;
    e["true_bp_eth"] = b.true_bp_eth;
    e["true_bp_usd"] = b.true_bp_usd;
    doc["blocks"].push_back(std::move(e));
  }
  doc["decoys"] = truth.decoys;
  return doc.dump(1) + "\n";
}

GroundTruth parse_ground_truth(std::string_view json_text, const std::string& source) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw MissingOutputs(source + " is not a JSON object");
  GroundTruth g;
  try {
    g.seed = doc.at("seed").get<std::uint64_t>();
    g.taker_fee_rate = doc.at("taker_fee_rate").get<double>();
    for (const auto& e : doc.at("searchers")) {
      SearcherTruth s;
      s.label = e.at("label").get<std::string>();
      s.true_hedge_delay_s = opt_double(e.at("true_hedge_delay_s"));
      s.true_pattern = horizon::parse_pattern(e.at("true_pattern").get<std::string>());
      s.impact_decay = parse_impact_decay(e.at("impact_decay").get<std::string>());
      g.searchers.push_back(std::move(s));
    }
    for (const auto& e : doc.at("trades")) {
      TradeTruth t;
      t.tx_hash = e.at("tx_hash").get<std::string>();
      t.searcher_label = e.at("searcher_label").get<std::string>();
      t.block_number = e.at("block_number").get<std::int64_t>();
      t.inventory = e.at("inventory").get<bool>();
      t.buys_volatile = e.at("buys_volatile").get<bool>();
      t.spread = e.at("spread").get<double>();
      t.volume_usd = e.at("volume_usd").get<double>();
      t.eth_usd_at_slot = e.at("eth_usd_at_slot").get<double>();
      t.base_fee_eth = e.at("base_fee_eth").get<double>();
      t.tip_eth = e.at("tip_eth").get<double>();
      t.true_ev_usd = opt_double(e.at("true_ev_usd"));
      t.true_pnl_usd = opt_double(e.at("true_pnl_usd"));
      g.trades.push_back(std::move(t));
    }
    for (const auto& e : doc.at("blocks")) {
      g.blocks.push_back(BlockTruth{e.at("block_number").get<std::int64_t>(), e.at("true_bp_eth").get<double>(),
                                    e.at("true_bp_usd").get<double>()});
    }
    g.decoys = doc.at("decoys").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw MissingOutputs(source + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw MissingOutputs(source + ": " + e.what());
  }
  return g;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(read_file(path), path.filename().string());
}

void write_scenario(const Scenario& sc, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir, ec.message());
  auto csv = [&](const char* name, auto&& writer) {
    std::ostringstream ss;
    writer(ss);
    ingest::write_text_file(dir / name, ss.str());
  };
  csv("tokens.csv", [&](std::ostream& o) { ingest::write_tokens(o, sc.tokens); });
  csv("transactions.csv", [&](std::ostream& o) { ingest::write_transactions(o, sc.transactions); });
  csv("quotes.csv", [&](std::ostream& o) { ingest::write_quotes(o, sc.quotes); });
  csv("blocks.csv", [&](std::ostream& o) { ingest::write_block_records(o, sc.blocks); });
  ingest::write_text_file(dir / "searchers.json", ingest::searcher_labels_json(sc.labels));
  ingest::write_text_file(dir / "config.json", ingest::config_json(sc.pipeline_config));
  ingest::write_text_file(dir / "ground_truth.json", ground_truth_json(sc.truth));
}

RecoveryReport score(const GroundTruth& truth, std::span<const horizon::SearcherProfile> profiles,
                     std::span<const estimate::TradeEconomics> economics,
                     std::span<const builder::BuilderBlockEconomics> blocks) {
  RecoveryReport r;
  std::map<std::string, const horizon::SearcherProfile*> by_label;
  for (const auto& p : profiles) by_label[p.searcher_label] = &p;
  for (const auto& s : truth.searchers) {
    SearcherRecovery sr;
    sr.label = s.label;
    sr.true_t_star_s = s.true_hedge_delay_s;
    sr.true_pattern = s.true_pattern;
    if (auto it = by_label.find(s.label); it != by_label.end()) {
      const auto& p = *it->second;
      sr.est_t_star_s = p.t_star_s;
      sr.est_pattern = p.pattern;
      sr.n_arb_trades = p.n_arb_trades;
      r.pattern_confusion[static_cast<std::size_t>(s.true_pattern)][static_cast<std::size_t>(p.pattern)] += 1;
    }
    if (sr.true_t_star_s && sr.est_t_star_s) sr.abs_error_s = std::abs(*sr.est_t_star_s - *sr.true_t_star_s);
    r.searchers.push_back(std::move(sr));
  }

  std::map<std::string, const TradeTruth*> trade_truth;
  for (const auto& t : truth.trades) trade_truth[t.tx_hash] = &t;
  auto rel = [](double est, double tru) { return std::abs(est - tru) / std::max(std::abs(tru), 1e-9); };
  for (const auto& e : economics) {
    auto it = trade_truth.find(e.tx_hash);
    if (it == trade_truth.end() || !it->second->true_ev_usd) continue;
    ++r.ev_compared;
    r.max_ev_rel_error = std::max(r.max_ev_rel_error, rel(e.ev_usd, *it->second->true_ev_usd));
    r.max_pnl_rel_error = std::max(r.max_pnl_rel_error, rel(e.pnl_usd, *it->second->true_pnl_usd));
  }

  std::map<std::int64_t, double> bp_truth;
  for (const auto& b : truth.blocks) bp_truth[b.block_number] = b.true_bp_usd;
  for (const auto& b : blocks) {
    auto it = bp_truth.find(b.block_number);
    if (it == bp_truth.end()) continue;
    ++r.bp_compared;
    if (b.bp_usd == it->second) ++r.bp_exact_matches;
  }
  return r;
}

std::string recovery_report_json(const RecoveryReport& r) {
  ojson doc;
  doc["searchers"] = ojson::array();
  for (const auto& s : r.searchers) {
    ojson e;
    e["label"] = s.label;
    e["true_t_star_s"] = opt(s.true_t_star_s);
    e["est_t_star_s"] = opt(s.est_t_star_s);
    e["abs_error_s"] = opt(s.abs_error_s);
    e["true_pattern"] = horizon::to_string(s.true_pattern);
    e["est_pattern"] = s.est_pattern ? ojson(horizon::to_string(*s.est_pattern)) : ojson(nullptr);
    e["n_arb_trades"] = s.n_arb_trades;
    doc["searchers"].push_back(std::move(e));
  }
  ojson confusion;
  const char* names[3] = {"P1", "P2", "P3"};
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t e = 0; e < 3; ++e) confusion[names[t]][names[e]] = r.pattern_confusion[t][e];
  }
  doc["pattern_confusion"] = confusion;
  doc["ev_compared"] = r.ev_compared;
  doc["max_ev_rel_error"] = r.max_ev_rel_error;
  doc["max_pnl_rel_error"] = r.max_pnl_rel_error;
  doc["bp_compared"] = r.bp_compared;
  doc["bp_exact_matches"] = r.bp_exact_matches;
  return doc.dump(2) + "\n";
}

}  // namespace cexdex::synth
