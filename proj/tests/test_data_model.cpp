#include "doctest.h"
#include "support.hpp"

#include "cexdex/calendar.hpp"
#include "cexdex/errors.hpp"
#include "cexdex/ingest.hpp"
#include "cexdex/input_writer.hpp"
#include "cexdex/table.hpp"

#include <sstream>

using namespace cexdex;

namespace {

const char* kTxHeader =
    "tx_hash,block_number,slot_time_ms,searcher_contract,pool_id,dex,token_in,amount_in,token_out,amount_out,"
    "log_index,first_in_direction,seen_in_mempool,atomic_mev_flag,liquidation_flag,ofa_backrun_flag,"
    "router_or_bot_flag,erc721_transfer_count,base_fee_eth,priority_fee_eth,coinbase_transfer_eth,builder_label,"
    "volume_usd\n";

std::string tx_row(const std::string& hash, std::int64_t block, const std::string& amount_in = "1",
                   std::int64_t log_index = 0, const std::string& token_in = testing::kUsdc,
                   const std::string& token_out = testing::kWeth) {
  std::ostringstream ss;
  ss << hash << "," << block << "," << 1709700000000 + (block - 100) * 12000
     << ",0x00000000000000000000000000000000000000c1,pool,uniswap_v3," << token_in << "," << amount_in << ","
     << token_out << ",2," << log_index << ",true,false,false,false,false,false,0,0.001,0.002,0.003,b1,100\n";
  return ss.str();
}

std::vector<RawTransaction> load_txs(const std::string& body) {
  return ingest::parse_transactions(Table::parse_csv(std::string(kTxHeader) + body, "transactions.csv"));
}

template <typename F>
LoadError capture(F&& f) {
  try {
    f();
  } catch (const LoadError& e) {
    return e;
  }
  FAIL("expected LoadError");
  return LoadError(LoadErrorKind::MalformedRow, "", 0, "");
}

}  // namespace

TEST_CASE("transactions: well-formed rows load in block order") {
  auto txs = load_txs(tx_row("0xc", 102) + tx_row("0xa", 100) + tx_row("0xb", 101));
  REQUIRE(txs.size() == 3);
  CHECK(txs[0].block_number == 100);
  CHECK(txs[1].block_number == 101);
  CHECK(txs[2].block_number == 102);
  CHECK(txs[0].tx_hash == "0xa");
  CHECK(txs[0].base_fee_eth == 0.001);
  CHECK(txs[0].builder_label == "b1");
}

TEST_CASE("transactions: zero amount_in is a malformed row") {
  auto e = capture([] { load_txs(tx_row("0xa", 100) + tx_row("0xb", 101, "0")); });
  CHECK(e.kind() == LoadErrorKind::MalformedRow);
  CHECK(e.row() == 2);
  CHECK(e.source() == "transactions.csv");
}

TEST_CASE("transactions: rows sharing a hash group into one transaction") {
  auto txs = load_txs(tx_row("0xa", 100, "1", 0) + tx_row("0xa", 100, "2", 1, testing::kWeth, testing::kPepe));
  REQUIRE(txs.size() == 1);
  REQUIRE(txs[0].swaps.size() == 2);
  CHECK(txs[0].swaps[0].token_in == testing::kUsdc);
  CHECK(txs[0].swaps[1].token_out == testing::kPepe);
}

TEST_CASE("transactions: duplicate log index and unknown boolean are rejected") {
  CHECK(capture([] { load_txs(tx_row("0xa", 100, "1", 0) + tx_row("0xa", 100, "1", 0)); }).kind() ==
        LoadErrorKind::MalformedRow);
  std::string bad = tx_row("0xa", 100);
  bad.replace(bad.find(",true,"), 6, ",maybe,");
  CHECK(capture([&] { load_txs(bad); }).kind() == LoadErrorKind::MalformedRow);
}

TEST_CASE("transactions: missing column") {
  auto e = capture([] {
    ingest::parse_transactions(Table::parse_csv("tx_hash,block_number\n0xa,1\n", "transactions.csv"));
  });
  CHECK(e.kind() == LoadErrorKind::MissingColumn);
}

TEST_CASE("quotes: valid, crossed and duplicate timestamps") {
  auto store = ingest::parse_quotes(Table::parse_csv("symbol,ts_ms,bid,ask\nETHUSDT,0,99,101\n", "quotes.csv"));
  REQUIRE(store.count("ETHUSDT") == 1);
  CHECK(store.at("ETHUSDT").size() == 1);

  CHECK(capture([] {
          ingest::parse_quotes(Table::parse_csv("symbol,ts_ms,bid,ask\nETHUSDT,0,101,99\n", "quotes.csv"));
        }).kind() == LoadErrorKind::CrossedQuote);
  CHECK(capture([] {
          ingest::parse_quotes(
              Table::parse_csv("symbol,ts_ms,bid,ask\nETHUSDT,5,99,101\nETHUSDT,5,99,102\n", "quotes.csv"));
        }).kind() == LoadErrorKind::DuplicateTimestamp);
}

TEST_CASE("quotes: rows may arrive out of order") {
  auto store = ingest::parse_quotes(
      Table::parse_csv("symbol,ts_ms,bid,ask\nETHUSDT,10,1,2\nETHUSDT,0,3,4\nBTCUSDT,0,5,6\n", "quotes.csv"));
  const auto& s = store.at("ETHUSDT");
  REQUIRE(s.size() == 2);
  CHECK(s.timestamps()[0] == 0);
  CHECK(s.bids()[0] == 3.0);
}

TEST_CASE("blocks: stored as-is, duplicates and inconsistent adjustments rejected") {
  const std::string header = "block_number,builder_label,coinbase_delta_eth,bid_eth,used_bid_adjustment,"
                             "adjustment_delta_eth,slot_time_ms\n";
  auto blocks = ingest::parse_block_records(Table::parse_csv(header + "7,titan,1.5,0.5,false,0,1000\n", "blocks.csv"));
  REQUIRE(blocks.size() == 1);
  const auto& b = blocks.at(7);
  CHECK(b.builder_label == "titan");
  CHECK(b.coinbase_delta_eth == 1.5);
  CHECK(b.bid_eth == 0.5);
  CHECK_FALSE(b.used_bid_adjustment);
  CHECK(b.adjustment_delta_eth == 0.0);

  CHECK(capture([&] {
          ingest::parse_block_records(
              Table::parse_csv(header + "7,titan,1,1,false,0,1000\n7,beaver,1,1,false,0,1000\n", "blocks.csv"));
        }).kind() == LoadErrorKind::DuplicateBlock);
  auto e = capture([&] {
    ingest::parse_block_records(Table::parse_csv(header + "7,titan,1,1,false,0.2,1000\n", "blocks.csv"));
  });
  CHECK(e.kind() == LoadErrorKind::MalformedRow);
  CHECK(e.row() == 1);
}

TEST_CASE("tokens: duplicate address and cex symbol defaults") {
  const std::string header = "address,symbol,cex_listed,is_major,decimals\n";
  auto reg = ingest::parse_tokens(Table::parse_csv(header + testing::kWeth + ",WETH,true,true,18\n", "tokens.csv"));
  REQUIRE(reg.find(testing::kWeth) != nullptr);
  CHECK(reg.find(testing::kWeth)->cex_symbol == "ETH");
  CHECK(capture([&] {
          ingest::parse_tokens(Table::parse_csv(
              header + testing::kWeth + ",WETH,true,true,18\n" + testing::kWeth + ",X,true,true,18\n", "tokens.csv"));
        }).kind() == LoadErrorKind::DuplicateAddress);
}

TEST_CASE("searcher labels: reverse index and integration map") {
  auto labels = ingest::parse_searcher_labels(
      R"({"labels": {"Wintermute": ["0x00000000000000000000000000000000000000C1"], "SCP": []},
          "integrated_with": {"SCP": "beaver"}})",
      "searchers.json");
  CHECK(labels.label_of("0x00000000000000000000000000000000000000c1") == std::optional<std::string>("Wintermute"));
  CHECK_FALSE(labels.label_of(testing::kWeth).has_value());
  CHECK(labels.integrated_searchers_of("beaver") == std::vector<std::string>{"SCP"});
  CHECK(capture([] {
          ingest::parse_searcher_labels(
              R"({"labels": {"a": ["0x00000000000000000000000000000000000000c1"],
                             "b": ["0x00000000000000000000000000000000000000c1"]}})",
              "searchers.json");
        }).kind() == LoadErrorKind::DuplicateAddress);
}

TEST_CASE("config: defaults, overrides, unknown keys and invalid values") {
  auto cfg = ingest::parse_config("{}", "config.json");
  CHECK(cfg.taker_fee_rate == 0.0001725);
  CHECK(cfg.grid_step_s == 0.5);
  CHECK(cfg.exclusivity_threshold == 0.5);
  CHECK(cfg.rolling_window_days == 30);
  CHECK(ingest::parse_config(R"({"taker_fee_rate": 0})", "config.json").taker_fee_rate == 0.0);
  CHECK(capture([] { ingest::parse_config(R"({"bogus": 1})", "config.json"); }).kind() ==
        LoadErrorKind::InvalidConfig);
  CHECK(capture([] { ingest::parse_config(R"({"grid_step_s": 0})", "config.json"); }).kind() ==
        LoadErrorKind::InvalidConfig);
  CHECK(capture([] { ingest::parse_config(R"({"grid_start_s": 0.25})", "config.json"); }).kind() ==
        LoadErrorKind::InvalidConfig);
  // Writing the defaults back out and re-reading is lossless.
  auto again = ingest::parse_config(ingest::config_json(cfg), "config.json");
  CHECK(ingest::config_json(again) == ingest::config_json(cfg));
}

TEST_CASE("table: quoted csv fields and jsonl") {
  auto t = Table::parse_csv("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n", "t.csv");
  REQUIRE(t.rows() == 1);
  CHECK(t.at(0, 0) == "x, y");
  CHECK(t.at(0, 1) == "say \"hi\"");
  auto j = Table::parse_jsonl("{\"a\": 1, \"b\": \"x\"}\n{\"b\": \"y\", \"a\": 2.5}\n", "t.jsonl");
  REQUIRE(j.rows() == 2);
  CHECK(j.at(1, *j.find("a")) == "2.5");
  CHECK(j.at(1, *j.find("b")) == "y");

  std::ostringstream out;
  CsvWriter w(out);
  w.row({"a", "b,c", "d\"e"});
  CHECK(out.str() == "a,\"b,c\",\"d\"\"e\"\n");
}

TEST_CASE("decimal: parsing and formatting") {
  CHECK(format_decimal(parse_decimal("2.50")) == "2.5");
  CHECK(format_decimal(parse_decimal("-1")) == "-1");
  CHECK(format_decimal(parse_decimal("1e-3")) == "0.001");
  CHECK(format_decimal(parse_decimal("123456789012345678901234567890")) == "123456789012345678901234567890");
  CHECK_THROWS_AS(parse_decimal(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_decimal("nan"), std::invalid_argument);
  CHECK_THROWS_AS(parse_decimal("1.2.3"), std::invalid_argument);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")).empty());
  CHECK(parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("calendar: utc days and monday weeks") {
  const std::int64_t d = parse_iso_date("2024-03-05");  // a Tuesday
  CHECK(iso_date(d) == "2024-03-05");
  CHECK(iso_date(iso_week_start(d)) == "2024-03-04");
  CHECK(iso_week_start(iso_week_start(d)) == iso_week_start(d));
  CHECK(utc_day(1709614800000) == d);  // 05:00 UTC that day
  CHECK(utc_day(-1) == -1);
  CHECK_THROWS_AS(parse_iso_date("2024-02-30"), std::invalid_argument);
}

TEST_CASE("property: writer/loader round trip and accept/reject of generated rows") {
  // Random transaction sets written by the input writer must load back
  // verbatim; corrupting one amount to zero must be rejected at that row.
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto rng = SplitMix64::stream(seed, 0);
    std::vector<RawTransaction> txs;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) {
      RawTransaction tx;
      tx.tx_hash = "0x" + std::to_string(1000 + i);
      tx.block_number = static_cast<std::int64_t>(100 + i);
      tx.slot_time_ms = 1709700000000 + static_cast<std::int64_t>(i) * 12000;
      tx.searcher_contract = "0x00000000000000000000000000000000000000c1";
      tx.base_fee_eth = rng.uniform(0, 0.01);
      tx.volume_usd = rng.uniform(1, 1e6);
      tx.seen_in_mempool = rng.bernoulli(0.3);
      tx.builder_label = "b" + std::to_string(rng.below(3));
      const std::size_t k = 1 + rng.below(3);
      for (std::size_t j = 0; j < k; ++j) {
        auto s = testing::swap(testing::kUsdc, "1", testing::kWeth, "2", rng.bernoulli(0.5),
                               static_cast<std::int64_t>(j));
        s.amount_in = Decimal(rng.uniform(0.001, 1e5));
        tx.swaps.push_back(s);
      }
      txs.push_back(tx);
    }
    std::ostringstream out;
    ingest::write_transactions(out, txs);
    const auto text = out.str();
    auto back = ingest::parse_transactions(Table::parse_csv(text, "transactions.csv"));
    REQUIRE(back.size() == txs.size());
    for (std::size_t i = 0; i < txs.size(); ++i) {
      CHECK(back[i].tx_hash == txs[i].tx_hash);
      CHECK(back[i].base_fee_eth == txs[i].base_fee_eth);
      CHECK(back[i].volume_usd == txs[i].volume_usd);
      CHECK(back[i].seen_in_mempool == txs[i].seen_in_mempool);
      REQUIRE(back[i].swaps.size() == txs[i].swaps.size());
      for (std::size_t j = 0; j < txs[i].swaps.size(); ++j) {
        CHECK(back[i].swaps[j].amount_in == txs[i].swaps[j].amount_in);
      }
    }
    // Identical bytes, identical diagnostics.
    CHECK(ingest::parse_transactions(Table::parse_csv(text, "transactions.csv")).size() == back.size());

    auto broken = txs;
    const std::size_t victim = rng.below(broken.size());
    broken[victim].swaps[0].amount_in = Decimal(0);
    std::ostringstream bad;
    ingest::write_transactions(bad, broken);
    std::size_t expected_row = 1;
    for (std::size_t i = 0; i < victim; ++i) expected_row += txs[i].swaps.size();
    auto e = capture([&] { ingest::parse_transactions(Table::parse_csv(bad.str(), "transactions.csv")); });
    CHECK(e.kind() == LoadErrorKind::MalformedRow);
    CHECK(e.row() == expected_row);
  }
}
