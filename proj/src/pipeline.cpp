#include "cexdex/pipeline.hpp"

#include "cexdex/builder.hpp"
#include "cexdex/calendar.hpp"
#include "cexdex/charts.hpp"
#include "cexdex/detect.hpp"
#include "cexdex/errors.hpp"
#include "cexdex/estimate.hpp"
#include "cexdex/horizon.hpp"
#include "cexdex/ingest.hpp"
#include "cexdex/input_writer.hpp"
#include "cexdex/market.hpp"
#include "cexdex/markout.hpp"
#include "cexdex/stage_io.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <set>
#include <sstream>

namespace cexdex::pipeline {

namespace fs = std::filesystem;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Detect: return "detect";
    case Stage::Markout: return "markout";
    case Stage::Horizon: return "horizon";
    case Stage::Estimate: return "estimate";
    case Stage::Market: return "market";
    case Stage::Builder: return "builder";
  }
  return "detect";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : kAllStages) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

DependencyError::DependencyError(std::string file, std::string_view needed_by, std::string_view produced_by)
    : std::runtime_error("stage '" + std::string(needed_by) + "' needs " + file + "; run the '" +
                         std::string(produced_by) + "' stage first"),
      file_(std::move(file)) {}

fs::path resolve_input(const fs::path& dir, std::string_view name) {
  fs::path csv = dir / (std::string(name) + ".csv");
  if (fs::exists(csv)) return csv;
  fs::path jsonl = dir / (std::string(name) + ".jsonl");
  if (fs::exists(jsonl)) return jsonl;
  throw IoError(csv, "missing input file " + csv.filename().string());
}

const std::vector<std::string>& output_files() {
  static const std::vector<std::string> files{
      "detections.csv", "verdicts.csv",  "markouts.csv",    "profiles.csv",  "median_curves.csv",
      "economics.csv",  "summary.csv",   "ev_series.csv",   "integration.csv", "exclusivity.csv",
      "market.csv",     "correlations.csv", "builder_blocks.csv", "builder_summary.csv"};
  return files;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(digits[md[i] >> 4]);
    out.push_back(digits[md[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

namespace {

using nlohmann::ordered_json;

// Output file -> producing stage, for dependency messages.
Stage producer_of(const std::string& file) {
  if (file == "detections.csv" || file == "verdicts.csv") return Stage::Detect;
  if (file == "markouts.csv") return Stage::Markout;
  if (file == "profiles.csv" || file == "median_curves.csv") return Stage::Horizon;
  if (file == "economics.csv" || file == "summary.csv" || file == "ev_series.csv") return Stage::Estimate;
  if (file == "builder_blocks.csv" || file == "builder_summary.csv") return Stage::Builder;
  return Stage::Market;
}

std::size_t count_rows(const std::string& bytes, bool has_header) {
  std::size_t lines = static_cast<std::size_t>(std::count(bytes.begin(), bytes.end(), '\n'));
  if (!bytes.empty() && bytes.back() != '\n') ++lines;
  return has_header && lines > 0 ? lines - 1 : lines;
}

template <typename F>
void write_csv(const fs::path& path, F&& writer) {
  std::ostringstream ss;
  writer(ss);
  ingest::write_text_file(path, ss.str());
}

std::string stats_status(const stats::StatsError& e) {
  switch (e.kind()) {
    case stats::StatsErrorKind::LengthMismatch: return "LengthMismatch";
    case stats::StatsErrorKind::TooShort: return "TooShort";
    case stats::StatsErrorKind::DegenerateRanks: return "DegenerateRanks";
    case stats::StatsErrorKind::SharesDontSumToOne: return "SharesDontSumToOne";
  }
  return "StatsError";
}

}  // namespace

struct Session::Impl {
  RunOptions opts;
  std::optional<PipelineConfig> cfg;
  std::string config_bytes;
  std::optional<fs::path> config_path;
  std::optional<TokenRegistry> tokens;
  std::optional<std::vector<RawTransaction>> transactions;
  std::optional<QuoteStore> quotes;
  std::optional<std::map<std::int64_t, BlockRecord>> blocks;
  std::optional<SearcherLabels> labels;
  std::set<std::string> inputs_read;

  const PipelineConfig& config() {
    if (!cfg) {
      fs::path implicit = opts.input_dir / "config.json";
      if (opts.config) {
        config_path = *opts.config;
      } else if (fs::exists(implicit)) {
        config_path = implicit;
      }
      if (config_path) {
        config_bytes = read_file(*config_path);
        cfg = ingest::parse_config(config_bytes, config_path->filename().string());
      } else {
        cfg = PipelineConfig{};
        config_bytes = ingest::config_json(*cfg);
      }
    }
    return *cfg;
  }

  fs::path input(std::string_view name) {
    fs::path p = resolve_input(opts.input_dir, name);
    inputs_read.insert(p.filename().string());
    return p;
  }

  const TokenRegistry& token_registry() {
    if (!tokens) tokens = ingest::load_tokens(input("tokens"));
    return *tokens;
  }
  const std::vector<RawTransaction>& txs() {
    if (!transactions) transactions = ingest::load_transactions(input("transactions"));
    return *transactions;
  }
  const QuoteStore& quote_store() {
    if (!quotes) quotes = ingest::load_quotes(input("quotes"));
    return *quotes;
  }
  const std::map<std::int64_t, BlockRecord>& block_records() {
    if (!blocks) blocks = ingest::load_block_records(input("blocks"));
    return *blocks;
  }
  const SearcherLabels& searcher_labels() {
    if (!labels) {
      fs::path p = opts.input_dir / "searchers.json";
      inputs_read.insert(p.filename().string());
      labels = ingest::load_searcher_labels(p);
    }
    return *labels;
  }

  fs::path out(const std::string& name) const { return opts.out_dir / name; }

  Table upstream(const std::string& file, Stage needed_by) {
    fs::path p = out(file);
    if (!fs::exists(p)) throw DependencyError(file, to_string(needed_by), to_string(producer_of(file)));
    return Table::read(p);
  }

  markout::MarkoutGrid grid() { return markout::MarkoutGrid::from_config(config()); }

  void prepare_out_dir() {
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) throw IoError(opts.out_dir, ec.message());
    if (opts.charts) {
      fs::create_directories(opts.out_dir / "charts", ec);
      if (ec) throw IoError(opts.out_dir / "charts", ec.message());
    }
  }

  void chart(const std::string& name, const std::string& svg) {
    if (opts.charts) ingest::write_text_file(opts.out_dir / "charts" / name, svg);
  }

  // Upstream trades and curves must describe the same transactions.
  std::pair<std::vector<ArbTrade>, std::vector<markout::MarkoutCurve>> trades_and_curves(Stage s) {
    auto trades = io::parse_detections(upstream("detections.csv", s));
    auto curves = io::parse_markouts(upstream("markouts.csv", s), grid());
    bool aligned = trades.size() == curves.size();
    for (std::size_t i = 0; aligned && i < trades.size(); ++i) aligned = trades[i].tx_hash == curves[i].tx_hash;
    if (!aligned) {
      throw LoadError(LoadErrorKind::MalformedRow, "markouts.csv", 0,
                      "markouts.csv does not match detections.csv; rerun the markout stage");
    }
    return {std::move(trades), std::move(curves)};
  }

  void detect() {
    config();
    auto result = detect::detect_all(txs(), token_registry(), searcher_labels());
    write_csv(out("detections.csv"), [&](std::ostream& o) { io::write_detections(o, result.trades); });
    write_csv(out("verdicts.csv"), [&](std::ostream& o) { io::write_verdicts(o, result.verdicts); });
  }

  void markout() {
    const auto& cfg_ = config();
    auto trades = io::parse_detections(upstream("detections.csv", Stage::Markout));
    const auto g = grid();
    auto curves = markout::compute_markouts(trades, g, quote_store(), token_registry(), cfg_);
    write_csv(out("markouts.csv"), [&](std::ostream& o) { io::write_markouts(o, curves, g); });
  }

  void horizon() {
    const auto& cfg_ = config();
    auto [trades, curves] = trades_and_curves(Stage::Horizon);
    const auto g = grid();
    auto result = horizon::build_profiles(trades, curves, g, cfg_);
    write_csv(out("profiles.csv"), [&](std::ostream& o) { io::write_profiles(o, result.profiles); });
    write_csv(out("median_curves.csv"), [&](std::ostream& o) { io::write_median_curves(o, result.curves, g); });
    if (opts.charts) {
      for (std::size_t i = 0; i < result.curves.size(); ++i) {
        const auto& c = result.curves[i];
        chart("median_gr_" + std::to_string(i) + ".svg", charts::median_gr_chart(c, g, result.profiles[i].t_star_s));
      }
    }
  }

  void estimate() {
    const auto& cfg_ = config();
    auto [trades, curves] = trades_and_curves(Stage::Estimate);
    auto profiles = io::parse_profiles(upstream("profiles.csv", Stage::Estimate));
    const auto g = grid();
    auto economics = estimate::estimate_all(trades, curves, profiles, g, quote_store(), cfg_);
    auto summaries = estimate::summarize(trades, curves, economics);
    auto daily = estimate::cumulative_ev_series(economics, estimate::Bucketing::Daily);
    auto weekly = estimate::cumulative_ev_series(economics, estimate::Bucketing::Weekly);
    write_csv(out("economics.csv"), [&](std::ostream& o) { io::write_economics(o, economics); });
    write_csv(out("summary.csv"), [&](std::ostream& o) { io::write_summary(o, summaries); });
    write_csv(out("ev_series.csv"), [&](std::ostream& o) { io::write_ev_series(o, daily, weekly); });
    chart("cumulative_ev.svg", charts::cumulative_ev_chart(daily));
  }

  void market() {
    const auto& cfg_ = config();
    auto [trades, curves] = trades_and_curves(Stage::Market);
    auto profiles = io::parse_profiles(upstream("profiles.csv", Stage::Market));
    auto economics = io::parse_economics(upstream("economics.csv", Stage::Market));
    const auto& labels_ = searcher_labels();
    const auto& registry = token_registry();
    const auto& blocks_ = block_records();

    // Shares and integration use confirmed arbitrage only.
    std::vector<ArbTrade> arb;
    for (std::size_t i = 0; i < trades.size(); ++i) {
      if (!curves[i].excluded()) arb.push_back(trades[i]);
    }

    const auto matrix = market::integration_matrix(arb);
    const auto classes = market::classify_exclusivity(matrix, labels_, cfg_.exclusivity_threshold);
    std::map<std::string, std::vector<ArbTrade>> by_searcher;
    for (const auto& t : arb) by_searcher[t.searcher_label].push_back(t);
    std::map<std::string, market::MajorShare> mm;
    for (const auto& [label, ts] : by_searcher) mm[label] = market::major_major_share(ts, registry);

    write_csv(out("integration.csv"), [&](std::ostream& o) {
      CsvWriter w(o);
      w.row({"searcher_label", "builder_label", "volume_share"});
      for (const auto& [searcher, row] : matrix.rows) {
        for (const auto& b : matrix.builders) w.row({searcher, b, format_double(matrix.cell(searcher, b))});
      }
    });
    write_csv(out("exclusivity.csv"), [&](std::ostream& o) {
      CsvWriter w(o);
      w.row({"searcher_label", "class", "builder_label", "max_share", "major_major_count_share",
             "major_major_volume_share"});
      for (const auto& [searcher, e] : classes) {
        const auto& share = mm.at(searcher);
        w.row({searcher, market::to_string(e.kind), e.builder, format_double(e.max_share),
               format_double(share.count_fraction), format_double(share.volume_fraction)});
      }
    });

    std::int64_t first_day = 0, last_day = -1;
    for (const auto& t : arb) {
      const std::int64_t d = utc_day(t.slot_time_ms);
      if (last_day < first_day) {
        first_day = last_day = d;
      } else {
        first_day = std::min(first_day, d);
        last_day = std::max(last_day, d);
      }
    }
    const auto n_days = static_cast<std::size_t>(last_day - first_day + 1);

    std::vector<market::Observation> vol_obs, builder_obs, ev_obs;
    for (const auto& t : arb) {
      vol_obs.push_back({t.slot_time_ms, t.searcher_label, t.volume_usd});
      builder_obs.push_back(
          {t.slot_time_ms, t.builder_label.empty() ? std::string(market::kOtherBuilder) : t.builder_label,
           t.volume_usd});
    }
    for (const auto& e : economics) ev_obs.push_back({e.slot_time_ms, e.searcher_label, e.ev_usd});
    const auto vol_shares = market::daily_shares(vol_obs, first_day, n_days);
    const auto builder_shares = market::daily_shares(builder_obs, first_day, n_days);
    const auto ev_shares = market::daily_shares(ev_obs, first_day, n_days);

    write_csv(out("market.csv"), [&](std::ostream& o) {
      CsvWriter w(o);
      w.row({"date", "series", "label", "value"});
      auto emit = [&](const char* series, const market::DailyShares& s) {
        for (std::size_t d = 0; d < s.days(); ++d) {
          const std::string date = iso_date(s.first_day + static_cast<std::int64_t>(d));
          for (const auto& [label, share] : s.shares[d]) w.row({date, series, label, format_double(share)});
          if (s.hhi[d]) w.row({date, series, "HHI", format_double(*s.hhi[d])});
        }
      };
      emit("searcher_volume", vol_shares);
      emit("searcher_ev", ev_shares);
      emit("builder_volume", builder_shares);
    });
    chart("hhi_searcher_volume.svg", charts::hhi_chart("Searcher volume HHI", first_day, vol_shares.hhi));
    chart("hhi_builder_volume.svg", charts::hhi_chart("Builder volume HHI", first_day, builder_shares.hhi));
    chart("integration_heatmap.svg", charts::integration_heatmap(matrix));

    write_csv(out("correlations.csv"), [&](std::ostream& o) {
      CsvWriter w(o);
      w.row({"analysis", "searcher", "builder", "lag_days", "window_end", "rho", "n", "p_value", "status"});
      auto ok_row = [&](const std::string& analysis, const std::string& s, const std::string& b,
                        const stats::CorrelationResult& r, const std::string& window_end) {
        w.row({analysis, s, b, std::to_string(r.lag_days), window_end, format_double(r.rho), std::to_string(r.n),
               format_double(r.p_value), "ok"});
      };
      auto err_row = [&](const std::string& analysis, const std::string& s, const std::string& b, int lag,
                         const std::string& status) {
        w.row({analysis, s, b, std::to_string(lag), "", "", "", "", status});
      };

      for (const auto& [searcher, e] : classes) {
        if (e.kind == market::ExclusivityKind::Neutral) continue;
        std::vector<double> x(n_days, 0.0);
        for (std::size_t d = 0; d < n_days; ++d) {
          auto it = vol_shares.shares[d].find(searcher);
          if (it != vol_shares.shares[d].end()) x[d] = it->second;
        }
        const auto y = market::builder_block_share(blocks_, e.builder, first_day, n_days);
        for (int lag : {0, 1, 3, 7}) {
          const int lags[] = {lag};
          try {
            for (const auto& r : stats::lagged_correlation(x, y, lags)) {
              ok_row(lag == 0 ? "share_contemporaneous" : "share_lagged", searcher, e.builder, r, "");
            }
          } catch (const stats::StatsError& err) {
            err_row(lag == 0 ? "share_contemporaneous" : "share_lagged", searcher, e.builder, lag, stats_status(err));
          }
        }
        const auto window = static_cast<std::size_t>(cfg_.rolling_window_days);
        for (const auto& wc : stats::rolling_correlation(x, y, window)) {
          const std::string end = iso_date(first_day + static_cast<std::int64_t>(wc.end_index));
          if (wc.result) {
            ok_row("share_rolling", searcher, e.builder, *wc.result, end);
          } else {
            w.row({"share_rolling", searcher, e.builder, "0", end, "", "", "", "DegenerateRanks"});
          }
        }
      }

      try {
        const auto r = market::decline_vs_major_correlation(profiles, mm);
        ok_row("decline_vs_major_count", "", "", r[0], "");
        ok_row("decline_vs_major_volume", "", "", r[1], "");
      } catch (const stats::StatsError& err) {
        err_row("decline_vs_major_count", "", "", 0, stats_status(err));
        err_row("decline_vs_major_volume", "", "", 0, stats_status(err));
      }
    });
  }

  void build() {
    const auto& cfg_ = config();
    auto economics = io::parse_economics(upstream("economics.csv", Stage::Builder));
    const auto& blocks_ = block_records();
    const auto& labels_ = searcher_labels();
    auto result = builder::compute_block_economics(blocks_, economics, labels_, quote_store(), cfg_);
    auto summaries = builder::builder_summary(result.blocks, labels_);
    std::map<std::string, std::size_t> unpriced;
    for (auto n : result.unpriced_blocks) ++unpriced[blocks_.at(n).builder_label];
    std::vector<io::BuilderSummaryRow> rows;
    for (auto& s : summaries) {
      io::BuilderSummaryRow row{s, 0};
      if (auto it = unpriced.find(s.builder_label); it != unpriced.end()) {
        row.unpriced_blocks = it->second;
        unpriced.erase(it);
      }
      rows.push_back(std::move(row));
    }
    for (const auto& [label, n] : unpriced) {
      io::BuilderSummaryRow row;
      row.summary.builder_label = label;
      row.summary.integrated_searchers = labels_.integrated_searchers_of(label);
      row.unpriced_blocks = n;
      rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const io::BuilderSummaryRow& a, const io::BuilderSummaryRow& b) {
      return a.summary.builder_label < b.summary.builder_label;
    });
    write_csv(out("builder_blocks.csv"), [&](std::ostream& o) { io::write_builder_blocks(o, result.blocks); });
    write_csv(out("builder_summary.csv"), [&](std::ostream& o) { io::write_builder_summary(o, rows); });
  }

  void write_manifest() {
    config();
    ordered_json doc;
    doc["config"] = {{"source", config_path ? config_path->filename().string() : std::string("defaults")},
                     {"sha256", sha256_hex(config_bytes)}};
    ordered_json inputs = ordered_json::object();
    for (const auto& name : inputs_read) {
      fs::path p = opts.input_dir / name;
      const std::string bytes = read_file(p);
      ordered_json e{{"sha256", sha256_hex(bytes)}};
      if (p.extension() != ".json") e["rows"] = count_rows(bytes, p.extension() == ".csv");
      inputs[name] = e;
    }
    doc["inputs"] = inputs;
    ordered_json outputs = ordered_json::object();
    for (const auto& name : output_files()) {
      fs::path p = out(name);
      if (!fs::exists(p)) continue;
      const std::string bytes = read_file(p);
      outputs[name] = {{"sha256", sha256_hex(bytes)}, {"rows", count_rows(bytes, true)}};
    }
    fs::path chart_dir = opts.out_dir / "charts";
    if (fs::is_directory(chart_dir)) {
      std::vector<std::string> svgs;
      for (const auto& entry : fs::directory_iterator(chart_dir)) {
        if (entry.path().extension() == ".svg") svgs.push_back(entry.path().filename().string());
      }
      std::sort(svgs.begin(), svgs.end());
      for (const auto& name : svgs) outputs["charts/" + name] = {{"sha256", sha256_file(chart_dir / name)}};
    }
    doc["outputs"] = outputs;
    ingest::write_text_file(out("manifest.json"), doc.dump(2) + "\n");
  }

  void run(Stage s) {
    prepare_out_dir();
    switch (s) {
      case Stage::Detect: detect(); break;
      case Stage::Markout: markout(); break;
      case Stage::Horizon: horizon(); break;
      case Stage::Estimate: estimate(); break;
      case Stage::Market: market(); break;
      case Stage::Builder: build(); break;
    }
    write_manifest();
  }
};

Session::Session(RunOptions opts) : impl_(std::make_unique<Impl>()) { impl_->opts = std::move(opts); }

Session::~Session() = default;

const RunOptions& Session::options() const noexcept { return impl_->opts; }

const PipelineConfig& Session::config() { return impl_->config(); }

void Session::run(Stage stage) { impl_->run(stage); }

void Session::run_all() {
  for (Stage s : kAllStages) impl_->run(s);
}

}  // namespace cexdex::pipeline
