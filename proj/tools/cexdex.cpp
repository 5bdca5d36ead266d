// cexdex: command-line front end for the pipeline stages and the synthetic
// scenario generator.

#include "cexdex/errors.hpp"
#include "cexdex/ingest.hpp"
#include "cexdex/input_writer.hpp"
#include "cexdex/pipeline.hpp"
#include "cexdex/stage_io.hpp"
#include "cexdex/stats.hpp"
#include "cexdex/synth.hpp"
#include "cexdex/table.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <omp.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace cexdex;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kIo = 2;

int report(int code, const std::string& kind, const std::string& message, const std::string& file = "") {
  nlohmann::ordered_json err{{"error", kind}, {"message", message}};
  if (!file.empty()) err["file"] = file;
  std::cerr << err.dump() << "\n";
  return code;
}

struct Flags {
  std::string config;
  std::string input_dir = ".";
  std::string out_dir = "out";
  int threads = 0;
  bool charts = false;
};

pipeline::RunOptions run_options(const Flags& f) {
  pipeline::RunOptions opts;
  opts.input_dir = f.input_dir;
  opts.out_dir = f.out_dir;
  if (!f.config.empty()) opts.config = fs::path(f.config);
  opts.charts = f.charts;
  return opts;
}

void run_synth(const Flags& f) {
  synth::SynthConfig cfg;
  if (!f.config.empty()) cfg = synth::load_synth_config(f.config);
  const auto scenario = synth::generate(cfg);
  synth::write_scenario(scenario, f.out_dir);
}

void run_score(const Flags& f) {
  const auto truth = synth::load_ground_truth(fs::path(f.input_dir) / "ground_truth.json");
  const fs::path out(f.out_dir);
  auto need = [&](const char* name) {
    fs::path p = out / name;
    if (!fs::exists(p)) throw synth::MissingOutputs(std::string(name) + " not found in " + out.string());
    return Table::read(p);
  };
  const auto profiles = io::parse_profiles(need("profiles.csv"));
  const auto economics = io::parse_economics(need("economics.csv"));
  const auto blocks = io::parse_builder_blocks(need("builder_blocks.csv"));
  const auto report = synth::score(truth, profiles, economics, blocks);
  ingest::write_text_file(out / "recovery.json", synth::recovery_report_json(report));
}

int dispatch(const std::string& command, const Flags& f) {
  try {
    if (f.threads > 0) omp_set_num_threads(f.threads);
    if (command == "synth") {
      run_synth(f);
    } else if (command == "score") {
      run_score(f);
    } else {
      pipeline::Session session(run_options(f));
      if (command == "all") {
        session.run_all();
      } else {
        session.run(*pipeline::parse_stage(command));
      }
    }
    return kOk;
  } catch (const IoError& e) {
    return report(kIo, "IoError", e.what(), e.path().string());
  } catch (const LoadError& e) {
    return report(kValidation, std::string(to_string(e.kind())), e.what(), e.source());
  } catch (const pipeline::DependencyError& e) {
    return report(kValidation, "DependencyError", e.what(), e.file());
  } catch (const synth::MissingOutputs& e) {
    return report(kValidation, "MissingOutputs", e.what());
  } catch (const stats::StatsError& e) {
    return report(kValidation, "StatsError", e.what());
  } catch (const std::exception& e) {
    return report(kValidation, "ValidationError", e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CEX-DEX arbitrage analysis pipeline"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;

  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "config JSON file");
    sub->add_option("--input-dir", flags.input_dir, "directory with input files");
    sub->add_option("--out-dir", flags.out_dir, "output directory");
    sub->add_option("--threads", flags.threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    if (name != "synth" && name != "score") sub->add_flag("--charts", flags.charts, "also write SVG charts");
    sub->callback([&chosen, name] { chosen = name; });
  };
  add("detect", "detect CEX-DEX arbitrage transactions");
  add("markout", "markout revenue and gross return curves");
  add("horizon", "per-searcher optimal horizon and decay pattern");
  add("estimate", "per-trade extracted value and PnL");
  add("market", "integration, concentration and correlations");
  add("builder", "builder profit with refund correction");
  add("all", "run every stage in order");
  add("synth", "generate a synthetic scenario with ground truth");
  add("score", "compare pipeline outputs to synthetic ground truth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kValidation, "UsageError", e.what());
  }
  return dispatch(chosen, flags);
}
