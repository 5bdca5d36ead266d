#pragma once

#include "cexdex/types.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Stage orchestration. Every stage reads its inputs from the input directory
// and its upstream results from CSVs in the output directory, writes its own
// CSVs, then refreshes manifest.json.
namespace cexdex::pipeline {

enum class Stage { Detect, Markout, Horizon, Estimate, Market, Builder };

inline constexpr Stage kAllStages[] = {Stage::Detect, Stage::Markout, Stage::Horizon,
                                       Stage::Estimate, Stage::Market, Stage::Builder};

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

/// An upstream stage output is missing from the output directory.
class DependencyError : public std::runtime_error {
 public:
  DependencyError(std::string file, std::string_view needed_by, std::string_view produced_by);
  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

struct RunOptions {
  std::filesystem::path input_dir = ".";
  std::filesystem::path out_dir = "out";
  /// Defaults to <input_dir>/config.json when present, else built-in defaults.
  std::optional<std::filesystem::path> config;
  bool charts = false;
};

/// Lazily loaded inputs shared by the stages of one run.
class Session {
 public:
  explicit Session(RunOptions opts);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const RunOptions& options() const noexcept;
  const PipelineConfig& config();

  void run(Stage stage);
  void run_all();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// "<name>.csv" or "<name>.jsonl" inside `dir`; throws IoError naming the
/// CSV file when neither exists.
std::filesystem::path resolve_input(const std::filesystem::path& dir, std::string_view name);

/// Output file names in the order stages produce them.
const std::vector<std::string>& output_files();

/// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace cexdex::pipeline
