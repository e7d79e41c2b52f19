#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shredkit/stylelm.hpp"

namespace shredkit {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();  // every default resolved
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::string version = SHREDKIT_VERSION;
  std::string timestamp;  // UTC, ISO 8601

  nlohmann::json to_json() const;
};

// Writes <dir>/manifest.json, stamping the current time.
void write_manifest(const std::filesystem::path& dir, RunManifest manifest);

// Diagnostics go to `err` as "path:token_index: message".
int cmd_validate(const std::vector<std::filesystem::path>& files, std::ostream& err);

struct AnalyzeOptions {
  std::filesystem::path corpus;
  std::filesystem::path out;
  std::optional<std::filesystem::path> manifest;  // path -> label overrides
  bool emit_gnuplot = false;
};
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& err);

struct CompareOptions {
  std::filesystem::path groundtruth;
  std::filesystem::path generated;  // contains M-FP, M-EP, S-FP, S-EP
  std::filesystem::path out;
  double epsilon = 1e-6;
  bool emit_gnuplot = false;
};
int cmd_compare(const CompareOptions& opt, std::ostream& err);

struct ExtractOptions {
  std::filesystem::path corpus;
  std::filesystem::path annotations;
  std::filesystem::path out;
};
int cmd_extract_solos(const ExtractOptions& opt, std::ostream& err);

struct TrainGenerateOptions {
  std::filesystem::path corpus;
  std::filesystem::path out;  // generations land in <out>/<CONFIG>/<artist>/
  GenMode mode = GenMode::Multi;
  PromptKind prompt = PromptKind::Full;
  int n = 20;
  std::uint64_t seed = 0;
  StyleLMConfig lm;
  double temperature = 1.0;
  std::optional<int> top_k;
  std::optional<int> max_tokens;
};
int cmd_train_generate(const TrainGenerateOptions& opt, std::ostream& err);

struct ClassifyOptions {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> eval;  // generated root or labelled corpus
  std::filesystem::path out;
  double alpha = 1.0;
  std::uint64_t seed = 0;
};
int cmd_classify(const ClassifyOptions& opt, std::ostream& err);

struct SynthCommandOptions {
  std::filesystem::path out;
  int songs_per_artist = 20;
  int measures = 12;
  std::uint64_t seed = 7;
};
int cmd_synth(const SynthCommandOptions& opt, std::ostream& err);

// analyze, extract-solos, train-generate for all four configurations,
// compare and classify, under <out>/{analysis,solos,generated,compare,classify}.
struct ReportOptions {
  std::filesystem::path corpus;
  std::filesystem::path annotations;
  std::filesystem::path out;
  int n = 20;
  std::uint64_t seed = 0;
  StyleLMConfig lm;
  double temperature = 1.0;
  std::optional<int> top_k;
  double alpha = 1.0;
  double epsilon = 1e-6;
  bool emit_gnuplot = false;
};
int cmd_report(const ReportOptions& opt, std::ostream& err);

}  // namespace shredkit
