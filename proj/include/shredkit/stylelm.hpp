#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shredkit/corpus.hpp"
#include "shredkit/random.hpp"
#include "shredkit/tokens.hpp"

namespace shredkit {

// Token string <-> id. Ids 0..2 are reserved for start, end and the unknown
// placeholder; the remaining tokens follow in lexicographic order.
class Vocab {
 public:
  static constexpr int kStart = 0;
  static constexpr int kEnd = 1;
  static constexpr int kUnknown = 2;
  static constexpr std::string_view kUnknownText = "<unk>";

  Vocab();
  static Vocab build(std::vector<std::string> tokens);

  int id(std::string_view token) const;  // kUnknown when absent
  bool contains(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const Token& parsed(int id) const { return parsed_.at(static_cast<std::size_t>(id)); }

  bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::vector<Token> parsed_;
  std::map<std::string, int, std::less<>> ids_;
};

struct ContextCounts {
  double total = 0.0;
  std::map<int, double> next;
  bool operator==(const ContextCounts&) const = default;
};

// Context (token ids, oldest first) -> continuation counts. The empty context
// holds unigram counts.
using NgramTable = std::map<std::vector<int>, ContextCounts>;

struct StyleLMConfig {
  int order = 4;
  double lambda = 0.7;
  double add_k = 0.01;
  double backoff = 0.4;
};

inline constexpr std::string_view kGlobalArtist = "global";

// Per-artist and global n-gram counts mixed as
// lambda * P_artist + (1 - lambda) * P_global. Each component is a
// renormalized stupid-backoff score over the vocabulary whose base level is an
// add-k unigram. Immutable once trained.
class StyleLM {
 public:
  using Sequence = std::pair<std::string, std::vector<std::string>>;  // artist, words

  static StyleLM train(const CorpusIndex& corpus, const StyleLMConfig& config = {});
  static StyleLM train_sequences(const std::vector<Sequence>& sequences,
                                 const StyleLMConfig& config = {});

  // Full next-token distribution over the vocabulary.
  std::vector<double> distribution(std::span<const int> context, std::string_view artist) const;
  double prob(std::span<const std::string> context, std::string_view token,
              std::string_view artist) const;

  const Vocab& vocab() const { return vocab_; }
  const StyleLMConfig& config() const { return config_; }
  const std::vector<std::string>& artists() const { return artists_; }
  bool has_artist(std::string_view artist) const;
  const NgramTable& global_table() const { return global_; }
  const NgramTable& artist_table(std::string_view artist) const;

  std::vector<int> encode(std::span<const std::string> words) const;

  nlohmann::json to_json() const;
  static StyleLM from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& file) const;
  static StyleLM load(const std::filesystem::path& file);

  bool operator==(const StyleLM& o) const;

 private:
  std::vector<double> component(const NgramTable& table, const std::vector<double>& unigram,
                                std::span<const int> context) const;
  void finalize();

  StyleLMConfig config_;
  Vocab vocab_;
  std::vector<std::string> artists_;
  NgramTable global_;
  std::map<std::string, NgramTable, std::less<>> per_artist_;
  std::vector<double> global_unigram_;
  std::map<std::string, std::vector<double>, std::less<>> artist_unigram_;
};

// Beat-level syntax state used to mask illegal continuations.
struct GrammarState {
  bool note_in_beat = false;

  void advance(const Token& t);
  static GrammarState after(std::span<const Token> body);
};

bool grammar_allows(const Token& t, const GrammarState& state);

struct SamplingParams {
  double temperature = 1.0;
  std::optional<int> top_k;
};

// Grammar-masked, temperature-scaled, optionally top-k truncated draw.
// Falls back to wait tokens if the mask removes everything.
int sample_next(const StyleLM& model, std::span<const int> context, std::string_view artist,
                const SamplingParams& params, const GrammarState& grammar, Rng& rng);

// The probabilities sample_next draws from (exposed for testing).
std::vector<double> sampling_distribution(const StyleLM& model, std::span<const int> context,
                                          std::string_view artist, const SamplingParams& params,
                                          const GrammarState& grammar);

enum class GenMode { Multi, Solo };
enum class PromptKind { Full, Empty };

std::string config_name(GenMode mode, PromptKind kind);  // "M-FP", "S-EP", ...
inline constexpr std::array<const char*, 4> kConfigNames = {"M-FP", "M-EP", "S-FP", "S-EP"};

inline constexpr int kSoloTokenBudget = 256;
inline constexpr int kMultiTokenBudget = 2048;

struct GenerationConfig {
  GenMode mode = GenMode::Multi;
  PromptKind prompt_kind = PromptKind::Full;
  std::optional<int> max_tokens;  // default by mode
  double temperature = 1.0;
  std::optional<int> top_k;
  std::uint64_t seed = 0;

  int budget() const {
    return max_tokens.value_or(mode == GenMode::Solo ? kSoloTokenBudget : kMultiTokenBudget);
  }
};

// Full: header, start and the first two measures. Empty: header, start, the
// first note with its nfx and the wait after it. Both carry the artist token.
TokenStream make_prompt(const TokenStream& song, PromptKind kind, const std::string& artist);

// Extends the prompt until end is sampled or the token budget is spent.
TokenStream generate(const StyleLM& model, const TokenStream& prompt, const std::string& artist,
                     const GenerationConfig& config);

}  // namespace shredkit
