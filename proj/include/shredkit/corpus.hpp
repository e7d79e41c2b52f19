#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shredkit/tokens.hpp"

namespace shredkit {

struct CorpusEntry {
  std::string path;  // relative to the corpus root, '/' separated
  std::string artist_label;
  TokenStream stream;
  std::vector<std::string> warnings;
};

struct SkippedFile {
  std::string path;
  std::string reason;
};

struct CorpusIndex {
  std::vector<CorpusEntry> entries;  // sorted by path
  std::vector<SkippedFile> skipped;

  std::vector<std::string> labels() const;  // sorted, unique
  std::size_t count(const std::string& label) const;
  std::vector<const CorpusEntry*> of_artist(const std::string& label) const;
  bool empty() const { return entries.empty(); }
};

// Relative path -> artist label overrides.
using Manifest = std::map<std::string, std::string>;

struct LabelRule {
  Manifest manifest;
};

Manifest load_manifest(const std::filesystem::path& file);

// Loads every *.tokens.txt below `root`. The label is the first path component
// under root unless the manifest names the file. Files that cannot be read,
// lack a start token or have no label are skipped with a reason.
// Throws EmptyCorpus when nothing was loaded.
CorpusIndex ingest(const std::filesystem::path& root, const LabelRule& rule = {});

// Sets or replaces the artist header. Throws InvalidArtistName for empty names
// or names containing whitespace or ':'.
TokenStream inject_artist_token(TokenStream stream, const std::string& artist);

struct MeasureSpan {
  std::size_t begin = 0;  // body index, inclusive
  std::size_t end = 0;    // body index, exclusive
};

// Measures delimited by new_measure tokens. A new_measure that opens the body
// (nothing timed before it) starts measure 1 rather than measure 2.
std::vector<MeasureSpan> measure_spans(const TokenStream& stream);

struct SoloSection {
  int start_measure = 1;  // 1-based
  int end_measure = 1;    // inclusive
};

struct SoloAnnotation {
  std::string song_path;
  std::vector<SoloSection> sections;
  std::string target_instrument;
};

std::vector<SoloAnnotation> parse_annotations(const std::string& json_text);
std::vector<SoloAnnotation> load_annotations(const std::filesystem::path& file);

// Keeps target notes with their attached effects plus structure tokens
// (new_measure, wait, tempo). Waits that become adjacent because tokens
// between them were removed are merged.
std::vector<Token> filter_instrument_tokens(std::span<const Token> tokens,
                                            const std::string& instrument);
TokenStream filter_instrument(const TokenStream& stream, const std::string& instrument);

// Pitched, non-bass instrument with the most notes (ties: lexicographic).
std::optional<std::string> lead_instrument(const TokenStream& stream);

// The stream restricted to its lead instrument; unchanged when it has none.
TokenStream lead_view(const TokenStream& stream);

TokenStream extract_section(const TokenStream& stream, const SoloSection& section,
                            const std::string& target_instrument);

// One stream per annotated section.
std::vector<TokenStream> extract_solo(const TokenStream& stream, const SoloAnnotation& annotation);

struct SplitRatios {
  double train = 0.55;
  double val = 0.20;
  double test = 0.25;
};

struct CorpusSplit {
  CorpusIndex train, val, test;
};

// Per-artist shuffled split with largest-remainder rounding of counts.
CorpusSplit split(const CorpusIndex& corpus, const SplitRatios& ratios, std::uint64_t seed);

// Counts assigned to each part for `n` items.
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios);

}  // namespace shredkit
