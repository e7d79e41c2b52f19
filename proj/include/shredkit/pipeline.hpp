#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shredkit/classify.hpp"
#include "shredkit/corpus.hpp"
#include "shredkit/distribution.hpp"
#include "shredkit/musicology.hpp"
#include "shredkit/stats.hpp"
#include "shredkit/stylelm.hpp"

namespace shredkit {

// Pooled distributions over the lead-instrument view of each stream.
Distribution pooled_durations(const std::vector<const TokenStream*>& streams);
Distribution pooled_techniques(const std::vector<const TokenStream*>& streams);

struct SongFeatures {
  std::string path;
  std::string artist;
  std::size_t notes = 0;                // pitched lead notes
  std::optional<double> mean_duration;  // ticks
  std::optional<double> technique_rate; // technique tokens per note
  std::optional<double> pce;
  std::optional<double> sc;
  std::optional<Scale> best_scale;
};

SongFeatures song_features(const CorpusEntry& entry);

struct KWOutcome {
  std::string feature;
  std::optional<KWResult> result;
  std::string skipped;  // reason when result is empty
  std::vector<std::size_t> group_sizes;
};

// Song-level tests on mean duration, technique rate, PCE and SC.
std::vector<KWOutcome> song_level_kruskal_wallis(const std::vector<SongFeatures>& songs,
                                                 const std::vector<std::string>& artists);

struct KldRow {
  std::string artist;
  std::string configuration;
  std::vector<double> values;  // aligned with KldMatrix::columns
  std::size_t best = 0;        // index of the minimum
};

struct KldMatrix {
  std::vector<std::string> columns;
  std::vector<KldRow> rows;

  std::size_t diagonal_hits() const;  // rows whose minimum is the conditioning artist
  std::string to_csv() const;
};

using DistributionTable = std::map<std::pair<std::string, std::string>, Distribution>;

// Rows ordered by column artist order then M-FP, M-EP, S-FP, S-EP.
// Cell = kld(groundtruth[column], generated[row]).
KldMatrix kld_table(const std::map<std::string, Distribution>& groundtruth,
                    const DistributionTable& generated, double epsilon = kDefaultKldEpsilon);

// Streams the model trains on: unchanged for multi mode, lead views for solo mode.
CorpusIndex training_view(const CorpusIndex& corpus, GenMode mode);

// One entry per annotated section that extracts cleanly; failures are
// reported as (song path, reason).
CorpusIndex solo_corpus(const CorpusIndex& corpus, const std::vector<SoloAnnotation>& annotations,
                        std::vector<SkippedFile>* failures = nullptr);

struct SamplingKnobs {
  double temperature = 1.0;
  std::optional<int> top_k;
  std::optional<int> max_tokens;
};

// n generations per artist under one configuration. Generation i for an
// artist is prompted by that artist's i-th usable song (cyclically) and seeded
// by derive_seed(seed, "<artist>/<config>", i).
std::map<std::string, std::vector<TokenStream>> generate_for_config(
    const StyleLM& model, const CorpusIndex& prompt_source, GenMode mode, PromptKind prompt, int n,
    std::uint64_t seed, const SamplingKnobs& knobs = {});

nlohmann::json kw_to_json(const KWResult& r);

// "%.12g"-style formatting shared by every CSV writer.
std::string format_number(double x);

}  // namespace shredkit
