#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "shredkit/corpus.hpp"
#include "shredkit/random.hpp"
#include "shredkit/tokens.hpp"

namespace shredkit {

// Onsets inside one 960-tick beat; an empty cell holds the previous note.
struct RhythmCell {
  std::vector<int> ticks;  // sums to kTicksPerQuarter unless empty
  double weight = 1.0;
};

struct TechniqueWeight {
  std::string effect;  // nfx text after the "nfx:" prefix
  double probability = 0.0;
};

// Style signature of one synthetic player.
struct SynthProfile {
  std::string artist;
  int downtune = 0;
  int tempo_min = 100;
  int tempo_max = 120;
  int root = 4;                 // pitch class
  std::vector<int> intervals;   // scale degrees above the root
  int low_midi = 52;            // sounding range of the lead line
  int high_midi = 79;
  int hand_position = 5;        // preferred fret
  std::vector<RhythmCell> rhythm;
  std::vector<TechniqueWeight> techniques;  // at most one per note
};

// Four players with distinct duration, technique, scale and tempo signatures.
std::vector<SynthProfile> default_profiles();

struct SynthOptions {
  int songs_per_artist = 20;
  int measures = 12;
  bool with_bass = true;
  bool with_drums = true;
  std::uint64_t seed = 7;
};

inline constexpr const char* kSynthLead = "distorted0";
inline constexpr const char* kSynthBass = "bass";

TokenStream synth_song(const SynthProfile& profile, const SynthOptions& options, Rng& rng);

struct SynthCorpus {
  std::vector<std::pair<std::string, TokenStream>> songs;  // relative path, stream
  std::vector<SoloAnnotation> annotations;                 // one per song
};

SynthCorpus synth_corpus(const SynthOptions& options = {},
                         const std::vector<SynthProfile>& profiles = default_profiles());

// Labels from the first path component, as ingest would assign them.
CorpusIndex to_corpus_index(const SynthCorpus& corpus);

// Writes <root>/<artist>/song_NN.tokens.txt and <root>/annotations.json.
void write_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& root);

}  // namespace shredkit
