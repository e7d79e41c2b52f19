#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shredkit/distribution.hpp"
#include "shredkit/tokens.hpp"

namespace shredkit {

// Canonical expressive techniques, in report order.
inline constexpr std::array<const char*, 6> kTechniques = {"bend",    "vibrato", "hammer",
                                                           "slide",   "tapping", "palm_mute"};

// Pitch-class labels, index = MIDI pitch mod 12.
inline constexpr std::array<const char*, 12> kPitchClassNames = {"C",  "C#", "D",  "Eb", "E",  "F",
                                                                 "F#", "G",  "Ab", "A",  "Bb", "B"};

using PitchClassCounts = std::array<double, 12>;

enum class Mode { Major, Minor };

struct Scale {
  int root = 0;  // pitch class 0..11
  Mode mode = Mode::Major;
  bool operator==(const Scale&) const = default;
};

std::string to_string(const Scale& scale);

struct ScaleResult {
  double consistency = 0.0;
  Scale best_scale;
};

struct ArtistSummary {
  std::string artist;
  std::optional<long> avg_tempo;  // empty when the artist has no songs
  long num_songs = 0;
  long num_notes = 0;
  long num_fx = 0;
};

using CorpusSummary = std::vector<ArtistSummary>;

// Bins keyed by exact tick value, in ascending numeric order.
Distribution note_duration_distribution(const EventTimeline& timeline);

// Technique that an effect name counts toward, by prefix match.
std::optional<std::string> technique_for_effect(const std::string& effect);

// One count per nfx/bfx token whose effect name matches a canonical technique.
Distribution technique_distribution(const TokenStream& stream);

Distribution pitch_class_histogram(const EventTimeline& timeline);

PitchClassCounts to_pitch_class_counts(const Distribution& hist);

double pitch_class_entropy(const Distribution& hist);
double pitch_class_entropy(const PitchClassCounts& counts);

// Pitch-class membership of a major or natural-minor scale.
std::array<bool, 12> scale_mask(const Scale& scale);

ScaleResult scale_consistency(const Distribution& hist);
ScaleResult scale_consistency(const PitchClassCounts& counts);

// Per-artist rows in first-seen order, followed by any artists from
// `expected_artists` that had no songs (zero rows, tempo undefined).
CorpusSummary corpus_summary(const std::vector<std::pair<std::string, TokenStream>>& corpus,
                             const std::vector<std::string>& expected_artists = {});

}  // namespace shredkit
