#include "shredkit/musicology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shredkit/error.hpp"

namespace shredkit {

std::string to_string(const Scale& scale) {
  return std::string(kPitchClassNames[static_cast<std::size_t>(scale.root)]) +
         (scale.mode == Mode::Major ? " major" : " minor");
}

Distribution note_duration_distribution(const EventTimeline& timeline) {
  Distribution d;
  for (const auto& e : timeline.events) {
    if (e.pitched()) d.add(std::to_string(e.duration_ticks));
  }
  if (d.empty()) throw Error(ErrorCode::EmptyTimeline, "no pitched events to measure");
  d.sort_numeric();
  return d;
}

std::optional<std::string> technique_for_effect(const std::string& effect) {
  static const std::array<std::pair<const char*, const char*>, 6> prefixes = {{
      {"bend", "bend"},
      {"vibrato", "vibrato"},
      {"hammer", "hammer"},
      {"slide", "slide"},
      {"tap", "tapping"},
      {"palm_mute", "palm_mute"},
  }};
  for (const auto& [prefix, technique] : prefixes) {
    if (effect.starts_with(prefix)) return std::string(technique);
  }
  return std::nullopt;
}

Distribution technique_distribution(const TokenStream& stream) {
  Distribution d(std::vector<std::string>(kTechniques.begin(), kTechniques.end()));
  for (const auto& t : stream.body) {
    const std::string* effect = nullptr;
    if (auto* n = std::get_if<tok::NoteEffect>(&t)) effect = &n->effect;
    if (auto* b = std::get_if<tok::BeatEffect>(&t)) effect = &b->effect;
    if (!effect) continue;
    if (auto tech = technique_for_effect(*effect)) d.add(*tech);
  }
  return d;
}

Distribution pitch_class_histogram(const EventTimeline& timeline) {
  Distribution d(std::vector<std::string>(kPitchClassNames.begin(), kPitchClassNames.end()));
  std::size_t n = 0;
  for (const auto& e : timeline.events) {
    if (!e.pitched()) continue;
    d.add(kPitchClassNames[static_cast<std::size_t>(*e.midi_pitch % 12)]);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::NoPitchedEvents, "timeline has no pitched events");
  return d;
}

PitchClassCounts to_pitch_class_counts(const Distribution& hist) {
  PitchClassCounts counts{};
  for (const auto& b : hist.bins()) {
    auto it = std::find(kPitchClassNames.begin(), kPitchClassNames.end(), b.label);
    if (it == kPitchClassNames.end()) {
      throw std::invalid_argument("not a pitch-class label: " + b.label);
    }
    counts[static_cast<std::size_t>(it - kPitchClassNames.begin())] += b.count;
  }
  return counts;
}

double pitch_class_entropy(const PitchClassCounts& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyHistogram, "pitch-class histogram is empty");
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h > 0.0 ? h : 0.0;
}

double pitch_class_entropy(const Distribution& hist) {
  return pitch_class_entropy(to_pitch_class_counts(hist));
}

std::array<bool, 12> scale_mask(const Scale& scale) {
  static constexpr std::array<int, 7> major = {0, 2, 4, 5, 7, 9, 11};
  static constexpr std::array<int, 7> minor = {0, 2, 3, 5, 7, 8, 10};
  const auto& steps = scale.mode == Mode::Major ? major : minor;
  std::array<bool, 12> mask{};
  for (int s : steps) mask[static_cast<std::size_t>((scale.root + s) % 12)] = true;
  return mask;
}

ScaleResult scale_consistency(const PitchClassCounts& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyHistogram, "pitch-class histogram is empty");
  ScaleResult best{-1.0, {}};
  for (int root = 0; root < 12; ++root) {
    for (Mode mode : {Mode::Major, Mode::Minor}) {
      const Scale scale{root, mode};
      const auto mask = scale_mask(scale);
      double in = 0.0;
      for (std::size_t pc = 0; pc < 12; ++pc) {
        if (mask[pc]) in += counts[pc];
      }
      const double rate = in / total;
      if (rate > best.consistency) best = {rate, scale};
    }
  }
  return best;
}

ScaleResult scale_consistency(const Distribution& hist) {
  return scale_consistency(to_pitch_class_counts(hist));
}

CorpusSummary corpus_summary(const std::vector<std::pair<std::string, TokenStream>>& corpus,
                             const std::vector<std::string>& expected_artists) {
  struct Acc {
    double tempo_sum = 0.0;
    long songs = 0, notes = 0, fx = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  for (const auto& [artist, stream] : corpus) {
    if (!acc.contains(artist)) order.push_back(artist);
    auto& a = acc[artist];
    a.tempo_sum += stream.header.tempo_or_default();
    ++a.songs;
    for (const auto& t : stream.body) {
      if (is<tok::Note>(t)) ++a.notes;
      if (is_effect(t)) ++a.fx;
    }
  }
  for (const auto& artist : expected_artists) {
    if (!acc.contains(artist)) {
      order.push_back(artist);
      acc[artist];
    }
  }

  CorpusSummary rows;
  for (const auto& artist : order) {
    const auto& a = acc[artist];
    ArtistSummary row{artist, std::nullopt, a.songs, a.notes, a.fx};
    if (a.songs > 0) row.avg_tempo = std::lround(a.tempo_sum / static_cast<double>(a.songs));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace shredkit
