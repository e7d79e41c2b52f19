#include "shredkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "shredkit/error.hpp"

namespace shredkit {

std::vector<SynthProfile> default_profiles() {
  std::vector<SynthProfile> p(4);

  p[0].artist = "david_gilmour";
  p[0].tempo_min = 62;
  p[0].tempo_max = 84;
  p[0].root = 11;
  p[0].intervals = {0, 2, 3, 5, 7, 8, 10};
  p[0].low_midi = 59;
  p[0].high_midi = 83;
  p[0].hand_position = 7;
  p[0].rhythm = {{{960}, 4}, {{}, 3}, {{480, 480}, 3}, {{720, 240}, 1}};
  p[0].techniques = {{"bend:type1:pos0:val100", 0.30}, {"vibrato", 0.25}, {"slide:1", 0.05}};

  p[1].artist = "jimi_hendrix";
  p[1].downtune = -1;
  p[1].tempo_min = 88;
  p[1].tempo_max = 116;
  p[1].root = 3;
  p[1].intervals = {0, 3, 5, 7, 10};
  p[1].low_midi = 51;
  p[1].high_midi = 79;
  p[1].hand_position = 6;
  p[1].rhythm = {{{480, 480}, 4},
                 {{240, 240, 480}, 2},
                 {{720, 240}, 2},
                 {{240, 240, 240, 240}, 2},
                 {{960}, 1}};
  p[1].techniques = {
      {"bend:type1:pos0:val50", 0.20}, {"vibrato", 0.12}, {"hammer", 0.10}, {"slide:1", 0.08}};

  p[2].artist = "steve_vai";
  p[2].tempo_min = 112;
  p[2].tempo_max = 138;
  p[2].root = 4;
  p[2].intervals = {0, 2, 4, 6, 7, 9, 11};
  p[2].low_midi = 52;
  p[2].high_midi = 86;
  p[2].hand_position = 12;
  p[2].rhythm = {{{240, 240, 240, 240}, 4},
                 {{120, 120, 120, 120, 120, 120, 120, 120}, 3},
                 {{480, 240, 240}, 2},
                 {{320, 320, 320}, 1}};
  p[2].techniques = {{"tapping", 0.22}, {"vibrato", 0.10}, {"hammer", 0.10}, {"bend:type1:pos0:val100", 0.06}};

  p[3].artist = "yngwie_malmsteen";
  p[3].downtune = -1;
  p[3].tempo_min = 140;
  p[3].tempo_max = 176;
  p[3].root = 9;
  p[3].intervals = {0, 2, 3, 5, 7, 8, 11};
  p[3].low_midi = 52;
  p[3].high_midi = 86;
  p[3].hand_position = 10;
  p[3].rhythm = {{{160, 160, 160, 160, 160, 160}, 5},
                 {{240, 240, 240, 240}, 3},
                 {{120, 120, 120, 120, 120, 120, 120, 120}, 2}};
  p[3].techniques = {{"hammer", 0.18}, {"slide:1", 0.08}, {"palm_mute", 0.06}, {"vibrato", 0.05}};
  return p;
}

namespace {

std::size_t weighted_choice(Rng& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

// Scale pitches inside [low, high], ascending.
std::vector<int> scale_pitches(const SynthProfile& p) {
  std::vector<int> out;
  for (int m = p.low_midi; m <= p.high_midi; ++m) {
    const int pc = ((m - p.root) % 12 + 12) % 12;
    if (std::find(p.intervals.begin(), p.intervals.end(), pc) != p.intervals.end()) out.push_back(m);
  }
  if (out.empty()) throw std::invalid_argument("profile " + p.artist + " has an empty range");
  return out;
}

// String/fret for a sounding pitch closest to the preferred fret.
tok::Note fingering(const std::string& instrument, int midi, const Tuning& tuning, int position) {
  std::optional<tok::Note> best;
  int best_cost = 0;
  for (const auto& [string_num, open] : tuning.open_string_midi) {
    if (string_num > (instrument == kSynthBass ? 4 : 6)) continue;
    const int fret = midi - (open + tuning.downtune_offset);
    if (fret < 0 || fret > 24) continue;
    const int cost = std::abs(fret - position);
    if (!best || cost < best_cost) {
      best = tok::Note{instrument, string_num, fret};
      best_cost = cost;
    }
  }
  if (!best) throw std::invalid_argument("pitch " + std::to_string(midi) + " not playable");
  return *best;
}

struct Onset {
  int tick = 0;
  int lane = 0;  // guitar, bass, drums
  std::vector<Token> tokens;
};

}  // namespace

TokenStream synth_song(const SynthProfile& profile, const SynthOptions& options, Rng& rng) {
  TokenStream s;
  s.header.artist = profile.artist;
  s.header.downtune = profile.downtune;
  s.header.tempo = profile.tempo_min +
                   static_cast<int>(uniform_below(
                       rng, static_cast<std::uint64_t>(profile.tempo_max - profile.tempo_min + 1)));
  s.has_start = true;
  s.has_end = true;

  const Tuning guitar = Tuning::standard_guitar(profile.downtune);
  const Tuning bass = Tuning::standard_bass(profile.downtune);
  const auto pitches = scale_pitches(profile);
  std::vector<double> rhythm_w;
  for (const auto& c : profile.rhythm) rhythm_w.push_back(c.weight);
  std::vector<double> step_w = {1, 3, 2, 3, 1};  // melodic steps -2..2

  std::size_t pos = pitches.size() / 2;
  constexpr int kBeats = 4;
  constexpr int kMeasureTicks = kBeats * kTicksPerQuarter;
  int bass_midi = 28 + ((profile.root - 28) % 12 + 12) % 12 + 12;

  for (int m = 0; m < options.measures; ++m) {
    std::vector<Onset> onsets;
    for (int b = 0; b < kBeats; ++b) {
      const int beat_start = b * kTicksPerQuarter;
      const auto& cell = profile.rhythm[weighted_choice(rng, rhythm_w)];
      int t = beat_start;
      for (int len : cell.ticks) {
        const auto step = static_cast<long>(weighted_choice(rng, step_w)) - 2;
        pos = static_cast<std::size_t>(
            std::clamp<long>(static_cast<long>(pos) + step, 0, static_cast<long>(pitches.size()) - 1));
        Onset o{t, 0, {fingering(kSynthLead, pitches[pos], guitar, profile.hand_position)}};
        double u = uniform01(rng);
        for (const auto& tw : profile.techniques) {
          if (u < tw.probability) {
            tok::NoteEffect fx;
            const auto colon = tw.effect.find(':');
            fx.effect = tw.effect.substr(0, colon);
            for (auto rest = colon; rest != std::string::npos;) {
              const auto next = tw.effect.find(':', rest + 1);
              fx.params.push_back(tw.effect.substr(rest + 1, next == std::string::npos ? next : next - rest - 1));
              rest = next;
            }
            o.tokens.emplace_back(std::move(fx));
            break;
          }
          u -= tw.probability;
        }
        onsets.push_back(std::move(o));
        t += len;
      }
      if (options.with_bass) {
        if (b == 0) bass_midi = 28 + ((profile.root - 28) % 12 + 12) % 12 + (m % 2 ? 7 : 12);
        onsets.push_back({beat_start, 1, {fingering(kSynthBass, bass_midi, bass, 3)}});
      }
      if (options.with_drums) {
        onsets.push_back({beat_start, 2, {tok::Drums{b % 2 ? "38" : "36"}}});
      }
    }
    std::stable_sort(onsets.begin(), onsets.end(), [](const Onset& x, const Onset& y) {
      return std::pair(x.tick, x.lane) < std::pair(y.tick, y.lane);
    });

    s.body.emplace_back(tok::NewMeasure{});
    if (onsets.empty() || onsets.front().tick > 0) {
      const int first = onsets.empty() ? kMeasureTicks : onsets.front().tick;
      s.body.emplace_back(tok::Wait{first});
    }
    for (std::size_t i = 0; i < onsets.size(); ++i) {
      for (auto& tk : onsets[i].tokens) s.body.push_back(std::move(tk));
      const int next = i + 1 < onsets.size() ? onsets[i + 1].tick : kMeasureTicks;
      if (next > onsets[i].tick) s.body.emplace_back(tok::Wait{next - onsets[i].tick});
    }
  }
  return s;
}

SynthCorpus synth_corpus(const SynthOptions& options, const std::vector<SynthProfile>& profiles) {
  if (options.measures < 4) throw std::invalid_argument("synthetic songs need at least 4 measures");
  SynthCorpus out;
  for (const auto& p : profiles) {
    for (int i = 0; i < options.songs_per_artist; ++i) {
      Rng rng(derive_seed(options.seed, p.artist, static_cast<std::uint64_t>(i)));
      char name[32];
      std::snprintf(name, sizeof name, "song_%02d.tokens.txt", i + 1);
      const std::string path = p.artist + "/" + name;
      out.songs.emplace_back(path, synth_song(p, options, rng));

      SoloAnnotation a;
      a.song_path = path;
      a.target_instrument = kSynthLead;
      const int last = options.measures;
      if (i % 3 == 2) {
        a.sections = {{2, last / 2 - 1}, {last / 2 + 1, last - 1}};
      } else {
        const int start = 2 + i % 3;
        a.sections = {{start, std::min(last, start + last / 2)}};
      }
      out.annotations.push_back(std::move(a));
    }
  }
  return out;
}

CorpusIndex to_corpus_index(const SynthCorpus& corpus) {
  CorpusIndex idx;
  for (const auto& [path, stream] : corpus.songs) {
    idx.entries.push_back({path, path.substr(0, path.find('/')), stream, {}});
  }
  std::sort(idx.entries.begin(), idx.entries.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.path < b.path; });
  return idx;
}

void write_synth_corpus(const SynthCorpus& corpus, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  for (const auto& [path, stream] : corpus.songs) {
    const fs::path file = root / path;
    fs::create_directories(file.parent_path());
    std::ofstream os(file, std::ios::binary);
    os << serialize(stream) << '\n';
    if (!os) throw std::runtime_error("cannot write " + file.string());
  }
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : corpus.annotations) {
    nlohmann::json sections = nlohmann::json::array();
    for (const auto& s : a.sections) {
      sections.push_back({{"start_measure", s.start_measure}, {"end_measure", s.end_measure}});
    }
    j.push_back({{"song_path", a.song_path},
                 {"target_instrument", a.target_instrument},
                 {"sections", sections}});
  }
  fs::create_directories(root);
  std::ofstream os(root / "annotations.json", std::ios::binary);
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("cannot write annotations");
}

}  // namespace shredkit
